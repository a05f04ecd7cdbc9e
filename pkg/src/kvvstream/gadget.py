"""One basic gadget G^l = (S^l, T^l, E^l) over the hypercube.

The T side is all of [m]^n; the nested sequence T_0 > T_1 > ... > T_phases
is cut by the sampled directions J_k (each T_{k+1} keeps the labels whose
J_k-th coordinate falls in the low (1 - 1/(K-k)) fraction).  S_k is the
weight-residue subsample of T_k at rate 1/(K-k).  Edges of phase k run, per
line in a free direction j, between the line's S_k^j points and its
T_k \\ T_k^j points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hypercube as hc
from .hypercube import ConstraintSystem


@dataclass(frozen=True)
class GadgetSpec:
    """One gadget: its round index, layout slice and sampled J vector."""

    params: object
    layout: object
    ell: int
    J: tuple  # J[k] in free[ell][k], one entry per block (phases+1)

    def __post_init__(self):
        P = self.params.phases
        if len(self.J) != P + 1:
            raise ValueError(f"J must have {P + 1} entries, got {len(self.J)}")

    def j_violations(self):
        """J entries outside their free directions (deferred so verification
        can name the defect on tampered instance files)."""
        out = []
        for k, j in enumerate(self.J):
            if j not in self.layout.free[self.ell][k]:
                out.append(
                    f"J({self.ell},{k})={j} is not a free direction of its "
                    "block (extension/compression indices are reserved)")
        return out

    @property
    def phases(self):
        return self.params.phases

    def free(self, k):
        return self.layout.free[self.ell][k]


def low_cut(params, k):
    """Size of the low region kept by phase k: (1 - 1/(K-k)) * m."""
    lam = params.K - k
    assert params.m % lam == 0
    return params.m - params.m // lam


def residue_set(params, k):
    """S_k keeps weights with wt mod W in [0, W/(K-k))."""
    lam = params.K - k
    assert params.W % lam == 0
    return frozenset(range(params.W // lam))


def set_Tk(spec, k):
    if not 0 <= k <= spec.phases:
        raise IndexError(f"k={k} outside [0, phases]")
    p = spec.params
    return ConstraintSystem.make(
        {spec.J[s]: (0, low_cut(p, s)) for s in range(k)})


def set_Sk(spec, k):
    if not 0 <= k < spec.phases:
        raise IndexError(f"k={k} outside [0, phases)")
    tk = set_Tk(spec, k)
    return ConstraintSystem(intervals=tk.intervals,
                            residues=residue_set(spec.params, k))


def set_Tkj(spec, k, j):
    _check_direction(spec, k, j)
    return set_Tk(spec, k).restrict(j, 0, low_cut(spec.params, k))


def set_Skj(spec, k, j):
    _check_direction(spec, k, j)
    return set_Sk(spec, k).restrict(j, 0, low_cut(spec.params, k))


def set_terminal(spec):
    """The terminal subcube T_* = T_phases."""
    return set_Tk(spec, spec.phases)


def _check_direction(spec, k, j):
    if not 0 <= k < spec.phases:
        raise IndexError(f"k={k} outside [0, phases)")
    if j not in spec.layout.blocks[spec.ell][k]:
        raise IndexError(f"direction {j} outside block ({spec.ell},{k})")


def downset(spec, U, k):
    """DownSet_k(U): the S_k vertices whose label lies in U.

    U may be a ConstraintSystem or an explicit label array.  Returns the
    label array of the layer-k downset (the S_k tag is carried by k).
    """
    p = spec.params
    res = residue_set(p, k)
    tk = set_Tk(spec, k)
    if isinstance(U, ConstraintSystem):
        labels = hc.members(U, p)
    else:
        labels = np.asarray(U, dtype=np.int64)
    if labels.size == 0:
        return labels
    keep = np.ones(len(labels), dtype=bool)
    for c, ivs in tk.intervals:
        v = hc.coords_array(labels, c, p)
        ok = np.zeros(len(labels), dtype=bool)
        for lo, hi in ivs:
            ok |= (v >= lo) & (v < hi)
        keep &= ok
    w = hc.weights_array(labels, p) % p.W
    keep &= np.isin(w, np.fromiter(res, dtype=np.int64))
    return labels[keep]


def downset_all(spec, U):
    """DownSet(U) as a dict {k: label array}, layers kept distinct."""
    return {k: downset(spec, U, k) for k in range(spec.phases)}


@dataclass(frozen=True)
class GadgetEdge:
    """One edge of E_{k,j}: S-vertex (k, s_label) -- T-vertex t_label."""

    k: int
    j: int
    s_label: int
    t_label: int
    rep: int


def line_smembers(spec, k, j, rep):
    """S_k^j points on the line through rep, ascending by coordinate value."""
    p = spec.params
    b = p.bits_per_coord
    rest = hc.weight(rep, p)
    cut = low_cut(p, k)
    res = residue_set(p, k)
    return [rep + (v << (j * b)) for v in range(cut)
            if (rest + v) % p.W in res]


def line_tmembers(spec, k, j, rep):
    """T_k \\ T_k^j points on the line through rep, ascending."""
    p = spec.params
    b = p.bits_per_coord
    return [rep + (v << (j * b)) for v in range(low_cut(p, k), p.m)]


def edges(spec, k, j):
    """Iterate E_{k,j} in deterministic order: lines by ascending
    representative, S-major within each line.

    j must be a free direction; extension and compression indices carry no
    edges.
    """
    if j not in spec.free(k):
        raise IndexError(f"direction {j} is not free in block ({spec.ell},{k})")
    p = spec.params
    for line in hc.line_cover(j, set_Tk(spec, k), p):
        rep = line.rep
        svals = line_smembers(spec, k, j, rep)
        tvals = line_tmembers(spec, k, j, rep)
        for s in svals:
            for t in tvals:
                yield GadgetEdge(k=k, j=j, s_label=s, t_label=t, rep=rep)


def all_edges(spec):
    for k in range(spec.phases):
        for j in spec.free(k):
            yield from edges(spec, k, j)


def gadget_matching(spec):
    """Constructive near-perfect matching of S into T \\ T_*.

    Per phase k it pairs, on every line in direction J_k, the i-th smallest
    S_k^{J_k} point with the i-th smallest point outside T_k^{J_k}; the
    T endpoints then lie in T_k \\ T_{k+1}, which avoids T_* and keeps the
    per-phase matchings vertex-disjoint.
    """
    p = spec.params
    out = []
    for k in range(spec.phases):
        j = spec.J[k]
        for line in hc.line_cover(j, set_Tk(spec, k), p):
            rep = line.rep
            svals = line_smembers(spec, k, j, rep)
            tvals = line_tmembers(spec, k, j, rep)
            for s, t in zip(svals, tvals):
                out.append(GadgetEdge(k=k, j=j, s_label=s, t_label=t, rep=rep))
    return out


def matching_size(spec):
    """Size of the constructive matching from per-line counts (no edge walk)."""
    p = spec.params
    total = 0
    for k in range(spec.phases):
        lam = p.K - k
        n_lines = hc.count(set_Tk(spec, k), p) // p.m
        per_line_s = (p.m - p.m // lam) // lam
        per_line_t = p.m // lam
        total += n_lines * min(per_line_s, per_line_t)
    return total


def edge_count(spec, k, j):
    """|E_{k,j}| from the per-line factors, exact."""
    p = spec.params
    lam = p.K - k
    n_lines = hc.count(set_Tk(spec, k), p) // p.m
    per_line_s = (p.m - p.m // lam) // lam
    per_line_t = p.m // lam
    return n_lines * per_line_s * per_line_t
