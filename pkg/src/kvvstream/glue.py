"""Maps identifying consecutive gadgets: densify, permute, glue.

tau glues the arriving side S' of gadget l onto the terminal subcube T_* of
gadget l-1.  Per phase k it first densifies the weight-subsampled S'_k into
an interval-cut subcube using only the compression index q_k, then swaps the
coordinate groups I' = J'_{<k} + Ext_k + {q_k} and I = J + {r} with a
rank-order bijection M between the cut patterns D_k and A.  Everything is
deterministic so an instance is reproducible from (params, layout, J).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from . import hypercube as hc
from .gadget import low_cut

M_TABLE_CAP = 2 ** 20


@dataclass(frozen=True)
class DensifyingMap:
    """(lambda, r)-densifying map: rewrites coordinate r so the weight
    subsample at rate 1/lambda becomes the interval cut x_r/m in [0, 1/lambda).
    """

    lam: int
    r: int

    def __post_init__(self):
        if self.lam < 2:
            raise ValueError("densification needs an integer lambda >= 2")


def densify_value(val, lam, params):
    """Coordinate rewrite a*W + b*W/lam + c -> a*W/lam + c."""
    W = params.W
    beta = W // lam
    a, rem = divmod(int(val), W)
    c = rem % beta
    return a * beta + c


def densify(dmap, label, params):
    if params.W % dmap.lam:
        raise ValueError(f"lambda={dmap.lam} must divide W={params.W}")
    v = hc.coord_of(label, dmap.r, params)
    return hc.with_coord(label, dmap.r, densify_value(v, dmap.lam, params), params)


def densify_array(dmap, labels, params):
    b = params.bits_per_coord
    W = np.int64(params.W)
    beta = np.int64(params.W // dmap.lam)
    v = hc.coords_array(labels, dmap.r, params)
    new = (v // W) * beta + (v % W) % beta
    mask = np.int64(((1 << b) - 1)) << np.int64(dmap.r * b)
    return (labels & ~mask) | (new << np.int64(dmap.r * b))


def undensify_value(val, wt_rest, lam, params):
    """Unique preimage of the rewritten coordinate whose full weight lands in
    the residue window [0, W/lambda) mod W."""
    W = params.W
    beta = W // lam
    a, c = divmod(int(val), beta)
    q = ((wt_rest + c) % W) // beta
    b = (-q) % lam
    return a * W + b * beta + c


class _Radix:
    """Mixed-radix rank/unrank over a sorted coordinate tuple.

    Every coordinate's allowed values are the prefix [0, radix); ranks run
    lexicographically with the first (smallest) coordinate most significant.
    """

    def __init__(self, coords, radices):
        order = np.argsort(coords)
        self.coords = tuple(int(coords[i]) for i in order)
        self.radices = tuple(int(radices[i]) for i in order)
        self.size = 1
        for r in self.radices:
            self.size *= r
        w = []
        acc = 1
        for r in reversed(self.radices):
            w.append(acc)
            acc *= r
        self.weights = tuple(reversed(w))

    def rank(self, values):
        out = 0
        for v, r, w in zip(values, self.radices, self.weights):
            if not 0 <= v < r:
                raise ValueError(f"digit {v} outside radix {r}")
            out += v * w
        return out

    def unrank(self, rank):
        vals = []
        for r, w in zip(self.radices, self.weights):
            d, rank = divmod(rank, w)
            vals.append(d)
        return tuple(vals)

    def extract(self, label, params):
        return tuple(hc.coord_of(label, c, params) for c in self.coords)

    def extract_array(self, labels, params):
        return [hc.coords_array(labels, c, params) for c in self.coords]

    def rank_array(self, digit_cols):
        out = np.zeros_like(digit_cols[0])
        for col, w in zip(digit_cols, self.weights):
            out = out + col * np.int64(w)
        return out

    def unrank_array(self, ranks):
        cols = []
        rem = ranks.astype(np.int64)
        for w in self.weights:
            d, rem = np.divmod(rem, np.int64(w))
            cols.append(d)
        return cols

    def to_dict(self):
        return {"coords": list(self.coords), "radices": list(self.radices)}


class GlueTables:
    """All data of the glue map tau: S^ell -> T_*^{ell-1}.

    I indexes the previous gadget's special coordinates J + {r}; I'_k the
    current gadget's J'_{<k} + Ext_k + {q_k}.  The bijection M is the
    rank-order map from the disjoint union of the D_k onto A; eta_k is the
    order-preserving bijection between sorted I and sorted I'_k.
    """

    def __init__(self, params, layout, ell, J_prev, J_cur):
        if ell < 1:
            raise ValueError("glue tables exist for rounds ell >= 1")
        self.params = params
        self.layout = layout
        self.ell = ell
        self.J_prev = tuple(J_prev)
        self.J_cur = tuple(J_cur)
        P = params.phases
        K2 = params.K // 2
        r = layout.r[ell - 1]
        i_coords = list(self.J_prev) + [r]
        i_rad = [low_cut(params, s) for s in range(K2)] + [params.m, params.m]
        if len(i_coords) != len(i_rad):
            raise ValueError("J must carry phases+1 entries")
        self.A = _Radix(i_coords, i_rad)
        self.I = self.A.coords
        self.q = tuple(layout.q[ell][k] for k in range(P))
        self.lam = tuple(params.K - k for k in range(P))
        self.D = []
        self.Iprime = []
        offs = [0]
        for k in range(P):
            coords = list(self.J_cur[:k]) + list(layout.ext[ell][k]) + [self.q[k]]
            rad = ([low_cut(params, s) for s in range(k)]
                   + [params.m] * len(layout.ext[ell][k])
                   + [params.m // self.lam[k]])
            dk = _Radix(coords, rad)
            if len(dk.coords) != len(self.I):
                raise ValueError(
                    f"|I'_{k}| = {len(dk.coords)} != |I| = {len(self.I)}")
            self.D.append(dk)
            self.Iprime.append(dk.coords)
            offs.append(offs[-1] + dk.size)
        self.offsets = tuple(offs)
        if self.offsets[-1] != self.A.size:
            raise ValueError(
                f"cardinality mismatch: sum |D_k| = {self.offsets[-1]} but "
                f"|A| = {self.A.size} (parameter bug)")

    def eta(self, k):
        """Order-preserving bijection sorted(I) -> sorted(I'_k) as a dict."""
        return dict(zip(self.I, self.Iprime[k]))

    def m_apply(self, k, d_values):
        """M on the D_k piece: values along sorted(I'_k) -> values along
        sorted(I)."""
        return self.A.unrank(self.offsets[k] + self.D[k].rank(d_values))

    def m_invert(self, a_values):
        grank = self.A.rank(a_values)
        k = bisect.bisect_right(self.offsets, grank) - 1
        return k, self.D[k].unrank(grank - self.offsets[k])

    def m_table(self):
        """Explicit M as an array of A-ranks indexed by global D-rank (the
        rank-order choice makes it the identity; kept for file verification)."""
        if self.A.size > M_TABLE_CAP:
            return None
        return np.arange(self.A.size, dtype=np.int64)

    def to_dict(self):
        return {
            "ell": self.ell,
            "J_prev": list(self.J_prev),
            "J_cur": list(self.J_cur),
            "A": self.A.to_dict(),
            "D": [d.to_dict() for d in self.D],
            "eta": [list(self.Iprime[k]) for k in range(len(self.D))],
            "offsets": list(self.offsets),
            "m_rule": "rank-order",
        }


def pi_apply(tables, k, z, params):
    """Subcube permutation Pi_k on a densified label z.

    Copies z's I values onto I'_k through eta, writes M(z_{I'_k}) onto I and
    leaves every other coordinate untouched.
    """
    dk = tables.D[k]
    a = dk.extract(z, params)
    b = [hc.coord_of(z, c, params) for c in tables.I]
    avals = tables.m_apply(k, a)
    out = z
    for c, v in zip(tables.Iprime[k], b):
        out = hc.with_coord(out, c, v, params)
    for c, v in zip(tables.I, avals):
        out = hc.with_coord(out, c, v, params)
    return out


def tau_apply(tables, k, s_label, params):
    """tau_k = Pi_k o rho_k, mapping an S'_k label into T_*^{ell-1}."""
    dmap = DensifyingMap(lam=tables.lam[k], r=tables.q[k])
    return pi_apply(tables, k, densify(dmap, s_label, params), params)


def tau_invert(tables, t_label, params):
    """Inverse of tau on T_*^{ell-1}: returns (k, S'_k label)."""
    avals = tables.A.extract(t_label, params)
    k, dvals = tables.m_invert(avals)
    z = t_label
    for c_i, c_ip in tables.eta(k).items():
        z = hc.with_coord(z, c_i, hc.coord_of(t_label, c_ip, params), params)
    for c, v in zip(tables.Iprime[k], dvals):
        z = hc.with_coord(z, c, v, params)
    q = tables.q[k]
    val = hc.coord_of(z, q, params)
    wt_rest = hc.weight(hc.with_coord(z, q, 0, params), params)
    orig = undensify_value(val, wt_rest, tables.lam[k], params)
    return k, hc.with_coord(z, q, orig, params)


def _scatter(labels, coord, values, params):
    b = params.bits_per_coord
    mask = np.int64((1 << b) - 1) << np.int64(coord * b)
    return (labels & ~mask) | (values.astype(np.int64) << np.int64(coord * b))


def tau_apply_array(tables, k, s_labels, params):
    """Vectorized tau_k over an int64 label array."""
    dmap = DensifyingMap(lam=tables.lam[k], r=tables.q[k])
    z = densify_array(dmap, np.asarray(s_labels, dtype=np.int64), params)
    dk = tables.D[k]
    granks = dk.rank_array(dk.extract_array(z, params)) + np.int64(
        tables.offsets[k])
    avals = tables.A.unrank_array(granks)
    bvals = [hc.coords_array(z, c, params) for c in tables.I]
    out = z
    for c, v in zip(tables.Iprime[k], bvals):
        out = _scatter(out, c, v, params)
    for c, v in zip(tables.I, avals):
        out = _scatter(out, c, v, params)
    return out


def tau_invert_array(tables, t_labels, params):
    """Vectorized inverse of tau; returns (k_array, label_array)."""
    t = np.asarray(t_labels, dtype=np.int64)
    granks = tables.A.rank_array(tables.A.extract_array(t, params))
    offs = np.asarray(tables.offsets, dtype=np.int64)
    ks = np.searchsorted(offs, granks, side="right") - 1
    out = np.empty_like(t)
    for k in range(len(tables.D)):
        sel = ks == k
        if not sel.any():
            continue
        z = t[sel]
        for c_i, c_ip in tables.eta(k).items():
            z = _scatter(z, c_i, hc.coords_array(t[sel], c_ip, params), params)
        dvals = tables.D[k].unrank_array(granks[sel] - tables.offsets[k])
        for c, v in zip(tables.Iprime[k], dvals):
            z = _scatter(z, c, v, params)
        q = tables.q[k]
        lam = tables.lam[k]
        W = np.int64(params.W)
        beta = np.int64(params.W // lam)
        val = hc.coords_array(z, q, params)
        wt_rest = hc.weights_array(_scatter(z, q, np.zeros_like(z), params),
                                   params)
        a, c_part = np.divmod(val, beta)
        qq = ((wt_rest + c_part) % W) // beta
        b_part = (-qq) % np.int64(lam)
        orig = a * W + b_part * beta + c_part
        out[sel] = _scatter(z, q, orig, params)
    return ks, out


def build_glue_tables(params, layout, ell, J_prev, J_cur):
    """Glue tables for tau^ell: S^ell -> T_*^{ell-1}."""
    return GlueTables(params, layout, ell, J_prev, J_cur)
