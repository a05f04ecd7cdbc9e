"""Predecessor maps nu/mu, witness sets, cover bounds and exact ratios.

nu_{l,j} pulls a subset of T^l back through j alternations of DownSet and
the glue map tau; mu_{l,j} is the final DownSet.  The witness sets A/B
built from them yield the vertex cover that bounds every matching a
budgeted algorithm can output.

Two engines compute these sets.  The explicit engine works on label masks
below the enumeration cap.  The gamma engine works on projections to the
special coordinates Gamma (all J, r, Ext, q indices): membership in every
nu set depends only on those coordinates, so a set is a table of
Gamma-patterns and each pattern stands for a full fiber of m^{#non-Gamma}
labels.  All sizes are exact integers; ratio arithmetic is exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import gadget as gd
from . import glue as gl
from . import hypercube as hc
from .params import alpha_phase_count, inv_e_enclosure

# --- certified enclosures -------------------------------------------------


def ln2_enclosure(terms=64):
    """Rational (lo, hi) with lo < ln 2 < hi, via ln 2 = sum 1/(i 2^i)."""
    s = Fraction(0)
    for i in range(1, terms + 1):
        s += Fraction(1, i * 2 ** i)
    return s, s + Fraction(1, (terms + 1) * 2 ** terms)


def inv_1p_ln2_enclosure(terms=64):
    lo, hi = ln2_enclosure(terms)
    return 1 / (1 + hi), 1 / (1 + lo)


# --- analytic ratio calculator ---------------------------------------------


def sigma(K):
    """sum_{k in [K/2]} 1/(K-k), exact."""
    return sum((Fraction(1, K - k) for k in range(K // 2)), Fraction(0))


def sigma_in_enclosure(K):
    """Certified check of ln2 - 1/K <= sigma(K) <= ln2."""
    s = sigma(K)
    lo, hi = ln2_enclosure()
    return s <= lo and s >= hi - Fraction(1, K)


@dataclass(frozen=True)
class AnalyticRatios:
    """Exact rationals of the witness-set calculus, all per unit of N."""

    K: int
    L: int
    sigma: Fraction
    gamma: Fraction
    mu_table: tuple  # mu_table[j] = sigma^j * gamma, j = 0..L-1
    b_p: Fraction
    b_q: Fraction
    cover_ratio: Fraction  # (B_P + B_Q) / |P|, with |P| = L N / 2

    def distance_to_limit(self):
        """Rational interval for |cover_ratio - 1/(1+ln2)|."""
        lo, hi = inv_1p_ln2_enclosure()
        d_lo = min(abs(self.cover_ratio - lo), abs(self.cover_ratio - hi))
        d_hi = max(abs(self.cover_ratio - lo), abs(self.cover_ratio - hi))
        if lo <= self.cover_ratio <= hi:
            d_lo = Fraction(0)
        return d_lo, d_hi


def analytic_ratios(K, L):
    """Witness-set sizes from the exact recursion (graphs never built).

    B_Q/N = sum over even rounds l of sum over even j <= l of sigma^j gamma,
    mirrored over odd rounds for B_P; cover_ratio = (B_P + B_Q)/(L/2).

    Collapsing the double sum over (l, j) to one sum over even j with the
    round count (L-j)/2, evaluated in integer arithmetic over the common
    denominator 4 B^L, keeps the exact rationals fast at K = L = 200.
    """
    if K < 2 or K % 2 or L < 2 or L % 2:
        raise ValueError("analytic ratios need even K >= 2 and even L >= 2")
    s = sigma(K)
    g = Fraction(1, 2) - s / 2
    a, b = s.numerator, s.denominator
    mu = []
    cur = g
    s2 = s * s
    num = 0
    a_pow = 1
    b_pow = b ** (L - 1)
    for j in range(0, L, 2):
        mu.append(cur)
        if j + 1 < L:
            mu.append(cur * s)
        # both parities of l >= j contribute (L - j)/2 rounds each
        num += ((L - j) // 2) * a_pow * b_pow
        cur = cur * s2
        a_pow *= a * a
        b_pow //= b * b
    b_side = Fraction((b - a) * num, 2 * b ** L)
    ratio = 2 * b_side / Fraction(L, 2)
    return AnalyticRatios(K=K, L=L, sigma=s, gamma=g, mu_table=tuple(mu[:L]),
                          b_p=b_side, b_q=b_side, cover_ratio=ratio)


@dataclass(frozen=True)
class AlphaGadgetRatios:
    """Single-gadget alpha-mode arithmetic, exact, per unit of |T_0|."""

    K: int
    phases: int
    t_star: Fraction          # |T_*| / N
    s_total: Fraction         # |S| / N
    downset: tuple            # |DownSet_k(T_*)| / N per layer
    s_minus_downset: Fraction  # |S \ DownSet(T_*)| / N
    cover: Fraction            # (|S \ DownSet(T_*)| + |T_*|) / N


def alpha_gadget_ratios(K, phases=None):
    """Exact counting identities of the single alpha-KVV gadget.

    |T_*|/N = prod (1 - 1/(K-s)); |DownSet_k(T_*)| = |T_*|/(K-k); the
    leftover |S \\ DownSet(T_*)| approaches (2a-1) N for a = 1 - 1/e when
    phases = floor(a K).
    """
    if phases is None:
        phases = alpha_phase_count(K)
    t_star = Fraction(1)
    for s in range(phases):
        t_star *= 1 - Fraction(1, K - s)
    down = tuple(t_star / (K - k) for k in range(phases))
    s_total = Fraction(phases, K)
    s_minus = s_total - sum(down, Fraction(0))
    return AlphaGadgetRatios(K=K, phases=phases, t_star=t_star,
                             s_total=s_total, downset=down,
                             s_minus_downset=s_minus,
                             cover=s_minus + t_star)


# --- set engines ------------------------------------------------------------


def gamma_coords(instance):
    """The special coordinates: every J, r, Ext and q index of every round."""
    out = set()
    lay = instance.layout
    for l in range(instance.params.L):
        out.update(instance.J[l])
        if lay.r[l] is not None:
            out.add(lay.r[l])
        for k in range(len(lay.ext[l])):
            out.update(lay.ext[l][k])
        for q in lay.q[l]:
            out.add(q)
    return tuple(sorted(out))


class GammaEngine:
    """Predecessor sets as tables of Gamma-patterns (full-fiber semantics).

    A table is a sorted int64 array of packed labels whose non-Gamma
    coordinates are zero; it denotes the union of their fibers.  One glue
    step intersects with the phase pattern T_k, densifies the compression
    digit (collapsing the K-k weight classes of each pattern group onto one
    image pattern) and applies the subcube permutation.
    """

    def __init__(self, instance):
        self.instance = instance
        self.params = instance.params
        self.gamma = gamma_coords(instance)
        b = self.params.bits_per_coord
        self.gmask = 0
        for c in self.gamma:
            self.gmask |= ((1 << b) - 1) << (c * b)
        self.n_free = self.params.n - len(self.gamma)
        self.fiber = self.params.m ** self.n_free
        size = self.params.m ** len(self.gamma)
        if size > hc.EXPLICIT_CAP:
            raise hc.CapExceeded(
                f"gamma space of {size} patterns exceeds the explicit cap")
        self._space = None

    def space(self):
        if self._space is None:
            free = [c for c in range(self.params.n) if c not in self.gamma]
            cs = hc.ConstraintSystem.make({c: (0, 1) for c in free})
            self._space = hc.members(cs, self.params)
        return self._space

    def project(self, labels):
        return np.asarray(labels, dtype=np.int64) & np.int64(self.gmask)

    def size(self, table):
        return int(len(table)) * self.fiber

    def base_diff_table(self, ell):
        """Patterns of T^ell \\ T_*^ell: some J^ell_s digit in the high cut."""
        p = self.params
        pts = self.space()
        bad = np.zeros(len(pts), dtype=bool)
        for s in range(p.phases):
            v = hc.coords_array(pts, self.instance.J[ell][s], p)
            bad |= v >= gd.low_cut(p, s)
        return pts[bad]

    def tstar_table(self, ell):
        p = self.params
        pts = self.space()
        ok = np.ones(len(pts), dtype=bool)
        for s in range(p.phases):
            v = hc.coords_array(pts, self.instance.J[ell][s], p)
            ok &= v < gd.low_cut(p, s)
        return pts[ok]

    def filter_tk(self, table, g, k):
        """Intersect a table living in T^g with the phase pattern T^g_k."""
        p = self.params
        keep = np.ones(len(table), dtype=bool)
        for s in range(k):
            v = hc.coords_array(table, self.instance.J[g][s], p)
            keep &= v < gd.low_cut(p, s)
        return table[keep]

    def glue_step_k(self, table_k, g, k):
        """Image pattern table of tau^g_k(DownSet_k(.)) for a phase-k slice."""
        p = self.params
        tables = self.instance.glue[g]
        lam = tables.lam[k]
        dm = gl.DensifyingMap(lam=lam, r=tables.q[k])
        dens = gl.densify_array(dm, table_k, p)
        collapsed = np.unique(dens)
        if len(collapsed) * lam != len(table_k):
            raise ValueError(
                "pattern table is not closed under the weight classes of "
                f"q({g},{k}); gamma-engine semantics would be lossy")
        dk = tables.D[k]
        granks = dk.rank_array(dk.extract_array(collapsed, p)) + np.int64(
            tables.offsets[k])
        avals = tables.A.unrank_array(granks)
        out = collapsed
        bvals = [hc.coords_array(collapsed, c, p) for c in tables.I]
        for c, v in zip(tables.Iprime[k], bvals):
            out = gl._scatter(out, c, v, p)
        for c, v in zip(tables.I, avals):
            out = gl._scatter(out, c, v, p)
        out = np.sort(out)
        return out

    def glue_step(self, table, g):
        """One predecessor step at gadget g: union over phase slices."""
        parts = [self.glue_step_k(self.filter_tk(table, g, k), g, k)
                 for k in range(self.params.phases)]
        return np.unique(np.concatenate(parts))

    def nu_table(self, ell, j):
        """Pattern table of nu_{ell,j}(T^ell \\ T_*^ell), home gadget ell-j."""
        table = self.base_diff_table(ell)
        for step in range(j):
            table = self.glue_step(table, ell - step)
        return table

    def downset_sizes(self, table, g):
        """Exact |DownSet_k(fibers of table)| per layer k at gadget g."""
        p = self.params
        out = []
        for k in range(p.phases):
            tk = self.filter_tk(table, g, k)
            if self.n_free > 0:
                out.append(len(tk) * (self.fiber // (p.K - k)))
            else:
                w = hc.weights_array(tk, p) % p.W
                res = np.fromiter(gd.residue_set(p, k), dtype=np.int64)
                out.append(int(np.isin(w, res).sum()))
        return out

    def contains(self, table, labels):
        proj = self.project(labels)
        if len(table) == 0:
            return np.zeros(len(proj), dtype=bool)
        pos = np.minimum(np.searchsorted(table, proj), len(table) - 1)
        return table[pos] == proj


# --- explicit nu / mu -------------------------------------------------------


@dataclass
class PredecessorSet:
    """One nu or mu image: home gadget, (ell, j) tag and members.

    For nu the members are T-side labels; for mu a dict layer -> labels of
    S-side vertices.
    """

    ell: int
    j: int
    home: int
    labels: object

    def size(self):
        if isinstance(self.labels, dict):
            return sum(len(v) for v in self.labels.values())
        return len(self.labels)


def nu(instance, ell, j, U=None):
    """Explicit nu_{ell,j}(U) for U <= T^ell (labels; default T^ell\\T_*^ell).

    Requires the instance below the enumeration cap; use GammaEngine above it.
    """
    p = instance.params
    if not 0 <= j <= ell:
        raise IndexError(f"nu_{{{ell},{j}}} undefined: need 0 <= j <= ell")
    if U is None:
        labels = _diff_labels(instance, ell)
    elif isinstance(U, hc.ConstraintSystem):
        labels = hc.members(U, p)
    else:
        labels = np.asarray(U, dtype=np.int64)
    for step in range(j):
        g = ell - step
        spec = instance.specs[g]
        parts = []
        for k in range(p.phases):
            down = gd.downset(spec, labels, k)
            if len(down):
                parts.append(gl.tau_apply_array(instance.glue[g], k, down, p))
        labels = (np.unique(np.concatenate(parts)) if parts
                  else np.empty(0, dtype=np.int64))
    return PredecessorSet(ell=ell, j=j, home=ell - j, labels=labels)


def mu(instance, ell, j, U=None):
    """Explicit mu_{ell,j}(U) = DownSet^{ell-j}(nu_{ell,j}(U))."""
    base = nu(instance, ell, j, U)
    spec = instance.specs[base.home]
    layers = {k: gd.downset(spec, base.labels, k)
              for k in range(instance.params.phases)}
    return PredecessorSet(ell=ell, j=j, home=base.home, labels=layers)


def _diff_labels(instance, ell):
    spec = instance.specs[ell]
    full = hc.members(hc.ConstraintSystem(), instance.params)
    tmask = hc.members_mask(gd.set_terminal(spec), instance.params)
    return full[~tmask[full]]


def nu_contains(instance, ell, j, label):
    """Pointwise nu membership straight from the definition.

    Recursively inverts the glue map; independent of the set engines, so it
    serves as the oracle for the Gamma-measurability probe.
    """
    p = instance.params
    if j == 0:
        spec = instance.specs[ell]
        return not hc.contains(gd.set_terminal(spec), label, p)
    g = ell - j
    if not hc.contains(gd.set_terminal(instance.specs[g]), label, p):
        return False
    _k, back = gl.tau_invert(instance.glue[g + 1], label, p)
    return nu_contains(instance, ell, j - 1, back)


# --- witness sets -----------------------------------------------------------


class ClassSet:
    """Membership structure for one vertex class, exact-size aware."""

    def __init__(self, size, mask=None, table=None, engine=None):
        self._size = size
        self.mask = mask
        self.table = table
        self.engine = engine

    @property
    def size(self):
        return self._size

    def contains_array(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if self.mask is not None:
            return self.mask[labels]
        if self.table is None:
            return np.zeros(len(labels), dtype=bool)
        return self.engine.contains(self.table, labels)


@dataclass
class WitnessSets:
    """A_P, A_Q, B_P, B_Q plus per-class membership and exact residuals.

    a_p/b_p map P-side class keys ('T', ell) to ClassSets; a_q/b_q map
    Q-side keys ('T', ell) or ('S', 0, k).
    """

    a_p: dict
    a_q: dict
    b_p: dict
    b_q: dict
    sizes: dict

    def side_size(self, which):
        return sum(cs.size for cs in getattr(self, which).values())


def witness_sets(instance):
    """Build the four witness sets of a glued instance.

    Uses dense masks below the enumeration cap and Gamma-pattern tables
    above it; sizes are exact either way.
    """
    p = instance.params
    explicit = p.n_labels <= hc.EXPLICIT_CAP and p.m == 1 << p.bits_per_coord
    engine = None if explicit else GammaEngine(instance)
    a_p, a_q, b_p, b_q = {}, {}, {}, {}

    def t_key(l):
        return ("T", l)

    def add_nu_piece(dst, home, labels_or_table, size):
        key = t_key(home)
        if key not in dst:
            if explicit:
                dst[key] = ClassSet(0, mask=np.zeros(instance.space, dtype=bool))
            else:
                dst[key] = ClassSet(0, table=np.empty(0, np.int64), engine=engine)
        cs = dst[key]
        if explicit:
            already = cs.mask[labels_or_table]
            if already.any():
                raise AssertionError("nu pieces expected disjoint")
            cs.mask[labels_or_table] = True
        else:
            merged = np.concatenate([cs.table, labels_or_table])
            uniq = np.unique(merged)
            if len(uniq) != len(merged):
                raise AssertionError("nu pieces expected disjoint")
            cs.table = uniq
        cs._size += size

    def add_s_piece(dst, layers):
        for k, item in layers.items():
            key = ("S", 0, k)
            if explicit:
                labels, size = item, len(item)
                if key not in dst:
                    dst[key] = ClassSet(0, mask=np.zeros(instance.space, bool))
                dst[key].mask[labels] = True
                dst[key]._size += size
            else:
                table, size = item
                if key not in dst:
                    dst[key] = ClassSet(0, table=np.empty(0, np.int64),
                                        engine=engine)
                cs = dst[key]
                cs.table = np.unique(np.concatenate([cs.table, table]))
                cs._size += size

    for ell in range(p.L):
        a_dst = a_p if ell % 2 == 0 else a_q
        b_dst = b_q if ell % 2 == 0 else b_p
        for j in range(0, ell + 1, 2):
            home = ell - j
            if explicit:
                piece = nu(instance, ell, j)
                add_nu_piece(a_dst, home, piece.labels, len(piece.labels))
                m_piece = mu(instance, ell, j)
                if home > 0:
                    img = {}
                    parts = []
                    for k, lbls in m_piece.labels.items():
                        if len(lbls):
                            parts.append(gl.tau_apply_array(
                                instance.glue[home], k, lbls, p))
                    pushed = (np.unique(np.concatenate(parts)) if parts
                              else np.empty(0, np.int64))
                    add_nu_piece(b_dst, home - 1, pushed, len(pushed))
                else:
                    add_s_piece(b_dst, m_piece.labels)
            else:
                table = engine.nu_table(ell, j)
                add_nu_piece(a_dst, home, table, engine.size(table))
                d_sizes = engine.downset_sizes(table, home)
                if home > 0:
                    pushed = engine.glue_step(table, home)
                    add_nu_piece(b_dst, home - 1, pushed, engine.size(pushed))
                else:
                    layers = {}
                    for k in range(p.phases):
                        tk = engine.filter_tk(table, home, k)
                        layers[k] = (tk, d_sizes[k])
                    add_s_piece(b_dst, layers)

    sizes = {
        "A_P": sum(cs.size for cs in a_p.values()),
        "A_Q": sum(cs.size for cs in a_q.values()),
        "B_P": sum(cs.size for cs in b_p.values()),
        "B_Q": sum(cs.size for cs in b_q.values()),
    }
    n_p = instance.n_p_vertices()
    n_q = instance.n_q_vertices()
    sizes["P_minus_A_P"] = n_p - sizes["A_P"]
    sizes["P_residual"] = n_p - sizes["A_P"] - sizes["B_P"]
    sizes["Q_residual"] = n_q - sizes["A_Q"] - sizes["B_Q"]
    return WitnessSets(a_p=a_p, a_q=a_q, b_p=b_p, b_q=b_q, sizes=sizes)


def _class_of_p_index(instance, idx):
    cls = instance.p_classes()[int(idx) // instance.space]
    return cls, int(idx) % instance.space


def _class_of_q_index(instance, idx):
    cls = instance.q_classes()[int(idx) // instance.space]
    return cls, int(idx) % instance.space


def membership_p(instance, ws_side, p_idx):
    """Vectorized membership of P-side dense indices in a witness side."""
    p_idx = np.asarray(p_idx, dtype=np.int64)
    out = np.zeros(len(p_idx), dtype=bool)
    for (kind, l, k), base in _p_bases(instance).items():
        sel = (p_idx >= base) & (p_idx < base + instance.space)
        if not sel.any():
            continue
        cs = ws_side.get(("T", l))
        if cs is not None:
            out[sel] = cs.contains_array(p_idx[sel] - base)
    return out


def membership_q(instance, ws_side, q_idx):
    q_idx = np.asarray(q_idx, dtype=np.int64)
    out = np.zeros(len(q_idx), dtype=bool)
    from .instance import KIND_S
    for (kind, l, k), base in _q_bases(instance).items():
        sel = (q_idx >= base) & (q_idx < base + instance.space)
        if not sel.any():
            continue
        key = ("S", 0, k) if kind == KIND_S else ("T", l)
        cs = ws_side.get(key)
        if cs is not None:
            out[sel] = cs.contains_array(q_idx[sel] - base)
    return out


def _p_bases(instance):
    return {cls: i * instance.space
            for i, cls in enumerate(instance.p_classes())}


def _q_bases(instance):
    return {cls: i * instance.space
            for i, cls in enumerate(instance.q_classes())}


# --- cover bound and special edges ------------------------------------------


@dataclass
class CoverCertificate:
    bound: int
    crossing: int
    p_minus_ap: int
    b_q: int
    kind: str
    crossing_exact: bool
    crossing_idx: object = None  # indices into the matching arrays


def cover_bound(instance, p_idx, q_idx, ws=None, provenance=None):
    """Vertex-cover upper bound for a matching given as (p_idx, q_idx) pairs.

    Glued form: |M in (A_P x (Q\\B_Q))| + |P\\A_P| + |B_Q|.  The certificate
    cover is one endpoint per crossing edge plus P\\A_P plus B_Q; coverage of
    every matching edge is verified exactly.
    """
    p_idx = np.asarray(p_idx, dtype=np.int64)
    q_idx = np.asarray(q_idx, dtype=np.int64)
    if instance.standalone:
        return _cover_bound_standalone(instance, p_idx, q_idx)
    if ws is None:
        ws = witness_sets(instance)
    in_ap = membership_p(instance, ws.a_p, p_idx)
    in_bq = membership_q(instance, ws.b_q, q_idx)
    crossing = in_ap & ~in_bq
    covered = (~in_ap) | in_bq | crossing
    if not covered.all():  # pragma: no cover - crossing term covers the rest
        raise AssertionError("cover certificate misses a matching edge")
    bound = int(crossing.sum()) + ws.sizes["P_minus_A_P"] + ws.sizes["B_Q"]
    if len(p_idx) > bound:
        raise AssertionError("matching exceeds its vertex-cover bound")
    return CoverCertificate(bound=bound, crossing=int(crossing.sum()),
                            p_minus_ap=ws.sizes["P_minus_A_P"],
                            b_q=ws.sizes["B_Q"], kind="glued",
                            crossing_exact=True)


def _cover_bound_standalone(instance, p_idx, q_idx):
    """Single-gadget form: |M in DownSet(T_*) x (T\\T_*)| + |S\\DownSet(T_*)|
    + |T_*|."""
    from .instance import KIND_S
    p = instance.params
    spec = instance.specs[0]
    tstar = gd.set_terminal(spec)
    tmask = hc.members_mask(tstar, p)
    t_star_size = hc.count(tstar, p)
    down_sizes = [t_star_size // (p.K - k) for k in range(p.phases)]
    s_size = sum(hc.count(gd.set_Sk(spec, k), p) for k in range(p.phases))
    s_minus_down = s_size - sum(down_sizes)
    p_lbl = p_idx % instance.space
    q_cls = q_idx // instance.space
    q_lbl = q_idx % instance.space
    s_layers = {i for i, (kind, _l, _k) in enumerate(instance.q_classes())
                if kind == KIND_S}
    is_s = np.isin(q_cls, np.fromiter(s_layers, dtype=np.int64))
    in_down = is_s & tmask[q_lbl]
    crossing = in_down & ~tmask[p_lbl]
    covered = tmask[p_lbl] | (is_s & ~in_down) | crossing
    if not covered.all():
        raise AssertionError("cover certificate misses a matching edge")
    bound = int(crossing.sum()) + s_minus_down + t_star_size
    if len(p_idx) > bound:
        raise AssertionError("matching exceeds its vertex-cover bound")
    return CoverCertificate(bound=bound, crossing=int(crossing.sum()),
                            p_minus_ap=s_minus_down, b_q=t_star_size,
                            kind="standalone", crossing_exact=True)


def special_edges_filter(instance, p_idx, q_idx, ell, k, j, ws=None):
    """Edges crossing A_P x (Q \\ B_Q); each must carry direction J^ell_k.

    Arguments are parallel arrays (provenance per edge).  A crossing edge in
    a non-special direction is a hard failure.
    """
    if ws is None:
        ws = witness_sets(instance)
    p_idx = np.asarray(p_idx, dtype=np.int64)
    q_idx = np.asarray(q_idx, dtype=np.int64)
    ell = np.asarray(ell)
    k = np.asarray(k)
    j = np.asarray(j)
    crossing = (membership_p(instance, ws.a_p, p_idx)
                & ~membership_q(instance, ws.b_q, q_idx))
    special = np.zeros(len(p_idx), dtype=bool)
    for l in range(instance.params.L):
        for kk in range(instance.params.phases):
            sel = (ell == l) & (k == kk)
            if sel.any():
                special[sel] = j[sel] == instance.J[l][kk]
    bad = crossing & ~special
    if bad.any():
        raise AssertionError(
            f"{int(bad.sum())} edges cross A_P x (Q\\B_Q) in a non-special "
            "direction")
    return crossing
