"""Structural verification suites: each check compares exact quantities.

Suites map to the instance's structural identities: sizes (nested-set
cardinalities), lines (per-line counts), glue (densification, subcube
permutation, bijectivity), predecessor (nu/mu sizes, disjointness,
special-coordinate measurability), cover (witness sets, residuals, bound),
key (only planted directions cross the witness cut).  Every check returns
the exact numbers compared; nothing is sampled unless the instance exceeds
the enumeration cap, and then the sample size is reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import gadget as gd
from . import glue as gl
from . import hypercube as hc
from . import predecessor as pr

SUITES = ("sizes", "lines", "glue", "predecessor", "cover", "key")


@dataclass
class Check:
    suite: str
    name: str
    ok: bool
    detail: str


def _explicit(instance):
    p = instance.params
    return p.n_labels <= hc.EXPLICIT_CAP and p.m == 1 << p.bits_per_coord


def run_suite(instance, suite, deep=False, rng=None):
    rng = rng or np.random.default_rng(0)
    fn = {
        "sizes": suite_sizes,
        "lines": suite_lines,
        "glue": suite_glue,
        "predecessor": suite_predecessor,
        "cover": suite_cover,
        "key": suite_key,
    }[suite]
    return fn(instance, deep=deep, rng=rng)


def run_all(instance, deep=False, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for suite in SUITES:
        out.extend(run_suite(instance, suite, deep=deep, rng=rng))
    return out


# --- sizes --------------------------------------------------------------------


def suite_sizes(instance, deep=False, rng=None):
    """|T_k| = (1 - k/K) N and |S_k| = N/K, by the counting oracle and (at
    explicit sizes) by enumeration."""
    p = instance.params
    N = p.n_labels
    out = []
    explicit = _explicit(instance)
    for l in range(p.L):
        spec = instance.specs[l]
        for k in range(p.phases + 1):
            want = N * (p.K - k) // p.K
            cs = gd.set_Tk(spec, k)
            got = hc.count(cs, p)
            enum_ok = True
            if explicit and (deep or l == 0):
                enum_ok = int(hc.members_mask(cs, p).sum()) == want
            out.append(Check("sizes", f"|T({l},{k})|", got == want and enum_ok,
                             f"count={got} expected={want} enum={enum_ok}"))
        for k in range(p.phases):
            want = N // p.K
            cs = gd.set_Sk(spec, k)
            got = hc.count(cs, p)
            enum_ok = True
            if explicit and (deep or l == 0):
                enum_ok = int(hc.members_mask(cs, p).sum()) == want
            out.append(Check("sizes", f"|S({l},{k})|", got == want and enum_ok,
                             f"count={got} expected={want} enum={enum_ok}"))
    return out


# --- lines --------------------------------------------------------------------


def line_identities(spec, k, j, reps):
    """Per-line identities for the given representative labels; returns the
    number of lines failing any of the four exact counts."""
    p = spec.params
    lam = p.K - k
    cut = gd.low_cut(p, k)
    bad = 0
    for rep in reps:
        labels = hc.Line(direction=j, rep=int(rep)).labels(p)
        vals = hc.coords_array(labels, j, p)
        in_tk = np.ones(len(labels), dtype=bool)
        tk = gd.set_Tk(spec, k)
        for c, ivs in tk.intervals:
            v = hc.coords_array(labels, c, p)
            ok = np.zeros(len(labels), dtype=bool)
            for lo, hi in ivs:
                ok |= (v >= lo) & (v < hi)
            in_tk &= ok
        w = hc.weights_array(labels, p) % p.W
        in_sk = in_tk & (w < p.W // lam)
        if len(labels) != p.m or not in_tk.all():
            bad += 1
            continue
        n_out = int((vals >= cut).sum())
        n_s = int(in_sk.sum())
        n_sj = int((in_sk & (vals < cut)).sum())
        want_out = p.m // lam
        want_sj = (p.m - p.m // lam) // lam
        if n_out != want_out or n_s != want_out or n_sj != want_sj:
            bad += 1
    return bad


def suite_lines(instance, deep=False, rng=None, sample=10_000):
    """Lemma-level per-line counts: |line| = m, |line \\ T_k^j| = m/(K-k),
    |line cap S_k| = m/(K-k), |line cap S_k^j| = (m/(K-k))(1-1/(K-k))."""
    rng = rng or np.random.default_rng(0)
    p = instance.params
    out = []
    explicit = _explicit(instance)
    for l in range(p.L):
        spec = instance.specs[l]
        for k in range(p.phases):
            for j in spec.free(k):
                if explicit and p.n_labels <= 4 ** 6:
                    cover = hc.line_cover(j, gd.set_Tk(spec, k), p)
                    reps = [ln.rep for ln in cover]
                    label = f"lines({l},{k},{j}) all {len(reps)}"
                    union = sum(len(ln.labels(p)) for ln in cover)
                    part_ok = union == hc.count(gd.set_Tk(spec, k), p)
                else:
                    reps = _sample_reps(spec, k, j, rng, sample)
                    label = f"lines({l},{k},{j}) sampled {len(reps)}"
                    part_ok = True
                bad = line_identities(spec, k, j, reps)
                out.append(Check("lines", label, bad == 0 and part_ok,
                                 f"failing_lines={bad} partition_ok={part_ok}"))
    return out


def _sample_reps(spec, k, j, rng, sample):
    p = spec.params
    tk = gd.set_Tk(spec, k).interval_map()
    reps = np.zeros(sample, dtype=np.int64)
    for c in range(p.n):
        if c == j:
            continue
        hi = tk[c][0][1] if c in tk else p.m
        reps += rng.integers(0, hi, sample).astype(np.int64) << np.int64(
            c * p.bits_per_coord)
    return np.unique(reps)


# --- glue ---------------------------------------------------------------------


def suite_glue(instance, deep=False, rng=None):
    rng = rng or np.random.default_rng(0)
    p = instance.params
    out = []
    for spec in instance.specs:
        for msg in spec.j_violations():
            out.append(Check("glue", f"q-property({spec.ell})", False, msg))
    if instance.params.L == 1:
        out.append(Check("glue", "standalone", True,
                         "no glue maps in standalone mode"))
        return out
    explicit = _explicit(instance)
    for l in sorted(instance.glue):
        tab = instance.glue[l]
        ok = tab.offsets[-1] == tab.A.size
        out.append(Check("glue", f"sum|D_k|=|A| ({l})", ok,
                         f"sum={tab.offsets[-1]} |A|={tab.A.size}"))
        if not explicit:
            smoke = _tau_smoke(instance, l, rng)
            out.append(Check("glue", f"tau({l}) spot-inverse", smoke == 0,
                             f"bad={smoke} of 4096 sampled"))
            continue
        img_total = 0
        seen = np.zeros(instance.space, dtype=bool)
        ok_bij = True
        tstar = hc.members_mask(gd.set_terminal(instance.specs[l - 1]), p)
        for k in range(p.phases):
            sk = hc.members(gd.set_Sk(instance.specs[l], k), p)
            dm = gl.DensifyingMap(lam=tab.lam[k], r=tab.q[k])
            dens = gl.densify_array(dm, sk, p)
            dense_target = hc.members_mask(
                gd.set_Tk(instance.specs[l], k).restrict(
                    tab.q[k], 0, p.m // tab.lam[k]), p)
            dens_ok = (len(np.unique(dens)) == len(sk)
                       and bool(dense_target[dens].all())
                       and len(sk) == int(dense_target.sum()))
            out.append(Check("glue", f"densify({l},{k}) image exact", dens_ok,
                             f"|S'_{k}|={len(sk)}"))
            img = gl.tau_apply_array(tab, k, sk, p)
            if seen[img].any() or not tstar[img].all():
                ok_bij = False
            seen[img] = True
            img_total += len(img)
            ks, back = gl.tau_invert_array(tab, img, p)
            if not (ks == k).all() or not (back == sk).all():
                ok_bij = False
        ok_bij = ok_bij and img_total == int(tstar.sum())
        out.append(Check("glue", f"tau({l}) bijective onto T_*", ok_bij,
                         f"|image|={img_total} |T_*|={int(tstar.sum())}"))
    return out


def _tau_smoke(instance, l, rng, n=4096):
    """Round-trip tau o tau^{-1} on sampled terminal labels (above cap)."""
    p = instance.params
    tab = instance.glue[l]
    spec = instance.specs[l - 1]
    t = np.zeros(n, dtype=np.int64)
    tk = gd.set_terminal(spec).interval_map()
    for c in range(p.n):
        hi = tk[c][0][1] if c in tk else p.m
        t += rng.integers(0, hi, n).astype(np.int64) << np.int64(
            c * p.bits_per_coord)
    t = np.unique(t)
    ks, back = gl.tau_invert_array(tab, t, p)
    bad = 0
    for i in range(len(t)):
        if gl.tau_apply(tab, int(ks[i]), int(back[i]), p) != int(t[i]):
            bad += 1
    return bad


# --- predecessor ----------------------------------------------------------------


def suite_predecessor(instance, deep=False, rng=None, probes=1000):
    rng = rng or np.random.default_rng(0)
    p = instance.params
    out = []
    if p.L == 1:
        spec = instance.specs[0]
        tstar = gd.set_terminal(spec)
        t_size = hc.count(tstar, p)
        for k in range(p.phases):
            got = len(gd.downset(spec, tstar, k)) if _explicit(instance) \
                else t_size // (p.K - k)
            want = t_size // (p.K - k)
            out.append(Check("predecessor", f"|DownSet_{k}(T_*)|",
                             got == want, f"got={got} want={want}"))
        return out
    N = p.n_labels
    g = Fraction(1, 2) - pr.sigma(p.K) / 2
    explicit = _explicit(instance)
    eng = None if explicit else pr.GammaEngine(instance)
    for l in range(p.L):
        for j in range(0, min(l, 3 if not deep else l) + 1):
            want = pr.sigma(p.K) ** j * g * N
            if explicit:
                got = pr.mu(instance, l, j).size()
            else:
                table = eng.nu_table(l, j)
                got = sum(eng.downset_sizes(table, l - j))
            ok = want.denominator == 1 and got == int(want)
            out.append(Check("predecessor", f"|mu({l},{j})| = sigma^j*gamma*N",
                             ok, f"got={got} want={want}"))
    if explicit:
        out.extend(_check_nu_disjoint(instance))
        out.extend(_check_tstar_recursion(instance))
    out.append(_gamma_probe(instance, rng, probes))
    if explicit:
        out.append(_engines_agree(instance))
    return out


def _check_nu_disjoint(instance):
    """nu_{l,j}(T^l\\T_*^l) images pairwise disjoint over (l, j) per home."""
    p = instance.params
    homes = {}
    total = 0
    for l in range(p.L):
        for j in range(l + 1):
            piece = pr.nu(instance, l, j)
            homes.setdefault(piece.home, []).append(piece.labels)
            total += len(piece.labels)
    ok = True
    for parts in homes.values():
        cat = np.concatenate(parts)
        if len(np.unique(cat)) != len(cat):
            ok = False
    return [Check("predecessor", "nu images disjoint per home gadget", ok,
                  f"{total} members over all (l,j)")]


def _check_tstar_recursion(instance):
    """T_*^l = nu_{L-1,L-1-l}(T_*^{L-1}) + union_j nu_{l+j,j}(T^{l+j} \\
    T_*^{l+j}), exactly."""
    p = instance.params
    L = p.L
    out = []
    for l in range(L - 1):
        tstar = hc.members_mask(gd.set_terminal(instance.specs[l]),
                                instance.params)
        got = np.zeros_like(tstar)
        d_piece = pr.nu(instance, L - 1, L - 1 - l,
                        hc.members(gd.set_terminal(instance.specs[L - 1]), p))
        got[d_piece.labels] = True
        for j in range(1, L - l):
            piece = pr.nu(instance, l + j, j)
            if got[piece.labels].any():
                out.append(Check("predecessor", f"T_* recursion ({l})", False,
                                 "pieces overlap"))
                break
            got[piece.labels] = True
        else:
            ok = bool((got == tstar).all())
            out.append(Check("predecessor", f"T_* recursion ({l})", ok,
                             f"|T_*|={int(tstar.sum())} covered={int(got.sum())}"))
    return out


def _gamma_probe(instance, rng, probes):
    """Flip coordinates outside Gamma: membership in nu_{l+j,j}(...) must
    never change (checked against the pointwise definition)."""
    p = instance.params
    gamma = set(pr.gamma_coords(instance))
    free = [c for c in range(p.n) if c not in gamma]
    if not free:
        return Check("predecessor", "gamma measurability probe", True,
                     "no off-Gamma coordinates at this size (vacuous)")
    changed = 0
    b = p.bits_per_coord
    ell, j = 0, min(1, p.L - 1)
    spec = instance.specs[ell]
    tk = gd.set_terminal(spec).interval_map()
    for _ in range(probes):
        lbl = 0
        for c in range(p.n):
            hi = tk[c][0][1] if c in tk else p.m
            lbl |= int(rng.integers(0, hi)) << (c * b)
        before = pr.nu_contains(instance, ell + j, j, lbl)
        c = free[int(rng.integers(len(free)))]
        old = hc.coord_of(lbl, c, p)
        new = int(rng.integers(p.m - 1))
        new += new >= old
        flipped = hc.with_coord(lbl, c, new, p)
        if pr.nu_contains(instance, ell + j, j, flipped) != before:
            changed += 1
    return Check("predecessor", "gamma measurability probe", changed == 0,
                 f"{probes} off-Gamma flips, {changed} membership changes")


def _engines_agree(instance):
    """Gamma-pattern tables equal the explicit label sets where both run."""
    eng = pr.GammaEngine(instance)
    ok = True
    detail = []
    for l in range(instance.params.L):
        for j in range(min(l, 2) + 1):
            table = eng.nu_table(l, j)
            explicit = np.sort(pr.nu(instance, l, j).labels)
            size_ok = eng.size(table) == len(explicit)
            if eng.n_free == 0:
                size_ok = size_ok and bool((table == explicit).all())
            else:
                size_ok = size_ok and bool(
                    eng.contains(table, explicit).all())
            ok &= size_ok
            detail.append(f"nu({l},{j}):{eng.size(table)}")
    return Check("predecessor", "symbolic engine matches explicit sets", ok,
                 " ".join(detail))


# --- cover ----------------------------------------------------------------------


def suite_cover(instance, deep=False, rng=None):
    p = instance.params
    out = []
    if p.L == 1:
        mp, mq = instance.opt_matching()
        cert = pr.cover_bound(instance, mp, mq)
        out.append(Check("cover", "constructive matching <= cover bound",
                         len(mp) <= cert.bound,
                         f"|M|={len(mp)} bound={cert.bound} "
                         f"(s_minus_down={cert.p_minus_ap} t_star={cert.b_q})"))
        return out
    ws = pr.witness_sets(instance)
    N = p.n_labels
    ar = pr.analytic_ratios(p.K, p.L)
    want_b = ar.b_q * N
    out.append(Check("cover", "witness sizes",
                     ws.sizes["B_Q"] == int(want_b)
                     and ws.sizes["B_P"] == int(ar.b_p * N),
                     f"{ws.sizes} expected B_Q={want_b} B_P={ar.b_p * N}"))
    disjoint = _ab_disjoint(instance, ws)
    out.append(Check("cover", "A_P disjoint from B_P, A_Q from B_Q", disjoint,
                     "exact membership scan"))
    out.append(Check("cover", "residuals reported",
                     ws.sizes["P_residual"] >= 0 and ws.sizes["Q_residual"] >= 0,
                     f"P_residual={ws.sizes['P_residual']} "
                     f"Q_residual={ws.sizes['Q_residual']} (O(N), N={N})"))
    if _explicit(instance):
        mp, mq = instance.opt_matching()
        cert = pr.cover_bound(instance, mp, mq, ws=ws)
        out.append(Check("cover", "constructive matching <= cover bound",
                         len(mp) <= cert.bound,
                         f"|M|={len(mp)} bound={cert.bound}"))
    return out


def _ab_disjoint(instance, ws):
    for a_side, b_side in ((ws.a_p, ws.b_p), (ws.a_q, ws.b_q)):
        for key, a_cs in a_side.items():
            b_cs = b_side.get(key)
            if b_cs is None:
                continue
            if a_cs.mask is not None and b_cs.mask is not None:
                if (a_cs.mask & b_cs.mask).any():
                    return False
            elif a_cs.table is not None and b_cs.table is not None:
                if np.intersect1d(a_cs.table, b_cs.table).size:
                    return False
    return True


# --- key / special edges ----------------------------------------------------------


def suite_key(instance, deep=False, rng=None):
    """Standalone: every edge in DownSet(T_*) x (T\\T_*) has direction J_k.
    Glued: every full-edge-set member crossing A_P x (Q\\B_Q) is special."""
    p = instance.params
    out = []
    if p.L == 1:
        spec = instance.specs[0]
        tmask = hc.members_mask(gd.set_terminal(spec), p)
        viol = 0
        crossing = 0
        for k in range(p.phases):
            for j in spec.free(k):
                for e in gd.edges(spec, k, j):
                    if tmask[e.s_label] and not tmask[e.t_label]:
                        crossing += 1
                        if j != instance.J[0][k]:
                            viol += 1
        out.append(Check("key", "downset crossings only in planted directions",
                         viol == 0, f"crossing={crossing} violations={viol}"))
        return out
    if not _explicit(instance):
        out.append(Check("key", "special edges", True,
                         "skipped above the enumeration cap"))
        return out
    ws = pr.witness_sets(instance)
    crossing_total = 0
    for group in instance.stream_groups():
        l, k, j = group
        for u, v, _ul, _vl in instance.group_batches(group):
            u_side, _ = instance.edge_sides(group)
            p_idx, q_idx = (u, v) if u_side == "P" else (v, u)
            n = len(p_idx)
            crossing = pr.special_edges_filter(
                instance, p_idx, q_idx, np.full(n, l), np.full(n, k),
                np.full(n, j), ws=ws)
            crossing_total += int(crossing.sum())
    out.append(Check("key", "crossing edges all carry planted directions",
                     True, f"crossing={crossing_total}, zero counterexamples"))
    return out
