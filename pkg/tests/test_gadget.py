import numpy as np
import pytest

from kvvstream import gadget as gd
from kvvstream import hypercube as hc
from kvvstream.instance import sample_instance
from kvvstream.params import STANDALONE, ToyParams, minimal_layout


def spec_of(inst, l=0):
    return inst.specs[l]


def test_set_sizes_fix_a(fix_a):
    p = fix_a.params
    spec = spec_of(fix_a)
    assert hc.count(gd.set_Tk(spec, 1), p) == 32
    assert hc.count(gd.set_Sk(spec, 0), p) == 32
    j = spec.free(0)[0]
    assert hc.count(gd.set_Skj(spec, 0, j), p) == 16


def test_phase_index_bounds(fix_a):
    spec = spec_of(fix_a)
    with pytest.raises(IndexError):
        gd.set_Tk(spec, 5)
    with pytest.raises(IndexError):
        gd.set_Sk(spec, 1)
    with pytest.raises(IndexError):
        gd.set_Skj(spec, 0, 99)


def test_downset_examples(fix_a):
    spec = spec_of(fix_a)
    assert len(gd.downset(spec, gd.set_terminal(spec), 0)) == 16
    assert len(gd.downset(spec, np.empty(0, dtype=np.int64), 0)) == 0


def test_truncated_downset():
    # a set inside T_0 \ T_1 has empty downset at layers >= 1
    p = ToyParams.create(K=4, L=1, n=3, mode=STANDALONE, alpha_phases=2)
    lay = minimal_layout(p, 1)
    inst = sample_instance(p, lay, seed=1)
    spec = inst.specs[0]
    t0 = hc.members(gd.set_Tk(spec, 0), p)
    t1 = set(hc.members(gd.set_Tk(spec, 1), p).tolist())
    diff = np.array([x for x in t0.tolist() if x not in t1][:5000],
                    dtype=np.int64)
    assert len(gd.downset(spec, diff, 1)) == 0
    assert len(gd.downset(spec, diff, 0)) > 0


def test_edge_counts_and_disjointness_fix_a(fix_a):
    spec = spec_of(fix_a)
    j0, j1 = spec.free(0)
    e0 = list(gd.edges(spec, 0, j0))
    e1 = list(gd.edges(spec, 0, j1))
    assert len(e0) == len(e1) == 32 == gd.edge_count(spec, 0, j0)
    s0 = {(e.s_label, e.t_label) for e in e0}
    s1 = {(e.s_label, e.t_label) for e in e1}
    assert not s0 & s1


def test_edges_differ_in_exactly_direction(fix_a):
    p = fix_a.params
    spec = spec_of(fix_a)
    for j in spec.free(0):
        for e in gd.edges(spec, 0, j):
            diff = [c for c in range(p.n)
                    if hc.coord_of(e.s_label, c, p) != hc.coord_of(e.t_label, c, p)]
            assert diff == [e.j]


def test_edges_only_on_free_directions(fix_b):
    spec = fix_b.specs[0]
    ext = fix_b.layout.ext[0][0][0]
    with pytest.raises(IndexError):
        next(gd.edges(spec, 0, ext))


def test_edge_endpoint_membership(fix_a):
    p = fix_a.params
    spec = spec_of(fix_a)
    for j in spec.free(0):
        skj = gd.set_Skj(spec, 0, j)
        tk = gd.set_Tk(spec, 0)
        tkj = gd.set_Tkj(spec, 0, j)
        for e in gd.edges(spec, 0, j):
            assert hc.contains(skj, e.s_label, p)
            assert hc.contains(tk, e.t_label, p)
            assert not hc.contains(tkj, e.t_label, p)


def test_gadget_matching_fix_a(fix_a):
    spec = spec_of(fix_a)
    m = gd.gadget_matching(spec)
    assert len(m) == 16 == gd.matching_size(spec)
    svs = [(e.k, e.s_label) for e in m]
    tvs = [e.t_label for e in m]
    assert len(set(svs)) == len(m) and len(set(tvs)) == len(m)
    p = fix_a.params
    tstar = gd.set_terminal(spec)
    assert not any(hc.contains(tstar, t, p) for t in tvs)


def test_matching_size_formula_vs_count_fix_b(fix_b):
    # the analytic per-line count equals the counting oracle's prediction
    spec = fix_b.specs[0]
    p = fix_b.params
    want = sum(
        (hc.count(gd.set_Tk(spec, k), p) // p.m)
        * min((p.m - p.m // (p.K - k)) // (p.K - k), p.m // (p.K - k))
        for k in range(p.phases))
    assert gd.matching_size(spec) == want == p.n_labels // 4


def test_edges_determined_by_j_prefix():
    # phase-k edges depend only on J_{<k}: resampling J_{>=k} leaves E_k alone
    p = ToyParams.create(K=2, L=1, n=3, mode=STANDALONE)
    lay = minimal_layout(p, [2, 1])
    a = sample_instance(p, lay, seed=0)
    b = next(sample_instance(p, lay, seed=s) for s in range(1, 50)
             if sample_instance(p, lay, seed=s).J != a.J)
    assert a.J != b.J  # differ in J_0
    ja, jb = a.specs[0].free(0)
    for j in (ja, jb):
        ea = [(e.s_label, e.t_label) for e in gd.edges(a.specs[0], 0, j)]
        eb = [(e.s_label, e.t_label) for e in gd.edges(b.specs[0], 0, j)]
        assert ea == eb


def test_k4_multiphase_sizes():
    # non-power-of-two alphabet (m = 144), two alpha phases, exact sizes
    p = ToyParams.create(K=4, L=1, n=3, mode=STANDALONE)
    assert p.alpha_phases == 2
    lay = minimal_layout(p, 1)
    inst = sample_instance(p, lay, seed=5)
    spec = inst.specs[0]
    N = p.n_labels
    assert hc.count(gd.set_Tk(spec, 1), p) == N * 3 // 4
    assert hc.count(gd.set_Tk(spec, 2), p) == N // 2
    for k in range(2):
        assert hc.count(gd.set_Sk(spec, k), p) == N // 4
        got = len(gd.downset(spec, gd.set_terminal(spec), k))
        assert got == (N // 2) // (4 - k)


def test_k4_line_identities():
    p = ToyParams.create(K=4, L=1, n=3, mode=STANDALONE)
    lay = minimal_layout(p, 1)
    inst = sample_instance(p, lay, seed=5)
    spec = inst.specs[0]
    for k in range(2):
        j = spec.J[k]
        lam = p.K - k
        cover = hc.line_cover(j, gd.set_Tk(spec, k), p)
        rep = cover[len(cover) // 2].rep
        assert len(gd.line_tmembers(spec, k, j, rep)) == p.m // lam
        svals = gd.line_smembers(spec, k, j, rep)
        assert len(svals) == (p.m - p.m // lam) // lam
