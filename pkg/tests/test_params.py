import pytest

from kvvstream.params import (GLUED, STANDALONE, ParamError, ToyParams,
                              derive_params, minimal_layout,
                              params_from_config, params_to_config, validate)


def test_derive_k2():
    assert derive_params(2) == (4, 2)


def test_derive_k4():
    assert derive_params(4) == (144, 12)


def test_derive_rejects_odd_k():
    with pytest.raises(ParamError):
        derive_params(3)


def test_derive_rejects_above_cap():
    with pytest.raises(ParamError, match="cap"):
        derive_params(66)
    # analytic callers may lift the cap explicitly
    m, W = derive_params(66, k_cap=66)
    assert m == W * W


@pytest.mark.parametrize("K", list(range(2, 65, 2)))
def test_derived_params_validate(K):
    # every even K up to the graph-mode cap
    p = ToyParams.create(K=K, L=2, n=64)
    assert validate(p).ok


def test_divisibility_violation_named():
    p = ToyParams(K=2, L=2, n=3, m=6, W=2)
    rep = validate(p)
    assert not rep.ok
    assert any("W does not divide m/(K-s)" in v for v in rep.violations)


def test_l_greater_k_warns():
    p = ToyParams.create(K=2, L=4, n=24)
    rep = validate(p)
    assert rep.ok and any("O(1/K)" in w for w in rep.warnings)


def test_minimal_layout_standalone_fix_a():
    p = ToyParams.create(K=2, L=1, n=3, mode=STANDALONE)
    lay = minimal_layout(p, [2, 1])
    assert lay.blocks == (((0, 1), (2,)),)
    assert lay.free == (((0, 1), (2,)),)
    assert lay.ext == ((),) and lay.r == (None,)


def test_minimal_layout_glued_fix_b():
    p = ToyParams.create(K=2, L=2, n=12)
    lay = minimal_layout(p, 1)
    for l in range(2):
        assert len(lay.blocks[l][0]) == 4  # Ext 2 + q 1 + free 1
        assert len(lay.blocks[l][1]) == 2  # r 1 + free 1
        assert len(lay.ext[l][0]) == 2
    assert validate(p, lay).ok


def test_minimal_layout_n_too_small():
    p = ToyParams.create(K=2, L=2, n=11)
    with pytest.raises(ParamError, match="too small"):
        minimal_layout(p, 1)


def test_minimal_layout_deterministic():
    p = ToyParams.create(K=2, L=2, n=14)
    assert minimal_layout(p, [2, 1]) == minimal_layout(p, [2, 1])


def test_layout_block_overlap_detected():
    p = ToyParams.create(K=2, L=2, n=12)
    lay = minimal_layout(p, 1)
    tampered = lay.to_dict()
    tampered["blocks"][1][0][0] = tampered["blocks"][0][0][0]
    from kvvstream.params import BlockLayout
    rep = validate(p, BlockLayout.from_dict(tampered))
    assert any("not disjoint" in v for v in rep.violations)


def test_config_round_trip():
    cfg = {"K": 2, "L": 2, "n": 12, "slack": 1, "seed": 7, "mode": GLUED,
           "alphaPhases": None}
    params, layout = params_from_config(cfg)
    assert (params.m, params.W) == (4, 2)
    assert params.seed == 7
    back = params_to_config(params, slack=1)
    params2, layout2 = params_from_config({**back, "slack": 1})
    assert params2 == params and layout2 == layout


def test_standalone_alpha_phase_default():
    p = ToyParams.create(K=2, L=1, n=3, mode=STANDALONE)
    assert p.alpha_phases == 1 and p.phases == 1
    p10 = ToyParams.create(K=10, L=1, n=20, mode=STANDALONE)
    assert p10.alpha_phases == 6  # floor((1 - 1/e) * 10)
