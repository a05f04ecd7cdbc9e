"""Named instance presets.

fix-a: K=2 standalone alpha gadget on [4]^3 (64 labels), terminal matching
       attached; every check runs exhaustively.
fix-b: K=2, L=2 glued pair on [4]^12 (16.7M labels); the largest size at
       which sets are still enumerated explicitly.
fix-c: K=2, L=2 on [4]^14 (268M labels), streaming-only; two free
       directions per opening block, so the planted direction is hidden.
"""

from __future__ import annotations

from .params import GLUED, STANDALONE, ToyParams, minimal_layout
from .instance import sample_instance

PRESETS = {
    "fix-a": {"K": 2, "L": 1, "n": 3, "mode": STANDALONE, "slack": [2, 1],
              "seed": 7},
    "fix-b": {"K": 2, "L": 2, "n": 12, "mode": GLUED, "slack": 1, "seed": 3},
    "fix-c": {"K": 2, "L": 2, "n": 14, "mode": GLUED, "slack": [2, 1],
              "seed": 11},
}


def preset_params(name):
    try:
        cfg = PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; "
                         f"known: {sorted(PRESETS)}") from None
    params = ToyParams.create(K=cfg["K"], L=cfg["L"], n=cfg["n"],
                              mode=cfg["mode"], seed=cfg["seed"])
    layout = minimal_layout(params, cfg["slack"])
    return params, layout


def make_fixture(name, seed=None):
    params, layout = preset_params(name)
    return sample_instance(params, layout, seed=seed)
