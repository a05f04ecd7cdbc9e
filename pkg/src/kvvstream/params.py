"""Parameter derivation, divisibility validation and coordinate-block layout.

Instances live on the hypercube [m]^n.  The alphabet size m and the weight
modulus W are always derived from the phase scale K; they are never
user-supplied.  Coordinates [n] are carved into per-round blocks B^l, each
split into per-phase blocks B^l_k that hold the extension indices Ext^l_k,
the compression index q^l_k (r^l in the last block) and the free directions
that actually carry edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

# Beyond this K the derived m = lcm(K..1)^2 overflows any sane packed-label
# budget; analytic ratio computations ignore the cap since they never touch m.
DEFAULT_K_CAP = 64

GLUED = "glued"
STANDALONE = "standalone"


class ParamError(ValueError):
    pass


def derive_params(K, k_cap=DEFAULT_K_CAP):
    """Return the derived pair (m, W) for an even phase scale K.

    W = lcm(K, K-1, ..., 1) and m = W^2, which makes every divisibility
    constraint on the nested sets exact: (K-s) | W and W | m/(K-s).
    """
    if K < 2 or K % 2 != 0:
        raise ParamError(f"K must be an even integer >= 2, got {K}")
    if K > k_cap:
        raise ParamError(
            f"K={K} exceeds the graph-mode cap {k_cap}: m = lcm(K..1)^2 "
            "would overflow the packed-label budget (analytic mode is exempt)"
        )
    W = math.lcm(*range(1, K + 1))
    return W * W, W


def alpha_phase_count(K):
    """Default phase count for single-gadget alpha mode: floor((1-1/e)*K)."""
    lo, hi = inv_e_enclosure()
    kt_lo = math.floor(K * (1 - hi))
    kt_hi = math.floor(K * (1 - lo))
    if kt_lo != kt_hi:  # pragma: no cover - enclosure width is ~1e-47
        raise ParamError(f"alpha phase count for K={K} is numerically ambiguous")
    return max(1, kt_lo)


def inv_e_enclosure(terms=40):
    """Certified rational enclosure (lo, hi) of 1/e via the alternating series."""
    s = Fraction(0)
    fact = 1
    for i in range(terms):
        if i:
            fact *= i
        s += Fraction((-1) ** i, fact)
    # alternating series: truncation error bounded by the next term
    err = Fraction(1, fact * terms)
    return s - err, s + err


@dataclass(frozen=True)
class ToyParams:
    """Global parameters of one instance family.

    K: even phase scale; L: number of gadget rounds (1 in standalone mode);
    n: hypercube dimension; m, W: derived alphabet / weight modulus;
    phases: number of edge-carrying phases per gadget (K/2, or the alpha
    phase count in standalone alpha mode); seed: instance RNG seed.
    """

    K: int
    L: int
    n: int
    m: int
    W: int
    mode: str = GLUED
    alpha_phases: int | None = None
    seed: int = 0

    @property
    def phases(self):
        if self.mode == STANDALONE and self.alpha_phases is not None:
            return self.alpha_phases
        return self.K // 2

    @property
    def n_labels(self):
        return self.m ** self.n

    @property
    def bits_per_coord(self):
        return max(1, (self.m - 1).bit_length())

    @classmethod
    def create(cls, K, L, n, mode=GLUED, alpha_phases=None, seed=0,
               k_cap=DEFAULT_K_CAP):
        m, W = derive_params(K, k_cap)
        if mode == STANDALONE and alpha_phases is None:
            alpha_phases = alpha_phase_count(K)
        return cls(K=K, L=L, n=n, m=m, W=W, mode=mode,
                   alpha_phases=alpha_phases, seed=seed)


@dataclass(frozen=True)
class BlockLayout:
    """Coordinate blocks for every (round, phase), plus the glue indices.

    blocks[l][k] is the tuple of coordinates of B^l_k (phases+1 blocks per
    round).  ext[l][k] and q[l][k] exist per edge-carrying phase in glued
    mode and are empty in standalone mode; r[l] sits in the last block.
    free[l][k] is the derived set of edge directions.
    """

    blocks: tuple
    ext: tuple
    q: tuple
    r: tuple
    free: tuple = field(init=False)

    def __post_init__(self):
        free = []
        for l, blks in enumerate(self.blocks):
            row = []
            for k, blk in enumerate(blks):
                used = set()
                if k < len(self.ext[l]):
                    used.update(self.ext[l][k])
                if k < len(self.q[l]) and self.q[l][k] is not None:
                    used.add(self.q[l][k])
                if k == len(blks) - 1 and self.r[l] is not None:
                    used.add(self.r[l])
                row.append(tuple(c for c in blk if c not in used))
            free.append(tuple(row))
        object.__setattr__(self, "free", tuple(free))

    @property
    def rounds(self):
        return len(self.blocks)

    def covered(self):
        out = []
        for blks in self.blocks:
            for blk in blks:
                out.extend(blk)
        return out

    def to_dict(self):
        return {
            "blocks": [[list(b) for b in row] for row in self.blocks],
            "ext": [[list(e) for e in row] for row in self.ext],
            "q": [list(row) for row in self.q],
            "r": list(self.r),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            blocks=tuple(tuple(tuple(b) for b in row) for row in d["blocks"]),
            ext=tuple(tuple(tuple(e) for e in row) for row in d["ext"]),
            q=tuple(tuple(row) for row in d["q"]),
            r=tuple(d["r"]),
        )


def _slack_table(params, slack):
    """Normalize the slack argument to slack[l][k] = |free directions|."""
    P = params.phases
    if isinstance(slack, int):
        return [[slack] * (P + 1) for _ in range(params.L)]
    slack = list(slack)
    if slack and isinstance(slack[0], int):
        if len(slack) != P + 1:
            raise ParamError(f"slack list must have {P + 1} entries per round")
        return [list(slack) for _ in range(params.L)]
    if len(slack) != params.L:
        raise ParamError(f"slack table must have {params.L} rows")
    return [list(row) for row in slack]


def minimal_layout(params, slack=1):
    """Deterministic layout assigning coordinates 0..n-1 in round/phase order.

    slack gives the number of free directions per block (int, per-phase list,
    or per-round list of per-phase lists).  Within each block the extension
    indices come first, then the compression index, then the free directions;
    the terminal block holds r first.  Unassigned trailing coordinates stay
    outside every block.
    """
    P = params.phases
    table = _slack_table(params, slack)
    glued = params.mode == GLUED
    blocks, exts, qs, rs = [], [], [], []
    c = 0
    for l in range(params.L):
        row_b, row_e, row_q = [], [], []
        r_l = None
        for k in range(P + 1):
            s = table[l][k]
            if s < 1:
                raise ParamError(f"block ({l},{k}) needs at least one free direction")
            blk = []
            if glued and k < P:
                e = tuple(range(c, c + (params.K // 2 + 1 - k)))
                c += len(e)
                q_lk = c
                c += 1
                blk.extend(e)
                blk.append(q_lk)
                row_e.append(e)
                row_q.append(q_lk)
            elif glued and k == P:
                r_l = c
                c += 1
                blk.append(r_l)
            blk.extend(range(c, c + s))
            c += s
            row_b.append(tuple(blk))
        if c > params.n:
            raise ParamError(
                f"n={params.n} too small: layout needs {c} coordinates so far"
            )
        blocks.append(tuple(row_b))
        exts.append(tuple(row_e))
        qs.append(tuple(row_q))
        rs.append(r_l)
    if c > params.n:
        raise ParamError(f"n={params.n} too small: layout needs {c} coordinates")
    return BlockLayout(blocks=tuple(blocks), ext=tuple(exts), q=tuple(qs),
                       r=tuple(rs))


@dataclass
class ValidationReport:
    violations: list
    warnings: list

    @property
    def ok(self):
        return not self.violations


def validate(params, layout=None):
    """Check the divisibility properties and (optionally) the block layout.

    Violations are returned as data, one named entry per broken constraint.
    """
    v, w = [], []
    if params.K < 2 or params.K % 2:
        v.append(f"K={params.K} must be even and >= 2")
    if params.m < 2:
        v.append(f"m={params.m} must be >= 2")
    if params.mode == GLUED:
        if params.L < 2 or params.L % 2:
            v.append(f"L={params.L} must be even and >= 2 in glued mode")
    elif params.mode == STANDALONE:
        if params.L != 1:
            v.append(f"standalone mode requires L=1, got L={params.L}")
        if params.alpha_phases is not None and not (
            1 <= params.alpha_phases <= params.K
        ):
            v.append(f"alpha phase count {params.alpha_phases} outside [1, K]")
    else:
        v.append(f"unknown mode {params.mode!r}")
    if params.L > params.K:
        w.append(
            f"L={params.L} > K={params.K}: O(1/K) slack terms lose their "
            "asymptotic guarantee"
        )
    for s in range(params.phases):
        lam = params.K - s
        if params.W % lam:
            v.append(f"(K-s) does not divide W for s={s}: {lam} | {params.W} fails")
            continue
        if params.m % lam or (params.m // lam) % params.W:
            v.append(
                f"W does not divide m/(K-s) for s={s}: "
                f"{params.W} | {params.m}/{lam} fails"
            )
    if layout is not None:
        v.extend(_validate_layout(params, layout))
    return ValidationReport(v, w)


def _validate_layout(params, layout):
    v = []
    P = params.phases
    glued = params.mode == GLUED
    if layout.rounds != params.L:
        v.append(f"layout has {layout.rounds} rounds, expected L={params.L}")
        return v
    seen = {}
    for l in range(params.L):
        if len(layout.blocks[l]) != P + 1:
            v.append(f"round {l} has {len(layout.blocks[l])} blocks, expected {P + 1}")
            continue
        for k, blk in enumerate(layout.blocks[l]):
            for c in blk:
                if not 0 <= c < params.n:
                    v.append(f"coordinate {c} of block ({l},{k}) outside [0, n)")
                if c in seen:
                    v.append(f"blocks not disjoint: coordinate {c} in "
                             f"{seen[c]} and ({l},{k})")
                seen[c] = (l, k)
            if not layout.free[l][k]:
                v.append(f"block ({l},{k}) has no free direction")
        if glued:
            for k in range(P):
                e = layout.ext[l][k]
                if len(e) != params.K // 2 + 1 - k:
                    v.append(
                        f"Ext({l},{k}) has {len(e)} indices, expected "
                        f"{params.K // 2 + 1 - k}"
                    )
                if any(c not in layout.blocks[l][k] for c in e):
                    v.append(f"Ext({l},{k}) not inside its block")
                q = layout.q[l][k]
                if q in e or q not in layout.blocks[l][k]:
                    v.append(f"q({l},{k}) must lie in its block outside Ext")
            if layout.r[l] not in layout.blocks[l][P]:
                v.append(f"r({l}) must lie in the terminal block")
    return v


def params_from_config(cfg):
    """Build (params, layout) from the JSON config object.

    Schema: {"K":2,"L":2,"n":12,"slack":1,"seed":7,"mode":"glued|standalone",
    "alphaPhases":null}.  m and W are always derived.
    """
    if isinstance(cfg, str):
        cfg = json.loads(cfg)
    params = ToyParams.create(
        K=cfg["K"],
        L=cfg.get("L", 1 if cfg.get("mode") == STANDALONE else 2),
        n=cfg["n"],
        mode=cfg.get("mode", GLUED),
        alpha_phases=cfg.get("alphaPhases"),
        seed=cfg.get("seed", 0),
    )
    layout = minimal_layout(params, cfg.get("slack", 1))
    report = validate(params, layout)
    if not report.ok:
        raise ParamError("invalid config: " + "; ".join(report.violations))
    return params, layout


def params_to_config(params, slack=None):
    cfg = {
        "K": params.K,
        "L": params.L,
        "n": params.n,
        "mode": params.mode,
        "alphaPhases": params.alpha_phases,
        "seed": params.seed,
    }
    if slack is not None:
        cfg["slack"] = slack
    return cfg
