"""Nearly-orthogonal constant-weight binary vector families.

Vectors of dimension n_f and Hamming weight w = (eps/2) * n_f, one support
element per block of a fixed partition of [n_f] into w equal blocks, with
every pairwise inner product strictly below eps * w.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class FVectorFamily:
    dim: int
    weight: int
    eps: Fraction
    vectors: tuple  # sorted support tuples, one index per block

    @property
    def block_size(self):
        return self.dim // self.weight

    def blocks(self):
        bs = self.block_size
        return [range(s * bs, (s + 1) * bs) for s in range(self.weight)]

    def to_json(self):
        return json.dumps({
            "dim": self.dim, "weight": self.weight,
            "eps": [self.eps.numerator, self.eps.denominator],
            "vectors": [list(v) for v in self.vectors],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(dim=d["dim"], weight=d["weight"],
                   eps=Fraction(d["eps"][0], d["eps"][1]),
                   vectors=tuple(tuple(v) for v in d["vectors"]))


def _weight_of(n_f, eps):
    w = Fraction(eps) * n_f / 2
    if w.denominator != 1:
        raise ValueError(f"(eps/2)*n_f = {w} is not an integer")
    w = int(w)
    if w < 1 or n_f % w:
        raise ValueError(f"weight {w} must be >= 1 and divide n_f = {n_f}")
    return w


def verify_family(family):
    """None when valid, else (kind, detail) naming the first violation."""
    bs = family.block_size
    seen = set()
    for i, vec in enumerate(family.vectors):
        if len(vec) != family.weight:
            return ("weight", i)
        for s, idx in enumerate(sorted(vec)):
            if not (s * bs <= idx < (s + 1) * bs):
                return ("block", i)
        if vec in seen:
            return ("pair", (family.vectors.index(vec), i))
        seen.add(vec)
    strict_bound = Fraction(family.eps) * family.weight
    vecs = [set(v) for v in family.vectors]
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            if len(vecs[i] & vecs[j]) >= strict_bound:
                return ("pair", (i, j))
    return None


def build_family(n_f, eps, target_size, seed=0, max_retries=200):
    """Sample a family of target_size vectors, repairing violations.

    Each vector takes one uniform element per block; after a full draw,
    only vectors involved in an over-large inner product are resampled.
    Raises after max_retries rounds, reporting the best valid prefix size.
    """
    eps = Fraction(eps)
    w = _weight_of(n_f, eps)
    bs = n_f // w
    rng = np.random.default_rng(seed)
    strict_bound = eps * w

    def draw():
        return tuple(int(s * bs + rng.integers(bs)) for s in range(w))

    vecs = [draw() for _ in range(target_size)]
    for attempt in range(max_retries):
        offenders = set()
        sets = [frozenset(v) for v in vecs]
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                # exact duplicates are rejected regardless of the dot bound
                if sets[i] == sets[j] or len(sets[i] & sets[j]) >= strict_bound:
                    offenders.add(j)
        if not offenders:
            fam = FVectorFamily(dim=n_f, weight=w, eps=eps,
                                vectors=tuple(vecs))
            bad = verify_family(fam)
            assert bad is None, bad
            return fam
        for j in offenders:
            vecs[j] = draw()
    raise RuntimeError(
        f"no valid family of size {target_size} after {max_retries} rounds "
        f"(n_f={n_f}, eps={eps}); try a smaller target")


def pairwise_dots(family):
    """All C(|F|, 2) inner products as an int array (for statistics)."""
    vecs = [set(v) for v in family.vectors]
    out = []
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            out.append(len(vecs[i] & vecs[j]))
    return np.asarray(out, dtype=np.int64)
