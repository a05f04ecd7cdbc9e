"""Labels on [m]^n, exact counting for constraint-defined subsets, and lines.

A label is a point of [m]^n packed into a single integer, ceil(log2 m) bits
per coordinate, coordinate 0 in the least significant bits.  All set sizes
are exact Python integers; no floating point enters any cardinality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Above this many labels a universe is "streaming only": no global
# enumeration, only count/contains/line-local operations.
EXPLICIT_CAP = 2 ** 25


class CapExceeded(RuntimeError):
    pass


def coord_of(label, j, params):
    b = params.bits_per_coord
    return (int(label) >> (j * b)) & ((1 << b) - 1)


def with_coord(label, j, value, params):
    b = params.bits_per_coord
    mask = (1 << b) - 1
    return (int(label) & ~(mask << (j * b))) | (int(value) << (j * b))


def pack(coords, params):
    b = params.bits_per_coord
    out = 0
    for j, c in enumerate(coords):
        if not 0 <= c < params.m:
            raise ValueError(f"coordinate {j} value {c} outside [0, m)")
        out |= int(c) << (j * b)
    return out


def unpack(label, params):
    b = params.bits_per_coord
    mask = (1 << b) - 1
    return tuple((int(label) >> (j * b)) & mask for j in range(params.n))


def weight(label, params):
    """wt(x) = sum of the coordinates of x."""
    return sum(unpack(label, params))


def coords_array(labels, j, params):
    b = params.bits_per_coord
    return (labels >> np.int64(j * b)) & np.int64((1 << b) - 1)


def weights_array(labels, params):
    out = np.zeros_like(labels)
    for j in range(params.n):
        out += coords_array(labels, j, params)
    return out


def fits_int64(params):
    return params.bits_per_coord * params.n <= 62


@dataclass(frozen=True)
class ConstraintSystem:
    """Per-coordinate disjoint half-open intervals plus an optional
    weight-residue set mod W.

    Unconstrained coordinates are absent from the interval map.  The empty
    system denotes the full cube.
    """

    intervals: tuple = ()  # tuple of (coord, ((lo, hi), ...)) sorted by coord
    residues: frozenset | None = None

    @classmethod
    def make(cls, intervals=None, residues=None):
        items = []
        for c, ivs in sorted((intervals or {}).items()):
            if isinstance(ivs[0], int):
                ivs = (tuple(ivs),)
            ivs = tuple(sorted((int(lo), int(hi)) for lo, hi in ivs))
            for (lo, hi), (lo2, _hi2) in zip(ivs, ivs[1:]):
                if lo2 < hi:
                    raise ValueError(f"overlapping intervals on coordinate {c}")
            if any(lo >= hi for lo, hi in ivs):
                raise ValueError(f"empty interval on coordinate {c}")
            items.append((int(c), ivs))
        res = None if residues is None else frozenset(int(r) for r in residues)
        return cls(intervals=tuple(items), residues=res)

    def interval_map(self):
        return dict(self.intervals)

    def restrict(self, coord, lo, hi):
        """Intersect with the constraint coord in [lo, hi)."""
        ivs = self.interval_map()
        cur = ivs.get(coord, ((0, None),))
        new = []
        for clo, chi in cur:
            a = max(clo, lo)
            b = hi if chi is None else min(chi, hi)
            if a < b:
                new.append((a, b))
        if not new:
            raise ValueError(f"restriction empties coordinate {coord}")
        ivs[coord] = tuple(new)
        return ConstraintSystem.make(ivs, self.residues)

    def mass(self, coord, params):
        ivs = self.interval_map().get(coord)
        if ivs is None:
            return params.m
        return sum(hi - lo for lo, hi in ivs)

    def constrained(self):
        return tuple(c for c, _ in self.intervals)


def validate_cs(cs, params):
    errs = []
    for c, ivs in cs.intervals:
        if not 0 <= c < params.n:
            errs.append(f"coordinate {c} out of range")
        for lo, hi in ivs:
            if not (0 <= lo < hi <= params.m):
                errs.append(f"interval [{lo},{hi}) on coordinate {c} outside [0, m)")
    if cs.residues is not None:
        if not cs.residues:
            errs.append("empty residue set")
        if any(not 0 <= r < params.W for r in cs.residues):
            errs.append("residue outside [0, W)")
    return errs


def count(cs, params):
    """Exact cardinality of {x in [m]^n : cs holds}.

    With a residue constraint the count is (prod of interval masses) *
    m^{#free} * |residues| / W, valid because W | m makes the weight of any
    fully free coordinate equidistribute mod W.  Requires at least one free
    coordinate in that case; small universes fall back to enumeration.
    """
    masses = [cs.mass(c, params) for c in cs.constrained()]
    n_free = params.n - len(masses)
    base = 1
    for t in masses:
        base *= t
    if cs.residues is None:
        return base * params.m ** n_free
    if n_free == 0:
        if params.n_labels <= EXPLICIT_CAP:
            return int(len(members(cs, params)))
        raise CapExceeded(
            "residue-constrained count with no free coordinate needs "
            "enumeration, and the universe exceeds the explicit cap"
        )
    total = base * params.m ** n_free * len(cs.residues)
    assert total % params.W == 0
    return total // params.W


def contains(cs, label, params):
    for c, ivs in cs.intervals:
        v = coord_of(label, c, params)
        if not any(lo <= v < hi for lo, hi in ivs):
            return False
    if cs.residues is not None:
        if weight(label, params) % params.W not in cs.residues:
            return False
    return True


def _coord_values(cs, params):
    """Allowed values per coordinate 0..n-1 as numpy arrays."""
    ivs = cs.interval_map()
    vals = []
    for c in range(params.n):
        if c in ivs:
            vals.append(np.concatenate(
                [np.arange(lo, hi, dtype=np.int64) for lo, hi in ivs[c]]))
        else:
            vals.append(np.arange(params.m, dtype=np.int64))
    return vals

def members(cs, params):
    """All satisfying labels as a sorted int64 array (explicit mode only)."""
    if not fits_int64(params):
        raise CapExceeded("labels do not fit int64; explicit mode unavailable")
    vals = _coord_values(cs, params)
    total = 1
    for v in vals:
        total *= len(v)
    if total > EXPLICIT_CAP:
        raise CapExceeded(f"{total} candidate labels exceed the explicit cap")
    b = params.bits_per_coord
    out = np.zeros(1, dtype=np.int64)
    for j, v in enumerate(vals):
        shifted = v << np.int64(j * b)
        out = (out[:, None] + shifted[None, :]).ravel()
    if cs.residues is not None:
        w = weights_array(out, params) % params.W
        keep = np.isin(w, np.fromiter(cs.residues, dtype=np.int64))
        out = out[keep]
    out.sort()
    return out


def members_mask(cs, params):
    """Boolean mask over the dense packed-label space (requires m = 2^b)."""
    b = params.bits_per_coord
    if params.m != 1 << b:
        raise CapExceeded("dense masks need a power-of-two alphabet")
    size = params.m ** params.n
    if size > EXPLICIT_CAP:
        raise CapExceeded(f"universe of {size} labels exceeds the explicit cap")
    mask = np.ones(size, dtype=bool)
    labels = np.arange(size, dtype=np.int64)
    for c, ivs in cs.intervals:
        v = coords_array(labels, c, params)
        ok = np.zeros(size, dtype=bool)
        for lo, hi in ivs:
            ok |= (v >= lo) & (v < hi)
        mask &= ok
    if cs.residues is not None:
        w = weights_array(labels, params) % params.W
        mask &= np.isin(w, np.fromiter(cs.residues, dtype=np.int64))
    return mask


@dataclass(frozen=True)
class Line:
    """Axis-aligned line: the m labels agreeing with rep off coordinate j."""

    direction: int
    rep: int  # representative label with coordinate j zeroed

    def labels(self, params):
        b = params.bits_per_coord
        base = np.int64(self.rep)
        return base + (np.arange(params.m, dtype=np.int64) << np.int64(
            self.direction * b))


def line_through(label, j, params):
    return Line(direction=j, rep=with_coord(label, j, 0, params))


def line_cover(j, region, params):
    """Disjoint lines in direction j covering the region (a ConstraintSystem).

    Lines live in the full cube; representatives are the region's members
    with coordinate j cleared, deduplicated, in ascending label order.
    """
    ivs = region.interval_map()
    probe = dict(ivs)
    probe.pop(j, None)
    reps_cs = ConstraintSystem.make(probe, None)
    reps = members(reps_cs.restrict(j, 0, 1), params)
    return [Line(direction=j, rep=int(r)) for r in reps]
