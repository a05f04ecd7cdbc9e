"""Sampled hard instances: vertex registry, edge stream, OPT, (de)serialization.

An instance is L gadgets over disjoint coordinate blocks plus the glue
tables identifying S^l with T_*^{l-1}.  The only randomness is the J
vectors, drawn uniformly per block from the free directions.  Edges are
never stored: the stream regenerates deterministically from the instance.

Vertex sides follow the bipartition P = union of even-round T sides,
Q = S^0 plus the odd-round T sides (plus, in standalone mode, the auxiliary
partner set matched onto T_*).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import gadget as gd
from . import glue as gl
from . import hypercube as hc
from .params import STANDALONE, BlockLayout, ToyParams, validate

MAGIC = b"KVVI"
FORMAT_VERSION = 1

KIND_T = 0
KIND_S = 1
KIND_AUX = 2

AUX_GROUP = ("aux", 0, -1)


@dataclass(frozen=True)
class VertexId:
    kind: int
    ell: int
    layer: int
    label: int

    def packed(self, params):
        lb = params.bits_per_coord * params.n
        return (((self.kind << 8 | self.ell) << 6 | self.layer) << lb) | self.label

    @classmethod
    def from_packed(cls, value, params):
        lb = params.bits_per_coord * params.n
        label = value & ((1 << lb) - 1)
        rest = value >> lb
        layer = rest & 63
        rest >>= 6
        return cls(kind=rest >> 8, ell=rest & 255, layer=layer, label=label)


@dataclass(frozen=True)
class StreamedEdge:
    u: VertexId
    v: VertexId
    ell: int
    k: int
    j: int


class HardInstance:
    def __init__(self, params, layout, J, seed):
        self.params = params
        self.layout = layout
        self.J = tuple(tuple(row) for row in J)
        self.seed = seed
        self.specs = [gd.GadgetSpec(params, layout, l, self.J[l])
                      for l in range(params.L)]
        self.glue = {l: gl.build_glue_tables(params, layout, l,
                                             self.J[l - 1], self.J[l])
                     for l in range(1, params.L)}
        self.space = 1 << (params.bits_per_coord * params.n)

    # --- vertex bookkeeping -------------------------------------------------

    @property
    def standalone(self):
        return self.params.mode == STANDALONE

    @property
    def n_labels(self):
        return self.params.n_labels

    def p_classes(self):
        """(kind, ell, layer) tuples of the P side, in dense-index order."""
        return [(KIND_T, l, 0) for l in range(0, self.params.L, 2)]

    def q_classes(self):
        out = [(KIND_S, 0, k) for k in range(self.params.phases)]
        if self.standalone:
            out.append((KIND_AUX, 0, 0))
        out.extend((KIND_T, l, 0) for l in range(1, self.params.L, 2))
        return out

    @property
    def p_space(self):
        return len(self.p_classes()) * self.space

    @property
    def q_space(self):
        return len(self.q_classes()) * self.space

    def n_p_vertices(self):
        return len(self.p_classes()) * self.n_labels

    def n_q_vertices(self):
        total = 0
        for kind, l, k in self.q_classes():
            if kind == KIND_S:
                total += hc.count(gd.set_Sk(self.specs[0], k), self.params)
            elif kind == KIND_AUX:
                total += hc.count(gd.set_terminal(self.specs[0]), self.params)
            else:
                total += self.n_labels
        return total

    def _class_base(self, classes, kind, ell, layer):
        return classes.index((kind, ell, layer)) * self.space

    def p_index(self, ell, label):
        return self._class_base(self.p_classes(), KIND_T, ell, 0) + label

    def q_index(self, kind, ell, layer, label):
        return self._class_base(self.q_classes(), kind, ell, layer) + label

    def vertex_of_p_index(self, idx):
        kind, l, k = self.p_classes()[idx // self.space]
        return VertexId(kind, l, k, idx % self.space)

    def vertex_of_q_index(self, idx):
        kind, l, k = self.q_classes()[idx // self.space]
        return VertexId(kind, l, k, idx % self.space)

    # --- stream -------------------------------------------------------------

    def stream_groups(self):
        """Ordered (ell, k, j) plan: rounds ascending, phases ascending,
        free directions ascending; the standalone terminal matching last."""
        plan = []
        for l in range(self.params.L):
            for k in range(self.params.phases):
                for j in self.layout.free[l][k]:
                    plan.append((l, k, j))
        if self.standalone:
            plan.append(AUX_GROUP)
        return plan

    def group_edge_count(self, group):
        if group[0] == "aux":
            return hc.count(gd.set_terminal(self.specs[0]), self.params)
        l, k, j = group
        return gd.edge_count(self.specs[l], k, j)

    def stream_edge_count(self):
        return sum(self.group_edge_count(g) for g in self.stream_groups())

    def group_batches(self, group, batch_lines=1 << 19):
        """Yield (u_idx, v_idx, u_label, v_label) int64 arrays for one group,
        in stream order.  u indexes the Q/P dense space of the arriving side,
        v the opposite side (see edge_sides)."""
        p = self.params
        if group[0] == "aux":
            tstar = gd.set_terminal(self.specs[0])
            labels = hc.members(tstar, p)
            for lo in range(0, len(labels), batch_lines):
                t = labels[lo:lo + batch_lines]
                u = self.q_index(KIND_AUX, 0, 0, 0) + t
                v = self.p_index(0, 0) + t
                yield u, v, t.copy(), t
            return
        l, k, j = group
        spec = self.specs[l]
        for rep, s_vals, t_vals in _line_batches(spec, k, j, batch_lines):
            n_s, n_t = s_vals.shape[1], t_vals.shape[1]
            b = p.bits_per_coord
            shift = np.int64(j * b)
            s_lbl = rep[:, None, None] + (s_vals[:, :, None] << shift)
            t_lbl = rep[:, None, None] + (t_vals[:, None, :] << shift)
            s_lbl = np.broadcast_to(s_lbl, (len(rep), n_s, n_t)).reshape(-1)
            t_lbl = np.broadcast_to(t_lbl, (len(rep), n_s, n_t)).reshape(-1)
            u_lbl = s_lbl
            if l == 0:
                u = self.q_index(KIND_S, 0, k, 0) + u_lbl
            else:
                u_lbl = gl.tau_apply_array(self.glue[l], k, s_lbl, p)
                if (l - 1) % 2 == 0:
                    u = self.p_index(l - 1, 0) + u_lbl
                else:
                    u = self.q_index(KIND_T, l - 1, 0, 0) + u_lbl
            if l % 2 == 0:
                v = self.p_index(l, 0) + t_lbl
            else:
                v = self.q_index(KIND_T, l, 0, 0) + t_lbl
            yield u, v, u_lbl, t_lbl

    def edge_sides(self, group):
        """('P'|'Q') sides of (u, v) for a group's edges."""
        if group[0] == "aux":
            return "Q", "P"
        l, k, j = group
        if l == 0:
            u_side = "Q"
        else:
            u_side = "P" if (l - 1) % 2 == 0 else "Q"
        v_side = "P" if l % 2 == 0 else "Q"
        return u_side, v_side

    def stream(self, batch_lines=1 << 19, shuffle_seed=None):
        """Per-edge iterator of StreamedEdge (explicit-cap instances only).

        The default order within a phase is the deterministic line-cover
        order.  The model treats within-phase order as arbitrary, so a
        seeded shuffle of each phase is available via shuffle_seed; phase
        boundaries are never crossed.
        """
        if self.n_labels > hc.EXPLICIT_CAP:
            raise hc.CapExceeded("per-edge streaming above the explicit cap; "
                                 "use group_batches")
        rng = (np.random.default_rng(shuffle_seed)
               if shuffle_seed is not None else None)
        for phase, groups in self._phase_plan():
            edges = []
            for group in groups:
                u_side, v_side = self.edge_sides(group)
                for u, v, _ul, _vl in self.group_batches(group, batch_lines):
                    edges.extend(
                        (ui, vi, u_side, v_side, group)
                        for ui, vi in zip(u.tolist(), v.tolist()))
            if rng is not None:
                rng.shuffle(edges)
            for ui, vi, u_side, v_side, group in edges:
                uu = (self.vertex_of_p_index(ui) if u_side == "P"
                      else self.vertex_of_q_index(ui))
                vv = (self.vertex_of_p_index(vi) if v_side == "P"
                      else self.vertex_of_q_index(vi))
                if group[0] == "aux":
                    yield StreamedEdge(uu, vv, 0, self.params.phases, -1)
                else:
                    yield StreamedEdge(uu, vv, group[0], group[1], group[2])

    def _phase_plan(self):
        """Stream groups bucketed by phase (round, k); aux last, alone."""
        plan = []
        for group in self.stream_groups():
            key = ("aux",) if group[0] == "aux" else (group[0], group[1])
            if plan and plan[-1][0] == key:
                plan[-1][1].append(group)
            else:
                plan.append((key, [group]))
        return plan

    # --- analytic optimum ---------------------------------------------------

    def opt_constructive_size(self, include_round0=None):
        """Size of the analytic matching: per-gadget constructive matchings
        pushed through tau, plus the terminal matching in standalone mode.

        include_round0 controls whether the round-0 gadget's matching counts;
        default follows the stream content (round 0 is streamed, so it does).
        """
        if include_round0 is None:
            include_round0 = True
        start = 0 if include_round0 else 1
        total = sum(gd.matching_size(self.specs[l])
                    for l in range(start, self.params.L))
        if self.standalone:
            total += hc.count(gd.set_terminal(self.specs[0]), self.params)
        return total

    def opt_matching(self, include_round0=True):
        """Explicit constructive matching edges as (P-index, Q-index) arrays.

        Union over rounds of tau^l(M^l) (round 0 included by default since
        its edges are streamed); in standalone mode M^0 plus the terminal
        matching.  Explicit-cap instances only.
        """
        p = self.params
        ps, qs = [], []
        start = 0 if (include_round0 or self.standalone) else 1
        for l in range(start, self.params.L):
            for e in gd.gadget_matching(self.specs[l]):
                if l == 0:
                    u = self.q_index(KIND_S, 0, e.k, e.s_label)
                else:
                    lbl = gl.tau_apply(self.glue[l], e.k, e.s_label, p)
                    if (l - 1) % 2 == 0:
                        u = self.p_index(l - 1, lbl)
                    else:
                        u = self.q_index(KIND_T, l - 1, 0, lbl)
                if l % 2 == 0:
                    ps.append(self.p_index(l, e.t_label))
                    qs.append(u)
                else:
                    ps.append(u)
                    qs.append(self.q_index(KIND_T, l, 0, e.t_label))
        if self.standalone:
            tstar = hc.members(gd.set_terminal(self.specs[0]), p)
            for t in tstar.tolist():
                ps.append(self.p_index(0, t))
                qs.append(self.q_index(KIND_AUX, 0, 0, t))
        return np.asarray(ps, dtype=np.int64), np.asarray(qs, dtype=np.int64)

    # --- serialization ------------------------------------------------------

    def to_header(self):
        return {
            "format": "kvvstream-instance",
            "version": FORMAT_VERSION,
            "params": {
                "K": self.params.K, "L": self.params.L, "n": self.params.n,
                "m": self.params.m, "W": self.params.W,
                "mode": self.params.mode,
                "alpha_phases": self.params.alpha_phases,
                "seed": self.params.seed,
            },
            "layout": self.layout.to_dict(),
            "J": [list(row) for row in self.J],
            "glue": [self.glue[l].to_dict() for l in sorted(self.glue)],
            "seed": self.seed,
        }

    def save(self, path):
        payload = json.dumps(self.to_header(), sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<IQ", FORMAT_VERSION, len(payload)))
            fh.write(payload)

    def __eq__(self, other):
        return (isinstance(other, HardInstance)
                and self.to_header() == other.to_header())


def sample_instance(params, layout, seed=None):
    """Draw J^l_k uniformly and independently from the free directions.

    Deterministic in (params, layout, seed); Ext/q/r are fixed by the layout
    before J is drawn.
    """
    if seed is None:
        seed = params.seed
    report = validate(params, layout)
    if not report.ok:
        raise ValueError("invalid parameters: " + "; ".join(report.violations))
    rng = np.random.default_rng(seed)
    J = []
    for l in range(params.L):
        row = []
        for k in range(params.phases + 1):
            free = layout.free[l][k]
            row.append(int(free[rng.integers(len(free))]))
        J.append(tuple(row))
    inst = HardInstance(params, layout, J, seed)
    for spec in inst.specs:
        assert not spec.j_violations()
    return inst


def load(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not an instance file (magic {magic!r})")
        raw = fh.read(12)
        if len(raw) < 12:
            raise ValueError("truncated instance file header")
        version, length = struct.unpack("<IQ", raw)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported instance format version {version}")
        payload = fh.read(length)
        if len(payload) < length:
            raise ValueError("truncated instance file payload")
    head = json.loads(payload)
    pp = head["params"]
    params = ToyParams(K=pp["K"], L=pp["L"], n=pp["n"], m=pp["m"], W=pp["W"],
                       mode=pp["mode"], alpha_phases=pp["alpha_phases"],
                       seed=pp["seed"])
    layout = BlockLayout.from_dict(head["layout"])
    # glue tables are re-derived from (params, layout, J); the stored copy is
    # self-description, and a divergence (e.g. a tampered J entry) is the
    # verification suites' job to name, not a load failure
    return HardInstance(params, layout, [tuple(r) for r in head["J"]],
                        head["seed"])


def _line_batches(spec, k, j, batch_lines):
    """Vectorized line enumeration for phase (k, j): yields (rep, s_vals,
    t_vals) where rep is a batch of representative labels (coordinate j
    zeroed, ascending) and s_vals/t_vals the per-line coordinate values,
    each row ascending."""
    p = spec.params
    b = p.bits_per_coord
    tk = gd.set_Tk(spec, k).interval_map()
    coords = [c for c in range(p.n) if c != j]
    radix = [tk[c][0][1] if c in tk else p.m for c in coords]
    total = 1
    for r in radix:
        total *= r
    lam = p.K - k
    cut = gd.low_cut(p, k)
    n_res = p.W // lam
    res = np.arange(n_res, dtype=np.int64)
    t_base = np.arange(cut, p.m, dtype=np.int64)
    # little-endian digit order: coordinate 0 least significant, matching
    # ascending packed-label order of the representatives
    reps_weights = []
    acc = 1
    for r in radix:
        reps_weights.append(acc)
        acc *= r
    for lo in range(0, total, batch_lines):
        ranks = np.arange(lo, min(lo + batch_lines, total), dtype=np.int64)
        rep = np.zeros_like(ranks)
        wt = np.zeros_like(ranks)
        for c, r, w in zip(coords, radix, reps_weights):
            digit = (ranks // np.int64(w)) % np.int64(r)
            rep += digit << np.int64(c * b)
            wt += digit
        # S values on each line: v < cut with (wt + v) mod W in [0, n_res)
        v0 = (res[None, :] - wt[:, None]) % np.int64(p.W)
        mult = np.arange(cut // p.W, dtype=np.int64) * np.int64(p.W)
        s_vals = (v0[:, None, :] + mult[None, :, None]).reshape(len(ranks), -1)
        s_vals.sort(axis=1)
        t_vals = np.broadcast_to(t_base, (len(ranks), len(t_base)))
        yield rep, s_vals, t_vals


def export_stream_text(instance, fh):
    """DIMACS-like text export: `p bipartite |P| |Q| #edges` then
    `e <uId> <vId> <l> <k> <j>` lines, bit-exact across platforms."""
    p = instance.params
    fh.write(f"p bipartite {instance.n_p_vertices()} "
             f"{instance.n_q_vertices()} {instance.stream_edge_count()}\n")
    for e in instance.stream():
        fh.write(f"e {e.u.packed(p)} {e.v.packed(p)} {e.ell} {e.k} {e.j}\n")


def export_vertices_text(instance, fh):
    """Vertex registry export: `v <id> <side> <l> <layer> <packedLabel>`."""
    p = instance.params
    for side, classes in (("P", instance.p_classes()),
                          ("Q", instance.q_classes())):
        for kind, l, k in classes:
            if kind == KIND_S:
                labels = hc.members(gd.set_Sk(instance.specs[l], k), p)
            elif kind == KIND_AUX:
                labels = hc.members(gd.set_terminal(instance.specs[l]), p)
            else:
                labels = hc.members(hc.ConstraintSystem(), p)
            for lbl in labels.tolist():
                vid = VertexId(kind, l, k, lbl)
                fh.write(f"v {vid.packed(p)} {side} {l} {k} {lbl}\n")
