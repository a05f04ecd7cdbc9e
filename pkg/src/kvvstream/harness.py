"""Budgeted streaming execution: algorithms, enforcement, experiment records.

The model: an algorithm sees each streamed edge once, commits to keeping or
discarding it irrevocably, may keep at most `budget` edges in total, and
must output a matching inside its kept set.  The harness enforces the
budget, validates the output matching against the kept set and the true
edge set, checks the vertex-cover bound on every run, and reports exact
metrics.

Below the enumeration cap any BudgetedAlgorithm runs through the generic
batch loop.  Above it the built-ins run through structure-aware streaming
paths (a fused numba kernel when available, a vectorized hypergeometric
fallback otherwise) that realize the same keep distribution without
materializing edges.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kn
from . import gadget as gd
from . import hypercube as hc
from . import predecessor as pr
from .matching import BipartiteGraph, max_matching, validate_matching


class BudgetViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class PublicParams:
    """Everything an algorithm may see: parameters, layout, stream plan and
    exact per-group edge counts -- but never the sampled J directions."""

    params: object
    layout: object
    groups: tuple
    group_counts: tuple
    total_edges: int
    p_space: int
    q_space: int

    @classmethod
    def of(cls, instance):
        groups = tuple(instance.stream_groups())
        counts = tuple(instance.group_edge_count(g) for g in groups)
        return cls(params=instance.params, layout=instance.layout,
                   groups=groups, group_counts=counts,
                   total_edges=sum(counts), p_space=instance.p_space,
                   q_space=instance.q_space)


class BudgetedAlgorithm:
    """Interface: init with public data, decide per edge (or per batch),
    finalize to a matching over kept edges (None = let the solver do it)."""

    name = "base"
    j_aware = False

    def init(self, public, budget, seed):
        self.public = public
        self.budget = budget
        self.seed = seed

    def on_edge(self, edge):
        raise NotImplementedError

    def on_batch(self, group, u, v, u_lbl, v_lbl):
        """Vectorized decision; default falls back to per-edge calls."""
        keep = np.zeros(len(u), dtype=bool)
        for i in range(len(u)):
            keep[i] = bool(self.on_edge((group, int(u[i]), int(v[i]))))
        return keep

    def finalize(self):
        return None


class StoreAll(BudgetedAlgorithm):
    name = "store_all"

    def on_batch(self, group, u, v, u_lbl, v_lbl):
        return np.ones(len(u), dtype=bool)


class GreedyMatching(BudgetedAlgorithm):
    """Maximal matching online: keep an edge iff both endpoints are free."""

    name = "greedy"

    def init(self, public, budget, seed):
        super().init(public, budget, seed)
        self._mu = {"P": kn.make_bitset(public.p_space),
                    "Q": kn.make_bitset(public.q_space)}
        self._pairs = ([], [])

    def on_batch(self, group, u, v, u_lbl, v_lbl):
        u_side, v_side = self._sides(group)
        keep = np.zeros(len(u), dtype=bool)
        kn.greedy_batch(np.asarray(u), np.asarray(v), self._mu[u_side],
                        self._mu[v_side], keep)
        ku, kv = np.asarray(u)[keep], np.asarray(v)[keep]
        if u_side == "P":
            self._pairs[0].append(ku)
            self._pairs[1].append(kv)
        else:
            self._pairs[0].append(kv)
            self._pairs[1].append(ku)
        return keep

    def _sides(self, group):
        if group[0] == "aux":
            return "Q", "P"
        l = group[0]
        return ("Q" if l == 0 else ("P" if (l - 1) % 2 == 0 else "Q"),
                "P" if l % 2 == 0 else "Q")

    def finalize(self):
        """Matched pairs, already normalized to (P-index, Q-index)."""
        u = np.concatenate(self._pairs[0]) if self._pairs[0] else np.empty(0, np.int64)
        v = np.concatenate(self._pairs[1]) if self._pairs[1] else np.empty(0, np.int64)
        return u, v


class UniformSample(BudgetedAlgorithm):
    """Uniform budget-sized edge subset via sequential selection sampling.

    The stream length is public, so keeping each edge with probability
    (remaining quota)/(remaining stream) realizes a uniform subset of size
    min(budget, total); every edge is kept with probability budget/total.
    No kept edge is ever evicted, as the model demands.
    """

    name = "uniform"

    def init(self, public, budget, seed):
        super().init(public, budget, seed)
        self._rng = np.random.default_rng(seed)
        self._s_rem = min(budget, public.total_edges)
        self._t_rem = public.total_edges

    def on_batch(self, group, u, v, u_lbl, v_lbl):
        n = len(u)
        take = self._rng.hypergeometric(self._s_rem,
                                        self._t_rem - self._s_rem, n) \
            if 0 < self._s_rem < self._t_rem else (n if self._s_rem else 0)
        take = int(min(take, n))
        keep = np.zeros(n, dtype=bool)
        if take:
            keep[self._rng.choice(n, size=take, replace=False)] = True
        self._s_rem -= take
        self._t_rem -= n
        return keep


class Clairvoyant(BudgetedAlgorithm):
    """J-aware reference: keeps exactly the edges in the planted directions
    J^l_k (which contain the constructive matching).  Not admissible for
    hardness claims; it exists as the upper envelope."""

    name = "clairvoyant"
    j_aware = True

    def __init__(self, J):
        self.J = tuple(tuple(r) for r in J)

    def init(self, public, budget, seed):
        super().init(public, budget, seed)
        self._kept = 0
        self._clipped = False

    def on_batch(self, group, u, v, u_lbl, v_lbl):
        if group[0] == "aux":
            keep = np.ones(len(u), dtype=bool)
        else:
            l, k, j = group
            keep = np.full(len(u), j == self.J[l][k], dtype=bool)
        cnt = int(keep.sum())
        if self._kept + cnt > self.budget:
            room = self.budget - self._kept
            idx = np.flatnonzero(keep)[room:]
            keep[idx] = False
            cnt = self.budget - self._kept
            self._clipped = True
        self._kept += cnt
        return keep

    def finalize(self):
        """The constructive matching, rebuilt from the public data plus the
        planted J (all its edges are special, hence kept when unclipped);
        under a clipped budget the solver handles the kept subset instead."""
        if self._clipped:
            return None
        from .instance import HardInstance
        inst = HardInstance(self.public.params, self.public.layout, self.J,
                            seed=0)
        return inst.opt_matching()


def make_algorithm(name, instance=None):
    if name == "greedy":
        return GreedyMatching()
    if name == "uniform":
        return UniformSample()
    if name == "store_all":
        return StoreAll()
    if name == "clairvoyant":
        if instance is None:
            raise ValueError("clairvoyant needs the instance (J is planted)")
        return Clairvoyant(instance.J)
    raise ValueError(f"unknown algorithm {name!r}")


@dataclass
class ExperimentRecord:
    alg: str
    seed: int
    K: int
    L: int
    n: int
    budget: int
    kept: int
    m_alg: int
    opt: int
    opt_kind: str
    ratio: float
    cover_bound: int
    cover_kind: str
    special_kept: int
    special_by_phase: dict
    m_alg_special: int
    runtime_ms: float
    valid: bool
    violations: list = field(default_factory=list)

    def row(self):
        return [self.alg, self.seed, self.K, self.L, self.n, self.budget,
                self.kept, self.m_alg, self.opt, f"{self.ratio:.6f}",
                self.cover_bound, self.special_kept,
                f"{self.runtime_ms:.1f}"]

    def to_dict(self):
        d = dict(self.__dict__)
        d["special_by_phase"] = {f"{l},{k}": v for (l, k), v
                                 in self.special_by_phase.items()}
        return d


CSV_HEADER = ["alg", "seed", "K", "L", "n", "budget", "kept", "m_alg", "opt",
              "ratio", "cover_bound", "special_kept", "runtime_ms"]


def _opt_value(instance, opt, solver_cap):
    """(value, kind): exact solver optimum when the full graph is small,
    else the analytic constructive matching (round 0 included, matching the
    streamed edge set)."""
    if opt == "constructive":
        return instance.opt_constructive_size(), "constructive"
    total = instance.stream_edge_count()
    if (opt in ("auto", "exact")
            and total <= solver_cap
            and instance.params.n_labels <= hc.EXPLICIT_CAP):
        g = _full_graph(instance)
        return max_matching(g).size, "exact"
    if opt == "exact":
        raise ValueError("exact optimum requested above the solver cap")
    return instance.opt_constructive_size(), "constructive"


def _full_graph(instance):
    us, vs = [], []
    for group in instance.stream_groups():
        u_side, _ = instance.edge_sides(group)
        for u, v, _ul, _vl in instance.group_batches(group):
            if u_side == "P":
                us.append(u)
                vs.append(v)
            else:
                us.append(v)
                vs.append(u)
    return BipartiteGraph.from_edges(np.concatenate(us), np.concatenate(vs),
                                     instance.p_space, instance.q_space)


def run(instance, algorithm, budget, seed=0, opt="auto",
        solver_cap=2_000_000, ws=None):
    """Execute one budgeted run and return its ExperimentRecord.

    Enforces the keep budget (excess aborts the run as invalid), validates
    the output matching against the kept edges and the edge set, checks the
    vertex-cover bound, and records exact counts.
    """
    p = instance.params
    if isinstance(algorithm, str):
        algorithm = make_algorithm(algorithm, instance)
    if p.n_labels > hc.EXPLICIT_CAP:
        return run_streaming(instance, algorithm, budget, seed, ws=ws)
    t0 = time.perf_counter()
    public = PublicParams.of(instance)
    algorithm.init(public, budget, seed)
    kept_u, kept_v, kept_groups = [], [], []
    kept_total = 0
    special = {}
    violations = []
    for group in instance.stream_groups():
        for u, v, ul, vl in instance.group_batches(group):
            keep = np.asarray(algorithm.on_batch(group, u, v, ul, vl),
                              dtype=bool)
            cnt = int(keep.sum())
            if kept_total + cnt > budget:
                violations.append(
                    f"budget exceeded in group {group}: "
                    f"{kept_total + cnt} > {budget}")
                return _invalid_record(instance, algorithm, budget, seed,
                                       violations, t0)
            kept_total += cnt
            if cnt:
                kept_u.append(u[keep])
                kept_v.append(v[keep])
                kept_groups.append((group, cnt))
            if group[0] != "aux" and group[2] == instance.J[group[0]][group[1]]:
                key = (group[0], group[1])
                special[key] = special.get(key, 0) + cnt
    ku = np.concatenate(kept_u) if kept_u else np.empty(0, np.int64)
    kv = np.concatenate(kept_v) if kept_v else np.empty(0, np.int64)
    kp, kq = _normalize_sides(instance, kept_groups, ku, kv)
    out = algorithm.finalize()
    if out is None:
        g = BipartiteGraph.from_edges(kp, kq, instance.p_space,
                                      instance.q_space)
        m = max_matching(g)
        mp, mq = m.edges()
    else:
        # algorithm-returned matchings are (P-index, Q-index) arrays
        mp = np.asarray(out[0], dtype=np.int64)
        mq = np.asarray(out[1], dtype=np.int64)
    violations += _validate_output(instance, kp, kq, mp, mq)
    if violations:
        return _invalid_record(instance, algorithm, budget, seed, violations,
                               t0)
    m_prov = _matching_provenance(instance, kept_groups, kp, kq, mp, mq)
    m_special = int(sum(1 for g_ in m_prov
                        if g_[0] != "aux" and g_[2] == instance.J[g_[0]][g_[1]]))
    if not instance.standalone:
        if ws is None:
            ws = pr.witness_sets(instance)
        # every matching edge crossing A_P x (Q \ B_Q) must be special
        ells = np.array([g_[0] if g_[0] != "aux" else -1 for g_ in m_prov])
        ks = np.array([g_[1] if g_[0] != "aux" else -1 for g_ in m_prov])
        js = np.array([g_[2] if g_[0] != "aux" else -1 for g_ in m_prov])
        pr.special_edges_filter(instance, mp, mq, ells, ks, js, ws=ws)
    cover, cover_kind = _cover(instance, mp, mq, ws=ws)
    opt_val, opt_kind = _opt_value(instance, opt, solver_cap)
    dt = (time.perf_counter() - t0) * 1e3
    return ExperimentRecord(
        alg=algorithm.name, seed=seed, K=p.K, L=p.L, n=p.n, budget=budget,
        kept=kept_total, m_alg=len(mp), opt=opt_val, opt_kind=opt_kind,
        ratio=len(mp) / opt_val if opt_val else 0.0,
        cover_bound=cover, cover_kind=cover_kind,
        special_kept=sum(special.values()), special_by_phase=special,
        m_alg_special=m_special, runtime_ms=dt, valid=True)


def _normalize_sides(instance, kept_groups, ku, kv):
    """Rearrange kept (u, v) endpoint arrays into (P-index, Q-index)."""
    kp = np.empty(len(ku), dtype=np.int64)
    kq = np.empty(len(kv), dtype=np.int64)
    pos = 0
    for group, cnt in kept_groups:
        u_side, _ = instance.edge_sides(group)
        sl = slice(pos, pos + cnt)
        if u_side == "P":
            kp[sl], kq[sl] = ku[sl], kv[sl]
        else:
            kp[sl], kq[sl] = kv[sl], ku[sl]
        pos += cnt
    return kp, kq


def _matching_provenance(instance, kept_groups, kp, kq, mp, mq):
    """Group (ell, k, j) of every matching edge, recovered from the kept set
    (edge sets are disjoint across groups, so the provenance is unique)."""
    if not len(mp):
        return []
    keys = kp * np.int64(instance.q_space) + kq
    order = np.argsort(keys, kind="stable")
    skeys = keys[order]
    group_of = np.repeat(np.arange(len(kept_groups)),
                         [c for _g, c in kept_groups])[order]
    mkeys = mp * np.int64(instance.q_space) + mq
    pos = np.searchsorted(skeys, mkeys)
    assert (skeys[pos] == mkeys).all()
    return [kept_groups[g][0] for g in group_of[pos]]


def _validate_output(instance, kp, kq, mp, mq):
    out = []
    g = BipartiteGraph.from_edges(kp, kq, instance.p_space, instance.q_space)
    out += validate_matching(g, mp, mq)
    return [f"finalize: {msg}" for msg in out]


def _cover(instance, mp, mq, ws=None):
    cert = pr.cover_bound(instance, mp, mq, ws=ws)
    return cert.bound, cert.kind


def _invalid_record(instance, algorithm, budget, seed, violations, t0):
    p = instance.params
    return ExperimentRecord(
        alg=algorithm.name, seed=seed, K=p.K, L=p.L, n=p.n, budget=budget,
        kept=0, m_alg=0, opt=0, opt_kind="n/a", ratio=0.0, cover_bound=0,
        cover_kind="n/a", special_kept=0, special_by_phase={},
        m_alg_special=0,
        runtime_ms=(time.perf_counter() - t0) * 1e3, valid=False,
        violations=violations)


# --- streaming-only paths (above the enumeration cap) ------------------------


def run_streaming(instance, algorithm, budget, seed=0, ws_sizes=None, ws=None):
    """Structure-aware run for built-ins on streaming-only instances.

    uniform: fused selection-sampling + greedy kernel (numba) or per-batch
    hypergeometric sampling (numpy fallback); its final matching is the
    greedy matching over the kept edges, in arrival order.
    clairvoyant: keeps the planted directions; kept and matching counts
    follow in closed form from the per-line structure.
    greedy: the same kernel with keep == matched.

    The recorded cover bound is the sound form
    special_kept + |P \\ A_P| + |B_Q| (every kept edge crossing
    A_P x (Q \\ B_Q) is special, so this dominates the exact certificate).
    """
    if isinstance(algorithm, str):
        algorithm = make_algorithm(algorithm, instance)
    name = algorithm.name
    p = instance.params
    t0 = time.perf_counter()
    if ws_sizes is None:
        ws_sizes = witness_sizes_streaming(instance, ws=ws)
    try:
        if name == "clairvoyant":
            kept, m_alg, special, m_special = _clairvoyant_counts(instance,
                                                                  budget)
        elif name in ("uniform", "greedy"):
            kept, m_alg, special, m_special = _stream_kernel_run(
                instance, name, budget, seed)
        else:
            raise ValueError(
                f"algorithm {name!r} needs explicit mode (instance above cap)")
    except BudgetViolation as exc:
        return _invalid_record(instance, algorithm, budget, seed, [str(exc)],
                               t0)
    cover = sum(special.values()) + ws_sizes["P_minus_A_P"] + ws_sizes["B_Q"]
    opt_val = instance.opt_constructive_size()
    if m_alg > cover:
        raise AssertionError("matching exceeds its vertex-cover bound")
    dt = (time.perf_counter() - t0) * 1e3
    return ExperimentRecord(
        alg=name, seed=seed, K=p.K, L=p.L, n=p.n, budget=budget, kept=kept,
        m_alg=m_alg, opt=opt_val, opt_kind="constructive",
        ratio=m_alg / opt_val if opt_val else 0.0, cover_bound=cover,
        cover_kind="special-kept-majorized", special_kept=sum(special.values()),
        special_by_phase=special, m_alg_special=m_special, runtime_ms=dt,
        valid=True)


def witness_sizes_streaming(instance, ws=None):
    """Exact |P \\ A_P| and |B_Q| (gamma engine above the cap)."""
    if ws is None:
        ws = pr.witness_sets(instance)
    return {"P_minus_A_P": ws.sizes["P_minus_A_P"], "B_Q": ws.sizes["B_Q"]}


def _clairvoyant_counts(instance, budget):
    """Closed-form kept / matched counts of the clairvoyant under a budget.

    It keeps the special groups in stream order until the budget runs out;
    within a line of s_cnt x t_cnt edges the constructive pair (s_i, t_i)
    sits at position i * t_cnt + i.
    """
    p = instance.params
    rem = budget
    kept = 0
    m_alg = 0
    m_special = 0
    special = {}
    for group in instance.stream_groups():
        if group[0] == "aux":
            take = min(rem, instance.group_edge_count(group))
            kept += take
            m_alg += take
            rem -= take
            continue
        l, k, j = group
        if j != instance.J[l][k]:
            continue
        lam = p.K - k
        n_lines = hc.count(gd.set_Tk(instance.specs[l], k), p) // p.m
        s_cnt = (p.m - p.m // lam) // lam
        t_cnt = p.m // lam
        per_line = s_cnt * t_cnt
        per_line_m = min(s_cnt, t_cnt)
        total = n_lines * per_line
        take = min(rem, total)
        full, part = divmod(take, per_line)
        m_add = full * per_line_m
        # constructive pairs inside the partial line
        i = 0
        while i < per_line_m and i * t_cnt + i < part:
            i += 1
        m_add += i
        kept += take
        m_alg += m_add
        m_special += m_add
        rem -= take
        special[(l, k)] = take
        if rem == 0:
            break
    return kept, m_alg, special, m_special


def _group_descriptor(instance, group):
    p = instance.params
    l, k, j = group
    b = p.bits_per_coord
    tk = gd.set_Tk(instance.specs[l], k).interval_map()
    coords = np.array([c for c in range(p.n) if c != j], dtype=np.int64)
    radix = np.array([tk[c][0][1] if c in tk else p.m for c in coords],
                     dtype=np.int64)
    weights = np.empty_like(radix)
    acc = 1
    for t in range(len(radix)):
        weights[t] = acc
        acc *= radix[t]
    lam = p.K - k
    desc = {
        "coords": coords, "radix": radix, "weights": weights,
        "bits": b, "cmask": (1 << b) - 1, "shift_j": j * b,
        "cut": gd.low_cut(p, k), "m": p.m, "W": p.W, "n_res": p.W // lam,
        "n_lines": int(acc),
    }
    if l == 0:
        desc.update(tau_mode=0, q_coord=0, lam=lam,
                    ip_coords=np.empty(0, np.int64),
                    d_weights=np.empty(0, np.int64), offset_k=0,
                    i_coords=np.empty(0, np.int64),
                    a_radix=np.empty(0, np.int64),
                    a_weights=np.empty(0, np.int64))
    else:
        tab = instance.glue[l]
        desc.update(
            tau_mode=1, q_coord=tab.q[k], lam=tab.lam[k],
            ip_coords=np.array(tab.D[k].coords, dtype=np.int64),
            d_weights=np.array(tab.D[k].weights, dtype=np.int64),
            offset_k=tab.offsets[k],
            i_coords=np.array(tab.I, dtype=np.int64),
            a_radix=np.array(tab.A.radices, dtype=np.int64),
            a_weights=np.array(tab.A.weights, dtype=np.int64))
    return desc


def _side_bitsets(instance):
    return (kn.make_bitset(instance.p_space), kn.make_bitset(instance.q_space))


def _stream_kernel_run(instance, name, budget, seed):
    """uniform / greedy over a streaming-only instance."""
    if kn.HAVE_NUMBA and name == "uniform":
        return _stream_kernel_run_numba(instance, budget, seed)
    return _stream_batches_run(instance, name, budget, seed)


def _stream_kernel_run_numba(instance, budget, seed):
    mp_bits, mq_bits = _side_bitsets(instance)
    total = instance.stream_edge_count()
    s_rem = min(budget, total)
    t_rem = total
    state = np.uint64(np.random.default_rng(seed).integers(1, 2 ** 63))
    kept = 0
    m_alg = 0
    m_special = 0
    special = {}
    km = np.zeros(2, dtype=np.int64)
    for group in instance.stream_groups():
        d = _group_descriptor(instance, group)
        u_side, v_side = instance.edge_sides(group)
        mu = mp_bits if u_side == "P" else mq_bits
        mv = mp_bits if v_side == "P" else mq_bits
        u_base, v_base = _group_bases(instance, group)
        s_rem, t_rem, state = kn.sample_greedy_group(
            d["coords"], d["radix"], d["weights"], d["bits"], d["cmask"],
            d["shift_j"], d["cut"], d["m"], d["W"], d["n_res"], d["n_lines"],
            d["tau_mode"], d["q_coord"], d["lam"], d["ip_coords"],
            d["d_weights"], d["offset_k"], d["i_coords"], d["a_radix"],
            d["a_weights"], u_base, v_base, mu, mv, s_rem, t_rem, state, km)
        # numba boxes the returned uint64 as a Python int; re-wrap it so the
        # next dispatch does not coerce values >= 2^63 through int64
        state = np.uint64(state)
        kept += int(km[0])
        m_alg += int(km[1])
        l, k, j = group
        if j == instance.J[l][k]:
            key = (l, k)
            special[key] = special.get(key, 0) + int(km[0])
            m_special += int(km[1])
    return kept, m_alg, special, m_special


def _group_bases(instance, group):
    from .instance import KIND_S, KIND_T
    l = group[0]
    k = group[1]
    if l == 0:
        u_base = instance.q_index(KIND_S, 0, k, 0)
    elif (l - 1) % 2 == 0:
        u_base = instance.p_index(l - 1, 0)
    else:
        u_base = instance.q_index(KIND_T, l - 1, 0, 0)
    v_base = (instance.p_index(l, 0) if l % 2 == 0
              else instance.q_index(KIND_T, l, 0, 0))
    return u_base, v_base


def _stream_batches_run(instance, name, budget, seed):
    """Numpy fallback: batched generation + exact sampling + greedy kernel."""
    rng = np.random.default_rng(seed)
    mp_bits, mq_bits = _side_bitsets(instance)
    total = instance.stream_edge_count()
    s_rem = min(budget, total)
    t_rem = total
    kept = 0
    m_alg = 0
    m_special = 0
    special = {}
    for group in instance.stream_groups():
        u_side, v_side = instance.edge_sides(group)
        mu = mp_bits if u_side == "P" else mq_bits
        mv = mp_bits if v_side == "P" else mq_bits
        g_kept = 0
        g_match = 0
        for u, v, _ul, _vl in instance.group_batches(group):
            n = len(u)
            if name == "uniform":
                if s_rem <= 0:
                    take = 0
                elif s_rem >= t_rem:
                    take = n
                else:
                    take = int(min(rng.hypergeometric(
                        s_rem, t_rem - s_rem, n), s_rem))
                if take:
                    idx = np.sort(rng.choice(n, size=take, replace=False))
                    keep = np.zeros(take, dtype=bool)
                    g_match += int(kn.greedy_batch(u[idx], v[idx], mu, mv,
                                                   keep))
                s_rem -= take
                t_rem -= n
                g_kept += take
            else:  # greedy: kept == matched
                keep = np.zeros(n, dtype=bool)
                cnt = int(kn.greedy_batch(u, v, mu, mv, keep))
                if kept + g_kept + cnt > budget:
                    raise BudgetViolation("greedy run exceeds its edge budget")
                g_kept += cnt
                g_match += cnt
                t_rem -= n
        kept += g_kept
        m_alg += g_match
        if group[0] != "aux" and group[2] == instance.J[group[0]][group[1]]:
            key = (group[0], group[1])
            special[key] = special.get(key, 0) + g_kept
            m_special += g_match
    return kept, m_alg, special, m_special


# --- reports ------------------------------------------------------------------


@dataclass
class RetentionRow:
    ell: int
    k: int
    observed_mean: float
    stderr: float
    bound: float
    within: bool


def retention_report(records, instance):
    """Per-(l, k) observed special-edge keeps vs the s/|free(l,k)| bound.

    records must come from J-oblivious runs at one budget; the bound is the
    conditional-expectation ceiling for any such algorithm.
    """
    if not records:
        return []
    budget = records[0].budget
    rows = []
    for l in range(instance.params.L):
        for k in range(instance.params.phases):
            obs = np.array([r.special_by_phase.get((l, k), 0)
                            for r in records], dtype=np.float64)
            bound = budget / len(instance.layout.free[l][k])
            se = float(obs.std(ddof=1) / np.sqrt(len(obs))) if len(obs) > 1 else 0.0
            rows.append(RetentionRow(
                ell=l, k=k, observed_mean=float(obs.mean()), stderr=se,
                bound=bound, within=float(obs.mean()) <= bound + 3 * se))
    return rows


def sweep(instances, algorithms, budgets, trials, out, opt="auto"):
    """Grid of runs -> CSV rows (deterministic given the seed grid)."""
    writer = csv.writer(out)
    writer.writerow(CSV_HEADER)
    records = []
    for inst in instances:
        ws = None if inst.standalone else pr.witness_sets(inst)
        for name in algorithms:
            for budget in budgets:
                for t in range(trials):
                    rec = run(inst, name, budget, seed=hash((name, budget, t))
                              & 0x7FFFFFFF, opt=opt, ws=ws)
                    writer.writerow(rec.row())
                    records.append(rec)
    return records
