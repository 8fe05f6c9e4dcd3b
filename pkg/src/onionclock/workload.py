"""Randomized mutation workloads and clock-accuracy measurement.

``generate_workload`` drives a population of nodes through create/derive/
fork/merge events, recording the ground-truth DAG and attaching three clocks
to every object: the layered decaying clock, the plain counting Bloom clock,
and an object-granularity vector clock (each mutation treated as a local
event on the mutating node, with received objects merged in first - the
assignment that reproduces the classic fork anomaly).

``measure_accuracy`` samples object pairs and scores each clock's verdicts
against the oracle.  False negatives are counted only for in-window pairs:
an ancestor/descendant pair is in-window when some descendant track can
exactly cover every depth interval the ancestor's clock still retains.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .baselines import VectorClock, vc_new, vc_step
from .bloomclock import BloomClock, bc_merge, bc_new, bc_tick
from .dag import DerivationDag
from .dobc import (
    Dobc,
    DobcConfig,
    TrackView,
    clock_views,
    compare_views,
    default_config,
    merge_anchor_index,
)
from .objects import Obj, create, default_registry, mutate
from .verdicts import CODE_TO_VERDICT, CausalVerdict


@dataclass(frozen=True)
class WorkloadSpec:
    nodes: int = 4
    events: int = 1000
    merge_prob: float = 0.1
    fork_prob: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.nodes < 1 or self.events < 0:
            raise ValueError("nodes must be >= 1 and events >= 0")
        if not 0 <= self.merge_prob <= 1 or not 0 <= self.fork_prob <= 1:
            raise ValueError("probabilities must be in [0, 1]")
        if self.merge_prob + self.fork_prob > 1:
            raise ValueError("merge_prob + fork_prob must be <= 1")


@dataclass
class WorkloadResult:
    spec: WorkloadSpec
    config: DobcConfig
    dag: DerivationDag
    objects: list[Obj]
    bclocks: list[BloomClock]
    vclocks: list[VectorClock]
    creators: list[int]
    # claim_lineage[i]: bitset of the ancestors whose states object i's clock
    # still claims coverage over.  A maxima fold keeps only the anchor
    # parent's lineage; extending keeps both.
    claim_lineage: list[int]


def generate_workload(spec: WorkloadSpec, config: DobcConfig | None = None) -> WorkloadResult:
    """Deterministic per seed.  Each node starts from its own genesis object
    (so merge_prob=0 yields a forest of per-node chains)."""
    cfg = config or default_config()
    registry = default_registry()
    derive = registry.by_name("derive").fn_id
    mix = registry.by_name("mix_merge").fn_id
    rng = random.Random(spec.seed)
    dag = DerivationDag()

    objects: list[Obj] = []
    bclocks: list[BloomClock] = []
    vclocks: list[VectorClock] = []
    creators: list[int] = []
    claim_lineage: list[int] = []
    node_vc = [vc_new(spec.nodes) for _ in range(spec.nodes)]
    latest = []

    def record(obj: Obj, bc: BloomClock, vc: VectorClock, node: int, lineage: int) -> None:
        assert obj.lineage_id == len(objects)
        objects.append(obj)
        bclocks.append(bc)
        vclocks.append(vc)
        creators.append(node)
        claim_lineage.append(lineage | (1 << obj.lineage_id))

    for node in range(spec.nodes):
        state = b"genesis:%d:%d" % (spec.seed, node)
        obj = create(state, cfg, dag, creator=node)
        bc = bc_tick(bc_new(cfg.hash), obj.digest)
        node_vc[node] = vc_step(node_vc[node], node, "local")
        record(obj, bc, node_vc[node], node, 0)
        latest.append(obj.lineage_id)

    for ev in range(spec.events):
        node = rng.randrange(spec.nodes)
        roll = rng.random()
        params = b"ev:%d" % ev
        if roll < spec.merge_prob and len(objects) >= 2:
            other = rng.randrange(len(objects))
            if other == latest[node]:
                other = latest[(node + 1) % spec.nodes]
            if other == latest[node]:
                kind = "derive"
                parent_ids = (latest[node],)
            else:
                kind = "merge"
                parent_ids = (latest[node], other)
        elif roll < spec.merge_prob + spec.fork_prob:
            kind = "fork"
            parent_ids = (rng.randrange(len(objects)),)
        else:
            kind = "derive"
            parent_ids = (latest[node],)

        merged = list(node_vc[node].entries)
        for pid in parent_ids:
            if creators[pid] != node:
                merged = [max(a, b) for a, b in zip(merged, vclocks[pid].entries)]
        vc = vc_step(VectorClock(tuple(merged)), node, "local")
        node_vc[node] = vc

        parents = tuple(objects[pid] for pid in parent_ids)
        if kind == "merge":
            child = mutate(registry, mix, parents, params, dag, creator=node)
            bc = bc_tick(bc_merge(bclocks[parent_ids[0]], bclocks[parent_ids[1]]), child.digest)
            if cfg.merge_strategy == "maxima":
                anchor = merge_anchor_index(parents[0].clock, parents[1].clock)
                lineage = claim_lineage[parent_ids[anchor]]
            else:
                lineage = claim_lineage[parent_ids[0]] | claim_lineage[parent_ids[1]]
        else:
            child = mutate(registry, derive, parents, params, dag, creator=node)
            bc = bc_tick(bclocks[parent_ids[0]], child.digest)
            lineage = claim_lineage[parent_ids[0]]
        record(child, bc, vc, node, lineage)
        latest[node] = child.lineage_id

    return WorkloadResult(spec, cfg, dag, objects, bclocks, vclocks, creators, claim_lineage)


# ---------------------------------------------------------------------------
# Accuracy measurement


@dataclass(frozen=True)
class FpReport:
    trials: int
    true_causal: int
    true_concurrent: int
    false_positive_count: int
    false_negative_count: int
    fp_rate: float
    fn_rate: float
    indeterminate_count: int
    in_window_causal: int

    @staticmethod
    def csv_header() -> str:
        return "seed,kind,n,m,trials,fp_rate,fn_rate,indeterminate"

    def csv_row(self, seed: int, kind: str, n: int, m: int) -> str:
        return (
            f"{seed},{kind},{n},{m},{self.trials},"
            f"{self.fp_rate:.6f},{self.fn_rate:.6f},{self.indeterminate_count}"
        )


ALL_PAIRS_LIMIT = 500
SAMPLED_PAIRS = 100_000


def sample_pairs(count: int, seed: int) -> list[tuple[int, int]]:
    """All unordered pairs up to the small-population limit, else a fixed-seed
    uniform sample."""
    if count < 2:
        return []
    if count <= ALL_PAIRS_LIMIT:
        return [(i, j) for i in range(count) for j in range(i + 1, count)]
    rng = random.Random(seed ^ 0x5AFE)
    pairs = []
    for _ in range(SAMPLED_PAIRS):
        i = rng.randrange(count)
        j = rng.randrange(count - 1)
        if j >= i:
            j += 1
        pairs.append((i, j))
    return pairs


def _covers_everything(anc: TrackView, desc: TrackView) -> bool:
    if not anc.root or anc.root != desc.root:
        return False
    seen = set()
    for lo, hi, _row in anc.segments:
        if (lo, hi) in seen:
            continue
        seen.add((lo, hi))
        if not desc.covers(lo, hi):
            return False
    return bool(anc.segments)


def in_window(anc_views: list[TrackView], desc_views: list[TrackView]) -> bool:
    """True when some descendant track exactly covers every interval that
    some ancestor track still claims."""
    return any(
        _covers_everything(ta, tb) for ta in anc_views for tb in desc_views
    )


def measure_accuracy(
    workload: WorkloadResult,
    kind: str,
    pairs: list[tuple[int, int]] | None = None,
) -> FpReport:
    """Score one clock construct's verdicts against the oracle DAG."""
    if kind not in ("dobc", "bc", "vc", "oracle"):
        raise ValueError(f"unknown clock kind {kind!r}")
    dag = workload.dag
    count = len(workload.objects)
    if pairs is None:
        pairs = sample_pairs(count, workload.spec.seed)

    views: list[list[TrackView]] | None = None
    codes: np.ndarray | None = None
    if kind == "dobc":
        views = [clock_views(o.clock) for o in workload.objects]
    elif kind == "bc":
        counters = np.stack([c.counters for c in workload.bclocks])
        depths = np.asarray([c.depth for c in workload.bclocks], dtype=np.int64)
        pair_arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        codes = _kernels.bc_pair_codes(counters, depths, pair_arr)
    elif kind == "vc":
        vectors = np.stack([v.as_array() for v in workload.vclocks])
        pair_arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        codes = _kernels.vc_pair_codes(vectors, pair_arr)

    true_causal = true_concurrent = 0
    fp = fn = indeterminate = window_causal = 0
    for idx, (i, j) in enumerate(pairs):
        i_before_j = dag.dag_reaches(i, j)
        j_before_i = dag.dag_reaches(j, i)

        if kind == "dobc":
            verdict = compare_views(views[i], views[j])
        elif kind == "oracle":
            if i_before_j:
                verdict = CausalVerdict.STRICTLY_BEFORE
            elif j_before_i:
                verdict = CausalVerdict.STRICTLY_AFTER
            else:
                verdict = CausalVerdict.CONCURRENT
        else:
            verdict = CODE_TO_VERDICT[int(codes[idx])]

        if i_before_j or j_before_i:
            true_causal += 1
            anc, desc = (i, j) if i_before_j else (j, i)
            if kind == "dobc":
                # In-window: the ancestor sits on a lineage the descendant's
                # clock still claims, and its whole window aligns.
                windowed = bool(
                    (workload.claim_lineage[desc] >> anc) & 1
                ) and in_window(views[anc], views[desc])
            else:
                windowed = True
            if windowed:
                window_causal += 1
                correct = verdict.claims_before if i_before_j else verdict.claims_after
                if not correct:
                    fn += 1
        else:
            true_concurrent += 1
            if verdict.is_causal:
                fp += 1
        if verdict is CausalVerdict.INDETERMINATE:
            indeterminate += 1

    return FpReport(
        trials=len(pairs),
        true_causal=true_causal,
        true_concurrent=true_concurrent,
        false_positive_count=fp,
        false_negative_count=fn,
        fp_rate=fp / true_concurrent if true_concurrent else 0.0,
        fn_rate=fn / true_causal if true_causal else 0.0,
        indeterminate_count=indeterminate,
        in_window_causal=window_causal,
    )
