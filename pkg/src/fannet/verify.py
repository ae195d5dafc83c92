"""Decision procedures over the integer noise grid.

``verify_noise_level`` and ``extract_adversarial_vectors`` share one
branch-and-bound search.  Boxes wait in a heap keyed by their lower corner.
Every grid point of a box is lexicographically >= that corner, and the open
boxes partition the unexplored grid, so singletons come off the heap in
lexicographic order.  With batched popping that order is only approximate,
which is why the search keeps going until no open box can hold a point
smaller than the k-th witness found so far.
"""

from __future__ import annotations

import enum
import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bounds import certainly_correct, propagate_batch
from .errors import BaselineMisclassified, GridTooLarge, NoCorrectSamples
from .network import (
    Dataset,
    Label,
    Network,
    Outcome,
    Sample,
    classify,
    correct_mask,
    forward_batch,
    outcome_of,
)
from .noise import NoiseBox, NoiseSpec, NoiseVector, apply_noise, grid_chunks, split_box

log = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 10**8


@dataclass(frozen=True)
class Verdict:
    witness: Optional[NoiseVector] = None
    predicted: Optional[Outcome] = None
    # search statistics; not part of the verdict's identity
    evaluations: int = field(default=0, compare=False)
    boxes: int = field(default=0, compare=False)

    @property
    def verified(self) -> bool:
        return self.witness is None

    def __str__(self):
        if self.verified:
            return "Verified"
        return f"Falsified(witness={list(self.witness)}, predicted={self.predicted!r})"


VERIFIED = Verdict()


@dataclass
class SampleOutcome:
    sample_id: int
    true_label: Label
    predicted: Outcome
    correct: bool


@dataclass
class BaselineReport:
    entries: list[SampleOutcome]

    @property
    def accuracy(self) -> float:
        if not self.entries:
            return 0.0
        return sum(e.correct for e in self.entries) / len(self.entries)


def check_baseline(net: Network, ds: Dataset) -> BaselineReport:
    entries = []
    for s in ds:
        oc = classify(net, s.features)
        entries.append(SampleOutcome(s.id, s.true_label, oc, oc == s.true_label))
    return BaselineReport(entries)


def _require_baseline(net: Network, s: Sample):
    if classify(net, s.features) != s.true_label:
        raise BaselineMisclassified(f"sample {s.id} is not classified as {s.true_label} without noise")


def _exact_outcomes(net: Network, s: Sample, points: np.ndarray):
    outs = forward_batch(net, apply_noise(s.x, points))
    return outs, correct_mask(outs, s.true_label.index)


# --- brute force ----------------------------------------------------------


def brute_force_check(net: Network, s: Sample, spec: NoiseSpec, cap: int = BRUTE_FORCE_CAP) -> Verdict:
    """Enumerate the whole grid in lexicographic order; first failure wins."""
    if spec.cardinality() > cap:
        raise GridTooLarge(f"grid of {spec.cardinality()} points exceeds brute-force cap {cap}")
    _require_baseline(net, s)
    seen = 0
    for pts in grid_chunks(spec):
        outs, ok = _exact_outcomes(net, s, pts)
        bad = np.flatnonzero(~ok)
        if len(bad):
            i = int(bad[0])
            return Verdict(tuple(int(d) for d in pts[i]), outcome_of(net, outs[i]), evaluations=seen + i + 1)
        seen += len(pts)
    return Verdict(evaluations=seen)


# --- branch and bound -----------------------------------------------------


@dataclass
class SearchResult:
    found: list[tuple[NoiseVector, Outcome]]
    evaluations: int
    boxes: int


def _search(
    net: Network,
    s: Sample,
    spec: NoiseSpec,
    cap: int,
    batch: int = 64,
    on_prune: Callable[[NoiseBox], None] | None = None,
) -> SearchResult:
    """Lexicographically first ``cap`` misclassifying grid points."""
    if spec.dim != net.input_dim:
        raise ValueError(f"noise spec has {spec.dim} nodes, network has {net.input_dim} inputs")
    x = s.x
    t = s.true_label.index
    found: list[tuple[NoiseVector, Outcome]] = []
    evaluations = boxes = 0
    if cap <= 0:
        return SearchResult(found, 0, 0)

    root = spec.box()
    heap = [(root.lo, root)]
    while heap:
        limit = found[cap - 1][0] if len(found) >= cap else None
        if limit is not None and heap[0][0] > limit:
            break
        popped = []
        while heap and len(popped) < batch:
            key, box = heapq.heappop(heap)
            if limit is not None and key > limit:
                heap.clear()
                break
            popped.append(box)
        boxes += len(popped)

        singles = [b for b in popped if b.is_singleton()]
        wide = [b for b in popped if not b.is_singleton()]

        if singles:
            pts = np.array([b.lo for b in singles], dtype=np.int64)
            outs, ok = _exact_outcomes(net, s, pts)
            evaluations += len(singles)
            for i in np.flatnonzero(~ok):
                found.append((singles[i].lo, outcome_of(net, outs[i])))
            found.sort(key=lambda item: item[0])
            del found[cap:]

        if wide:
            corners_lo = apply_noise(x, np.array([b.lo for b in wide], dtype=np.int64))
            corners_hi = apply_noise(x, np.array([b.hi for b in wide], dtype=np.int64))
            in_lo = np.minimum(corners_lo, corners_hi)
            in_hi = np.maximum(corners_lo, corners_hi)
            out_lo, out_hi = propagate_batch(net, in_lo, in_hi)
            safe = certainly_correct(out_lo, out_hi, t)
            for b, is_safe in zip(wide, safe):
                if is_safe:
                    if on_prune is not None:
                        on_prune(b)
                    continue
                for child in split_box(b):
                    heapq.heappush(heap, (child.lo, child))
    return SearchResult(found, evaluations, boxes)


def verify_noise_level(
    net: Network,
    s: Sample,
    spec: NoiseSpec,
    *,
    batch: int = 64,
    on_prune: Callable[[NoiseBox], None] | None = None,
) -> Verdict:
    """Complete check that no grid point of ``spec`` changes ``s``'s label.

    Falsified verdicts carry the lexicographically smallest witness.
    """
    _require_baseline(net, s)
    res = _search(net, s, spec, 1, batch=batch, on_prune=on_prune)
    if res.found:
        nv, oc = res.found[0]
        return Verdict(nv, oc, evaluations=res.evaluations, boxes=res.boxes)
    return Verdict(evaluations=res.evaluations, boxes=res.boxes)


def extract_adversarial_vectors(
    net: Network, s: Sample, spec: NoiseSpec, cap: int, *, batch: int = 64
) -> list[tuple[NoiseVector, Outcome]]:
    _require_baseline(net, s)
    return _search(net, s, spec, cap, batch=batch).found


# --- tolerance ------------------------------------------------------------


class SearchMode(str, enum.Enum):
    LINEAR = "linear"
    BINARY = "binary"


@dataclass
class ToleranceEntry:
    sample_id: int
    true_label: Label
    baseline_correct: bool
    tolerance: Optional[int] = None
    # True when no counterexample exists up to delta_init (NotFoundUpTo)
    capped: bool = False
    first_failing_delta: Optional[int] = None
    witness: Optional[NoiseVector] = None
    predicted: Optional[Outcome] = None


@dataclass
class ToleranceReport:
    delta_init: int
    mode: SearchMode
    entries: list[ToleranceEntry]
    split: str = "test"

    @property
    def global_tolerance(self) -> int:
        tols = [e.tolerance for e in self.entries if e.baseline_correct]
        if not tols:
            raise NoCorrectSamples("no baseline-correct samples in report")
        return min(tols)


def per_sample_tolerance(
    net: Network, s: Sample, delta_init: int, mode: SearchMode | str = SearchMode.BINARY
) -> ToleranceEntry:
    if delta_init < 0:
        raise ValueError("delta_init must be non-negative")
    mode = SearchMode(mode)
    _require_baseline(net, s)

    def check(delta: int) -> Verdict:
        return verify_noise_level(net, s, NoiseSpec.symmetric(delta, net.input_dim))

    entry = ToleranceEntry(s.id, s.true_label, True)
    failing: tuple[int, Verdict] | None = None

    if mode is SearchMode.LINEAR:
        delta = delta_init
        while delta > 0:
            v = check(delta)
            if v.verified:
                break
            failing = (delta, v)
            delta -= 1
        tolerance = delta
    else:
        top = check(delta_init) if delta_init > 0 else VERIFIED
        if top.verified:
            tolerance = delta_init
        else:
            # symmetric(0) holds for a baseline-correct sample
            good, bad, failing = 0, delta_init, (delta_init, top)
            while bad - good > 1:
                mid = (good + bad) // 2
                v = check(mid)
                if v.verified:
                    good = mid
                else:
                    bad, failing = mid, (mid, v)
            tolerance = good

    entry.tolerance = tolerance
    if failing is None:
        entry.capped = True
    else:
        entry.first_failing_delta, v = failing
        entry.witness, entry.predicted = v.witness, v.predicted
    log.debug("sample %s: tolerance %s", s.id, tolerance)
    return entry


def global_tolerance(
    net: Network,
    ds: Dataset,
    delta_init: int,
    mode: SearchMode | str = SearchMode.BINARY,
    jobs: int = 1,
) -> ToleranceReport:
    baseline = check_baseline(net, ds)
    if not any(e.correct for e in baseline.entries):
        raise NoCorrectSamples("no sample is classified correctly without noise")

    def run(pair):
        s, outcome = pair
        if not outcome.correct:
            return ToleranceEntry(s.id, s.true_label, False)
        return per_sample_tolerance(net, s, delta_init, mode)

    pairs = list(zip(ds.samples, baseline.entries))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(run, pairs))
    else:
        entries = [run(p) for p in pairs]
    entries.sort(key=lambda e: e.sample_id)
    return ToleranceReport(delta_init, SearchMode(mode), entries, split=ds.split.value)
