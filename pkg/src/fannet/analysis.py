"""Counterexample store and the reports mined from it: training bias, input
node sensitivity and classification-boundary banding."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import BaselineMisclassified, InvalidCounterexample, InvalidCuts, NodeOutOfRange
from .network import Dataset, Label, Network, Outcome, Sample, classify, correct_mask, forward_batch
from .noise import NoiseSpec, NoiseVector, apply_noise
from .verify import ToleranceReport, extract_adversarial_vectors

SpecTag = Union[int, str]


@dataclass(frozen=True)
class Counterexample:
    sample_id: int
    nv: NoiseVector
    predicted: Outcome
    true_label: Label
    spec_delta: SpecTag

    @property
    def key(self) -> tuple[int, NoiseVector]:
        return (self.sample_id, self.nv)


class CounterexampleStore:
    """Deduplicated set of counterexamples, iterated by (sample id, nv)."""

    def __init__(self, entries: Iterable[Counterexample] = ()):
        self._entries: dict[tuple[int, NoiseVector], Counterexample] = {}
        for ce in entries:
            self.insert(ce)

    def insert(self, ce: Counterexample) -> bool:
        if ce.predicted == ce.true_label:
            raise InvalidCounterexample(f"sample {ce.sample_id}: predicted label equals true label")
        ce = Counterexample(ce.sample_id, tuple(int(d) for d in ce.nv), ce.predicted, ce.true_label, ce.spec_delta)
        if ce.key in self._entries:
            return False
        self._entries[ce.key] = ce
        return True

    def __iter__(self) -> Iterator[Counterexample]:
        for key in sorted(self._entries):
            yield self._entries[key]

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def __eq__(self, other):
        if not isinstance(other, CounterexampleStore):
            return NotImplemented
        return list(self) == list(other)

    def sample_ids(self) -> list[int]:
        return sorted({sid for sid, _ in self._entries})


def store_insert(store: CounterexampleStore, ce: Counterexample) -> bool:
    return store.insert(ce)


# --- training bias --------------------------------------------------------


@dataclass
class LabelBias:
    label: str
    n_samples: int
    n_baseline_correct: int
    n_samples_with_ce: int
    ce_count: int

    @property
    def misclassification_rate(self) -> float:
        if self.n_baseline_correct == 0:
            return 0.0
        return self.n_samples_with_ce / self.n_baseline_correct


@dataclass(frozen=True)
class BiasWitness:
    flipped_id: int
    kept_id: int
    nv: NoiseVector


@dataclass
class BiasReport:
    per_label: list[LabelBias]
    training_class_balance: dict[str, float]
    witness_pairs: list[BiasWitness]
    pair_cap: int

    def label(self, name: str) -> LabelBias:
        return next(b for b in self.per_label if b.label == name)


def bias_report(
    store: CounterexampleStore,
    train: Dataset,
    test: Dataset,
    net: Network,
    pair_cap: int = 100,
) -> BiasReport:
    correct = {s.id: classify(net, s.features) == s.true_label for s in test}
    per_label = []
    for lab in net.labels:
        members = [s for s in test if s.true_label == lab]
        ces = [ce for ce in store if ce.true_label == lab]
        per_label.append(
            LabelBias(
                label=lab.name,
                n_samples=len(members),
                n_baseline_correct=sum(correct[s.id] for s in members),
                n_samples_with_ce=len({ce.sample_id for ce in ces}),
                ce_count=len(ces),
            )
        )

    balance = {lab.name: 0.0 for lab in net.labels}
    if len(train):
        for lab in net.labels:
            balance[lab.name] = sum(s.true_label == lab for s in train) / len(train)

    partners = sorted((s for s in test if correct[s.id]), key=lambda s: s.id)
    pairs: list[BiasWitness] = []
    for ce in store:
        if len(pairs) >= pair_cap:
            break
        others = [s for s in partners if s.id != ce.sample_id]
        if not others:
            continue
        xs = np.array([s.features for s in others])
        outs = forward_batch(net, apply_noise(xs, np.array(ce.nv)))
        for s, row in zip(others, outs):
            if correct_mask(row[None, :], s.true_label.index)[0]:
                pairs.append(BiasWitness(ce.sample_id, s.id, ce.nv))
                if len(pairs) >= pair_cap:
                    break
    return BiasReport(per_label, balance, pairs, pair_cap)


def replay_bias_witness(net: Network, test: Dataset, w: BiasWitness) -> bool:
    """True iff ``w.nv`` flips the first sample and leaves the second one correct."""
    x1, x2 = test.by_id(w.flipped_id), test.by_id(w.kept_id)
    flipped = classify(net, apply_noise(x1.x, w.nv)) != x1.true_label
    kept = classify(net, apply_noise(x2.x, w.nv)) == x2.true_label
    return flipped and kept


# --- input node sensitivity -----------------------------------------------


@dataclass
class NodeSensitivity:
    node: int
    pos_ce_count: int = 0
    neg_ce_count: int = 0
    zero_ce_count: int = 0
    no_positive_ce: bool = False
    no_negative_ce: bool = False
    noise_inert: bool = False


@dataclass
class SensitivityReport:
    nodes: list[NodeSensitivity]
    total: int
    spec_deltas: list[SpecTag] = field(default_factory=list)


def sensitivity_report(
    store: CounterexampleStore, n_nodes: Optional[int] = None, samples: Optional[Dataset] = None
) -> SensitivityReport:
    entries = list(store)
    if n_nodes is None:
        if not entries:
            raise ValueError("node count is required for an empty store")
        n_nodes = len(entries[0].nv)
    deltas = np.array([ce.nv for ce in entries], dtype=np.int64).reshape(len(entries), n_nodes)
    referenced = [samples.by_id(sid) for sid in store.sample_ids()] if samples is not None else []

    nodes = []
    for i in range(n_nodes):
        col = deltas[:, i]
        ns = NodeSensitivity(
            node=i,
            pos_ce_count=int((col > 0).sum()),
            neg_ce_count=int((col < 0).sum()),
            zero_ce_count=int((col == 0).sum()),
        )
        if entries:
            ns.no_positive_ce = ns.pos_ce_count == 0
            ns.no_negative_ce = ns.neg_ce_count == 0
        ns.noise_inert = bool(referenced) and all(s.features[i] == 0.0 for s in referenced)
        nodes.append(ns)
    tags = sorted({ce.spec_delta for ce in entries}, key=lambda t: (isinstance(t, str), t))
    return SensitivityReport(nodes, len(entries), tags)


@dataclass(frozen=True)
class NodeProbe:
    alpha: int
    insensitive: bool
    predicted: Outcome


def single_node_sensitivity(
    net: Network, s: Sample, node: int, alphas: Sequence[int], mode: str = "relative"
) -> list[NodeProbe]:
    """Perturb only ``node`` by each alpha and report whether the label holds.

    ``mode="relative"`` treats alpha as integer percent (the noise model used
    everywhere else); ``mode="additive"`` adds alpha to the raw feature.
    """
    if not 0 <= node < net.input_dim:
        raise NodeOutOfRange(f"node {node} outside 0..{net.input_dim - 1}")
    if classify(net, s.features) != s.true_label:
        raise BaselineMisclassified(f"sample {s.id} is misclassified without noise")
    if mode not in ("relative", "additive"):
        raise ValueError(f"unknown probe mode {mode!r}")
    probes = []
    for a in alphas:
        if mode == "relative":
            nv = [0] * net.input_dim
            nv[node] = int(a)
            x = apply_noise(s.x, nv)
        else:
            x = s.x.copy()
            x[node] += a
        oc = classify(net, x)
        probes.append(NodeProbe(int(a), oc == s.true_label, oc))
    return probes


# --- classification boundary ----------------------------------------------


class Band(str, enum.Enum):
    FRAGILE = "fragile"
    MIDDLE = "middle"
    ROBUST = "robust"


@dataclass(frozen=True)
class BandEntry:
    sample_id: int
    tolerance: int
    band: Band


@dataclass
class BoundaryProfile:
    fragile_cut: int
    robust_cut: int
    entries: list[BandEntry]

    def band_of(self, sample_id: int) -> Band:
        return next(e.band for e in self.entries if e.sample_id == sample_id)


def boundary_profile(report: ToleranceReport, fragile_cut: int = 12, robust_cut: int = 50) -> BoundaryProfile:
    if not 0 <= fragile_cut <= robust_cut:
        raise InvalidCuts(f"need 0 <= fragile_cut <= robust_cut, got ({fragile_cut}, {robust_cut})")
    entries = []
    for e in report.entries:
        if not e.baseline_correct:
            continue
        if e.tolerance < fragile_cut:
            band = Band.FRAGILE
        elif e.tolerance >= robust_cut:
            band = Band.ROBUST
        else:
            band = Band.MIDDLE
        entries.append(BandEntry(e.sample_id, e.tolerance, band))
    return BoundaryProfile(fragile_cut, robust_cut, entries)


def collect(
    net: Network, samples: Iterable[Sample], spec: NoiseSpec, cap: int, store: Optional[CounterexampleStore] = None
) -> CounterexampleStore:
    """Run extraction for each sample and insert the results into a store."""
    store = store if store is not None else CounterexampleStore()
    tag: SpecTag = spec.delta if spec.delta is not None else spec.encode()
    for s in samples:
        for nv, oc in extract_adversarial_vectors(net, s, spec, cap):
            store.insert(Counterexample(s.id, nv, oc, s.true_label, tag))
    return store

