"""Network/dataset files and canonical JSON for reports and stores.

Canonical JSON means sorted keys, two-space indent, a trailing newline, and
floats written with Python's shortest round-trip ``repr``.  Writing a report,
reading it back and writing it again yields identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .analysis import (
    Band,
    BandEntry,
    BiasReport,
    BiasWitness,
    BoundaryProfile,
    Counterexample,
    CounterexampleStore,
    LabelBias,
    NodeSensitivity,
    SensitivityReport,
)
from .errors import DimensionMismatch, IoError, LabelUnknown, ParseError, ValidationError
from .network import (
    TIE,
    Activation,
    Dataset,
    Label,
    Layer,
    Network,
    Outcome,
    Sample,
    Split,
    validate_network,
)
from .verify import BaselineReport, SampleOutcome, SearchMode, ToleranceEntry, ToleranceReport

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class UnsupportedActivationViolation:
    layer: int
    name: str

    def __str__(self):
        return f"layer {self.layer}: unsupported activation {self.name!r}"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoError(str(exc)) from exc


def _write_text(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(str(exc)) from exc


def _load_json(path) -> Any:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc


# --- networks -------------------------------------------------------------


def network_to_dict(net: Network) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "input_dim": net.input_dim,
        "labels": list(net.output_labels),
        "layers": [
            {
                "rows": layer.rows,
                "cols": layer.cols,
                "weights": [float(w) for w in layer.weights.ravel()],
                "biases": [float(b) for b in layer.biases],
                "activation": layer.activation.value,
            }
            for layer in net.layers
        ],
    }


def network_from_dict(doc: Any) -> Network:
    def need(obj, key, where):
        if not isinstance(obj, dict) or key not in obj:
            raise ParseError(f"missing field {key!r}", where)
        return obj[key]

    version = need(doc, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}", "$.schema_version")
    input_dim = need(doc, "input_dim", "$")
    if not isinstance(input_dim, int) or input_dim <= 0:
        raise ParseError("input_dim must be a positive integer", "$.input_dim")
    raw_layers = need(doc, "layers", "$")
    if not isinstance(raw_layers, list):
        raise ParseError("layers must be a list", "$.layers")

    layers, bad_acts = [], []
    for k, raw in enumerate(raw_layers):
        where = f"$.layers[{k}]"
        rows, cols = need(raw, "rows", where), need(raw, "cols", where)
        weights, biases = need(raw, "weights", where), need(raw, "biases", where)
        act = need(raw, "activation", where)
        if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
            raise ParseError("rows and cols must be positive integers", where)
        if not isinstance(weights, list) or len(weights) != rows * cols:
            n = len(weights) if isinstance(weights, list) else "non-list"
            raise ParseError(f"expected {rows}x{cols}={rows * cols} weights, found {n}", f"{where}.weights")
        if not isinstance(biases, list):
            raise ParseError("biases must be a list", f"{where}.biases")
        for pos, v in [(f"weights[{i}]", v) for i, v in enumerate(weights)] + [
            (f"biases[{i}]", v) for i, v in enumerate(biases)
        ]:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError("expected a number", f"{where}.{pos}")
        try:
            activation = Activation(act)
        except ValueError:
            bad_acts.append(UnsupportedActivationViolation(k, str(act)))
            activation = Activation.IDENTITY
        w = [[float(weights[r * cols + c]) for c in range(cols)] for r in range(rows)]
        layers.append(Layer(w, [float(b) for b in biases], activation))
    if bad_acts:
        raise ValidationError(bad_acts)

    labels = need(doc, "labels", "$")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise ParseError("labels must be a list of strings", "$.labels")
    if len(set(labels)) != len(labels):
        raise ParseError("label names must be unique", "$.labels")
    net = Network(input_dim, tuple(layers), tuple(labels))
    violations = validate_network(net)
    if violations:
        raise ValidationError(violations)
    return net


def load_network(path) -> Network:
    return network_from_dict(_load_json(path))


def save_network(net: Network, path):
    _write_text(path, canonical_json(network_to_dict(net)))


# --- datasets -------------------------------------------------------------


def load_dataset(path, net: Network, split: Split | str = Split.TEST) -> Dataset:
    n = net.input_dim
    text = _read_text(path)
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ParseError("empty dataset file", str(path))
    header = [h.strip() for h in rows[0]]
    expected = ["id"] + [f"f{i}" for i in range(n)] + ["label"]
    if len(header) != n + 2:
        raise DimensionMismatch(f"header has {len(header) - 2} feature columns, network expects {n}")
    if header != expected:
        raise ParseError(f"header must be {','.join(expected)}", "row 1")
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != n + 2:
            raise DimensionMismatch(f"row {lineno}: {len(row) - 2} features, expected {n}")
        try:
            sid = int(row[0])
            feats = [float(c) for c in row[1:-1]]
        except ValueError as exc:
            raise ParseError(str(exc), f"row {lineno}") from exc
        if not all(math.isfinite(f) for f in feats):
            raise ParseError("non-finite feature value", f"row {lineno}")
        name = row[-1].strip()
        if name not in net.output_labels:
            raise LabelUnknown(f"row {lineno}: label {name!r} not in {list(net.output_labels)}")
        samples.append(Sample(sid, feats, net.label(name)))
    try:
        return Dataset(samples, Split(split))
    except ValueError as exc:
        raise ParseError(str(exc), str(path)) from exc


def save_dataset(ds: Dataset, path):
    lines = []
    n = len(ds.samples[0].features) if ds.samples else 0
    lines.append(",".join(["id"] + [f"f{i}" for i in range(n)] + ["label"]))
    for s in ds:
        lines.append(",".join([str(s.id)] + [repr(f) for f in s.features] + [s.true_label.name]))
    _write_text(path, "\n".join(lines) + "\n")


# --- outcomes -------------------------------------------------------------


def _outcome_out(oc: Outcome | None):
    # null stands for a tie wherever a prediction is present
    return None if oc is None or oc is TIE else oc.name


def _outcome_in(name, net_labels: dict[str, Label]) -> Outcome:
    return TIE if name is None else net_labels[name]


def _label_in(name: str, labels: dict[str, Label]) -> Label:
    try:
        return labels[name]
    except KeyError:
        raise LabelUnknown(f"label {name!r} not in {sorted(labels)}") from None


# --- reports --------------------------------------------------------------


def baseline_to_dict(rep: BaselineReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "baseline",
        "accuracy": rep.accuracy,
        "entries": [
            {
                "sample_id": e.sample_id,
                "true_label": e.true_label.name,
                "predicted": _outcome_out(e.predicted),
                "correct": e.correct,
            }
            for e in rep.entries
        ],
    }


def baseline_from_dict(doc: dict, labels: dict[str, Label]) -> BaselineReport:
    return BaselineReport(
        [
            SampleOutcome(e["sample_id"], labels[e["true_label"]], _outcome_in(e["predicted"], labels), e["correct"])
            for e in doc["entries"]
        ]
    )


def tolerance_to_dict(rep: ToleranceReport) -> dict:
    correct = [e for e in rep.entries if e.baseline_correct]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "tolerance",
        "delta_init": rep.delta_init,
        "mode": rep.mode.value,
        "split": rep.split,
        "global_tolerance": rep.global_tolerance if correct else None,
        "entries": [
            {
                "sample_id": e.sample_id,
                "true_label": e.true_label.name,
                "baseline_correct": e.baseline_correct,
                "tolerance": e.tolerance,
                "capped": e.capped,
                "first_failing_delta": e.first_failing_delta,
                "witness": list(e.witness) if e.witness is not None else None,
                "predicted": _outcome_out(e.predicted) if e.witness is not None else None,
            }
            for e in rep.entries
        ],
    }


def tolerance_from_dict(doc: dict, labels: dict[str, Label]) -> ToleranceReport:
    entries = []
    for e in doc["entries"]:
        witness = tuple(e["witness"]) if e["witness"] is not None else None
        entries.append(
            ToleranceEntry(
                sample_id=e["sample_id"],
                true_label=_label_in(e["true_label"], labels),
                baseline_correct=e["baseline_correct"],
                tolerance=e["tolerance"],
                capped=e["capped"],
                first_failing_delta=e["first_failing_delta"],
                witness=witness,
                predicted=_outcome_in(e["predicted"], labels) if witness is not None else None,
            )
        )
    return ToleranceReport(doc["delta_init"], SearchMode(doc["mode"]), entries, split=doc["split"])


def store_to_dict(store: CounterexampleStore) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "counterexample_store",
        "entries": [
            {
                "sample_id": ce.sample_id,
                "nv": list(ce.nv),
                "predicted": _outcome_out(ce.predicted),
                "true_label": ce.true_label.name,
                "spec_delta": ce.spec_delta,
            }
            for ce in store
        ],
    }


def store_from_dict(doc: dict, labels: dict[str, Label]) -> CounterexampleStore:
    return CounterexampleStore(
        Counterexample(
            e["sample_id"],
            tuple(e["nv"]),
            _outcome_in(e["predicted"], labels),
            _label_in(e["true_label"], labels),
            e["spec_delta"],
        )
        for e in doc["entries"]
    )


def bias_to_dict(rep: BiasReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bias",
        "pair_cap": rep.pair_cap,
        "training_class_balance": dict(rep.training_class_balance),
        "per_label": [
            {
                "label": b.label,
                "n_samples": b.n_samples,
                "n_baseline_correct": b.n_baseline_correct,
                "n_samples_with_ce": b.n_samples_with_ce,
                "ce_count": b.ce_count,
                "misclassification_rate": b.misclassification_rate,
            }
            for b in rep.per_label
        ],
        "witness_pairs": [
            {"flipped_id": w.flipped_id, "kept_id": w.kept_id, "nv": list(w.nv)} for w in rep.witness_pairs
        ],
    }


def bias_from_dict(doc: dict) -> BiasReport:
    return BiasReport(
        [
            LabelBias(b["label"], b["n_samples"], b["n_baseline_correct"], b["n_samples_with_ce"], b["ce_count"])
            for b in doc["per_label"]
        ],
        dict(doc["training_class_balance"]),
        [BiasWitness(w["flipped_id"], w["kept_id"], tuple(w["nv"])) for w in doc["witness_pairs"]],
        doc["pair_cap"],
    )


def sensitivity_to_dict(rep: SensitivityReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "sensitivity",
        "total": rep.total,
        "spec_deltas": list(rep.spec_deltas),
        "nodes": [
            {
                "node": n.node,
                "pos_ce_count": n.pos_ce_count,
                "neg_ce_count": n.neg_ce_count,
                "zero_ce_count": n.zero_ce_count,
                "flags": {
                    "no_positive_ce": n.no_positive_ce,
                    "no_negative_ce": n.no_negative_ce,
                    "noise_inert": n.noise_inert,
                },
            }
            for n in rep.nodes
        ],
    }


def sensitivity_from_dict(doc: dict) -> SensitivityReport:
    nodes = [
        NodeSensitivity(
            n["node"], n["pos_ce_count"], n["neg_ce_count"], n["zero_ce_count"], **n["flags"]
        )
        for n in doc["nodes"]
    ]
    return SensitivityReport(nodes, doc["total"], list(doc["spec_deltas"]))


def boundary_to_dict(rep: BoundaryProfile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "boundary",
        "fragile_cut": rep.fragile_cut,
        "robust_cut": rep.robust_cut,
        "entries": [
            {"sample_id": e.sample_id, "tolerance": e.tolerance, "band": e.band.value} for e in rep.entries
        ],
    }


def boundary_from_dict(doc: dict) -> BoundaryProfile:
    return BoundaryProfile(
        doc["fragile_cut"],
        doc["robust_cut"],
        [BandEntry(e["sample_id"], e["tolerance"], Band(e["band"])) for e in doc["entries"]],
    )


_ENCODERS = {
    BaselineReport: baseline_to_dict,
    ToleranceReport: tolerance_to_dict,
    CounterexampleStore: store_to_dict,
    BiasReport: bias_to_dict,
    SensitivityReport: sensitivity_to_dict,
    BoundaryProfile: boundary_to_dict,
}


def report_to_dict(report) -> dict:
    try:
        return _ENCODERS[type(report)](report)
    except KeyError:
        raise TypeError(f"no serializer for {type(report).__name__}") from None


def write_report(report, path):
    _write_text(path, canonical_json(report_to_dict(report)))


def read_report(path, net: Network | None = None):
    """Load any report written by :func:`write_report`.

    Reports that mention labels need ``net`` to resolve them back to
    :class:`Label` objects.
    """
    doc = _load_json(path)
    kind = doc.get("kind") if isinstance(doc, dict) else None
    labels = {lab.name: lab for lab in net.labels} if net is not None else {}
    if kind in ("baseline", "tolerance", "counterexample_store") and net is None:
        raise ValueError(f"reading a {kind} report requires the network for label names")
    if kind == "baseline":
        return baseline_from_dict(doc, labels)
    if kind == "tolerance":
        return tolerance_from_dict(doc, labels)
    if kind == "counterexample_store":
        return store_from_dict(doc, labels)
    if kind == "bias":
        return bias_from_dict(doc)
    if kind == "sensitivity":
        return sensitivity_from_dict(doc)
    if kind == "boundary":
        return boundary_from_dict(doc)
    raise ParseError(f"unknown report kind {kind!r}", "$.kind")
