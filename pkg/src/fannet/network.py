"""Feed-forward fully-connected networks and their float64 forward semantics.

The forward pass accumulates each neuron as

    acc = 0.0; acc += w[i, 0] * x[0]; ...; acc += w[i, n-1] * x[n-1]; out = acc + b[i]

in exactly that order, one IEEE-754 double operation at a time.  The
vectorised implementation loops over input columns and lets numpy apply the
same element-wise operations to every row (and every batch entry) at once, so
batched and scalar evaluation are bit-identical and reproducible regardless of
BLAS.  Everything downstream (brute force, branch-and-bound, reports) is
defined against this evaluation order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput


class Activation(str, enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self is Activation.RELU:
            return np.where(v > 0.0, v, 0.0)
        return v


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (rows, cols): rows = out-neurons
    biases: np.ndarray
    activation: Activation = Activation.RELU

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, ndmin=2)
        b = np.array(self.biases, dtype=np.float64, ndmin=1)
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return (
            self.activation == other.activation
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.biases, other.biases)
        )

    __hash__ = None


@dataclass(frozen=True)
class Label:
    index: int
    name: str

    def __str__(self):
        return self.name


class _Tie:
    """Outcome when the maximal output is attained by two or more neurons."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TIE"

    def __reduce__(self):
        return (_Tie, ())


TIE = _Tie()
Outcome = Union[Label, _Tie]


@dataclass(frozen=True, eq=False)
class Network:
    input_dim: int
    layers: tuple[Layer, ...]
    output_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        labels = tuple(self.output_labels)
        if not labels and self.layers:
            labels = tuple(f"L{i}" for i in range(self.layers[-1].rows))
        object.__setattr__(self, "output_labels", labels)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].rows

    def label(self, key: int | str) -> Label:
        if isinstance(key, str):
            return Label(self.output_labels.index(key), key)
        return Label(int(key), self.output_labels[key])

    @property
    def labels(self) -> list[Label]:
        return [Label(i, n) for i, n in enumerate(self.output_labels)]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.input_dim == other.input_dim
            and self.output_labels == other.output_labels
            and self.layers == other.layers
        )

    __hash__ = None


@dataclass(frozen=True)
class Sample:
    id: int
    features: tuple[float, ...]
    true_label: Label

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(f) for f in self.features))

    @property
    def x(self) -> np.ndarray:
        return np.array(self.features, dtype=np.float64)


class Split(str, enum.Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass
class Dataset:
    samples: list[Sample]
    split: Split = Split.TEST

    def __post_init__(self):
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique within a dataset")

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def by_id(self, sample_id: int) -> Sample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)


def _check_input(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.input_dim:
        raise DimensionMismatch(f"expected {net.input_dim} features, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("input contains NaN or infinity")
    return x


def affine(layer: Layer, x: np.ndarray) -> np.ndarray:
    """Pre-activation of ``layer`` for a batch ``x`` of shape (B, cols)."""
    acc = np.zeros((x.shape[0], layer.rows))
    w = layer.weights
    for j in range(layer.cols):
        acc += x[:, j : j + 1] * w[:, j]
    return acc + layer.biases


def forward_batch(net: Network, xs: np.ndarray, trace: list | None = None) -> np.ndarray:
    """Evaluate a (B, N) batch.  If ``trace`` is a list, post-activation values
    of every layer are appended to it."""
    h = np.asarray(xs, dtype=np.float64)
    for layer in net.layers:
        h = layer.activation.apply(affine(layer, h))
        if trace is not None:
            trace.append(h)
    return h


def forward_eval(net: Network, x: Sequence[float]) -> np.ndarray:
    x = _check_input(net, x)
    return forward_batch(net, x.reshape(1, -1))[0]


def outcome_of(net: Network, out: np.ndarray) -> Outcome:
    top = out.max()
    winners = np.flatnonzero(out == top)
    if len(winners) != 1:
        return TIE
    return net.label(int(winners[0]))


def classify(net: Network, x: Sequence[float]) -> Outcome:
    return outcome_of(net, forward_eval(net, x))


def correct_mask(outs: np.ndarray, label_index: int) -> np.ndarray:
    """Per batch row: True iff ``label_index`` is the strict maximum."""
    target = outs[:, label_index]
    others = np.delete(outs, label_index, axis=1)
    return np.all(target[:, None] > others, axis=1)


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class NoLayers:
    def __str__(self):
        return "network has no layers"


@dataclass(frozen=True)
class DimensionChainBreak:
    layer: int
    expected_cols: int
    actual_cols: int

    def __str__(self):
        return f"layer {self.layer}: expected {self.expected_cols} columns, found {self.actual_cols}"


@dataclass(frozen=True)
class BiasLengthMismatch:
    layer: int

    def __str__(self):
        return f"layer {self.layer}: bias length differs from weight row count"


@dataclass(frozen=True)
class NonFiniteWeight:
    layer: int
    row: int
    col: int

    def __str__(self):
        return f"layer {self.layer}: non-finite weight at ({self.row}, {self.col})"


@dataclass(frozen=True)
class NonFiniteBias:
    layer: int
    index: int

    def __str__(self):
        return f"layer {self.layer}: non-finite bias at {self.index}"


@dataclass(frozen=True)
class TooFewOutputs:
    count: int

    def __str__(self):
        return f"output layer has {self.count} neuron(s); at least 2 required"


@dataclass(frozen=True)
class LabelCountMismatch:
    labels: int
    outputs: int

    def __str__(self):
        return f"{self.labels} labels for {self.outputs} output neurons"


def validate_network(net: Network) -> list:
    if not net.layers:
        return [NoLayers()]
    violations = []
    width = net.input_dim
    for k, layer in enumerate(net.layers):
        if layer.cols != width:
            violations.append(DimensionChainBreak(k, width, layer.cols))
        if layer.biases.shape[0] != layer.rows:
            violations.append(BiasLengthMismatch(k))
        for r, c in zip(*np.nonzero(~np.isfinite(layer.weights))):
            violations.append(NonFiniteWeight(k, int(r), int(c)))
        for i in np.flatnonzero(~np.isfinite(layer.biases)):
            violations.append(NonFiniteBias(k, int(i)))
        width = layer.rows
    if width < 2:
        violations.append(TooFewOutputs(width))
    if len(net.output_labels) != width:
        violations.append(LabelCountMismatch(len(net.output_labels), width))
    return violations

