#!/usr/bin/env python3
"""Regenerate the test fixtures under tests/fixtures/.

T1   hand-built 2-2-2 network (identity hidden layer, antisymmetric output).
G    3-3-2 network where raising input node 2 can only reinforce label L0.
F5   5-8-2 ReLU network trained here on the Leukemia-shaped surrogate data.

The original Leukemia expression table is not shipped.  The surrogate keeps
the public Golub split sizes and class counts (train: 27 ALL / 11 AML,
test: 20 ALL / 14 AML) and draws five positive, log-normally distributed
"expression" features per sample from class-dependent means.  Everything is
seeded; rerunning the script reproduces the files byte for byte.

    python scripts/make_fixtures.py [outdir]
"""

import json
import sys
from pathlib import Path

import numpy as np

from fannet.io import canonical_json, save_dataset, save_network
from fannet.network import Activation, Dataset, Layer, Network, Sample, Split
from fannet.verify import check_baseline

SEED = 20191
LABELS = ("AML", "ALL")  # index 1 (ALL) is the majority class
TRAIN_COUNTS = {"ALL": 27, "AML": 11}
TEST_COUNTS = {"ALL": 20, "AML": 14}
LOG_MEANS = {
    "ALL": np.log([1.30, 0.55, 0.95, 0.45, 0.80]),
    "AML": np.log([0.70, 1.05, 0.55, 0.85, 0.75]),
}
LOG_SD = 0.30


def t1() -> Network:
    return Network(
        2,
        (
            Layer([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], Activation.RELU),
            Layer([[1.0, -1.0], [-1.0, 1.0]], [0.0, 0.0], Activation.IDENTITY),
        ),
        ("L0", "L1"),
    )


def g() -> Network:
    # out0 = h2 + 0.1*h0, out1 = 0.1*h1 + 0.95 with h = relu(x)
    return Network(
        3,
        (
            Layer(np.eye(3), [0.0, 0.0, 0.0], Activation.RELU),
            Layer([[0.1, 0.0, 1.0], [0.0, 0.1, 0.0]], [0.0, 0.95], Activation.IDENTITY),
        ),
        ("L0", "L1"),
    )


def g_samples(net: Network) -> Dataset:
    l0 = net.label(0)
    feats = [(1.0, 1.0, 1.0), (1.2, 1.0, 1.0), (1.0, 1.3, 1.0), (0.5, 0.5, 1.0)]
    return Dataset([Sample(i, f, l0) for i, f in enumerate(feats)], Split.TEST)


def surrogate(rng: np.random.Generator, counts: dict, split: Split, first_id: int, net_labels) -> Dataset:
    samples = []
    order = []
    for name, n in counts.items():
        order += [name] * n
    rng.shuffle(order)
    for k, name in enumerate(order):
        feats = np.exp(rng.normal(LOG_MEANS[name], LOG_SD))
        feats = np.round(feats, 4)
        samples.append(Sample(first_id + k, tuple(float(f) for f in feats), net_labels[LABELS.index(name)]))
    return Dataset(samples, split)


def train_f5(train: Dataset, rng: np.random.Generator) -> Network:
    """Full-batch gradient descent on softmax cross-entropy, 5-8-2 ReLU."""
    x = np.array([s.features for s in train])
    y = np.array([s.true_label.index for s in train])
    mu, sd = x.mean(axis=0), x.std(axis=0)
    w1 = rng.normal(0, np.sqrt(2 / 5), (8, 5))
    b1 = np.zeros(8)
    w2 = rng.normal(0, np.sqrt(2 / 8), (2, 8))
    b2 = np.zeros(2)
    z = (x - mu) / sd
    onehot = np.eye(2)[y]
    for epoch in range(800):
        lr = 0.5 if epoch < 400 else 0.2
        pre = z @ w1.T + b1
        h = np.maximum(pre, 0)
        logits = h @ w2.T + b2
        p = np.exp(logits - logits.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        g_logits = (p - onehot) / len(z)
        g_w2 = g_logits.T @ h
        g_b2 = g_logits.sum(axis=0)
        g_h = g_logits @ w2 * (pre > 0)
        g_w1 = g_h.T @ z
        g_b1 = g_h.sum(axis=0)
        w1 -= lr * g_w1
        b1 -= lr * g_b1
        w2 -= lr * g_w2
        b2 -= lr * g_b2
    # fold the standardisation into the first layer so the network reads raw
    # features (relative noise must act on the measured values)
    w1_raw = w1 / sd
    b1_raw = b1 - w1_raw @ mu
    round8 = lambda a: np.round(a, 8)  # noqa: E731
    return Network(
        5,
        (
            Layer(round8(w1_raw), round8(b1_raw), Activation.RELU),
            Layer(round8(w2), round8(b2), Activation.IDENTITY),
        ),
        LABELS,
    )


def main(outdir: Path):
    outdir.mkdir(parents=True, exist_ok=True)
    net_t1 = t1()
    save_network(net_t1, outdir / "t1.json")
    l0, l1 = net_t1.labels
    save_dataset(Dataset([Sample(0, (2.0, 1.0), l0), Sample(1, (1.0, 2.0), l1)]), outdir / "t1.csv")
    save_dataset(Dataset([Sample(0, (1.0, 1.0), l0)]), outdir / "tie.csv")

    net_g = g()
    save_network(net_g, outdir / "g.json")
    save_dataset(g_samples(net_g), outdir / "g.csv")

    rng = np.random.default_rng(SEED)
    proto = Network(5, (Layer(np.zeros((2, 5)), np.zeros(2)),), LABELS)
    labels = proto.labels
    train = surrogate(rng, TRAIN_COUNTS, Split.TRAIN, 0, labels)
    test = surrogate(rng, TEST_COUNTS, Split.TEST, 100, labels)
    save_dataset(train, outdir / "leukemia_train.csv")
    save_dataset(test, outdir / "leukemia_test.csv")

    net_f5 = train_f5(train, rng)
    save_network(net_f5, outdir / "f5.json")
    meta = {
        "seed": SEED,
        "train_accuracy": check_baseline(net_f5, train).accuracy,
        "test_accuracy": check_baseline(net_f5, test).accuracy,
        "train_counts": TRAIN_COUNTS,
        "test_counts": TEST_COUNTS,
    }
    (outdir / "f5_meta.json").write_text(canonical_json(meta))
    print(json.dumps(meta, indent=2))


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests" / "fixtures")
