from pathlib import Path

import numpy as np
import pytest

from fannet.io import load_dataset, load_network
from fannet.network import Activation, Layer, Network, Sample, Split

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def make_t1() -> Network:
    return Network(
        2,
        (
            Layer(np.eye(2), [0.0, 0.0], Activation.RELU),
            Layer([[1.0, -1.0], [-1.0, 1.0]], [0.0, 0.0], Activation.IDENTITY),
        ),
        ("L0", "L1"),
    )


def random_net(rng, dims, low=-1.0, high=1.0) -> Network:
    layers = []
    for k in range(len(dims) - 1):
        act = Activation.IDENTITY if k == len(dims) - 2 else Activation.RELU
        layers.append(Layer(rng.uniform(low, high, (dims[k + 1], dims[k])), rng.uniform(low, high, dims[k + 1]), act))
    return Network(dims[0], tuple(layers))


@pytest.fixture
def t1():
    return make_t1()


@pytest.fixture
def s0(t1):
    return Sample(0, (2.0, 1.0), t1.label(0))


@pytest.fixture
def s1(t1):
    return Sample(1, (1.0, 2.0), t1.label(1))


@pytest.fixture(scope="session")
def f5():
    return load_network(FIXTURES / "f5.json")


@pytest.fixture(scope="session")
def f5_test(f5):
    return load_dataset(FIXTURES / "leukemia_test.csv", f5, Split.TEST)


@pytest.fixture(scope="session")
def f5_train(f5):
    return load_dataset(FIXTURES / "leukemia_train.csv", f5, Split.TRAIN)


@pytest.fixture(scope="session")
def g_net():
    return load_network(FIXTURES / "g.json")


@pytest.fixture(scope="session")
def g_data(g_net):
    return load_dataset(FIXTURES / "g.csv", g_net)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
