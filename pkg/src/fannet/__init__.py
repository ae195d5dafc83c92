"""Formal noise-tolerance analysis of feed-forward ReLU classifiers.

Typical use::

    from fannet import load_network, load_dataset, global_tolerance

    net = load_network("net.json")
    report = global_tolerance(net, load_dataset("test.csv", net), delta_init=50)
    print(report.global_tolerance)
"""

from .analysis import (
    CounterexampleStore,
    Counterexample,
    bias_report,
    boundary_profile,
    sensitivity_report,
    single_node_sensitivity,
    store_insert,
)
from .bounds import BoundsVector, propagate_bounds
from .io import load_dataset, load_network, read_report, write_report
from .network import TIE, Activation, Dataset, Label, Layer, Network, Sample, classify, forward_eval, validate_network
from .noise import NoiseBox, NoiseSpec, apply_noise, grid_iterator, split_box
from .smv import emit_smv, parse_checker_trace
from .verify import (
    SearchMode,
    Verdict,
    brute_force_check,
    check_baseline,
    extract_adversarial_vectors,
    global_tolerance,
    per_sample_tolerance,
    verify_noise_level,
)

__version__ = "0.1.0"
