"""SMV rendering of a network under noise, for nuXmv cross-validation.

The emitted model is combinational: one FROZENVAR per noise node (the
checker's nondeterministic choice replaces grid enumeration), DEFINEs for the
noisy inputs and every neuron, and a single INVARSPEC stating that the true
label stays the strict maximum.  Numbers are printed as exact decimals of the
stored doubles, so the checker reasons over the same real values the float
network starts from; the checker then evaluates in exact real arithmetic,
not float.
"""

from __future__ import annotations

import enum
import os
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from .errors import DimensionMismatch, UnrecognizedOutput, UnsupportedActivation, ValidationError
from .network import Activation, Network, Sample, validate_network
from .noise import NoiseSpec
from .verify import Verdict

NUXMV_ENV = "FANNET_NUXMV"


class Property(str, enum.Enum):
    P1 = "p1"  # baseline: no noise
    P2 = "p2"  # label stable under the noise range


@dataclass(frozen=True)
class Role:
    kind: str  # "noise" | "input" | "neuron" | "property"
    layer: int | None = None
    index: int | None = None
    free: bool = False


@dataclass
class SmvModel:
    text: str
    var_map: dict[str, Role] = field(default_factory=dict)
    prop: Property = Property.P2

    def noise_vars(self, free_only: bool = False) -> list[str]:
        names = [n for n, r in self.var_map.items() if r.kind == "noise" and (r.free or not free_only)]
        return sorted(names, key=lambda n: self.var_map[n].index)


def smv_real(v: float) -> str:
    """Exact decimal literal for a double, parenthesised when negative."""
    text = format(Decimal(repr(float(v))).normalize(), "f")
    if "." not in text:
        text += ".0"
    if text.startswith("-"):
        return f"({text})"
    return text


def emit_smv(net: Network, s: Sample, spec: NoiseSpec | None, prop: Property | str = Property.P2) -> SmvModel:
    prop = Property(prop)
    problems = validate_network(net)
    if problems:
        raise ValidationError(problems)
    for layer in net.layers:
        if layer.activation not in (Activation.RELU, Activation.IDENTITY):
            raise UnsupportedActivation(str(layer.activation))
    if len(s.features) != net.input_dim:
        raise DimensionMismatch(f"sample has {len(s.features)} features, network expects {net.input_dim}")
    if prop is Property.P2 and (spec is None or spec.dim != net.input_dim):
        raise DimensionMismatch("P2 needs a noise spec with one range per input node")

    var_map: dict[str, Role] = {}
    shape = "-".join([str(net.input_dim)] + [str(layer.rows) for layer in net.layers])
    lines = [
        f"-- fannet model: network {shape}, sample {s.id}, true label {s.true_label.name}, property {prop.value}",
    ]
    if prop is Property.P2:
        lines.append(f"-- noise ranges (percent): {spec.encode()}")
    lines.append("MODULE main")

    if prop is Property.P2:
        lines.append("FROZENVAR")
        for i, (lo, hi) in enumerate(spec.ranges):
            lines.append(f"  n_{i} : {lo}..{hi};")
            var_map[f"n_{i}"] = Role("noise", index=i, free=True)

    lines.append("DEFINE")
    if prop is Property.P1:
        for i in range(net.input_dim):
            lines.append(f"  n_{i} := 0;")
            var_map[f"n_{i}"] = Role("noise", index=i)
    for i, xv in enumerate(s.features):
        lines.append(f"  x_{i} := ({smv_real(xv)} * (100 + n_{i})) / 100.0;")
        var_map[f"x_{i}"] = Role("input", index=i)

    prev = [f"x_{i}" for i in range(net.input_dim)]
    for k, layer in enumerate(net.layers, start=1):
        names = []
        for r in range(layer.rows):
            terms = [f"{smv_real(w)} * {p}" for w, p in zip(layer.weights[r], prev)]
            expr = " + ".join(terms + [smv_real(layer.biases[r])])
            if layer.activation is Activation.RELU:
                expr = f"max({expr}, 0.0)"
            name = f"h{k}_{r}"
            lines.append(f"  {name} := {expr};")
            var_map[name] = Role("neuron", layer=k, index=r)
            names.append(name)
        prev = names

    t = s.true_label.index
    cmp = " & ".join(f"{prev[t]} > {prev[j]}" for j in range(len(prev)) if j != t)
    lines.append(f"  correct := {cmp};")
    var_map["correct"] = Role("property")
    lines.append(f"INVARSPEC NAME {prop.value} := correct;")
    return SmvModel("\n".join(lines) + "\n", var_map, prop)


_TRUE = re.compile(r"^--\s*invariant\b.*\bis true\s*$", re.MULTILINE)
_FALSE = re.compile(r"^--\s*invariant\b.*\bis false\s*$", re.MULTILINE)
_ASSIGN = re.compile(r"^\s*([A-Za-z_][\w.\[\]]*)\s*=\s*(-?\d+)\s*$")


@dataclass
class CheckerTrace:
    assignments: dict[str, int]


def parse_trace_assignments(output: str) -> CheckerTrace:
    found: dict[str, int] = {}
    for line in output.splitlines():
        m = _ASSIGN.match(line)
        if m and m.group(1) not in found:
            found[m.group(1)] = int(m.group(2))
    return CheckerTrace(found)


def parse_checker_trace(output: str, model: SmvModel) -> Verdict:
    if _FALSE.search(output):
        trace = parse_trace_assignments(output[_FALSE.search(output).end() :])
        nv = []
        for name in model.noise_vars():
            role = model.var_map[name]
            if not role.free:
                nv.append(0)
            elif name in trace.assignments:
                nv.append(trace.assignments[name])
            else:
                raise UnrecognizedOutput(f"counterexample trace does not assign {name}")
        return Verdict(tuple(nv), None)
    if _TRUE.search(output):
        return Verdict()
    raise UnrecognizedOutput("no invariant verdict found in checker output")


def run_checker(model: SmvModel, binary: str | None = None, timeout: float = 600.0) -> str:
    """Run nuXmv on ``model`` and return its stdout.

    The model mixes integers and reals, so the MathSAT-backed IC3 engine is
    used.
    """
    binary = binary or os.environ.get(NUXMV_ENV)
    if not binary:
        raise FileNotFoundError(f"set {NUXMV_ENV} to the nuXmv executable")
    with tempfile.TemporaryDirectory() as tmp:
        smv = Path(tmp) / "model.smv"
        cmds = Path(tmp) / "cmds.txt"
        smv.write_text(model.text)
        cmds.write_text(f"read_model -i {smv}\ngo_msat\ncheck_invar_ic3\nquit\n")
        proc = subprocess.run(
            [binary, "-source", str(cmds)], capture_output=True, text=True, timeout=timeout
        )
    return proc.stdout + proc.stderr
