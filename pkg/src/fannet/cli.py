"""Command-line entry point: ``fannet <subcommand> ...``.

Exit codes: 0 success, 1 a verification property was falsified (``baseline
--strict``, ``check-smv``), 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, io, smv
from .errors import FannetError
from .network import Split, classify
from .noise import NoiseSpec, apply_noise
from .verify import SearchMode, check_baseline, global_tolerance

log = logging.getLogger("fannet")


def _emit(report, out: str | None):
    if out:
        io.write_report(report, out)
    else:
        sys.stdout.write(io.canonical_json(io.report_to_dict(report)))


def _noise_spec(args, n: int) -> NoiseSpec:
    if args.noise_range:
        spec = NoiseSpec.parse_ranges(args.noise_range)
        if spec.dim != n:
            raise FannetError(f"--noise-range lists {spec.dim} nodes, network has {n} inputs")
        return spec
    return NoiseSpec.symmetric(args.noise, n)


def cmd_baseline(args) -> int:
    net = io.load_network(args.net)
    rep = check_baseline(net, io.load_dataset(args.data, net))
    _emit(rep, args.out)
    if args.strict and not all(e.correct for e in rep.entries):
        return 1
    return 0


def cmd_tolerance(args) -> int:
    net = io.load_network(args.net)
    ds = io.load_dataset(args.data, net, args.split)
    rep = global_tolerance(net, ds, args.init, SearchMode(args.mode), jobs=args.jobs)
    _emit(rep, args.out)
    return 0


def cmd_extract(args) -> int:
    net = io.load_network(args.net)
    ds = io.load_dataset(args.data, net)
    spec = _noise_spec(args, net.input_dim)
    if args.sample:
        samples = [ds.by_id(i) for i in args.sample]
    else:
        base = check_baseline(net, ds)
        samples = [s for s, b in zip(ds.samples, base.entries) if b.correct]
    store = analysis.CounterexampleStore()
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(lambda s: analysis.collect(net, [s], spec, args.cap), samples))
        for part in parts:
            for ce in part:
                store.insert(ce)
    else:
        analysis.collect(net, samples, spec, args.cap, store)
    log.info("extracted %d counterexamples from %d samples", len(store), len(samples))
    _emit(store, args.out)
    return 0


def cmd_bias(args) -> int:
    net = io.load_network(args.net)
    store = io.read_report(args.store, net)
    train = io.load_dataset(args.train, net, Split.TRAIN)
    test = io.load_dataset(args.test, net, Split.TEST)
    _emit(analysis.bias_report(store, train, test, net, pair_cap=args.pair_cap), args.out)
    return 0


def cmd_sensitivity(args) -> int:
    net = io.load_network(args.net)
    store = io.read_report(args.store, net)
    ds = io.load_dataset(args.data, net) if args.data else None
    _emit(analysis.sensitivity_report(store, net.input_dim, ds), args.out)
    return 0


def cmd_boundary(args) -> int:
    net = io.load_network(args.net)
    rep = io.read_report(args.report, net)
    _emit(analysis.boundary_profile(rep, args.fragile_cut, args.robust_cut), args.out)
    return 0


def _model(args):
    net = io.load_network(args.net)
    ds = io.load_dataset(args.data, net)
    sample = ds.by_id(args.sample)
    spec = _noise_spec(args, net.input_dim) if args.property == "p2" else None
    return net, sample, smv.emit_smv(net, sample, spec, args.property)


def cmd_emit_smv(args) -> int:
    _, _, model = _model(args)
    if args.out:
        Path(args.out).write_text(model.text)
    else:
        sys.stdout.write(model.text)
    return 0


def cmd_check_smv(args) -> int:
    net, sample, model = _model(args)
    output = smv.run_checker(model)
    verdict = smv.parse_checker_trace(output, model)
    doc = {"verified": verdict.verified, "witness": None, "replays": None}
    if not verdict.verified:
        # the checker reasons over reals; confirm the witness in float semantics
        oc = classify(net, apply_noise(sample.x, verdict.witness))
        doc.update(witness=list(verdict.witness), replays=oc != sample.true_label)
    text = io.canonical_json(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if verdict.verified else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fannet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        sp.add_argument("--net", required=True, help="network JSON file")
        if data:
            sp.add_argument("--data", required=True, help="dataset CSV file")
        sp.add_argument("--out", help="output path (default: stdout)")

    def noise(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--noise", type=int, metavar="D", help="symmetric bound: every node in [-D, D] percent")
        g.add_argument("--noise-range", metavar="LO:HI,...", help="per-node percent ranges")

    sp = sub.add_parser("baseline", help="zero-noise correctness of every sample")
    common(sp)
    sp.add_argument("--strict", action="store_true", help="exit 1 unless every sample is correct")
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("tolerance", help="per-sample and global noise tolerance")
    common(sp)
    sp.add_argument("--init", type=int, default=50, help="largest noise level tried (percent)")
    sp.add_argument("--mode", choices=[m.value for m in SearchMode], default=SearchMode.BINARY.value)
    sp.add_argument("--split", choices=[s.value for s in Split], default=Split.TEST.value)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_tolerance)

    sp = sub.add_parser("extract", help="enumerate adversarial noise vectors into a store")
    common(sp)
    noise(sp)
    sp.add_argument("--sample", type=int, action="append", help="sample id (repeatable; default: all correct)")
    sp.add_argument("--cap", type=int, default=1000, help="maximum vectors per sample")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("bias", help="training-bias report from a store")
    common(sp, data=False)
    sp.add_argument("--store", required=True)
    sp.add_argument("--train", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--pair-cap", type=int, default=100)
    sp.set_defaults(func=cmd_bias)

    sp = sub.add_parser("sensitivity", help="input-node sensitivity report from a store")
    common(sp, data=False)
    sp.add_argument("--store", required=True)
    sp.add_argument("--data", help="dataset the store refers to (enables noise-inert flags)")
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("boundary", help="band samples by tolerance")
    common(sp, data=False)
    sp.add_argument("--report", required=True, help="tolerance report JSON")
    sp.add_argument("--fragile-cut", type=int, default=12)
    sp.add_argument("--robust-cut", type=int, default=50)
    sp.set_defaults(func=cmd_boundary)

    for name, func, text in (
        ("emit-smv", cmd_emit_smv, "write the SMV model for one sample"),
        ("check-smv", cmd_check_smv, f"emit, run nuXmv (${smv.NUXMV_ENV}) and parse its verdict"),
    ):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--sample", type=int, required=True, help="sample id")
        sp.add_argument("--property", choices=[p.value for p in smv.Property], default="p2")
        noise(sp, required=False)
        sp.set_defaults(func=func, noise=0)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (FannetError, OSError, KeyError, ValueError) as exc:
        print(f"fannet {args.command}: {exc}", file=sys.stderr)
        return 2


def run_cli(argv: list[str]) -> int:
    """Run with ``argv`` and return the exit code instead of exiting."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
