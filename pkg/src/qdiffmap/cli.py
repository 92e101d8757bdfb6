"""Command-line entry point: ``qdm <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import MISSING, fields

from . import pipeline as pl
from .errors import QDMError

_BOOL_FIELDS = {"standardize", "exact_unitaries"}


def _str_to_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _field_type(f):
    if f.name in _BOOL_FIELDS:
        return _str_to_bool
    default = f.default if f.default is not MISSING else None
    if isinstance(default, int) and not isinstance(default, bool):
        return int
    if isinstance(default, float) or f.name == "qmat_t_degree":
        return float
    return str


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    for f in fields(pl.RunConfig):
        p.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            type=_field_type(f),
            default=None,
            help=f"default: {f.default!r}",
        )


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdm", description="Classical and simulated quantum diffusion maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("classical", "classical diffusion map only"),
        ("quantum", "simulated quantum pipeline (also runs the classical oracle)"),
        ("compare", "both pipelines plus comparison metrics"),
    ):
        _add_config_flags(sub.add_parser(name, help=text))

    sq = sub.add_parser("scan-qmat", help="QMAT deviation against t and m")
    _add_config_flags(sq)
    sq.add_argument("--t-list", type=_floats, default=[0.25, 0.5, 1.0, 2.0])
    sq.add_argument("--m-list", type=_ints, default=[16, 32, 64, 128])
    sq.add_argument("--dims", type=_ints, default=[3])

    sr = sub.add_parser("scan-readout", help="sampled readout error against sample count")
    _add_config_flags(sr)
    sr.add_argument("--samples", type=_ints, default=[1000, 4000, 16000, 64000])
    sr.add_argument("--repeats", type=int, default=20)
    return parser


def config_from_args(args: argparse.Namespace) -> pl.RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for f in fields(pl.RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    return pl.RunConfig.from_dict(data)


def run(args: argparse.Namespace) -> dict:
    cfg = config_from_args(args)
    classical = quantum = None
    scans = {}
    if args.command == "classical":
        classical = pl.run_classical(cfg)
    elif args.command in ("quantum", "compare"):
        X = pl.load_dataset(cfg)
        crun = pl.classical_run(X, cfg)
        quantum = pl.run_quantum(cfg, X, crun)
        classical = pl._fragment_classical(crun)
    elif args.command == "scan-qmat":
        scans["qmat"] = pl.scan_qmat_error(args.t_list, args.m_list, tuple(args.dims), seed=cfg.seed)
    else:
        scans["readout"] = pl.scan_readout(args.samples, n=cfg.n, repeats=args.repeats, seed=cfg.seed)
    report = pl.build_report(cfg, classical, quantum, scans)
    written = pl.write_outputs(pl.output_dir(cfg), report)
    for path in written:
        print(path)
    return report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except QDMError as exc:
        print(f"error [{exc.stage or 'config'}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
