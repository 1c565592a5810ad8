"""Command-line entry point: ``floathil run|validate|scale|psd``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import OUTPUT_ENV, load_config, validate
from .scaling import NOMINAL_SCALES, QuantityKind
from .scenarios import EXIT_INVALID, EXIT_OK, convert, format_summary, psd_file, run

CONFIG_DIR = Path(__file__).parent / "configs"


def _resolve(path: str) -> Path:
    """Accept a file path or the name of a shipped config (``steady-wind``)."""
    p = Path(path)
    if p.exists():
        return p
    shipped = CONFIG_DIR / (path if path.endswith(".yaml") else f"{path}.yaml")
    if shipped.exists():
        return shipped
    raise FileNotFoundError(path)


def _load(path: str):
    try:
        return load_config(_resolve(path))
    except FileNotFoundError:
        print(f"error: config {path} not found", file=sys.stderr)
    except Exception as exc:  # malformed YAML
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
    return None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_INVALID
    if args.output_dir:
        cfg.data["output_dir"] = args.output_dir
    res = run(cfg)
    for d in res.diagnostics:
        print(d, file=sys.stderr)
    if res.status == EXIT_OK:
        sys.stdout.write(format_summary(res.summary))
    return res.status


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_INVALID
    diags = validate(cfg)
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_INVALID if diags else EXIT_OK


def cmd_scale(args) -> int:
    value = convert(args.value, args.kind, args.direction, NOMINAL_SCALES)
    print(f"{value:.12g}")
    return EXIT_OK


def cmd_psd(args) -> int:
    out = args.output or str(Path(args.csv).with_suffix("")) + "_psd.csv"
    path = psd_file(args.csv, out, args.column, args.segment_fraction, args.overlap, args.window)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floathil", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config")
    r.add_argument("config", help="YAML file or shipped config name")
    r.add_argument("-o", "--output-dir", help=f"overrides the config and ${OUTPUT_ENV}")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a config and list diagnostics")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("scale", help="convert between model and full scale")
    s.add_argument("--from", dest="direction", choices=("model", "full"), required=True)
    s.add_argument("--kind", choices=[k.value for k in QuantityKind], required=True)
    s.add_argument("--value", type=float, required=True)
    s.set_defaults(func=cmd_scale)

    q = sub.add_parser("psd", help="Welch PSD of one CSV column")
    q.add_argument("csv")
    q.add_argument("--column", help="header name (units optional); default: second column")
    q.add_argument("--output")
    q.add_argument("--segment-fraction", type=float, default=0.125)
    q.add_argument("--overlap", type=float, default=0.5)
    q.add_argument("--window", default="hann")
    q.set_defaults(func=cmd_psd)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
