"""Command-line interface: ``coupledarray {impedance,gain,sweep,peaks}``."""

import argparse
import configparser
import logging
from importlib import resources
from pathlib import Path
import sys

from . import __version__
from .errors import ConfigError, DomainError, NumericalError
from .impedance import dipole_self_impedance, mutual_impedance, radiation_resistance
from .sweep import emit_csv, emit_peaks_csv, evaluate_point, parse_config, run_peaks, run_sweep, sweep_points

log = logging.getLogger("coupledarray")


def shipped_configs():
    """Names of the configuration files shipped with the package."""
    root = resources.files("coupledarray") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def read_config_text(name):
    """Read ``name`` from disk, or from the shipped configs (``fig3`` or ``fig3.cfg``)."""
    path = Path(name)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    fname = name if name.endswith(".cfg") else name + ".cfg"
    shipped = resources.files("coupledarray") / "configs" / fname
    if shipped.is_file():
        return shipped.read_text(encoding="utf-8")
    raise ConfigError(f"no configuration file {name!r} (shipped: {', '.join(shipped_configs())})")


def _apply_overrides(text, overrides):
    """Append ``section.key=value`` overrides to a configuration document."""
    if not overrides:
        return text
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";")
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    for item in overrides:
        key, sep, value = item.partition("=")
        sect, dot, opt = key.strip().partition(".")
        if not sep or not dot or not opt:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        if not cp.has_section(sect):
            cp.add_section(sect)
        cp[sect][opt] = value.strip()
    out = []
    for sect in cp.sections():
        out.append(f"[{sect}]")
        out.extend(f"{k} = {v}" for k, v in cp[sect].items())
        out.append("")
    return "\n".join(out)


def _load_spec(args):
    if args.config is None:
        if not args.set:
            raise ConfigError("--config is required (a path or a shipped name such as fig3)")
        text = ""
    else:
        text = read_config_text(args.config)
    return parse_config(_apply_overrides(text, args.set))


def _write_output(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_impedance(args):
    za = dipole_self_impedance()
    lines = ["# half-wave dipole, side-by-side", f"# z_self_ohm = {za.real:.12g}{za.imag:+.12g}j",
             f"# radiation_resistance_ohm = {radiation_resistance():.12g}", "d_over_lambda,re_ohm,im_ohm"]
    for d in args.distance:
        z = mutual_impedance(d)
        lines.append(f"{d:.12g},{z.real:.12g},{z.imag:.12g}")
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_gain(args):
    spec = _load_spec(args)
    if spec.sweep is not None or spec.family is not None:
        raise ConfigError("gain evaluates a single point; use the sweep subcommand for [sweep]/[family]")
    rows = [evaluate_point(spec, pt) for pt in sweep_points(spec)]
    _write_output(emit_csv(rows, spec), args.out)
    return 0


def cmd_sweep(args):
    spec = _load_spec(args)
    rows = run_sweep(spec, threads=args.threads)
    _write_output(emit_csv(rows, spec), args.out)
    failed = sum(1 for r in rows if r.diagnostics)
    if failed:
        log.warning("%d of %d sweep points carry diagnostics", failed, len(rows))
    return 0


def cmd_peaks(args):
    spec = _load_spec(args)
    header, rows = run_peaks(spec, threads=args.threads)
    _write_output(emit_peaks_csv(header, rows, spec), args.out)
    return 0


def cmd_configs(args):
    _write_output("\n".join(shipped_configs()) + "\n", args.out)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="configuration file or shipped name")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output CSV path (default: stdout)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    common.add_argument(
        "--set",
        action="append",
        default=argparse.SUPPRESS,
        metavar="SECTION.KEY=VALUE",
        help="override one configuration entry (repeatable)",
    )

    p = argparse.ArgumentParser(
        prog="coupledarray",
        description="Array gains of mutually coupled half-wave dipole arrays.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", default=None, help="configuration file or shipped name")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one configuration entry (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("impedance", parents=[common], help="self and mutual dipole impedances")
    s.add_argument("distance", nargs="*", type=float, help="separations in wavelengths")
    s.set_defaults(func=cmd_impedance)

    s = sub.add_parser("gain", parents=[common], help="gains of a single configuration point")
    s.set_defaults(func=cmd_gain)

    s = sub.add_parser("sweep", parents=[common], help="evaluate a sweep and write CSV")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("peaks", parents=[common], help="optimal spacing or saturation onset")
    s.set_defaults(func=cmd_peaks)

    s = sub.add_parser("configs", parents=[common], help="list shipped configuration files")
    s.set_defaults(func=cmd_configs)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
