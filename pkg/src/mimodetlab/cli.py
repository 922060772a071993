"""Command line front end.

Three subcommands:

  ber         Monte Carlo bit error rate sweeps -> ber.csv
  gaincut     array factor cuts over u = sin(theta) -> gain.csv
  complexity  flop model tables -> flops.csv

Every run writes a manifest.json next to its CSV with the fully
resolved configuration; feeding that file back through --config
reproduces the CSV byte for byte.

Option precedence, lowest to highest: built-in defaults, preset,
config file, command line flags. Config files are flat key=value
lines using the long flag names (or a manifest.json from an earlier
run). Exit codes: 0 success, 2 usage or configuration error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .arraygain import ArraySpec, gain_cut
from .channel import GeometryParams
from .complexity import MODELED_KINDS, complexity_table
from .errors import ConfigurationError, MimoDetLabError
from .sim import SimConfig, most_square_factors, run_sweep

SCHEMA_VERSION = 1
CSV_COMMENT = f"# mimo-detlab v{__version__}, schema {SCHEMA_VERSION}"
SEED_ENV = "MIMODETLAB_SEED"

BER_HEADER = ("detector", "ebn0_db", "trials", "bits", "bit_errors",
              "ber", "mean_flops", "mean_sd_nodes")
GAIN_HEADER = ("u", "theta_deg", "gain_db")
FLOPS_HEADER = ("kind", "n", "M", "rho", "flops")

PRESETS = {
    "A": {"mod-order": "16", "nt": "8", "nr": "8", "array": "ula"},
    "B": {"mod-order": "64", "nt": "4", "nr": "4", "array": "ula"},
    "C": {"mod-order": "4", "nt": "20", "nr": "20", "array": "ula"},
    "UPA-A": {"mod-order": "16", "nt": "8", "nr": "8", "array": "upa"},
    "UPA-B": {"mod-order": "4", "nt": "64", "nr": "64", "array": "upa"},
}

# config-file keys accepted per subcommand (long flag names)
BER_KEYS = ("preset", "detectors", "mod-order", "nt", "nr", "rho", "array",
            "corr-model", "geom-theta", "geom-phi", "geom-xi", "geom-sigma",
            "spacing", "upa-shape", "ebn0", "min-errors", "max-trials",
            "seed", "workers")
GAINCUT_KEYS = ("array", "elems", "spacing", "cut-phi", "u-step")
COMPLEXITY_KEYS = ("detectors", "n-grid", "mod-order", "rho-grid",
                   "sd-n0", "sd-csq", "sd-bracket")


class UsageError(Exception):
    """Bad flag value or inconsistent configuration."""


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{key}: expected integer, got {text!r}") from None


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{key}: expected number, got {text!r}") from None


def _parse_grid(key: str, text: str) -> tuple[float, ...]:
    """Grid spec: 'start:step:stop' (stop inclusive), comma list, or scalar."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"{key}: expected start:step:stop, got {text!r}")
        start, step, stop = (_parse_float(key, p) for p in parts)
        if step <= 0:
            raise UsageError(f"{key}: step must be positive")
        if stop < start:
            raise UsageError(f"{key}: stop below start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(count))
    if "," in text:
        return tuple(_parse_float(key, p) for p in text.split(",") if p.strip())
    return (_parse_float(key, text),)


def _parse_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _parse_shape(key: str, text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"{key}: expected NxM, got {text!r}")
    return _parse_int(key, parts[0]), _parse_int(key, parts[1])


def _read_config_file(path: str, allowed: tuple[str, ...]) -> dict[str, str]:
    """Flat key=value file, or a manifest.json from an earlier run."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    if path.endswith(".json"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from None
        if isinstance(doc, dict) and isinstance(doc.get("config"), dict):
            doc = doc["config"]
        if not isinstance(doc, dict):
            raise UsageError(f"{path}: expected a JSON object")
        values = {str(k): str(v) for k, v in doc.items()}
    else:
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    for key in values:
        if key not in allowed:
            raise UsageError(f"{path}: unknown config key {key!r}")
    return values


def _resolve(args: argparse.Namespace, keys: tuple[str, ...],
             defaults: dict[str, str]) -> dict[str, str]:
    """Merge defaults, preset, config file, and explicit flags."""
    cli = {}
    for key in keys:
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            cli[key] = value

    from_file = {}
    if args.config is not None:
        from_file = _read_config_file(args.config, keys)

    resolved = dict(defaults)
    preset = cli.get("preset", from_file.get("preset"))
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(
                f"unknown preset {preset!r} (choose from {', '.join(PRESETS)})")
        resolved.update(PRESETS[preset])
        resolved["preset"] = preset
    resolved.update(from_file)
    resolved.update(cli)
    return resolved


def _require(resolved: dict[str, str], key: str) -> str:
    if key not in resolved:
        raise UsageError(f"missing required option --{key}")
    return resolved[key]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: str, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(CSV_COMMENT + "\n")
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: str, command: str, config: dict[str, str],
                    outputs: list[str], extra: dict | None = None) -> str:
    doc = {
        "tool": "mimo-detlab",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc)
        .strftime("%Y-%m-%dT%H:%M:%SZ"),
        "config": dict(sorted(config.items())),
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _default_seed() -> str:
    return os.environ.get(SEED_ENV, "0")


# ---------------------------------------------------------------- ber

BER_DEFAULTS = {
    "rho": "0",
    "array": "ula",
    "corr-model": "kronecker",
    "geom-theta": "0",
    "geom-phi": "0",
    "geom-xi": "0",
    "geom-sigma": "0",
    "spacing": "0.5",
    "min-errors": "400",
    "max-trials": "10000000",
    "workers": "1",
}


def _build_sim_config(resolved: dict[str, str]) -> SimConfig:
    detectors = _parse_list(_require(resolved, "detectors"))
    if not detectors:
        raise UsageError("detectors: empty list")
    mod_order = _parse_int("mod-order", _require(resolved, "mod-order"))
    n_t = _parse_int("nt", _require(resolved, "nt"))
    n_r = _parse_int("nr", _require(resolved, "nr"))
    ebn0 = _parse_grid("ebn0", _require(resolved, "ebn0"))
    array_kind = resolved["array"]
    corr_model = resolved["corr-model"]

    upa_shape = None
    if "upa-shape" in resolved:
        if array_kind != "upa":
            raise UsageError("upa-shape is only valid with --array upa")
        upa_shape = _parse_shape("upa-shape", resolved["upa-shape"])

    geometry = None
    if corr_model == "geometric":
        spacing = _parse_float("spacing", resolved["spacing"])
        if array_kind == "upa":
            n_v, n_h = upa_shape or most_square_factors(n_t)
        else:
            n_v, n_h = 1, 1
        geometry = GeometryParams(
            d1=spacing,
            d2=spacing,
            theta=_parse_float("geom-theta", resolved["geom-theta"]),
            phi=_parse_float("geom-phi", resolved["geom-phi"]),
            xi=_parse_float("geom-xi", resolved["geom-xi"]),
            sigma=_parse_float("geom-sigma", resolved["geom-sigma"]),
            n_v=n_v,
            n_h=n_h,
        )

    try:
        return SimConfig(
            detectors=detectors,
            mod_order=mod_order,
            n_t=n_t,
            n_r=n_r,
            ebn0_db=ebn0,
            corr_model=corr_model,
            rho=_parse_float("rho", resolved["rho"]),
            array_kind=array_kind,
            upa_shape=upa_shape,
            geometry=geometry,
            min_errors=_parse_int("min-errors", resolved["min-errors"]),
            max_trials=_parse_int("max-trials", resolved["max-trials"]),
            seed=_parse_int("seed", resolved.get("seed", _default_seed())),
            workers=_parse_int("workers", resolved["workers"]),
        )
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None


def _cmd_ber(args: argparse.Namespace) -> int:
    resolved = _resolve(args, BER_KEYS, BER_DEFAULTS)
    resolved.setdefault("seed", _default_seed())
    cfg = _build_sim_config(resolved)
    os.makedirs(args.out, exist_ok=True)

    points = run_sweep(cfg)
    rows = [(p.detector, p.ebn0_db, p.trials, p.bits_simulated, p.bit_errors,
             p.ber, p.mean_flops, p.mean_sd_nodes) for p in points]
    csv_path = os.path.join(args.out, "ber.csv")
    _write_csv(csv_path, BER_HEADER, rows)
    _write_manifest(args.out, "ber", resolved, ["ber.csv"],
                    {"assumes_perfect_noise_variance": True})
    for p in points:
        print(f"{p.detector} @ {p.ebn0_db:g} dB: ber={p.ber:.3e} "
              f"({p.bit_errors}/{p.bits_simulated} bits, {p.trials} trials)")
    print(f"wrote {csv_path}")
    return 0


# ------------------------------------------------------------ gaincut

GAINCUT_DEFAULTS = {
    "array": "ula",
    "elems": "25",
    "spacing": "0.5",
    "cut-phi": "0",
    "u-step": "0.01",
}


def _cmd_gaincut(args: argparse.Namespace) -> int:
    resolved = _resolve(args, GAINCUT_KEYS, GAINCUT_DEFAULTS)
    array_kind = resolved["array"]
    spacing = _parse_float("spacing", resolved["spacing"])
    cut_phi = _parse_float("cut-phi", resolved["cut-phi"])
    u_step = _parse_float("u-step", resolved["u-step"])
    if not 0.0 < u_step <= 1.0:
        raise UsageError(f"u-step must be in (0, 1], got {u_step}")

    elems = resolved["elems"]
    if array_kind == "upa":
        n_x, n_y = _parse_shape("elems", elems)
        spec = ArraySpec("upa", n_x, n_y, d_x=spacing, d_y=spacing)
    else:
        if "x" in elems.lower():
            raise UsageError("NxM element counts need --array upa")
        spec = ArraySpec("ula", _parse_int("elems", elems), d_x=spacing)

    count = int(round(2.0 / u_step)) + 1
    u = np.linspace(-1.0, 1.0, count)
    try:
        table = gain_cut(spec, cut_phi, u)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "gain.csv")
    _write_csv(csv_path, GAIN_HEADER, [tuple(row) for row in table])
    _write_manifest(args.out, "gaincut", resolved, ["gain.csv"])
    print(f"wrote {csv_path} ({len(table)} samples)")
    return 0


# --------------------------------------------------------- complexity

COMPLEXITY_DEFAULTS = {
    "detectors": "zf,mmse,mmse-osic,lr-zf,lr-mmse,lr-mmse-osic,ml",
    "n-grid": "2:2:64",
    "mod-order": "16",
    "rho-grid": "0",
    "sd-bracket": "6n0+1",
}


def _cmd_complexity(args: argparse.Namespace) -> int:
    resolved = _resolve(args, COMPLEXITY_KEYS, COMPLEXITY_DEFAULTS)
    kinds = _parse_list(resolved["detectors"])
    n_values = [int(v) for v in _parse_grid("n-grid", resolved["n-grid"])]
    mod_order = _parse_int("mod-order", resolved["mod-order"])
    rho_values = _parse_grid("rho-grid", resolved["rho-grid"])
    sd_n0 = (_parse_float("sd-n0", resolved["sd-n0"])
             if "sd-n0" in resolved else None)
    sd_csq = (_parse_float("sd-csq", resolved["sd-csq"])
              if "sd-csq" in resolved else None)
    if "sd" in kinds and (sd_n0 is None or sd_csq is None):
        raise UsageError("detector 'sd' needs --sd-n0 and --sd-csq")

    try:
        rows = complexity_table(kinds, n_values, mod_order, rho_values,
                                n0=sd_n0, c_sq=sd_csq,
                                sd_bracket=resolved["sd-bracket"])
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "flops.csv")
    _write_csv(csv_path, FLOPS_HEADER, rows)
    _write_manifest(args.out, "complexity", resolved, ["flops.csv"])
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return 0


# --------------------------------------------------------------- main


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="key=value file or manifest.json to replay")
    sub.add_argument("--out", metavar="DIR", required=True,
                     help="output directory (created if missing)")


def _add_keys(sub: argparse.ArgumentParser, keys: tuple[str, ...],
              helps: dict[str, str]) -> None:
    for key in keys:
        sub.add_argument(f"--{key}", default=None, help=helps.get(key, ""))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-detlab",
        description="MIMO detection simulation laboratory",
    )
    parser.add_argument("--version", action="version",
                        version=f"mimo-detlab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    ber = subs.add_parser("ber", help="Monte Carlo BER sweep")
    _add_keys(ber, BER_KEYS, {
        "preset": f"named setup: {', '.join(PRESETS)}",
        "detectors": "comma list of detector kinds",
        "mod-order": "constellation size (2, 4, 16, 64, 256)",
        "nt": "transmit antennas",
        "nr": "receive antennas",
        "rho": "exponential correlation coefficient",
        "array": "antenna layout: ula or upa",
        "corr-model": "none, kronecker, or geometric",
        "geom-theta": "geometric model elevation (rad)",
        "geom-phi": "geometric model azimuth (rad)",
        "geom-xi": "geometric model elevation spread (rad)",
        "geom-sigma": "geometric model azimuth spread (rad)",
        "spacing": "element spacing in wavelengths",
        "upa-shape": "explicit UPA grid, e.g. 2x4",
        "ebn0": "Eb/N0 grid in dB: start:step:stop or comma list",
        "min-errors": "bit errors to accumulate per point",
        "max-trials": "trial cap per point",
        "seed": f"master seed (default ${SEED_ENV} or 0)",
        "workers": "parallel worker processes",
    })
    _add_common(ber)
    ber.set_defaults(func=_cmd_ber)

    gaincut = subs.add_parser("gaincut", help="array factor cut")
    _add_keys(gaincut, GAINCUT_KEYS, {
        "array": "antenna layout: ula or upa",
        "elems": "element count (ula: 25, upa: 5x5)",
        "spacing": "element spacing in wavelengths",
        "cut-phi": "azimuth of the cut plane (rad)",
        "u-step": "sample spacing in u = sin(theta)",
    })
    _add_common(gaincut)
    gaincut.set_defaults(func=_cmd_gaincut)

    comp = subs.add_parser("complexity", help="flop model table")
    _add_keys(comp, COMPLEXITY_KEYS, {
        "detectors": "comma list of modeled detector kinds",
        "n-grid": "antenna counts: start:step:stop or comma list",
        "mod-order": "constellation size for ml/sd rows",
        "rho-grid": "comma list of correlation coefficients",
        "sd-n0": "noise level N0 for the sd model",
        "sd-csq": "column energy c^2 for the sd model",
        "sd-bracket": "sd exponent grouping: 6n0+1 or 6(n0+1)",
    })
    _add_common(comp)
    comp.set_defaults(func=_cmd_complexity)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mimo-detlab: error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"mimo-detlab: error: {exc}", file=sys.stderr)
        return 2
    except (MimoDetLabError, OSError) as exc:
        print(f"mimo-detlab: failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
