"""Command-line entry point.

Every subcommand accepts ``--config FILE`` (flat ``key = value`` lines,
optionally grouped under ``[section]`` headers named after subcommands) plus
flags with the same names.  Flags override file values, which override
built-in defaults.  Each run writes its report (CSV or JSON) and a manifest
holding the fully resolved configuration next to it.

Exit status: 0 success, 1 error, 2 failed checks in ``verify-init --gate``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _backend, diagnostics as dg, experiments as ex
from .initialization import InitScheme, resolve_scheme, sample_network
from .linalg import Rng
from .pgm import read_pgm

OUT_ENV = "EOCSIREN_OUT"
COMMANDS = ("verify-init", "ntk-scan", "spectrum", "overlap", "svd-scan", "fit", "denoise", "sweep")
ALL_SCHEMES = "proposed-sigma0,sigma1,sitzmann,framework-default"


class ConfigError(ValueError):
    """Invalid configuration key or value."""


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _names(text: str) -> list[str]:
    names = [v.strip() for v in str(text).split(";" if ":" in str(text) else ",") if v.strip()]
    for n in names:
        InitScheme.parse(n)
    return names


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, help)
KEYS = {
    "schemes": (_names, "comma-separated scheme names (custom:CW[,CB] separated by ';')"),
    "width": (int, "hidden width N"),
    "widths": (_ints, "comma-separated widths"),
    "depth": (int, "total layer count L, including the linear output layer"),
    "depths": (_ints, "comma-separated depths"),
    "n0": (int, "input dimension"),
    "omega0": (float, "first-layer frequency scale"),
    "seeds": (_ints, "comma-separated seeds"),
    "ensembles": (int, "independently sampled networks per setting"),
    "inputs": (int, "number of evaluation points"),
    "domain": (_floats, "interval a,b of the input grid"),
    "vectors": (int, "leading NTK eigenvectors to report"),
    "task": (str, "1d, 2d or 3d"),
    "epochs": (int, "training epochs"),
    "lr": (float, "Adam learning rate"),
    "size": (int, "image resolution M (M x M)"),
    "k": (int, "number of noise waves"),
    "sigma_noise": (float, "noise amplitude"),
    "image": (str, "path to a greyscale PGM image"),
    "test_factor": (int, "resolution factor of the clean reference"),
    "gate": (_bool, "exit 2 if any check fails"),
    "out": (str, f"output directory (default ${OUT_ENV} or ./eocsiren-out)"),
    "format": (str, "csv or json"),
}
ALIASES = {"scheme": "schemes", "seed": "seeds", "sigma-noise": "sigma_noise", "test-factor": "test_factor"}

COMMON = {"seeds": [0], "format": "csv", "out": None}
DEFAULTS = {
    "verify-init": {"schemes": ALL_SCHEMES, "width": 256, "depth": 10, "n0": 1, "omega0": 1.0,
                    "ensembles": 20, "inputs": 500, "domain": [-1.0, 1.0], "gate": False},
    "ntk-scan": {"schemes": ALL_SCHEMES, "width": 256, "depths": list(range(2, 33, 2)),
                 "omega0": 1.0, "ensembles": 16, "inputs": 200, "domain": [-1.0, 1.0]},
    "spectrum": {"schemes": ALL_SCHEMES, "width": 256, "depths": [4, 8, 16, 32], "omega0": 100.0,
                 "ensembles": 5, "inputs": 2048, "domain": [-1.0, 1.0]},
    "overlap": {"schemes": ALL_SCHEMES, "width": 256, "depth": 8, "omega0": 1.0, "inputs": 512,
                "domain": [-64.0, 64.0], "vectors": 32},
    "svd-scan": {"schemes": "proposed-sigma0,framework-default", "width": 256, "depths": [4, 8, 16, 32],
                 "omega0": 30.0, "ensembles": 5, "inputs": 10, "domain": [-math.pi, math.pi]},
    "fit": {"task": "1d", "schemes": "proposed-sigma0,sitzmann", "width": 128, "depth": 8,
            "epochs": 5000, "lr": 1e-4, "omega0": None},
    "denoise": {"schemes": "proposed-sigma0,sitzmann", "width": 64, "depth": 10, "size": 64, "k": 20,
                "sigma_noise": 0.05, "epochs": 1000, "lr": 1e-3, "omega0": None, "image": None,
                "test_factor": 4},
    "sweep": {"task": "1d", "schemes": "proposed-sigma0,sitzmann", "widths": [128],
              "depths": [4, 6, 8, 10], "epochs": 5000, "lr": 1e-4, "omega0": None},
}
HELP = {
    "verify-init": "per-layer variance profile and closed-form checks",
    "ntk-scan": "normalized NTK trace against depth, with growth-law label",
    "spectrum": "output Fourier spectrum and cutoff energy against depth",
    "overlap": "Fourier overlap of NTK eigenvectors",
    "svd-scan": "singular values of the end-to-end Jacobian against depth",
    "fit": "train on a synthetic 1d/2d/3d target",
    "denoise": "train on an image corrupted by high-frequency noise",
    "sweep": "depth x width grid of fitting runs",
}


@dataclass
class RunConfig:
    command: str
    values: dict
    file_values: dict = field(default_factory=dict)
    flag_values: dict = field(default_factory=dict)
    config_file: str | None = None

    def __getitem__(self, key):
        return self.values[key]

    def manifest(self) -> dict:
        return {"command": self.command, "config": _plain(self.values),
                "config_file": self.config_file, "file_values": _plain(self.file_values),
                "flag_values": _plain(self.flag_values), "version": __version__,
                "backend": _backend.name, "python": platform.python_version(),
                "numpy": np.__version__}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _canonical(key: str) -> str:
    key = key.strip()
    key = ALIASES.get(key, key)
    return ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))


def _coerce(command: str, key: str, raw, source: str):
    if key not in KEYS:
        raise ConfigError(f"unknown key '{key}' ({source})")
    if key not in DEFAULTS[command] and key not in COMMON:
        raise ConfigError(f"key '{key}' does not apply to '{command}' ({source})")
    if raw is None:
        return None
    try:
        return KEYS[key][0](raw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad value for '{key}' ({source}): {err}") from None


def read_config_file(path: str, command: str) -> dict:
    """Top-level keys plus those under ``[command]``; other sections are ignored."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, default_section="\x00")
    parser.optionxform = str
    try:
        parser.read_string("[\x01top]\n" + text, source=path)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from None
    out = {}
    for section in ("\x01top", command):
        if parser.has_section(section):
            for key, raw in parser.items(section):
                canon = _canonical(key)
                out[canon] = _coerce(command, canon, raw.strip(), f"{path} [{section.strip(chr(1))}]")
    return out


def validate(command: str, v: dict) -> None:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"--{key.replace('_', '-')}: {msg}")

    if "depth" in v:
        need(v["depth"] >= 2, "depth", f"depth must be >= 2, got {v['depth']}")
    if "depths" in v:
        low = 3 if command == "svd-scan" else 2
        need(v["depths"] and min(v["depths"]) >= low, "depths", f"every depth must be >= {low}")
        need(v["depths"] == sorted(v["depths"]), "depths", "depths must be ascending")
    for key in ("width", "n0", "ensembles", "inputs", "vectors", "size", "k", "test_factor"):
        if v.get(key) is not None:
            need(v[key] >= 1, key, f"must be >= 1, got {v[key]}")
    if "widths" in v:
        need(v["widths"] and min(v["widths"]) >= 1, "widths", "widths must be >= 1")
    if v.get("omega0") is not None:
        need(v["omega0"] > 0, "omega0", "must be positive")
    if "epochs" in v:
        need(v["epochs"] >= 0, "epochs", "must be >= 0")
    if "lr" in v:
        need(v["lr"] > 0, "lr", "must be positive")
    if v.get("sigma_noise") is not None:
        need(v["sigma_noise"] >= 0, "sigma_noise", "must be >= 0")
    if "domain" in v:
        need(len(v["domain"]) == 2 and v["domain"][0] < v["domain"][1], "domain", "need a,b with a < b")
    if "task" in v:
        need(v["task"] in ex.TARGETS, "task", f"choose from {sorted(ex.TARGETS)}")
    need(v["format"] in ("csv", "json"), "format", "choose csv or json")
    need(bool(v["seeds"]), "seeds", "need at least one seed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eocsiren", description="Sine-network initialization diagnostics and experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=HELP[cmd], description=HELP[cmd])
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
        keys = list(COMMON) + [k for k in DEFAULTS[cmd] if k not in COMMON]
        for key in keys:
            flags = ["--" + key.replace("_", "-")]
            flags += ["--" + a for a, t in ALIASES.items() if t == key and "-" not in a]
            default = DEFAULTS[cmd].get(key, COMMON.get(key))
            extra = {"nargs": "?", "const": "true"} if KEYS[key][0] is _bool else {}
            p.add_argument(*flags, dest=key, default=argparse.SUPPRESS, metavar=key.upper(),
                           help=f"{KEYS[key][1]} (default: {default})", **extra)
    sub.add_parser("replay", help="re-run a manifest").add_argument("manifest")
    return parser


def parse_config(argv) -> RunConfig:
    """Resolve defaults < config file < flags into a validated :class:`RunConfig`."""
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ConfigError("missing command; see --help")
    if args.command == "replay":
        data = json.loads(Path(args.manifest).read_text())
        return config_from_values(data["command"], data["config"])
    cmd = args.command
    provided = {k: v for k, v in vars(args).items() if k not in ("command", "config", "print_config")}
    flag_values = {k: _coerce(cmd, k, raw, "flag --" + k.replace("_", "-")) for k, raw in provided.items()}
    file_values = read_config_file(args.config, cmd) if args.config else {}
    values = {**COMMON, **DEFAULTS[cmd]}
    values["schemes"] = _names(values["schemes"])
    values.update(file_values)
    values.update(flag_values)
    if values["out"] is None:
        values["out"] = os.environ.get(OUT_ENV, "eocsiren-out")
    validate(cmd, values)
    cfg = RunConfig(cmd, values, file_values, flag_values, args.config)
    cfg.print_only = args.print_config
    return cfg


def config_from_values(command: str, values: dict) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    merged = {**COMMON, **DEFAULTS[command]}
    merged["schemes"] = _names(merged["schemes"])
    for k, v in values.items():
        if v is not None and k in ("schemes", "seeds", "depths", "widths", "domain"):
            v = ",".join(str(x) for x in v) if isinstance(v, list) and k != "schemes" else v
            if k == "schemes" and isinstance(v, list):
                v = ";".join(v) if any(":" in s for s in v) else ",".join(v)
        merged[k] = _coerce(command, k, v, "manifest") if v is not None else None
    if merged["out"] is None:
        merged["out"] = os.environ.get(OUT_ENV, "eocsiren-out")
    validate(command, merged)
    cfg = RunConfig(command, merged)
    cfg.print_only = False
    return cfg


# ------------------------------------------------------------- commands

def _grid(c) -> np.ndarray:
    a, b = c["domain"]
    return np.linspace(a, b, c["inputs"])


def cmd_verify_init(c: RunConfig):
    rows, failed = [], False
    x = _grid(c)
    if c["n0"] > 1:
        x = np.repeat(x[:, None], c["n0"], axis=1)
    for seed in c["seeds"]:
        for s in c["schemes"]:
            prof = dg.variance_profile(s, c["width"], c["depth"], c["ensembles"], x, seed, c["omega0"])
            checks = dg.profile_checks(prof, c["omega0"], c["n0"])
            status = {ch.name: ch.passed for ch in checks}
            failed |= not all(status.values())
            for ch in checks:
                print(f"{s:<20} seed={seed} {ch.name:<15} {'PASS' if ch.passed else 'FAIL'} "
                      f"value={ch.value:.4f} target={ch.target:.4f}")
            for r in prof.rows():
                r.update({f"check_{k}": v for k, v in status.items()} if r["layer"] == c["depth"] - 1 else {})
                rows.append(r)
    return rows, (2 if failed and c["gate"] else 0)


def cmd_ntk_scan(c: RunConfig):
    rows = []
    for seed in c["seeds"]:
        for s in c["schemes"]:
            scan = dg.ntk_trace_depth_scan(s, c["width"], c["depths"], _grid(c), c["ensembles"], seed, c["omega0"])
            print(f"{s:<20} seed={seed} {scan.classification}")
            rows.extend(scan.rows())
    return rows, 0


def cmd_spectrum(c: RunConfig):
    rows = []
    for seed in c["seeds"]:
        for s in c["schemes"]:
            scan = dg.spectrum_depth_scan(s, c["width"], c["depths"], c["omega0"], c["inputs"],
                                          c["ensembles"], seed, tuple(c["domain"]))
            print(f"{s:<20} seed={seed} fractions " + " ".join(f"{f:.4f}" for f in scan.fractions))
            for r in scan.rows():
                r["seed"] = seed
                rows.append(r)
    return rows, 0


def cmd_overlap(c: RunConfig):
    rows = []
    a, b = c["domain"]
    grid = dg.uniform_grid(c["inputs"], a, b)
    for seed in c["seeds"]:
        for s in c["schemes"]:
            params = resolve_scheme(InitScheme.parse(s), c["omega0"], 1, c["width"], c["depth"])
            net = sample_network(params, Rng(seed), seed)
            ntk = dg.ntk_matrix(net, grid)
            ov = dg.fourier_overlap(ntk, grid, (a, b), c["omega0"], c["vectors"])
            print(f"{s:<20} seed={seed} low-index trend {'increasing' if dg.overlap_trend(ov) else 'not increasing'}")
            for r in ov.rows():
                r.update({"scheme": s, "L": c["depth"], "N": c["width"], "seed": seed})
                rows.append(r)
    return rows, 0


def cmd_svd_scan(c: RunConfig):
    rows = []
    for seed in c["seeds"]:
        for s in c["schemes"]:
            spec = dg.jacobian_singular_spectrum(s, c["width"], c["depths"], c["inputs"], c["ensembles"],
                                                 seed, c["omega0"], tuple(c["domain"]))
            print(f"{s:<20} seed={seed} max sv " + " ".join(f"{v:.4g}" for v in spec.max_singular_value))
            rows.extend(spec.rows())
    return rows, 0


def _report_rows(reports):
    rows = []
    for r in reports:
        print(f"{r.task:<8} {r.scheme:<20} L={r.depth} N={r.width} seed={r.seed} "
              f"train={r.train_mse:.3e} test={r.test_mse:.3e}")
        rows.append(r.row())
    return rows


def cmd_fit(c: RunConfig):
    cfg = ex.TrainConfig(learning_rate=c["lr"], epochs=c["epochs"])
    reports = ex.fit_experiment(c["task"], c["schemes"], c["depth"], c["width"], cfg, c["seeds"], c["omega0"])
    return _report_rows(reports), 0


def cmd_denoise(c: RunConfig):
    cfg = ex.TrainConfig(learning_rate=c["lr"], epochs=c["epochs"])
    image = read_pgm(c["image"]) if c["image"] else None
    m = image.shape[0] if image is not None else c["size"]
    reports = ex.denoise_experiment(c["schemes"], m, c["depth"], c["width"], cfg, c["seeds"], c["k"],
                                    c["sigma_noise"], c["test_factor"], image, None, c["omega0"])
    return _report_rows(reports), 0


def cmd_sweep(c: RunConfig):
    cfg = ex.TrainConfig(learning_rate=c["lr"], epochs=c["epochs"])
    reports = ex.depth_width_sweep(c["task"], c["schemes"], c["depths"], c["widths"], cfg, c["seeds"], c["omega0"])
    return _report_rows(reports), 0


DISPATCH = {
    "verify-init": cmd_verify_init, "ntk-scan": cmd_ntk_scan, "spectrum": cmd_spectrum,
    "overlap": cmd_overlap, "svd-scan": cmd_svd_scan, "fit": cmd_fit, "denoise": cmd_denoise,
    "sweep": cmd_sweep,
}


def run(config: RunConfig) -> int:
    """Execute ``config`` and write ``<command>.<format>`` plus a manifest."""
    start = time.perf_counter()
    rows, status = DISPATCH[config.command](config)
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    stem = config.command
    report_path = out / f"{stem}.{config['format']}"
    if config["format"] == "csv":
        dg.write_csv(rows, report_path)
    else:
        report_path.write_text(json.dumps({"config": _plain(config.values), "rows": _plain(rows)}, indent=1))
    manifest = config.manifest()
    manifest.update({"outputs": [report_path.name], "exit_status": status,
                     "wall_s": time.perf_counter() - start})
    (out / f"{stem}.manifest.json").write_text(json.dumps(manifest, indent=1))
    print(f"wrote {report_path}")
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        if getattr(config, "print_only", False):
            print(json.dumps(config.manifest(), indent=1))
            return 0
        return run(config)
    except SystemExit as err:
        return int(err.code or 0)
    except (ConfigError, FileNotFoundError) as err:
        print(f"eocsiren: error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # module errors: report with context, exit 1
        print(f"eocsiren: error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
