"""Command-line surface: study configuration, dispatch, report files.

Subcommands: gap, identities, prop21, theorem, pde, oracle-painleve.
Every study writes a CSV (one row per grid point, fixed column order, full
round-trip float formatting) and a JSON report whose volatile fields
(timestamps, wall-clock) live in a separate metadata block, so repeated runs
with an identical configuration produce byte-identical data rows.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 configuration/environment error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .analysis import (
    PdeGrid,
    StudyReport,
    identity_grid_study,
    pde_residual,
    proposition_slope,
    theorem_ratio_study,
)
from .cache import CacheLock, KernelCache, default_root
from .exceptions import ConcurrencyError, DomainError, PearceyGapError
from .fredholm import GapQuery, log_gap_probability, set_block_cache
from .painleve import hastings_mcleod, tracy_widom_f2

__all__ = ["StudyConfig", "StudyReport", "run", "main"]

_KINDS = ("gap", "identities", "prop21", "theorem", "pde", "oracle-painleve")
_Z_GRID_DEFAULT = tuple(float(z) for z in np.geomspace(0.35, 0.15, 6))
_TAU1_DEFAULT = (30.0, 60.0, 120.0, 240.0, 480.0, 960.0)
_GRID5 = (-1.0, -0.5, 0.0, 0.5, 1.0)

# frozen one-time GUE edge value from the Painleve II oracle, used as the
# oracle-painleve self-check
_F2_AT_ZERO = 0.9693728283552667


@dataclass
class StudyConfig:
    """Flat, fully-defaulted study configuration (see docs/output_formats.md).

    Dotted config keys map 1:1 onto fields; the serialized form roundtrips to
    an identical value.
    """

    kind: str = "gap"
    family: str = "airy"
    times: tuple = (0.0,)
    windows: tuple = ((-1.0, 6.0),)
    nodes: int = 40
    certify: bool = True
    id_x_grid: tuple = _GRID5
    id_y_grid: tuple = _GRID5
    id_s_grid: tuple = (0.1, 0.3, 0.6)
    id_tolerance: float = 1e-7
    prop_t: float = 0.0
    prop_s: float = 0.5
    prop_z_grid: tuple = _Z_GRID_DEFAULT
    thm_tau1_grid: tuple = _TAU1_DEFAULT
    thm_t1: float = -0.5
    thm_t2: float = 0.5
    thm_windows: tuple = ((-1.0, 6.0), (-1.0, 6.0))
    thm_nodes: int = 30
    thm_single_time: bool = False
    thm_ablate: bool = True
    thm_certify: bool = True
    pde_tau: float = 4.0
    pde_sigma: float = 0.5
    pde_xi: float = 3.0
    pde_eta: float = 0.25
    pde_mu: float = -1.0
    pde_nu: float = -1.0
    pde_step: float = 0.05
    pde_nodes: int = 24
    pde_nodes_per_ray: int = 384
    oracle_s_min: float = -10.0
    oracle_s_max: float = 6.0
    oracle_step: float = 0.5
    out_csv: str = ""
    out_json: str = ""
    cache_dir: str = ""
    cache_enabled: bool = True


# dotted config key -> (field, value kind)
_SCHEMA = (
    ("study.kind", "kind", "str"),
    ("gap.family", "family", "str"),
    ("gap.times", "times", "floats"),
    ("gap.windows", "windows", "windows"),
    ("gap.nodes", "nodes", "int"),
    ("gap.certify", "certify", "bool"),
    ("identities.x_grid", "id_x_grid", "floats"),
    ("identities.y_grid", "id_y_grid", "floats"),
    ("identities.s_grid", "id_s_grid", "floats"),
    ("identities.tolerance", "id_tolerance", "float"),
    ("prop21.t", "prop_t", "float"),
    ("prop21.s", "prop_s", "float"),
    ("prop21.z_grid", "prop_z_grid", "floats"),
    ("theorem.tau1_grid", "thm_tau1_grid", "floats"),
    ("theorem.t1", "thm_t1", "float"),
    ("theorem.t2", "thm_t2", "float"),
    ("theorem.windows", "thm_windows", "windows"),
    ("theorem.nodes", "thm_nodes", "int"),
    ("theorem.single_time", "thm_single_time", "bool"),
    ("theorem.ablate", "thm_ablate", "bool"),
    ("theorem.certify", "thm_certify", "bool"),
    ("pde.tau", "pde_tau", "float"),
    ("pde.sigma", "pde_sigma", "float"),
    ("pde.xi", "pde_xi", "float"),
    ("pde.eta", "pde_eta", "float"),
    ("pde.mu", "pde_mu", "float"),
    ("pde.nu", "pde_nu", "float"),
    ("pde.step", "pde_step", "float"),
    ("pde.nodes", "pde_nodes", "int"),
    ("pde.nodes_per_ray", "pde_nodes_per_ray", "int"),
    ("oracle.s_min", "oracle_s_min", "float"),
    ("oracle.s_max", "oracle_s_max", "float"),
    ("oracle.step", "oracle_step", "float"),
    ("output.csv", "out_csv", "str"),
    ("output.json", "out_json", "str"),
    ("cache.dir", "cache_dir", "str"),
    ("cache.enabled", "cache_enabled", "bool"),
)

_KEY_TO_FIELD = {key: (attr, kind) for key, attr, kind in _SCHEMA}


def _encode_value(value, kind: str) -> str:
    if kind == "str":
        return str(value)
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return repr(float(value))
    if kind == "bool":
        return "true" if value else "false"
    if kind == "floats":
        return ",".join(repr(float(v)) for v in value)
    if kind == "windows":
        parts = []
        for w in value:
            parts.append("none" if w is None else f"{w[0]!r}:{w[1]!r}")
        return ",".join(parts)
    raise DomainError(f"unknown schema kind {kind}")


def _decode_value(text: str, kind: str):
    text = text.strip()
    if kind == "str":
        return text
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "floats":
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    if kind == "windows":
        return _parse_windows(text)
    raise DomainError(f"unknown schema kind {kind}")


def _parse_windows(text: str) -> tuple:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.lower() == "none":
            out.append(None)
            continue
        lo, sep, hi = tok.partition(":")
        if not sep:
            raise ValueError(f"window must look like lo:hi, got {tok!r}")
        out.append((float(lo), float(hi)))
    return tuple(out)


def serialize_config(config: StudyConfig) -> str:
    lines = [f"{key} = {_encode_value(getattr(config, attr), kind)}"
             for key, attr, kind in _SCHEMA]
    return "\n".join(lines) + "\n"


def parse_config(text: str, base: StudyConfig | None = None) -> StudyConfig:
    config = base if base is not None else StudyConfig()
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"config line {lineno}: expected key = value")
        key = key.strip()
        if key not in _KEY_TO_FIELD:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        attr, kind = _KEY_TO_FIELD[key]
        try:
            updates[attr] = _decode_value(value, kind)
        except ValueError as exc:
            raise DomainError(f"config line {lineno}: {exc}") from exc
    config = replace(config, **updates)
    if config.kind not in _KINDS:
        raise DomainError(f"study.kind must be one of {_KINDS}, got {config.kind!r}")
    return config


# ---------------------------------------------------------------------------
# dispatch


def _gap_study(config: StudyConfig) -> StudyReport:
    query = GapQuery(
        family=config.family,
        times=tuple(config.times),
        windows=tuple(config.windows),
        m=config.nodes,
        certify=config.certify,
    )
    logp = log_gap_probability(query)
    prob = math.exp(logp)
    summary = {"probability": prob, "log_probability": logp, "nodes": config.nodes}
    return StudyReport(
        name="gap",
        columns=("probability", "log_probability", "nodes"),
        rows=[(prob, logp, config.nodes)],
        summary=summary,
        passed=True,
        inputs={
            "family": config.family,
            "times": list(config.times),
            "windows": [list(w) if w is not None else None for w in config.windows],
            "nodes": config.nodes,
            "certify": config.certify,
        },
    )


def _oracle_study(config: StudyConfig) -> StudyReport:
    if config.oracle_step <= 0.0 or config.oracle_s_max <= config.oracle_s_min:
        raise DomainError("oracle grid must be ascending with positive step")
    count = int(round((config.oracle_s_max - config.oracle_s_min) / config.oracle_step))
    s_grid = config.oracle_s_min + config.oracle_step * np.arange(count + 1)
    rows = []
    for s in s_grid:
        q, qp = hastings_mcleod(float(s))
        rows.append((float(s), q, qp, tracy_widom_f2(float(s))))
    check = abs(tracy_widom_f2(0.0) - _F2_AT_ZERO)
    f2s = [r[3] for r in rows]
    summary = {
        "points": len(rows),
        "f2_at_zero_error": check,
        "monotone": bool(all(b >= a for a, b in zip(f2s, f2s[1:]))),
    }
    return StudyReport(
        name="oracle-painleve",
        columns=("s", "q", "q_prime", "f2"),
        rows=rows,
        summary=summary,
        passed=check < 1e-6 and summary["monotone"],
        inputs={
            "s_min": config.oracle_s_min,
            "s_max": config.oracle_s_max,
            "step": config.oracle_step,
        },
    )


def _dispatch(config: StudyConfig) -> StudyReport:
    if config.kind == "gap":
        return _gap_study(config)
    if config.kind == "identities":
        return identity_grid_study(
            config.id_x_grid, config.id_y_grid, config.id_s_grid, config.id_tolerance
        )
    if config.kind == "prop21":
        return proposition_slope(config.prop_t, config.prop_s, config.prop_z_grid)
    if config.kind == "theorem":
        return theorem_ratio_study(
            config.thm_tau1_grid,
            config.thm_t1,
            config.thm_t2,
            airy_windows=config.thm_windows,
            m=config.thm_nodes,
            single_time=config.thm_single_time,
            ablate=config.thm_ablate,
            certify=config.thm_certify,
        )
    if config.kind == "pde":
        grid = PdeGrid(
            tau=config.pde_tau,
            sigma=config.pde_sigma,
            xi=config.pde_xi,
            eta=config.pde_eta,
            mu=config.pde_mu,
            nu=config.pde_nu,
            h=config.pde_step,
            m=config.pde_nodes,
            nodes_per_ray=config.pde_nodes_per_ray,
        )
        return pde_residual(grid)
    if config.kind == "oracle-painleve":
        return _oracle_study(config)
    raise DomainError(f"unknown study kind {config.kind!r}")


# ---------------------------------------------------------------------------
# report files


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(report: StudyReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(v) for v in row])


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _write_json(report: StudyReport, path: str, config: StudyConfig) -> None:
    doc = {
        "schema": "pearceygap-report-1",
        "study": report.name,
        "verdict": report.verdict,
        "config": {key: _encode_value(getattr(config, attr), kind)
                   for key, attr, kind in _SCHEMA},
        "inputs": _plain(report.inputs),
        "summary": _plain(report.summary),
        "columns": list(report.columns),
        "rows": [[_plain(v) for v in row] for row in report.rows],
        "metadata": _plain(report.metadata),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def run(config: StudyConfig) -> tuple[StudyReport, int]:
    """Execute one configured study and write its CSV/JSON reports."""
    started = time.time()
    lock = None
    cache = None
    try:
        if config.cache_enabled:
            root = default_root(config.cache_dir or None)
            lock = CacheLock(root).acquire()
            cache = KernelCache(root)
            set_block_cache(cache)
        report = _dispatch(config)
    finally:
        set_block_cache(None)
        if lock is not None:
            lock.release()
    report.metadata = {
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "elapsed_seconds": time.time() - started,
        "package_version": __version__,
        "cache_hits": cache.hits if cache else 0,
        "cache_misses": cache.misses if cache else 0,
    }
    csv_path = config.out_csv or f"{report.name}.csv"
    json_path = config.out_json or f"{report.name}.json"
    _write_csv(report, csv_path)
    _write_json(report, json_path, config)
    if report.passed is None:
        code = 2
    else:
        code = 0 if report.passed else 1
    return report, code


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="config file (flat dotted key = value)")
    sub.add_argument("--csv", dest="out_csv", help="CSV output path")
    sub.add_argument("--json", dest="out_json", help="JSON report path")
    sub.add_argument("--cache-dir", dest="cache_dir",
                     help="cache root (overrides PEARCEYGAP_CACHE)")
    sub.add_argument("--no-cache", dest="cache_enabled", action="store_false",
                     default=None, help="disable the kernel block cache")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pearceygap",
        description="Gap probabilities of the Airy and Pearcey processes, "
                    "and the convergence/PDE studies built on them.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gap", help="one gap probability")
    _add_common(p)
    p.add_argument("--family", choices=("airy", "pearcey"))
    p.add_argument("--times", help="comma-separated times, ascending")
    p.add_argument("--windows", help="comma-separated lo:hi windows (or none)")
    p.add_argument("--nodes", type=int, help="quadrature nodes per window")
    p.add_argument("--no-certify", dest="certify", action="store_false",
                   default=None, help="skip the m -> 2m refinement certificate")

    p = subs.add_parser("identities", help="kernel differential-identity residuals")
    _add_common(p)
    p.add_argument("--x-grid", dest="id_x_grid", help="comma-separated x values")
    p.add_argument("--y-grid", dest="id_y_grid", help="comma-separated y values")
    p.add_argument("--s-grid", dest="id_s_grid", help="comma-separated s values")
    p.add_argument("--tolerance", dest="id_tolerance", type=float)

    p = subs.add_parser("prop21", help="kernel convergence order in z")
    _add_common(p)
    p.add_argument("--t", dest="prop_t", type=float, help="mean time")
    p.add_argument("--s", dest="prop_s", type=float, help="half time-difference")
    p.add_argument("--z", dest="prop_z_grid", help="comma-separated z values")

    p = subs.add_parser("theorem", help="statistics convergence order in tau1")
    _add_common(p)
    p.add_argument("--tau1", dest="thm_tau1_grid", help="comma-separated tau1 grid")
    p.add_argument("--t1", dest="thm_t1", type=float)
    p.add_argument("--t2", dest="thm_t2", type=float)
    p.add_argument("--windows", dest="thm_windows",
                   help="comma-separated lo:hi windows")
    p.add_argument("--nodes", dest="thm_nodes", type=int)
    p.add_argument("--single-time", dest="thm_single_time", action="store_true",
                   default=None)
    p.add_argument("--no-ablate", dest="thm_ablate", action="store_false",
                   default=None)
    p.add_argument("--no-certify", dest="thm_certify", action="store_false",
                   default=None)

    p = subs.add_parser("pde", help="two-time gap-probability PDE residual")
    _add_common(p)
    for name in ("tau", "sigma", "xi", "eta", "mu", "nu", "step"):
        p.add_argument(f"--{name}", dest=f"pde_{name}", type=float)
    p.add_argument("--nodes", dest="pde_nodes", type=int)
    p.add_argument("--nodes-per-ray", dest="pde_nodes_per_ray", type=int)

    p = subs.add_parser("oracle-painleve",
                        help="build/refresh the Painleve II reference table")
    _add_common(p)
    p.add_argument("--s-min", dest="oracle_s_min", type=float)
    p.add_argument("--s-max", dest="oracle_s_max", type=float)
    p.add_argument("--step", dest="oracle_step", type=float)

    return parser


# value-taking flags whose argument may start with "-" (negative numbers,
# windows like -1:6); merged into --flag=value so argparse does not mistake
# the value for an option
_VALUE_FLAGS = frozenset({
    "--times", "--windows", "--x-grid", "--y-grid", "--s-grid", "--z",
    "--t", "--s", "--t1", "--t2", "--tau1", "--tau", "--sigma", "--xi",
    "--eta", "--mu", "--nu", "--step", "--s-min", "--s-max", "--tolerance",
})


def _merge_negative_values(argv: list) -> list:
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _VALUE_FLAGS and i + 1 < len(argv)):
            nxt = argv[i + 1]
            if len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                i += 2
                continue
        out.append(tok)
        i += 1
    return out


_TUPLE_FLAGS = {
    "times": "floats",
    "windows": "windows",
    "id_x_grid": "floats",
    "id_y_grid": "floats",
    "id_s_grid": "floats",
    "prop_z_grid": "floats",
    "thm_tau1_grid": "floats",
    "thm_windows": "windows",
}


def _config_from_args(args: argparse.Namespace) -> StudyConfig:
    config = StudyConfig(kind=args.command)
    if args.config:
        with open(args.config) as fh:
            config = parse_config(fh.read(), base=config)
        config = replace(config, kind=args.command)
    overrides = {}
    for attr in vars(config):
        value = getattr(args, attr, None)
        if value is None or attr == "kind":
            continue
        if attr in _TUPLE_FLAGS and isinstance(value, str):
            try:
                value = _decode_value(value, _TUPLE_FLAGS[attr])
            except ValueError as exc:
                raise DomainError(f"--{attr}: {exc}") from exc
        overrides[attr] = value
    return replace(config, **overrides)


def _headline(report: StudyReport) -> str:
    s = report.summary
    if report.name == "gap":
        return repr(s["probability"])
    if report.name == "identities":
        return (f"identities: max|res| = {max(s['max_abs_identity1'], s['max_abs_identity2']):.3e}"
                f" (tolerance {s['tolerance']:g}) -> {report.verdict}")
    if report.name == "prop21":
        return (f"prop21: slope = {s['slope']:.4f} (expected {s['expected_slope']:g},"
                f" R^2 = {s['r2']:.6f}) -> {report.verdict}")
    if report.name == "theorem":
        return (f"theorem: slope = {s['slope']:.4f} (expected -4/3,"
                f" R^2 = {s['r2']:.6f}) -> {report.verdict}")
    if report.name == "pde":
        return (f"pde: normalized residual = {s['normalized_residual']:.3e}"
                f" (half-step {s['normalized_residual_half_step']:.3e},"
                f" ablation {s['ablation_ratio']:.1f}x) -> {report.verdict}")
    return (f"oracle-painleve: {s['points']} points,"
            f" F2(0) error = {s['f2_at_zero_error']:.2e} -> {report.verdict}")


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_negative_values(list(argv)))
    try:
        config = _config_from_args(args)
    except (DomainError, OSError, ValueError) as exc:
        print(f"pearceygap: config error: {exc}", file=sys.stderr)
        return 3
    try:
        report, code = run(config)
    except (ConcurrencyError, OSError) as exc:
        print(f"pearceygap: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"pearceygap: config error: {exc}", file=sys.stderr)
        return 3
    except PearceyGapError as exc:
        print(f"pearceygap: study failed: {exc}", file=sys.stderr)
        return 1
    print(_headline(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
