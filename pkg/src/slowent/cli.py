"""Command line front end: ``slowent <subcommand> -c config.json``.

Exit status 0 on success, 1 on invalid input, 2 on numerical failure; the
error class name and message go to standard error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .action import IntegerMatrixAction, LyapunovSpectrum, compute_spectrum, verify_action
from .bowen import estimate_local_slow_entropy
from .chambers import (
    HyperplaneArrangement,
    Chamber,
    classify_element,
    enumerate_chambers,
    lyapunov_hyperplanes,
    pick_generic_element,
)
from .cover import covering_number
from .entropy import (
    GammaAssignment,
    minimize_over_norm_family,
    pesin_entropy,
    slow_entropy,
    validate_gammas,
)
from .errors import (
    AllZeroSpectrum,
    BudgetExhausted,
    ConfigParse,
    RankNotTwo,
    RankTooLarge,
    SlowEntropyError,
)
from .norms import NormSpec

SUBCOMMANDS = ("verify", "spectrum", "chambers", "entropy", "minimize", "estimate-bowen", "estimate-cover", "report")
FORMATS = ("json", "csv", "svg")

_SCHEMA = {
    "action": {"dim", "rank", "generators"},
    "norm": {"kind", "weights", "vertices", "matrix"},
    "estimator": {
        "eps",
        "s_grid",
        "samples",
        "seed",
        "delta",
        "grid_resolution",
        "method",
        "cover_s_grid",
        "cover_eps",
    },
    "output": {"directory", "formats"},
    "search": {"family", "budget", "restarts"},
}
_TOP = {"action", "norm", "gammas", "estimator", "output", "search"}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class EstimatorConfig:
    eps: float = 0.02
    s_grid: list[float] | None = None
    samples: int = 1_000_000
    seed: int = 42
    delta: float = 0.05
    grid_resolution: float | None = None
    method: str = "auto"
    cover_s_grid: list[float] | None = None
    cover_eps: float | None = None


@dataclass
class SearchConfig:
    family: str = "box"
    budget: int = 2000
    restarts: int = 4


@dataclass
class RunConfig:
    action: IntegerMatrixAction
    norm: NormSpec
    gammas: list[float] | None
    estimator: EstimatorConfig
    out_dir: Path
    formats: tuple[str, ...]
    search: SearchConfig | None
    raw: dict = field(repr=False)


def _check_keys(obj, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigParse(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigParse(f"{where}: unknown key {extra[0]!r}")


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigParse(f"{where}: missing key {key!r}")
    return obj[key]


def _number_list(value, where: str) -> list[float]:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigParse(f"{where}: expected a list of numbers")
    return [float(v) for v in value]


def _parse_norm(obj: dict, rank: int) -> NormSpec:
    _check_keys(obj, _SCHEMA["norm"], "norm")
    kind = _need(obj, "kind", "norm")
    try:
        if kind in ("l1", "l2", "linf"):
            return NormSpec(kind, rank)
        if kind == "box":
            return NormSpec.weighted_box(_need(obj, "weights", "norm"))
        if kind == "polytope":
            return NormSpec.polytope(_need(obj, "vertices", "norm"))
        if kind == "ellipsoid":
            return NormSpec.ellipsoid(_need(obj, "matrix", "norm"))
    except (TypeError, IndexError) as exc:
        raise ConfigParse(f"norm: malformed parameters ({exc})") from exc
    raise ConfigParse(f"norm: unknown kind {kind!r}")


def parse_config(text: str, base: Path | None = None) -> RunConfig:
    """Strict parse of a JSON run configuration; unknown keys are errors."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid JSON: {exc}") from exc
    _check_keys(raw, _TOP, "config")
    act = _need(raw, "action", "config")
    _check_keys(act, _SCHEMA["action"], "action")
    gens = _need(act, "generators", "action")
    action = verify_action(gens)
    for key, have in (("dim", action.dim), ("rank", action.rank)):
        if key in act and act[key] != have:
            raise ConfigParse(f"action: {key} = {act[key]} but generators give {have}")
    norm = _parse_norm(raw.get("norm", {"kind": "l2"}), action.rank)
    if norm.dim != action.rank:
        raise ConfigParse(f"norm: lives on R^{norm.dim}, action has rank {action.rank}")

    gammas = raw.get("gammas")
    if gammas is not None:
        gammas = _number_list(gammas, "gammas")

    est_raw = raw.get("estimator", {})
    _check_keys(est_raw, _SCHEMA["estimator"], "estimator")
    est = EstimatorConfig()
    for key in ("eps", "delta", "grid_resolution", "cover_eps"):
        if key in est_raw:
            setattr(est, key, float(est_raw[key]))
    for key in ("samples", "seed"):
        if key in est_raw:
            if not isinstance(est_raw[key], int) or isinstance(est_raw[key], bool):
                raise ConfigParse(f"estimator: {key} must be an integer")
            setattr(est, key, est_raw[key])
    for key in ("s_grid", "cover_s_grid"):
        if key in est_raw:
            setattr(est, key, _number_list(est_raw[key], f"estimator.{key}"))
    if "method" in est_raw:
        if est_raw["method"] not in ("auto", "exact", "mc"):
            raise ConfigParse(f"estimator: unknown method {est_raw['method']!r}")
        est.method = est_raw["method"]

    out_raw = raw.get("output", {})
    _check_keys(out_raw, _SCHEMA["output"], "output")
    directory = Path(out_raw.get("directory", "slowent-out"))
    if base is not None and not directory.is_absolute():
        directory = base / directory
    formats = tuple(out_raw.get("formats", ["json", "csv"]))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigParse(f"output: unknown format {bad[0]!r}")

    search = None
    if "search" in raw:
        _check_keys(raw["search"], _SCHEMA["search"], "search")
        search = SearchConfig(**raw["search"])
    return RunConfig(action, norm, gammas, est, directory, formats, search, raw)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParse(f"cannot read {p}: {exc.strerror}") from exc
    return parse_config(text)


# ---------------------------------------------------------------------------
# emitters


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    path.write_text(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def _sign_label(signs) -> str:
    return "(" + ",".join("+" if s > 0 else "-" for s in signs) + ")"


def emit_svg_chambers(arrangement: HyperplaneArrangement, chambers: list[Chamber], path) -> str:
    """Lines through the origin for each hyperplane, sectors labelled by
    sign vector. Output depends only on the inputs."""
    if arrangement.rank != 2:
        raise RankNotTwo(f"chamber pictures need rank 2, got {arrangement.rank}")
    size, c, r = 400, 200.0, 180.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    for n in arrangement.matrix:
        d = np.array([-n[1], n[0]])
        d = d / np.linalg.norm(d)
        x1, y1 = c + r * d[0], c - r * d[1]
        x2, y2 = c - r * d[0], c + r * d[1]
        parts.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" stroke="black" stroke-width="1.5"/>')
    for ch in chambers:
        t = np.asarray(ch.representative, dtype=float)
        t = t / np.linalg.norm(t)
        x, y = c + 0.6 * r * t[0], c - 0.6 * r * t[1]
        parts.append(
            f'<text x="{x:.3f}" y="{y:.3f}" font-family="monospace" font-size="12" '
            f'text-anchor="middle">{_sign_label(ch.sign_vector)}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg


# ---------------------------------------------------------------------------
# pipeline pieces


def _gammas(cfg: RunConfig, spec: LyapunovSpectrum) -> GammaAssignment | None:
    return None if cfg.gammas is None else GammaAssignment.user(spec, cfg.gammas)


def spectrum_section(spec: LyapunovSpectrum) -> dict:
    return {
        "dim": spec.dim,
        "rank": spec.rank,
        "grouping_tolerance": spec.grouping_tolerance,
        "determinant_residual": spec.determinant_residual().tolist(),
        "functionals": [
            {"coeffs": list(f.coeffs), "multiplicity": f.multiplicity, "orbit_direction": f.orbit_direction}
            for f in spec.functionals
        ],
    }


def spectrum_rows(spec: LyapunovSpectrum):
    header = ["index"] + [f"c{j}" for j in range(spec.rank)] + ["multiplicity", "orbit_direction"]
    rows = [[i, *f.coeffs, f.multiplicity, f.orbit_direction] for i, f in enumerate(spec.functionals)]
    return header, rows


def chambers_section(spec: LyapunovSpectrum, norm: NormSpec):
    arr = lyapunov_hyperplanes(spec)
    chambers = enumerate_chambers(arr)
    out = {
        "normals": [list(n) for n in arr.normals],
        "source_indices": [list(s) for s in arr.source_indices],
        "count": len(chambers),
        "chambers": [ch.to_dict() for ch in chambers],
    }
    try:
        out["generic_element"] = pick_generic_element(spec, norm).tolist()
    except SlowEntropyError as exc:
        out["generic_element"] = None
        out["generic_element_error"] = f"{type(exc).__name__} {exc}"
    return out, arr, chambers


def entropy_section(spec: LyapunovSpectrum, gammas, norm: NormSpec, chambers: list[Chamber] | None) -> dict:
    rep = slow_entropy(spec, gammas, norm)
    out = rep.to_dict()
    out["gamma_source"] = "HaarMultiplicity" if gammas is None else gammas.source
    out["gamma_validation"] = validate_gammas(spec, gammas).to_dict()
    if chambers is not None:
        out["pesin_at_representatives"] = [
            {"sign_vector": list(ch.sign_vector), "t": list(ch.representative), "h": pesin_entropy(spec, gammas, ch.representative)}
            for ch in chambers
        ]
    return out


def entropy_rows(section: dict, rank: int):
    header = ["index", "gamma", "a", "product"] + [f"argmax{j}" for j in range(rank)]
    rows = [[t["index"], t["gamma"], t["a"], t["product"], *t["argmax"]] for t in section["per_functional"]]
    return header, rows


def bowen_section(cfg: RunConfig, spec: LyapunovSpectrum, gammas):
    est = cfg.estimator
    if not est.s_grid:
        raise ConfigParse("estimator: missing key 's_grid'")
    fit = estimate_local_slow_entropy(
        cfg.action, cfg.norm, gammas, est.eps, est.s_grid, est.samples, est.seed, spec=spec, method=est.method
    )
    out = fit.to_dict()
    table = []
    all_s = [float(s) for s in est.s_grid]
    for s, v, n in zip(all_s, fit.volumes, fit.constraint_counts):
        table.append({"s": s, "volume": v.value, "stderr": v.stderr, "method": v.method, "neg_log_volume": -math.log(v.value), "constraints_count": n, "samples": v.samples, "accepted": v.accepted, "seed": v.seed})
    out["per_s"] = table
    header = ["s", "volume", "stderr", "method", "-log(volume)", "constraints_count"]
    rows = [[r["s"], r["volume"], r["stderr"], r["method"], r["neg_log_volume"], r["constraints_count"]] for r in table]
    return out, (header, rows)


def cover_section(cfg: RunConfig, s_grid):
    est = cfg.estimator
    eps = est.cover_eps if est.cover_eps is not None else est.eps
    runs = [covering_number(cfg.action, cfg.norm, s, eps, est.delta, est.grid_resolution) for s in s_grid]
    out = {"runs": [c.to_dict() for c in runs]}
    if len(runs) >= 2:
        x = np.array([c.s for c in runs])
        y = np.log([c.count for c in runs])
        out["log_count_slope"] = float(np.polyfit(x, y, 1)[0])
    header = ["s", "eps", "delta", "count", "uncovered_fraction"]
    rows = [[c.s, c.eps, c.delta, c.count, c.uncovered_fraction] for c in runs]
    return out, (header, rows)


def search_section(cfg: RunConfig, spec: LyapunovSpectrum, gammas):
    sc = cfg.search or SearchConfig()
    try:
        res = minimize_over_norm_family(spec, gammas, sc.family, sc.budget, cfg.estimator.seed, sc.restarts)
    except BudgetExhausted as exc:
        return exc.result.to_dict(), exc
    return res.to_dict(), None


# ---------------------------------------------------------------------------
# subcommands


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def run(subcommand: str, cfg: RunConfig) -> tuple[dict, dict, str | None, Exception | None]:
    """Execute one subcommand. Returns (report, csv tables, svg text, deferred error)."""
    tables: dict[str, tuple] = {}
    svg = None
    deferred = None
    report: dict = {"subcommand": subcommand, "config": cfg.raw}
    if subcommand == "verify":
        report["verify"] = {"valid": True, "dim": cfg.action.dim, "rank": cfg.action.rank}
        return report, tables, svg, None

    spec = compute_spectrum(cfg.action)
    report["spectrum"] = spectrum_section(spec)
    tables["spectrum.csv"] = spectrum_rows(spec)
    gammas = _gammas(cfg, spec)
    if subcommand == "spectrum":
        return report, tables, svg, None

    chambers = None
    if subcommand in ("chambers", "report"):
        try:
            sec, arr, chambers = chambers_section(spec, cfg.norm)
            report["chambers"] = sec
            if "svg" in cfg.formats and arr.rank == 2:
                svg = emit_svg_chambers(arr, chambers, None)
            elif subcommand == "chambers" and "svg" in cfg.formats:
                emit_svg_chambers(arr, chambers, None)
        except (AllZeroSpectrum, RankTooLarge) as exc:
            if subcommand == "chambers":
                raise
            report["chambers"] = {"skipped": f"{type(exc).__name__} {exc}"}
        if subcommand == "chambers":
            return report, tables, svg, None

    if subcommand in ("entropy", "report"):
        report["entropy"] = entropy_section(spec, gammas, cfg.norm, chambers)
        tables["entropy.csv"] = entropy_rows(report["entropy"], spec.rank)
    if subcommand in ("minimize",) or (subcommand == "report" and cfg.search is not None):
        report["norm_search"], deferred = search_section(cfg, spec, gammas)
    if subcommand == "estimate-bowen" or (subcommand == "report" and cfg.estimator.s_grid):
        report["estimation"], tables["bowen.csv"] = bowen_section(cfg, spec, gammas)
    if subcommand == "estimate-cover" or (subcommand == "report" and cfg.estimator.cover_s_grid):
        grid = cfg.estimator.cover_s_grid or cfg.estimator.s_grid
        if not grid:
            raise ConfigParse("estimator: missing key 'cover_s_grid'")
        report["cover"], tables["cover.csv"] = cover_section(cfg, grid)
    return report, tables, svg, deferred


def write_outputs(cfg: RunConfig, report: dict, tables: dict, svg: str | None) -> None:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if "json" in cfg.formats:
        (cfg.out_dir / "report.json").write_text(dumps(report))
    if "csv" in cfg.formats:
        for name, (header, rows) in tables.items():
            write_csv(cfg.out_dir / name, header, rows)
    if "svg" in cfg.formats and svg is not None:
        (cfg.out_dir / "chambers.svg").write_text(svg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slowent", description="Slow entropy of commuting toral automorphisms.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("-c", "--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="comma separated subset of json,csv,svg")
    return p


def _apply_overrides(cfg: RunConfig, args) -> None:
    if args.seed is not None:
        cfg.estimator.seed = args.seed
    if args.samples is not None:
        cfg.estimator.samples = args.samples
    if args.eps is not None:
        cfg.estimator.eps = args.eps
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    if args.format is not None:
        fmts = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in fmts if f not in FORMATS]
        if bad:
            raise ConfigParse(f"--format: unknown format {bad[0]!r}")
        cfg.formats = fmts


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        report, tables, svg, deferred = run(args.subcommand, cfg)
        report["provenance"] = {
            "config_sha256": hashlib.sha256(Path(args.config).read_bytes()).hexdigest(),
            "versions": _versions(),
            "wall_time_seconds": time.perf_counter() - start,
            "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        write_outputs(cfg, report, tables, svg)
        sys.stdout.write(dumps({k: v for k, v in report.items() if k not in ("config", "provenance")}))
        if deferred is not None:
            raise deferred
    except SlowEntropyError as exc:
        print(f"{type(exc).__name__} {exc}", file=sys.stderr)
        return exc.exit_code
    except ArithmeticError as exc:
        print(f"{type(exc).__name__} {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{type(exc).__name__} {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
