"""Replicated estimation experiments, limit-criterion runs and CSV summaries.

Every replicate draws a fresh environment, runs one walk to the largest
horizon of the grid and estimates at each horizon from the path prefix.
Random streams derive from ``(seed, replicate)`` only, so results do not
depend on the number of replicates or workers.
"""
from __future__ import annotations

import configparser
import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .environment import DEFAULT_X_MAX, sample_environment
from .errors import NoSolutionError
from .estimators import Method, ae_estimator_temkin, mle, mple, naive_estimator
from .infinite_valley import (
    AffineInHalfMass, evaluate_l_infinity, l_infinity_closed, sample_valleys,
)
from .model import DEFAULT_EPS0, FamilyKind, ModelFamily
from .walk import simulate_walk, stats_from_path

log = logging.getLogger(__name__)

CSV_FIELDS = [
    "replicate", "seed", "n", "family", "estimator", "parameter",
    "true_value", "estimate", "criterion", "status",
]
ESTIMATOR_ORDER = [m.value for m in (Method.MPLE, Method.MLE, Method.AE, Method.NAIVE)]


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "temkin"
    true_params: tuple = (0.3,)
    n_grid: tuple = (10_000, 30_000, 100_000)
    replicates: int = 100
    seed: int = 0
    estimators: tuple = ("MPLE", "MLE", "AE")
    x_max: int = DEFAULT_X_MAX
    delta: float = 0.3
    eps0: float = DEFAULT_EPS0
    tol: float = 1e-6
    restarts: int = 5
    M: int = 100
    samples: int = 2000
    a_grid: tuple = ()
    out: str = "results.csv"
    workers: int = 1
    timings: bool = False

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid or grid[0] < 1:
            raise ValueError(f"n_grid must be strictly increasing positive integers, got {grid}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATOR_ORDER)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}")
        fam = self.model_family()
        if len(self.true_params) != fam.n_free:
            raise ValueError(f"{self.family} takes {fam.n_free} parameters, got {self.true_params}")
        if "AE" in self.estimators and fam.kind is not FamilyKind.TEMKIN:
            raise ValueError("the AE estimator is only defined for the temkin family")
        if "Naive" in self.estimators and fam.kind not in (FamilyKind.TEMKIN, FamilyKind.TWO_POINT):
            raise ValueError("the naive projection is only defined for temkin and two_point")
        object.__setattr__(self, "n_grid", grid)

    def model_family(self) -> ModelFamily:
        return ModelFamily.from_name(self.family, self.eps0)

    def candidates(self) -> list:
        return [tuple(float(c) for c in np.atleast_1d(a)) for a in self.a_grid]


_TUPLE_KEYS = {"true_params": float, "n_grid": int, "estimators": str}


def _parse_value(key, raw, kind):
    raw = raw.strip()
    if key == "a_grid":
        if not raw:
            return ()
        return tuple(tuple(float(c) for c in item.split(":")) for item in raw.split(","))
    if key in _TUPLE_KEYS:
        conv = _TUPLE_KEYS[key]
        return tuple(conv(float(x)) if conv is int else conv(x.strip()) for x in raw.split(",") if x.strip())
    if kind is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    if kind is int:
        return int(float(raw))
    if kind is float:
        return float(raw)
    return raw


def load_config(path_or_text, **overrides) -> ExperimentConfig:
    """Read a flat ``key = value`` file (``#`` comments, comma-separated lists)."""
    text = Path(path_or_text).read_text() if Path(str(path_or_text)).exists() else str(path_or_text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[experiment]\n" + text)
    types = {f.name: type(f.default) for f in fields(ExperimentConfig)}
    values = {}
    for key, raw in parser["experiment"].items():
        if key not in types:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _parse_value(key, raw, types[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def replicate_rngs(seed: int, replicate: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (environment, walk) streams for one replicate."""
    env_ss, walk_ss = np.random.SeedSequence(seed, spawn_key=(replicate,)).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(walk_ss)


def _row(cfg, rep, n, est, name, truth, value, crit, status, ms):
    row = {
        "replicate": rep, "seed": cfg.seed, "n": n, "family": cfg.family, "estimator": est,
        "parameter": name, "true_value": truth, "estimate": value, "criterion": crit,
        "status": status,
    }
    if cfg.timings:
        row["wall_ms"] = ms
    return row


def run_replicate(cfg: ExperimentConfig, rep: int) -> list[dict]:
    family = cfg.model_family()
    theta = family.to_theta(cfg.true_params)
    truth = dict(zip(family.param_names, cfg.true_params))
    env_rng, walk_rng = replicate_rngs(cfg.seed, rep)
    env = sample_environment(theta, cfg.x_max, env_rng)
    walk = simulate_walk(env, cfg.n_grid[-1], walk_rng, record_path=True)
    rows = []

    def emit(n, est, result, names, t0, status="ok", crit=float("nan")):
        ms = 1000.0 * (time.perf_counter() - t0)
        for name in names:
            value = result.get(name, float("nan")) if result else float("nan")
            rows.append(_row(cfg, rep, n, est, name, truth[name], value, crit, status, ms))

    for n in cfg.n_grid:
        path = walk.path[: n + 1]
        stats = stats_from_path(path)
        warm = None
        for est in (e for e in ESTIMATOR_ORDER if e in cfg.estimators):
            t0 = time.perf_counter()
            names = family.param_names
            try:
                if est == "MPLE":
                    warm = mple(stats, family, cfg.tol, cfg.restarts)
                    emit(n, est, warm.params, names, t0, crit=warm.criterion_value)
                elif est == "MLE":
                    e = mle(stats, family, cfg.tol, cfg.restarts, warm_start=warm)
                    emit(n, est, e.params, names, t0, crit=e.criterion_value)
                elif est == "AE":
                    e = ae_estimator_temkin(path)
                    emit(n, est, e.params, names, t0, crit=e.criterion_value)
                else:
                    e = naive_estimator(stats, family)
                    emit(n, est, e.projection, names, t0, crit=e.mass_below_half())
            except NoSolutionError:
                emit(n, est, None, names, t0, status="no-solution")
            except Exception as exc:  # recorded per row, the batch goes on
                log.warning("replicate %d, n=%d, %s failed: %s", rep, n, est, exc)
                emit(n, est, None, names, t0, status="error")
    return rows


def _run_one(args):
    cfg, rep = args
    return run_replicate(cfg, rep)


def _sort_key(row):
    return (row["replicate"], row["n"], ESTIMATOR_ORDER.index(row["estimator"]), row["parameter"])


def _fmt(v):
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def collect_rows(cfg: ExperimentConfig) -> list[dict]:
    jobs = [(cfg, rep) for rep in range(cfg.replicates)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_one, jobs))
    else:
        chunks = [_run_one(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=_sort_key)
    return rows


def rows_to_csv(rows: list[dict], timings: bool = False) -> str:
    header = CSV_FIELDS + (["wall_ms"] if timings else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, out: str | Path | None = None) -> Path:
    """Run all replicates and write the estimate table; returns the CSV path."""
    out = Path(out or cfg.out)
    rows = collect_rows(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows, cfg.timings))
    return out


# -- summaries ---------------------------------------------------------------

SUMMARY_FIELDS = [
    "n", "estimator", "parameter", "trimmed", "count", "no_solution", "errors",
    "outliers", "outlier_fraction", "min", "q1", "median", "q3", "max",
    "mean_abs_error", "median_abs_error",
]


def iqr_outliers(values) -> np.ndarray:
    """Mask of values beyond 1.5 IQR outside the quartiles (linear-interpolation quartiles)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=bool)
    q1, q3 = np.percentile(values, [25, 75])
    spread = 1.5 * (q3 - q1)
    return (values < q1 - spread) | (values > q3 + spread)


def describe(values, truth: float, trim: bool) -> dict:
    values = np.asarray(values, dtype=float)
    out = iqr_outliers(values)
    kept = values[~out] if trim else values
    stats = {
        "trimmed": trim, "outliers": int(out.sum()),
        "outlier_fraction": float(out.mean()) if values.size else float("nan"),
    }
    if kept.size:
        q = np.percentile(kept, [0, 25, 50, 75, 100])
        err = np.abs(kept - truth)
        stats.update(zip(["min", "q1", "median", "q3", "max"], map(float, q)))
        stats.update(mean_abs_error=float(err.mean()), median_abs_error=float(np.median(err)))
    else:
        stats.update({k: float("nan") for k in ["min", "q1", "median", "q3", "max",
                                                "mean_abs_error", "median_abs_error"]})
    return stats


def summarize(csv_path, trim: bool = True) -> list[dict]:
    """Per (n, estimator, parameter) box-plot statistics of an estimate table.

    Untrimmed rows are always produced; with ``trim`` the statistics after
    removing 1.5 IQR outliers are added.  Malformed rows are logged and
    skipped.
    """
    groups: dict = {}
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                key = (int(row["n"]), row["estimator"], row["parameter"])
                g = groups.setdefault(key, {"values": [], "truth": float(row["true_value"]),
                                            "no_solution": 0, "errors": 0})
                status = row["status"]
                if status == "ok":
                    value = float(row["estimate"])
                    if np.isfinite(value):
                        g["values"].append(value)
                elif status == "no-solution":
                    g["no_solution"] += 1
                else:
                    g["errors"] += 1
            except (KeyError, TypeError, ValueError) as exc:
                log.warning("skipping malformed row %d: %s", lineno, exc)
    order = {e: i for i, e in enumerate(ESTIMATOR_ORDER)}
    result = []
    for key in sorted(groups, key=lambda k: (k[0], order.get(k[1], 99), k[2])):
        g = groups[key]
        for flag in ((False, True) if trim else (False,)):
            row = {"n": key[0], "estimator": key[1], "parameter": key[2],
                   "count": len(g["values"]), "no_solution": g["no_solution"], "errors": g["errors"]}
            row.update(describe(g["values"], g["truth"], flag))
            result.append(row)
    return result


def summary_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# -- limit criterion ---------------------------------------------------------

LIMIT_FIELDS = [
    "family", "candidate", "kind", "closed_form", "mc_mean", "mc_se", "mc_var",
    "noise_floor", "truncation_mean", "verdict",
]


@dataclass
class LimitRow:
    family: str
    candidate: tuple
    kind: str
    closed_form: float
    mc_mean: float
    mc_se: float
    mc_var: float
    noise_floor: float
    truncation_mean: float
    verdict: str
    samples: object = field(default=None, repr=False)

    def as_dict(self):
        d = asdict(replace(self, samples=None))
        d.pop("samples")
        d["candidate"] = ":".join(repr(float(c)) for c in self.candidate)
        return d


def limit_rows(cfg: ExperimentConfig, rng=None) -> list[LimitRow]:
    """Compare Monte Carlo ``L_inf`` with its closed form on every candidate in ``a_grid``.

    Verdicts: ``agree`` / ``disagree`` for deterministic limits (tolerance
    ``max(3 SE, 2 * mean truncation)``); ``random`` / ``not-random`` for
    random ones (variance above ten times the truncation noise floor).
    """
    family = cfg.model_family()
    if family.kind not in (FamilyKind.TEMKIN, FamilyKind.TWO_POINT, FamilyKind.LAZY_TEMKIN):
        raise ValueError("limit runs need the temkin, two_point or lazy_temkin family")
    cands = cfg.candidates()
    if not cands:
        return []
    theta_star = family.to_theta(cfg.true_params)
    rng = rng if rng is not None else np.random.default_rng(np.random.SeedSequence(cfg.seed))
    valleys = sample_valleys(theta_star, cfg.M, cfg.samples, rng)
    half = np.array([float(np.sum(v.nu[v.omega_tilde == 0.5])) for v in valleys])
    rows = []
    for cand in cands:
        support = np.sort(family.support_from_free(cand))
        mc = evaluate_l_infinity(valleys, support)
        closed = l_infinity_closed(family, cand, theta_star)
        trunc = float(mc.truncation.mean())
        if isinstance(closed, AffineInHalfMass):
            kind = "random"
            value = float(np.mean(closed(half)))
            verdict = "random" if mc.var > 10.0 * mc.noise_floor else "not-random"
        else:
            kind = "deterministic"
            value = float(closed)
            ok = abs(mc.mean - value) <= max(3.0 * mc.se, 2.0 * trunc)
            verdict = "agree" if ok else "disagree"
        rows.append(LimitRow(cfg.family, cand, kind, value, mc.mean, mc.se, mc.var,
                             mc.noise_floor, trunc, verdict, mc))
    return rows


def limit_run(cfg: ExperimentConfig, out: str | Path | None = None, samples_dir=None) -> Path:
    rows = limit_rows(cfg)
    out = Path(out or cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, LIMIT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.as_dict().items()})
    out.write_text(buf.getvalue(), encoding="utf-8")
    if samples_dir is not None:
        sdir = Path(samples_dir)
        sdir.mkdir(parents=True, exist_ok=True)
        for k, row in enumerate(rows):
            (sdir / f"samples_{k}.csv").write_text(row.samples.to_csv(), encoding="utf-8")
    return out
