"""Monte-Carlo experiment runner: config, sweeps, Pareto trace and oracle mode.

Every trial ``t`` draws its scene from ``SeedSequence(seed, spawn_key=(t,))``
so a trial's numbers never depend on the worker count or on which other
points and methods are being run (all methods see the same scenes).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from . import __version__
from .beamspace import build_codebook, to_beamspace
from .errors import CapacityError, ConfigError, ModelError, NumericError
from .metrics import LinkParams, PowerModel, circuit_power, energy_efficiency, weighted_objective
from .rxselect import METHODS, joint_pipeline
from .scene import GeometryConfig, generate_scene
from .txselect import (
    EXHAUSTIVE_CAP,
    GcsState,
    GesState,
    SelectionProblem,
    exhaustive_select_problem,
    greedy_remove,
    subset_objectives,
)

SWEEPS = ("snr", "k", "ee", "pareto")
CSV_HEADER = ("method", "point", "objective_mean", "objective_se", "Ic_mean", "Is_mean",
              "ee_mean", "trials", "ms")

_GEOMETRY_KEYS = {"n_t", "n_c", "n_s", "n_paths", "wavelength", "pathloss_exponent"}
_POWER_KEYS = {f.name for f in dataclasses.fields(PowerModel)}


@dataclass
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    link: LinkParams = field(default_factory=lambda: LinkParams.from_db(20.0))
    power: PowerModel = field(default_factory=PowerModel)
    sweep: str = "snr"
    points: tuple = (0.0, 10.0, 20.0, 30.0)
    k: int = 8
    k_c: int = 6
    k_s: int = 6
    trials: int = 200
    seed: int = 1
    methods: tuple = ("ges", "gcs", "dbs", "random", "fixed", "full")
    architecture: str = "beamspace"
    n_beams: int | None = None
    exhaustive_cap: int = EXHAUSTIVE_CAP
    record_timing: bool = True
    raw: dict = field(default_factory=dict)

    @property
    def n_chains(self) -> int:
        """Number of selectable transmit chains (antennas or beams)."""
        if self.architecture == "beamspace":
            return self.n_beams or self.geometry.n_t
        return self.geometry.n_t

    def link_at(self, point) -> LinkParams:
        if self.sweep == "snr":
            return LinkParams.from_db(point, self.link.T, self.link.omega_c)
        if self.sweep == "pareto":
            return self.link.with_weight(point)
        return self.link

    def cardinalities(self, point) -> tuple[int, int, int]:
        if self.sweep == "pareto":
            return self.k, self.geometry.n_c, self.geometry.n_s
        if self.sweep in ("k", "ee"):
            return int(point), self.k_c, self.k_s
        return self.k, self.k_c, self.k_s


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build and validate a config from a flat JSON object. Raises :class:`ConfigError`."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = dict(doc)
    known = _GEOMETRY_KEYS | _POWER_KEYS | {
        "sector_deg", "distance_range", "snr_db", "T", "omega_c", "sweep", "points", "k",
        "k_c", "k_s", "trials", "seed", "methods", "architecture", "n_beams",
        "exhaustive_cap", "record_timing",
    }
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    try:
        geo = {k: doc[k] for k in _GEOMETRY_KEYS if k in doc}
        if "sector_deg" in doc:
            lo, hi = doc["sector_deg"]
            geo["sector"] = (np.deg2rad(lo), np.deg2rad(hi))
        if "distance_range" in doc:
            geo["distance_range"] = tuple(doc["distance_range"])
        geometry = GeometryConfig(**geo)
        link = LinkParams.from_db(float(doc.get("snr_db", 20.0)), int(doc.get("T", 64)),
                                  float(doc.get("omega_c", 0.5)))
        power = PowerModel(**{k: doc[k] for k in _POWER_KEYS if k in doc})
    except (ModelError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    sweep = doc.get("sweep", "snr")
    if sweep not in SWEEPS:
        raise ConfigError(f"sweep must be one of {SWEEPS}")
    default_points = {"snr": [0, 10, 20, 30], "pareto": [0, 0.25, 0.5, 0.75, 1.0]}
    points = doc.get("points", default_points.get(sweep, list(range(geometry.n_t // 2 + 1,
                                                                     geometry.n_t + 1))))
    if not isinstance(points, list) or not points:
        raise ConfigError("points must be a nonempty list")
    methods = doc.get("methods", ["ges", "gcs", "dbs", "random", "fixed", "full"])
    if not isinstance(methods, list) or not methods or any(m not in METHODS for m in methods):
        raise ConfigError(f"methods must be a nonempty subset of {METHODS}")
    if len(set(methods)) != len(methods):
        raise ConfigError("methods must not repeat")

    cfg = ExperimentConfig(
        geometry=geometry, link=link, power=power, sweep=sweep,
        points=tuple(float(x) if sweep in ("snr", "pareto") else x for x in points),
        k=doc.get("k", 8), k_c=doc.get("k_c", min(6, geometry.n_c)),
        k_s=doc.get("k_s", min(6, geometry.n_s)), trials=doc.get("trials", 200),
        seed=doc.get("seed", 1), methods=tuple(methods),
        architecture=doc.get("architecture", "beamspace"), n_beams=doc.get("n_beams"),
        exhaustive_cap=doc.get("exhaustive_cap", EXHAUSTIVE_CAP),
        record_timing=bool(doc.get("record_timing", True)), raw=doc,
    )
    validate_config(cfg)
    return cfg


def _is_count(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def validate_config(cfg: ExperimentConfig) -> None:
    g = cfg.geometry
    if not _is_count(cfg.trials) or cfg.trials < 1:
        raise ConfigError("trials must be an integer >= 1")
    if not _is_count(cfg.seed) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.architecture not in ("antenna", "beamspace"):
        raise ConfigError("architecture must be 'antenna' or 'beamspace'")
    if cfg.n_beams is not None and (not _is_count(cfg.n_beams) or not 1 <= cfg.n_beams <= g.n_t):
        raise ConfigError(f"n_beams must lie in 1..{g.n_t}")
    for name, val, hi in (("k", cfg.k, cfg.n_chains), ("k_c", cfg.k_c, g.n_c), ("k_s", cfg.k_s, g.n_s)):
        if not _is_count(val) or not 1 <= val <= hi:
            raise ConfigError(f"{name} must be an integer in 1..{hi}")
    if cfg.sweep in ("k", "ee"):
        if any(not _is_count(x) or not 1 <= x <= cfg.n_chains for x in cfg.points):
            raise ConfigError(f"K points must be integers in 1..{cfg.n_chains}")
    if cfg.sweep == "pareto":
        if any(not 0 <= x <= 1 for x in cfg.points):
            raise ConfigError("pareto weights must lie in [0, 1]")
        if min(cfg.points) != 0 or max(cfg.points) != 1:
            raise ConfigError("pareto grid must include both 0 and 1")
    if not _is_count(cfg.exhaustive_cap) or cfg.exhaustive_cap < 1:
        raise ConfigError("exhaustive_cap must be a positive integer")


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def check_capacity(cfg: ExperimentConfig) -> None:
    """Raise :class:`CapacityError` if any exhaustive search would exceed the cap."""
    if "exhaustive" not in cfg.methods:
        return
    for point in cfg.points:
        k, k_c, k_s = cfg.cardinalities(point)
        for n, kk in ((cfg.n_chains, k), (cfg.geometry.n_c, k_c), (cfg.geometry.n_s, k_s)):
            if comb(n, kk) > cfg.exhaustive_cap:
                raise CapacityError(f"C({n},{kk}) = {comb(n, kk)} exceeds cap {cfg.exhaustive_cap}")


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def trial_scene(cfg: ExperimentConfig, trial: int, p: LinkParams | None = None):
    """Scene of trial ``trial``, mapped to beamspace when the architecture asks for it."""
    scene = generate_scene(cfg.geometry, np.random.default_rng(trial_seed(cfg.seed, trial)))
    if cfg.architecture == "beamspace":
        scene = to_beamspace(scene, build_codebook(cfg.geometry.n_t, cfg.n_chains), p or cfg.link)
    return scene


@dataclass(frozen=True)
class TrialResult:
    method: str
    point_index: int
    trial: int
    objective: float
    ic_norm: float
    is_norm: float
    ee: float
    ms: float


@dataclass(frozen=True)
class SweepRecord:
    method: str
    point: float
    objective_mean: float
    objective_se: float
    ic_mean: float
    is_mean: float
    ee_mean: float
    trials: int
    ms: float


def _run_trial(cfg: ExperimentConfig, trial: int) -> list[TrialResult]:
    scene = trial_scene(cfg, trial)
    n_s = cfg.geometry.n_s
    out = []
    for pi, point in enumerate(cfg.points):
        p = cfg.link_at(point)
        k, k_c, k_s = cfg.cardinalities(point)
        for mi, method in enumerate(cfg.methods):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(trial, 1, pi, mi)))
            t0 = time.perf_counter()
            sel = joint_pipeline(scene, p, k, k_c, k_s, method, rng=rng, cap=cfg.exhaustive_cap)
            ms = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else 0.0
            rep = weighted_objective(scene, *sel, p)
            ee = energy_efficiency(rep, circuit_power(cfg.power, *sel))
            out.append(TrialResult(method, pi, trial, rep.objective, rep.comm_mi / p.T,
                                   rep.sensing_mi / n_s, ee, ms))
    return out


def aggregate(cfg: ExperimentConfig, results: list[TrialResult]) -> list[SweepRecord]:
    order = {m: i for i, m in enumerate(cfg.methods)}
    results = sorted(results, key=lambda r: (order[r.method], r.point_index, r.trial))
    records = []
    for method in cfg.methods:
        for pi, point in enumerate(cfg.points):
            rows = [r for r in results if r.method == method and r.point_index == pi]
            obj = np.array([r.objective for r in rows])
            n = len(rows)
            se = float(np.std(obj, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
            rec = SweepRecord(
                method, point, float(obj.mean()), se,
                float(np.mean([r.ic_norm for r in rows])), float(np.mean([r.is_norm for r in rows])),
                float(np.mean([r.ee for r in rows])), n, float(np.mean([r.ms for r in rows])),
            )
            if not all(np.isfinite(v) for v in (rec.objective_mean, rec.ic_mean, rec.is_mean, rec.ee_mean)):
                raise ModelError(f"non-finite mean for {method} at {point}")
            records.append(rec)
    return records


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> list[TrialResult]:
    check_capacity(cfg)
    if threads <= 1:
        batches = [_run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda t: _run_trial(cfg, t), range(cfg.trials)))
    return [r for b in batches for r in b]


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[SweepRecord]:
    """Average every method at every sweep point over ``cfg.trials`` scenes."""
    return aggregate(cfg, run_trials(cfg, threads))


def run_pareto(cfg: ExperimentConfig, threads: int = 1) -> list[SweepRecord]:
    """One (I_c/T, I_s/N_s) point per weight and method, with all receive chains active."""
    if cfg.sweep != "pareto":
        cfg = dataclasses.replace(cfg, sweep="pareto", points=(0.0, 0.25, 0.5, 0.75, 1.0))
    validate_config(cfg)
    return run_sweep(cfg, threads)


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(records: list[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([_fmt(v) for v in dataclasses.astuple(r)])


def read_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        SweepRecord(r["method"], float(r["point"]), float(r["objective_mean"]),
                    float(r["objective_se"]), float(r["Ic_mean"]), float(r["Is_mean"]),
                    float(r["ee_mean"]), int(r["trials"]), float(r["ms"]))
        for r in rows
    ]


def write_plot_data(records: list[SweepRecord], kind: str, path) -> None:
    """Whitespace-delimited table, one row per sweep point and one column group per method."""
    methods = list(dict.fromkeys(r.method for r in records))
    points = list(dict.fromkeys(r.point for r in records))
    by = {(r.method, r.point): r for r in records}
    if kind == "pareto":
        cols = [(m, "Ic", lambda r: r.ic_mean) for m in methods] + \
               [(m, "Is", lambda r: r.is_mean) for m in methods]
    elif kind == "ee":
        cols = [(m, "ee", lambda r: r.ee_mean) for m in methods]
    else:
        cols = [(m, "obj", lambda r: r.objective_mean) for m in methods] + \
               [(m, "se", lambda r: r.objective_se) for m in methods]
    with open(path, "w") as fh:
        fh.write("# point " + " ".join(f"{m}_{tag}" for m, tag, _ in cols) + "\n")
        for pt in points:
            fh.write(" ".join([_fmt(pt)] + [_fmt(get(by[(m, pt)])) for m, _, get in cols]) + "\n")


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=10, cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_manifest(cfg: ExperimentConfig, files: list[str], path, extra: dict | None = None) -> None:
    doc = {
        "package_version": __version__,
        "git_describe": git_describe(),
        "config": cfg.raw,
        "resolved": {
            "sweep": cfg.sweep, "points": list(cfg.points), "trials": cfg.trials, "seed": cfg.seed,
            "methods": list(cfg.methods), "architecture": cfg.architecture,
            "n_chains": cfg.n_chains, "T": cfg.link.T, "omega_c": cfg.link.omega_c,
            "k": cfg.k, "k_c": cfg.k_c, "k_s": cfg.k_s,
        },
        "files": files,
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- oracle mode

ORACLE_TOL = 1e-8
ORACLE_RATIO = 0.99


@dataclass
class OracleFailure:
    trial: int
    seed: int
    check: str
    value: float


@dataclass
class OracleReport:
    trials: int
    worst: dict
    greedy_ratio: float
    failures: list[OracleFailure]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        lines = [f"oracle: {self.trials} trials, {'PASS' if self.passed else 'FAIL'}"]
        for name, val in sorted(self.worst.items()):
            lines.append(f"  worst {name:<22s} {val:.3e}")
        lines.append(f"  greedy/exhaustive mean ratio {self.greedy_ratio:.6f}")
        for f in self.failures[:20]:
            lines.append(f"  FAIL trial={f.trial} seed={f.seed} {f.check} = {f.value:.3e}")
        return "\n".join(lines)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.max(np.abs(b)), 1e-300) if b.size else 1.0
    return float(np.max(np.abs(a - b)) / scale) if b.size else 0.0


def _check_ges_state(state: GesState) -> dict:
    ref = GesState.from_scratch(state.problem, state.remaining, state.factors)
    rem = state.remaining
    out = {"ges_A": _rel(state.A, ref.A), "ges_alpha": _rel(state.alpha[rem], ref.alpha[rem])}
    out["ges_B"] = max([_rel(b, rb) for b, rb in zip(state.B, ref.B)], default=0.0)
    out["ges_beta"] = _rel(state.beta[:, rem], ref.beta[:, rem])
    return out


def _check_gcs_state(state: GcsState) -> dict:
    ref = GcsState.from_scratch(state.problem, state.remaining)
    out = {"gcs_D_inv": _rel(state.D_inv, ref.D_inv)}
    out["gcs_E_inv"] = max([_rel(e, re) for e, re in zip(state.E_inv, ref.E_inv)], default=0.0)
    return out


def _identity_errors(state, problem: SelectionProblem, prefix: str) -> dict:
    """Gap between the from-scratch MI after each candidate removal and the tracked contribution."""
    rem = state.remaining
    ic, is_ = problem.comm_mi(rem), problem.sensing_mi(rem)
    comm_f, sense_f = state.comm_factors(), state.sense_factors()
    worst_c = worst_s = 0.0
    for pos, j in enumerate(rem):
        rest = [c for c in rem if c != j]
        worst_c = max(worst_c, abs(problem.comm_mi(rest) - (ic + problem.T * np.log2(comm_f[pos]))))
        pred_s = is_ + np.sum(np.log2(sense_f[:, pos])) if len(sense_f) else is_
        worst_s = max(worst_s, abs(problem.sensing_mi(rest) - pred_s))
    return {f"{prefix}_identity_Ic": worst_c, f"{prefix}_identity_Is": worst_s}


def oracle_trial(problem: SelectionProblem, k: int, hook=None) -> dict:
    """Run GES and GCS side by side to ``k`` chains, checking every step.

    ``hook(ges_state)`` runs after each GES update and may corrupt it.
    """
    ges = GesState.from_scratch(problem)
    gcs = GcsState.from_scratch(problem)
    worst: dict[str, float] = {}

    def note(d):
        for key, val in d.items():
            worst[key] = max(worst.get(key, 0.0), val)

    while len(ges.remaining) > 1:
        note(_identity_errors(ges, problem, "ges"))
        note(_identity_errors(gcs, problem, "gcs"))
        s_ges, s_gcs = ges.scores(), gcs.scores()
        note({"score_ges_vs_gcs": _rel(s_ges, s_gcs)})
        chain = ges.remaining[int(np.argmax(s_gcs))]
        ges.remove(chain)
        gcs.remove(chain)
        if hook is not None:
            hook(ges)
        note(_check_ges_state(ges))
        note(_check_gcs_state(gcs))

    greedy = greedy_remove(GcsState.from_scratch(problem), k).remaining
    best = exhaustive_select_problem(problem, k).zero_based
    vals = subset_objectives(problem, np.array([sorted(greedy), best]))
    worst["_greedy"] = vals[0]
    worst["_exhaustive"] = vals[1]
    return worst


def oracle_check(cfg: ExperimentConfig, hook=None, tol: float = ORACLE_TOL) -> OracleReport:
    """Cross-check the fast selectors against from-scratch recomputation on every trial.

    Uses the antenna-domain scenes of ``cfg`` at its base link parameters,
    transmit selection only, down to ``cfg.k`` chains for the exhaustive gap.
    """
    if cfg.n_chains > 10:
        raise ConfigError("oracle mode needs at most 10 transmit chains")
    p = cfg.link
    worst: dict[str, float] = {}
    failures = []
    greedy, exh = [], []
    for t in range(cfg.trials):
        scene = trial_scene(cfg, t, p)
        problem = SelectionProblem.from_scene(scene, p)
        try:
            with np.errstate(invalid="ignore", divide="ignore"):
                res = oracle_trial(problem, cfg.k, hook)
        except NumericError as exc:
            failures.append(OracleFailure(t, cfg.seed, f"numeric_error: {exc}", float("nan")))
            continue
        greedy.append(res.pop("_greedy"))
        exh.append(res.pop("_exhaustive"))
        for key, val in res.items():
            worst[key] = max(worst.get(key, 0.0), val)
            if not val <= tol:
                failures.append(OracleFailure(t, cfg.seed, key, val))
    ratio = float(np.mean(greedy) / np.mean(exh)) if greedy else float("nan")
    if not ratio >= ORACLE_RATIO:
        failures.append(OracleFailure(-1, cfg.seed, "greedy_ratio", ratio))
    return OracleReport(cfg.trials, worst, ratio, failures)
