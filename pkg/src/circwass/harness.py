"""Monte Carlo experiment runner.

Sweeps one axis (sample size or a model parameter), runs every configured
estimator on identical replicated samples, and aggregates per-parameter
mean squared errors into a CSV table. Deterministic for a given master
seed regardless of worker count: each replication derives its own child
seed from (master seed, sweep index, replication index).
"""

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .circular import CircularSample
from .estimate import EstimatorSpec, circular_sq_error, fit_mle, wasserstein_fit
from .families import FamilyParams, family_sample, free_param_names, params_to_vector

__all__ = [
    "ExperimentConfig",
    "MseRow",
    "MseTable",
    "run_experiment",
    "mse_ratio",
    "estimator_spec_from_name",
]

SWEEPS = ("log10N", "kappa", "rho", "lambda", "epsilon")
_SWEEP_PARAM = {"kappa": "kappa", "rho": "rho", "lambda": "lam", "epsilon": "eps"}

CSV_HEADER = [
    "sweep_name",
    "sweep_value",
    "estimator",
    "parameter",
    "mse",
    "log10_mse",
    "replications",
    "failures",
]


def estimator_spec_from_name(name: str, optimizer: str = "powell") -> EstimatorSpec:
    """Canonical estimator names: 'mle', 'w1' (grid), 'w2' (equal-mass),
    'w1-equal-mass'."""
    key = name.lower()
    # tol 1e-6 keeps desk-scale sweeps fast; Monte Carlo noise dominates it
    common = dict(optimizer=optimizer, tol=1e-6, de_pop=18, de_gens=40)
    if key == "mle":
        return EstimatorSpec(kind="mle", **common)
    if key == "w1":
        return EstimatorSpec(kind="wasserstein", p=1.0, discretization="grid", **common)
    if key == "w2":
        return EstimatorSpec(kind="wasserstein", p=2.0, discretization="equal-mass", **common)
    if key == "w1-equal-mass":
        return EstimatorSpec(kind="wasserstein", p=1.0, discretization="equal-mass", **common)
    raise ValueError(f"unknown estimator {name!r}")


def _canonical_name(name: str) -> str:
    return {"mle": "MLE", "w1": "W1", "w2": "W2", "w1-equal-mass": "W1em"}.get(
        name.lower(), name
    )


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    theta0: FamilyParams
    sweep_name: str
    sweep_values: tuple
    n: int
    replications: int
    estimators: tuple = ("mle", "w1", "w2")
    master_seed: int = 0
    optimizer: str = "powell"

    def __post_init__(self):
        if self.sweep_name not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep_name!r}")
        vals = tuple(float(v) for v in self.sweep_values)
        if len(vals) == 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        object.__setattr__(self, "sweep_values", vals)
        object.__setattr__(self, "estimators", tuple(self.estimators))

    @property
    def fit_family(self) -> str:
        # the contamination scenario fits the pure von Mises model
        return "vm" if self.family == "vm-contam" else self.family

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        t0 = dict(raw["theta0"])
        kwargs = {"family": raw["family"], "mu": t0.pop("mu", 0.0)}
        for json_key, attr in (("kappa", "kappa"), ("rho", "rho"), ("lambda", "lam"), ("epsilon", "eps")):
            if json_key in t0:
                kwargs[attr] = t0.pop(json_key)
        if t0:
            raise ValueError(f"unknown theta0 keys: {sorted(t0)}")
        return cls(
            family=raw["family"],
            theta0=FamilyParams(**kwargs),
            sweep_name=raw["sweep"]["name"],
            sweep_values=tuple(raw["sweep"]["values"]),
            n=int(raw.get("n", 0) or 0),
            replications=int(raw["replications"]),
            estimators=tuple(raw.get("estimators", ("mle", "w1", "w2"))),
            master_seed=int(raw.get("master_seed", 0)),
            optimizer=raw.get("optimizer", "powell"),
        )


@dataclass(frozen=True)
class MseRow:
    sweep_name: str
    sweep_value: float
    estimator: str
    parameter: str
    mse: float
    log10_mse: float
    replications: int
    failures: int


@dataclass(frozen=True)
class MseTable:
    rows: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(
                [
                    r.sweep_name,
                    repr(r.sweep_value),
                    r.estimator,
                    r.parameter,
                    repr(r.mse),
                    repr(r.log10_mse),
                    r.replications,
                    r.failures,
                ]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MseTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError("unexpected CSV header")
        rows = [
            MseRow(
                sweep_name=r[0],
                sweep_value=float(r[1]),
                estimator=r[2],
                parameter=r[3],
                mse=float(r[4]),
                log10_mse=float(r[5]),
                replications=int(r[6]),
                failures=int(r[7]),
            )
            for r in reader
        ]
        return cls(tuple(rows))

    def to_wide_csv(self) -> str:
        """Wide plotting table: one row per sweep value, log10 MSE columns
        named like MLE_mu, W1_kappa."""
        sweep_vals = sorted({r.sweep_value for r in self.rows})
        cols = []
        for r in self.rows:
            key = f"{r.estimator}_{r.parameter}"
            if key not in cols:
                cols.append(key)
        lookup = {(r.sweep_value, f"{r.estimator}_{r.parameter}"): r.log10_mse for r in self.rows}
        name = self.rows[0].sweep_name if self.rows else "sweep"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([name] + cols)
        for v in sweep_vals:
            writer.writerow([repr(v)] + [repr(lookup.get((v, c), float("nan"))) for c in cols])
        return buf.getvalue()


def _resolve_cell(cfg: ExperimentConfig, sweep_value: float):
    """(sampling params, n) for one sweep value."""
    theta = cfg.theta0
    if cfg.sweep_name == "log10N":
        n = int(round(10.0**sweep_value))
    else:
        n = cfg.n
        attr = _SWEEP_PARAM[cfg.sweep_name]
        theta = replace(theta, **{attr: float(sweep_value)})
    if n < 1:
        raise ValueError("sample size must be >= 1 (set n or sweep log10N)")
    return theta, n


def _truth_vector(cfg: ExperimentConfig, theta_sample: FamilyParams) -> np.ndarray:
    names = free_param_names(cfg.fit_family)
    return np.array([getattr(theta_sample, p) for p in names])


def _run_cell(cfg: ExperimentConfig, si: int, ri: int):
    """One replication: sample once, run every estimator on it."""
    theta_sample, n = _resolve_cell(cfg, cfg.sweep_values[si])
    seed = np.random.SeedSequence([cfg.master_seed, si, ri])
    sample = family_sample(theta_sample, n, seed)
    truth = _truth_vector(cfg, theta_sample)
    names = free_param_names(cfg.fit_family)
    errors: dict = {}
    failures: dict = {}
    for ei, est_name in enumerate(cfg.estimators):
        spec = estimator_spec_from_name(est_name, optimizer=cfg.optimizer)
        if cfg.fit_family == "ssvm":
            # skewness has no moment start; a small global search is needed
            spec = replace(spec, optimizer="de+powell")
        spec = replace(spec, seed=int(np.random.SeedSequence([cfg.master_seed, si, ri, 7000 + ei]).generate_state(1)[0]))
        label = _canonical_name(est_name)
        try:
            if spec.kind == "mle":
                theta_hat = fit_mle(sample, cfg.fit_family, spec)
            else:
                theta_hat = wasserstein_fit(sample, cfg.fit_family, spec).theta_hat
            est = params_to_vector(theta_hat)
            errs = {}
            for name, e, t in zip(names, est, truth):
                errs[name] = circular_sq_error(e, t) if name == "mu" else float(e - t) ** 2
            errors[label] = errs
        except Exception as exc:  # recorded per row, never fatal
            failures[label] = repr(exc)
    return si, ri, errors, failures


def _run_cell_star(args):
    return _run_cell(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> MseTable:
    """Run the full sweep; bit-identical output for a fixed config and master
    seed regardless of worker count."""
    tasks = [(cfg, si, ri) for si in range(len(cfg.sweep_values)) for ri in range(cfg.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_star, tasks, chunksize=4))
    else:
        results = [_run_cell(*t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))

    names = free_param_names(cfg.fit_family)
    labels = [_canonical_name(e) for e in cfg.estimators]
    rows = []
    for si, sweep_value in enumerate(cfg.sweep_values):
        cell = [r for r in results if r[0] == si]
        for label in labels:
            errs = [r[2][label] for r in cell if label in r[2]]
            n_fail = sum(1 for r in cell if label in r[3])
            for name in names:
                vals = [e[name] for e in errs]
                mse = float(np.mean(vals)) if vals else float("nan")
                log10_mse = float(np.log10(mse)) if mse > 0 else float("-inf")
                rows.append(
                    MseRow(
                        sweep_name=cfg.sweep_name,
                        sweep_value=float(sweep_value),
                        estimator=label,
                        parameter=name,
                        mse=mse,
                        log10_mse=log10_mse,
                        replications=len(vals),
                        failures=n_fail,
                    )
                )
    return MseTable(tuple(rows))


def mse_ratio(table: MseTable, num: str, den: str):
    """Rows of (sweep_value, parameter, mse_num/mse_den)."""
    def index(est):
        out = {(r.sweep_value, r.parameter): r.mse for r in table.rows if r.estimator == est}
        if not out:
            raise ValueError(f"estimator {est!r} not present in table")
        return out

    top, bottom = index(num), index(den)
    out = []
    for key in sorted(top):
        if key in bottom:
            out.append((key[0], key[1], top[key] / bottom[key]))
    return out
