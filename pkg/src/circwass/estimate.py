"""Maximum likelihood and Wasserstein projection estimators."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .circular import TWO_PI, CircularSample, circ_dist, normalize_angle
from .families import (
    FamilyParams,
    KAPPA_BOX,
    family_logpdf,
    family_quantile,
    free_param_names,
    param_box,
    vector_to_params,
)
from .optimize import (
    BoxConstraints,
    OptimizerReport,
    diff_evolution_min,
    powell_min,
)
from .transport import _wp_equal_weight_arrays, grid_cdf_of, w1_grid

__all__ = [
    "EstimatorSpec",
    "FitResult",
    "MleResult",
    "mle_von_mises",
    "mle_wrapped_cauchy",
    "mle_ssvm",
    "invert_bessel_ratio",
    "wasserstein_fit",
    "circular_sq_error",
]


@dataclass(frozen=True)
class EstimatorSpec:
    """Configuration of one estimator run.

    ``grid`` discretization is the order-1 CDF-grid objective (requires p=1);
    ``equal-mass`` places equal-weight atoms at model quantiles and works for
    any p >= 1.
    """

    kind: str = "wasserstein"  # "mle" or "wasserstein"
    p: float = 1.0
    discretization: str = "grid"  # "grid" or "equal-mass"
    points: int | None = None  # grid size D or atom count; defaults to n
    optimizer: str = "de+powell"  # "powell", "de" or "de+powell"
    de_pop: int | None = None
    de_gens: int = 60
    de_cr: float = 0.9
    de_fw: float = 0.7
    tol: float = 1e-10
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("mle", "wasserstein"):
            raise ValueError("kind must be 'mle' or 'wasserstein'")
        if self.p < 1.0:
            raise ValueError("p must be >= 1")
        if self.discretization not in ("grid", "equal-mass"):
            raise ValueError("discretization must be 'grid' or 'equal-mass'")
        if self.discretization == "grid" and self.p != 1.0:
            raise ValueError("grid discretization is only valid for p = 1")
        if self.optimizer not in ("powell", "de", "de+powell"):
            raise ValueError("optimizer must be 'powell', 'de' or 'de+powell'")


@dataclass(frozen=True)
class FitResult:
    theta_hat: FamilyParams
    objective: float
    report: OptimizerReport


@dataclass(frozen=True)
class MleResult:
    theta: FamilyParams
    converged: bool
    iterations: int


def circular_mean_resultant(sample: CircularSample):
    """(mean direction, mean resultant length R-bar)."""
    c = float(np.mean(np.cos(sample.angles)))
    s = float(np.mean(np.sin(sample.angles)))
    return float(normalize_angle(np.arctan2(s, c))), float(np.hypot(c, s))


def invert_bessel_ratio(r: float) -> float:
    """Solve I_1(kappa)/I_0(kappa) = r for kappa >= 0 (r in [0, 1))."""
    if not 0.0 <= r < 1.0:
        raise ValueError("ratio must lie in [0, 1)")
    if r == 0.0:
        return 0.0

    def ratio(k):
        return float(special.ive(1, k) / special.ive(0, k))

    # Mardia-style starting values, then safeguarded Newton
    if r < 0.53:
        k = 2.0 * r + r**3 + 5.0 * r**5 / 6.0
    elif r < 0.85:
        k = -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    else:
        k = 1.0 / (r**3 - 4.0 * r**2 + 3.0 * r)
    k = max(k, 1e-8)
    lo, hi = 0.0, max(2.0 * k, 1.0)
    while ratio(hi) < r:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        a = ratio(k)
        if abs(a - r) <= 1e-13:
            break
        if a < r:
            lo = k
        else:
            hi = k
        da = 1.0 - a / k - a * a
        step = (a - r) / da if da > 0.0 else 0.0
        k_new = k - step
        if not lo < k_new < hi:
            k_new = 0.5 * (lo + hi)
        k = k_new
    return k


def mle_von_mises(sample: CircularSample) -> FamilyParams:
    """Closed-form von Mises MLE: circular mean direction and the Bessel-ratio
    inversion of the mean resultant length."""
    if sample.n < 2:
        raise ValueError("need at least 2 observations")
    mu, rbar = circular_mean_resultant(sample)
    if rbar < 1e-14:
        raise ValueError("mean direction undefined")
    if rbar >= 1.0 - 1e-12:
        warnings.warn("resultant length ~ 1; kappa clamped to box maximum")
        return FamilyParams("vm", mu=mu, kappa=KAPPA_BOX[1])
    kappa = invert_bessel_ratio(rbar)
    return FamilyParams("vm", mu=mu, kappa=float(np.clip(kappa, *KAPPA_BOX)))


def _wc_loglik(z: np.ndarray, eta: complex) -> float:
    r2 = abs(eta) ** 2
    if r2 >= 1.0:
        return -np.inf
    return float(np.sum(np.log1p(-r2) - np.log(np.abs(z - eta) ** 2)))


def mle_wrapped_cauchy(
    sample: CircularSample, tol: float = 1e-10, max_iter: int = 500
) -> MleResult:
    """Wrapped Cauchy MLE by the reweighting fixed point.

    Works on eta = rho*exp(i*mu); weights are the inverse squared distances
    to the current eta on the unit circle. Steps that would decrease the
    log-likelihood are damped toward the previous iterate.
    """
    if sample.n < 3:
        raise ValueError("need at least 3 observations")
    n = sample.n
    z = np.exp(1j * sample.angles)
    eta = complex(np.mean(z))
    if abs(eta) > 0.999:
        eta *= 0.999 / abs(eta)
    ll = _wc_loglik(z, eta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = 1.0 / np.abs(z - eta) ** 2
        eta_new = complex(np.sum(w * z) / (np.sum(w) + n / (1.0 - abs(eta) ** 2)))
        ll_new = _wc_loglik(z, eta_new)
        for _ in range(40):
            if ll_new >= ll - 1e-12:
                break
            eta_new = 0.5 * (eta + eta_new)
            ll_new = _wc_loglik(z, eta_new)
        delta = abs(eta_new - eta)
        eta, ll = eta_new, ll_new
        if delta < tol:
            converged = True
            break
    rho = min(abs(eta), 1.0 - 1e-9)
    mu = float(normalize_angle(np.angle(eta)))
    return MleResult(FamilyParams("wc", mu=mu, rho=rho), converged, it)


def _box_for(family: str) -> BoxConstraints:
    lower, upper, periodic = param_box(family)
    return BoxConstraints(lower, upper, periodic)


def _moment_start(sample: CircularSample, family: str) -> np.ndarray:
    mu, rbar = circular_mean_resultant(sample)
    values = {"mu": mu}
    if family in ("vm", "ssvm", "vm-contam"):
        values["kappa"] = float(
            np.clip(invert_bessel_ratio(min(rbar, 0.999)), *KAPPA_BOX)
        )
    if family == "wc":
        values["rho"] = float(np.clip(rbar, 1e-6, 1.0 - 1e-6))
    values["lam"] = 0.0
    values["eps"] = 0.1
    return np.array([values[p] for p in free_param_names(family)])


def _minimize(objective, family: str, spec: EstimatorSpec, x0=None) -> OptimizerReport:
    box = _box_for(family)
    reports = []
    if spec.optimizer in ("de", "de+powell"):
        de = diff_evolution_min(
            objective,
            box,
            pop=spec.de_pop,
            cr=spec.de_cr,
            fw=spec.de_fw,
            gens=spec.de_gens,
            seed=spec.seed,
        )
        reports.append(de)
        if spec.optimizer == "de+powell":
            reports.append(
                powell_min(objective, de.argmin, box, tol=spec.tol, max_iter=spec.max_iter)
            )
    if spec.optimizer != "de" and x0 is not None:
        reports.append(
            powell_min(objective, x0, box, tol=spec.tol, max_iter=spec.max_iter)
        )
    best = min(reports, key=lambda r: r.value)
    evals = sum(r.evaluations for r in reports)
    return OptimizerReport(best.argmin, best.value, evals, best.converged)


def mle_ssvm(sample: CircularSample, spec: EstimatorSpec | None = None) -> FitResult:
    """Sine-skewed von Mises MLE by derivative-free maximization of the
    average log-likelihood (no closed form exists)."""
    if sample.n < 4:
        raise ValueError("need at least 4 observations")
    if spec is None:
        spec = EstimatorSpec(kind="mle")
    x = sample.angles

    def objective(vec):
        theta = vector_to_params("ssvm", vec)
        lp = family_logpdf(theta, x)
        return np.inf if np.any(np.isneginf(lp)) else -float(np.mean(lp))

    report = _minimize(objective, "ssvm", spec, x0=_moment_start(sample, "ssvm"))
    if not np.isfinite(report.value):
        raise ValueError("no feasible sine-skewed von Mises parameters found")
    return FitResult(vector_to_params("ssvm", report.argmin), report.value, report)


def _wasserstein_objective(sample: CircularSample, family: str, spec: EstimatorSpec):
    if spec.discretization == "grid":
        D = spec.points or sample.n
        q = grid_cdf_of(sample, D)

        def objective(vec):
            return w1_grid(q, grid_cdf_of(vector_to_params(family, vec), D))

    else:
        m = spec.points or sample.n
        if m != sample.n:
            raise ValueError("equal-mass discretization requires points = n")
        xa = sample.angles
        levels = np.arange(1, m + 1) / m

        def objective(vec):
            theta = vector_to_params(family, vec)
            atoms = np.sort(normalize_angle(family_quantile(theta, levels)))
            return _wp_equal_weight_arrays(xa, atoms, spec.p)

    return objective


def wasserstein_fit(
    sample: CircularSample, family: str, spec: EstimatorSpec | None = None
) -> FitResult:
    """Projection estimator: minimize the circular W_p distance between the
    empirical distribution and the model over the family's parameter box."""
    if spec is None:
        spec = EstimatorSpec()
    if spec.kind != "wasserstein":
        raise ValueError("spec.kind must be 'wasserstein'")
    objective = _wasserstein_objective(sample, family, spec)
    report = _minimize(objective, family, spec, x0=_moment_start(sample, family))
    return FitResult(vector_to_params(family, report.argmin), report.value, report)


def circular_sq_error(est: float, truth: float) -> float:
    """Squared circular distance; the MSE contribution for angular parameters."""
    return float(circ_dist(est, truth)) ** 2


def fit_mle(sample: CircularSample, family: str, spec: EstimatorSpec | None = None):
    """Dispatch the per-family MLE; returns FamilyParams."""
    if family == "vm":
        return mle_von_mises(sample)
    if family == "wc":
        return mle_wrapped_cauchy(sample).theta
    if family == "ssvm":
        return mle_ssvm(sample, spec).theta_hat
    if family == "uniform":
        return FamilyParams("uniform")
    raise ValueError(f"no MLE implemented for family {family!r}")


def loglik(theta: FamilyParams, sample: CircularSample) -> float:
    return float(np.sum(family_logpdf(theta, sample.angles)))
