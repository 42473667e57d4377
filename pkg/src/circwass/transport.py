"""Circular Wasserstein distances.

Equal-weight distances reduce to a minimum over cyclic shifts of a sorted
matching (non-crossing optimality); general weights go through the exact
piecewise evaluation of the quantile-difference integral minimized over a
CDF offset. The order-1 grid formula uses a linear-time median.
"""

from dataclasses import dataclass

import numpy as np

from .circular import TWO_PI, CircularSample, DiscreteCircularDist, normalize_angle
from .families import FamilyParams, family_cdf, family_quantile
from .optimize import convex_min_1d, select_kth

__all__ = [
    "GridCdf",
    "discretize_family_equal_mass",
    "grid_cdf_of",
    "shift_cost",
    "wp_discrete",
    "wp_bruteforce",
    "w1_grid",
    "w1_cdf_search",
    "wp_general",
]


@dataclass(frozen=True)
class GridCdf:
    """CDF values at the grid points 2*pi*i/D, i = 1..D."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("grid CDF needs at least 2 points")
        if np.any(np.diff(v) < -1e-12):
            raise ValueError("grid CDF must be non-decreasing")
        if abs(v[-1] - 1.0) > 1e-12:
            raise ValueError("grid CDF must end at 1")
        if v[0] < -1e-12 or np.any(v > 1.0 + 1e-12):
            raise ValueError("grid CDF values must lie in [0, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def D(self) -> int:
        return int(self.values.size)


def discretize_family_equal_mass(theta: FamilyParams, n: int) -> DiscreteCircularDist:
    """n-point equal-weight discretization at the quantile levels k/n, k=1..n.

    The level-1 quantile (2*pi) wraps to the cut point 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    atoms = normalize_angle(family_quantile(theta, np.arange(1, n + 1) / n))
    return DiscreteCircularDist(atoms, np.full(n, 1.0 / n))


def grid_cdf_of(source, D: int) -> GridCdf:
    """CDF of a sample or family at the D grid points 2*pi*i/D, i = 1..D."""
    if D < 2:
        raise ValueError("D must be >= 2")
    grid = TWO_PI * np.arange(1, D + 1) / D
    if isinstance(source, CircularSample):
        # atoms exactly at the cut count as 2*pi, landing in the last cell
        zeros = int(np.searchsorted(source.angles, 0.0, side="right"))
        vals = (np.searchsorted(source.angles, grid, side="right") - zeros) / source.n
        vals[-1] = 1.0
    elif isinstance(source, FamilyParams):
        vals = np.asarray(family_cdf(source, grid))
        vals[-1] = 1.0
    else:
        raise TypeError("source must be a CircularSample or FamilyParams")
    return GridCdf(np.clip(vals, 0.0, 1.0))


def _check_equal_weight_pair(a: DiscreteCircularDist, b: DiscreteCircularDist):
    if a.size != b.size or not a.is_equal_weight() or not b.is_equal_weight():
        raise ValueError("equal-weight inputs required")


def _shift_cost_arrays(xa: np.ndarray, xb: np.ndarray, k: int, p: float) -> float:
    n = xa.size
    idx = np.arange(n) + k
    wind, idx = np.divmod(idx, n)
    return float(np.mean(np.abs(xa - (xb[idx] + TWO_PI * wind)) ** p))


def shift_cost(
    a: DiscreteCircularDist, b: DiscreteCircularDist, k: int, p: float
) -> float:
    """Cost (1/n) sum |x_(i) - y_(i+k)|^p of the cyclic matching with shift k.

    Indices past the cut carry the +-2*pi winding; any integer k is valid.
    """
    _check_equal_weight_pair(a, b)
    return _shift_cost_arrays(a.support, b.support, k, p)


def _wp_equal_weight_arrays(xa: np.ndarray, xb: np.ndarray, p: float) -> float:
    """W_p between equal-weight atom lists (sorted), via convex search over shifts."""
    n = xa.size
    cache: dict[int, float] = {}

    def cost(k: int) -> float:
        if k not in cache:
            cache[k] = _shift_cost_arrays(xa, xb, k, p)
        return cache[k]

    lo, hi = -n, n
    while hi - lo > 2:
        mid = (lo + hi) // 2
        if cost(mid) <= cost(mid + 1):
            hi = mid + 1
        else:
            lo = mid
    k_hat = min(range(lo, hi + 1), key=cost)
    # 3-point local scan absorbs flat plateaus from tied costs
    for k in (k_hat - 2, k_hat - 1, k_hat + 1, k_hat + 2):
        if -n <= k <= n and cost(k) < cost(k_hat):
            k_hat = k
    if not (cost(k_hat) <= cost(max(k_hat - 1, -n)) and cost(k_hat) <= cost(min(k_hat + 1, n))):
        k_hat = min(range(-n, n + 1), key=cost)  # convexity failed near ties
    return cost(k_hat) ** (1.0 / p)


def _canonical_order(xa: np.ndarray, xb: np.ndarray):
    # fix the argument order so W_p(a, b) == W_p(b, a) to the last bit
    # (summation order would otherwise differ by an ulp)
    for va, vb in zip(xa, xb):
        if va < vb:
            return xa, xb
        if va > vb:
            return xb, xa
    return (xa, xb) if xa.size <= xb.size else (xb, xa)


def wp_discrete(a: DiscreteCircularDist, b: DiscreteCircularDist, p: float) -> float:
    """W_p between equal-weight discrete circular distributions."""
    _check_equal_weight_pair(a, b)
    xa, xb = _canonical_order(a.support, b.support)
    return _wp_equal_weight_arrays(xa, xb, p)


def wp_bruteforce(a: DiscreteCircularDist, b: DiscreteCircularDist, p: float) -> float:
    """O(n^2) oracle: linear scan over every cyclic shift."""
    _check_equal_weight_pair(a, b)
    if a.size > 512:
        raise ValueError("brute-force oracle limited to n <= 512")
    n = a.size
    xa, xb = _canonical_order(a.support, b.support)
    best = min(_shift_cost_arrays(xa, xb, k, p) for k in range(-n, n + 1))
    return best ** (1.0 / p)


def w1_grid(q: GridCdf, pm: GridCdf, use_sort: bool = False) -> float:
    """W_1 between grid discretizations: (2*pi/D) * sum |d_i - m| with m the
    (lower) median of the CDF differences, found in linear time."""
    if q.D != pm.D:
        raise ValueError("grid sizes must match")
    d = q.values - pm.values
    m = select_kth(d, (d.size - 1) // 2, use_sort=use_sort)
    return float(TWO_PI / q.D * np.sum(np.abs(d - m)))


def w1_cdf_search(q_cdf, p_cdf, quad_points: int = 512) -> float:
    """W_1 via the CDF-offset formula: min over alpha of the midpoint-rule
    integral of |P_1 - P_2 - alpha|. Validation path, not a hot loop."""
    x = TWO_PI * (np.arange(quad_points) + 0.5) / quad_points
    g = np.asarray(q_cdf(x), dtype=float) - np.asarray(p_cdf(x), dtype=float)
    lo, hi = float(np.min(g)) - 1e-3, float(np.max(g)) + 1e-3

    def objective(alpha):
        return TWO_PI / quad_points * float(np.sum(np.abs(g - alpha)))

    _, val = convex_min_1d(objective, lo, hi, tol=1e-12)
    return val


def _offset_integral(a: DiscreteCircularDist, b: DiscreteCircularDist, alpha: float, p: float) -> float:
    """Exact integral over u of |Qa^{-1}(u) - Qb^{-1}(u + alpha)|^p."""
    cum_a = a.cumweights()
    cum_b = b.cumweights()
    # breakpoints where either quantile changes atoms
    cuts = [cum_a[:-1]]
    for m in (-2, -1, 0, 1, 2):
        cuts.append(cum_b + m - alpha)
    u = np.concatenate([[0.0, 1.0]] + cuts)
    u = np.unique(u[(u >= 0.0) & (u <= 1.0)])
    if u[0] > 0.0:
        u = np.concatenate([[0.0], u])
    if u[-1] < 1.0:
        u = np.concatenate([u, [1.0]])
    mid = 0.5 * (u[:-1] + u[1:])
    lengths = np.diff(u)
    ia = np.searchsorted(cum_a, mid, side="left")
    v = mid + alpha
    wind = np.ceil(v) - 1.0
    v0 = v - wind
    low = v0 <= 0.0  # guard fp fallout at cell edges
    v0[low] += 1.0
    wind[low] -= 1.0
    ib = np.searchsorted(cum_b, np.minimum(v0, 1.0), side="left")
    diff = a.support[ia] - (b.support[ib] + TWO_PI * wind)
    return float(np.sum(lengths * np.abs(diff) ** p))


def wp_general(
    a: DiscreteCircularDist, b: DiscreteCircularDist, p: float, tol: float = 1e-12
) -> float:
    """W_p for arbitrary weights: exact piecewise objective in the CDF offset,
    minimized by convex search plus a scan of the offset kinks."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    objective = lambda alpha: _offset_integral(a, b, alpha, p)
    _, best = convex_min_1d(objective, -1.5, 1.5, tol=tol)
    # the p=1 minimum sits at a kink alpha = cumB_j + m - cumA_i
    kinks = (
        np.subtract.outer(b.cumweights(), a.cumweights())[:, :, None]
        + np.array([-1.0, 0.0, 1.0])
    ).ravel()
    kinks = np.unique(kinks[(kinks >= -1.5) & (kinks <= 1.5)])
    for alpha in kinks:
        val = objective(alpha)
        if val < best:
            best = val
    return best ** (1.0 / p)
