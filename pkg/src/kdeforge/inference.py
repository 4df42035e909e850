"""Bootstrap machinery, pointwise confidence intervals, and confidence bands.

Pointwise constructions:

* ``ci_plugin``            -- normal interval with the plug-in variance
                              mu_k * p_hat(x) / (n h^d).
* ``ci_bootstrap_plugin``  -- normal interval with the bootstrap standard
                              deviation of replicate KDE values.
* ``ci_bootstrap``         -- per-point quantile of |p*_j(x) - p_hat(x)|.

Simultaneous constructions:

* ``band_plugin_evt``          -- extreme-value limit of the normalized sup
                                  deviation (slow convergence; shipped for
                                  completeness, not for coverage guarantees).
* ``band_bootstrap``           -- quantile of the sup-norm bootstrap deviation;
                                  valid for the smoothed density p_h.
* ``band_debiased_bootstrap``  -- the same sup-norm bootstrap applied to the
                                  bias-corrected KDE
                                  p_tilde = p_hat - (h^2/2) sigma_k^2 lap p_hat
                                  (curvature bandwidth b = h), valid for the
                                  true density when h is at the n^(-1/(d+4))
                                  rate.

All sup norms are taken over the evaluation grid, not the continuum; use at
least ~256 grid points per dimension.  Empirical quantiles are pinned to the
ceil((1-alpha) B)-th order statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import estimator, kernels
from .estimator import DensityModel, Sample
from .kernels import KernelFamily


@dataclass(frozen=True)
class BootstrapPlan:
    """Replicate count and seed.  Replicate r draws from the RNG stream
    derived from (seed, r), so results do not depend on execution order."""

    replicates: int
    seed: int

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError("need at least 2 bootstrap replicates")

    def rng(self, r: int) -> np.random.Generator:
        if not 0 <= r < self.replicates:
            raise ValueError(f"replicate index {r} out of range")
        return np.random.default_rng([int(self.seed) & (2**64 - 1), r])


@dataclass(frozen=True)
class IntervalResult:
    """Pointwise intervals on a grid.  ``target`` is "smoothed" (p_h) except
    for the debiased construction, which targets the true density."""

    grid: np.ndarray
    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    method: str
    target: str = "smoothed"
    degenerate: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "schema": 1,
            "grid": self.grid.tolist(),
            "center": self.center.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "alpha": self.alpha,
            "method": self.method,
            "target": self.target,
        }
        if self.degenerate is not None:
            out["degenerate"] = self.degenerate.astype(bool).tolist()
        return out


@dataclass(frozen=True)
class BandResult(IntervalResult):
    """A simultaneous band.  ``halfwidth`` is the constant half-width for the
    bootstrap constructions; None for the extreme-value band, whose width
    varies with p_hat(x)."""

    halfwidth: float | None = None
    warnings: tuple = ()
    center_clipped: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["halfwidth"] = self.halfwidth
        if self.warnings:
            out["warnings"] = list(self.warnings)
        if self.center_clipped is not None:
            out["center_clipped"] = self.center_clipped.tolist()
        return out


def resample(sample: Sample, plan: BootstrapPlan, r: int) -> Sample:
    """The r-th bootstrap resample: n uniform draws with replacement."""
    idx = plan.rng(r).integers(0, sample.n, sample.n)
    return Sample(sample.data[idx])


def resample_counts(sample: Sample, plan: BootstrapPlan) -> np.ndarray:
    """(B, n) multiplicity matrix over replicates, consistent with ``resample``.

    Row r counts how often each original observation appears in replicate r;
    a bootstrap KDE is then counts @ kernel_value_matrix / (n h^d).
    """
    n = sample.n
    counts = np.empty((plan.replicates, n), dtype=np.float64)
    for r in range(plan.replicates):
        idx = plan.rng(r).integers(0, n, n)
        counts[r] = np.bincount(idx, minlength=n)
    return counts


def empirical_quantile(values: np.ndarray, alpha: float) -> float:
    """The ceil((1-alpha) B)-th order statistic (conservative, no interpolation)."""
    values = np.asarray(values, dtype=float)
    b = values.size
    k = math.ceil((1.0 - alpha) * b)
    if k > b:
        raise ValueError(f"B={b} too small to resolve the {1 - alpha} quantile")
    return float(np.sort(values)[k - 1])


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")


def _as_grid(model_dim: int, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if grid.shape[1] != model_dim:
        raise ValueError("grid dimension mismatch")
    return grid


def ci_plugin(model: DensityModel, grid, alpha: float) -> IntervalResult:
    """Plug-in normal interval p_hat(x) +/- z sqrt(mu_k p_hat(x) / (n h^d))."""
    _check_alpha(alpha)
    grid = _as_grid(model.dim, grid)
    center = estimator.density(model, grid)
    mu_k = kernels.constants(model.kernel)["mu_k"]
    z = norm.ppf(1.0 - alpha / 2.0)
    hw = z * np.sqrt(mu_k * center / (model.n * model.bandwidth**model.dim))
    return IntervalResult(
        grid=grid, center=center, lower=center - hw, upper=center + hw,
        alpha=alpha, method="ci-plugin", degenerate=(center == 0.0),
    )


def bootstrap_density_matrix(model: DensityModel, grid: np.ndarray,
                             plan: BootstrapPlan) -> np.ndarray:
    """(B, m) matrix of bootstrap KDE values on the grid."""
    grid = _as_grid(model.dim, grid)
    phi = estimator.kernel_value_matrix(model, grid)
    counts = resample_counts(model.sample, plan)
    return counts @ phi / (model.n * model.bandwidth**model.dim)


def ci_bootstrap_plugin(model: DensityModel, grid, alpha: float,
                        plan: BootstrapPlan) -> IntervalResult:
    """Normal interval with the bootstrap standard deviation.

    The displayed limit theory is in terms of the bootstrap variance, but the
    z-interval form requires the standard deviation; we use the standard
    deviation.
    """
    _check_alpha(alpha)
    grid = _as_grid(model.dim, grid)
    center = estimator.density(model, grid)
    boot = bootstrap_density_matrix(model, grid, plan)
    sd = np.std(boot, axis=0, ddof=1)
    hw = norm.ppf(1.0 - alpha / 2.0) * sd
    return IntervalResult(
        grid=grid, center=center, lower=center - hw, upper=center + hw,
        alpha=alpha, method="ci-bootstrap-plugin", degenerate=(hw == 0.0),
    )


def ci_bootstrap(model: DensityModel, grid, alpha: float,
                 plan: BootstrapPlan) -> IntervalResult:
    """Fully bootstrapped interval from per-point deviation quantiles."""
    _check_alpha(alpha)
    if plan.replicates < 20:
        raise ValueError("need B >= 20 for quantile resolution")
    grid = _as_grid(model.dim, grid)
    center = estimator.density(model, grid)
    boot = bootstrap_density_matrix(model, grid, plan)
    dev = np.abs(boot - center[None, :])
    c = np.array([empirical_quantile(dev[:, j], alpha) for j in range(grid.shape[0])])
    return IntervalResult(
        grid=grid, center=center, lower=center - c, upper=center + c,
        alpha=alpha, method="ci-bootstrap",
    )


def evt_quantile(alpha: float) -> float:
    """Quantile constant E of the limiting double-exponential law,
    E = -log(-log(alpha) / 2)."""
    _check_alpha(alpha)
    return -math.log(-math.log(alpha) / 2.0)


def band_plugin_evt(model: DensityModel, grid, alpha: float,
                    dn_correction: float = 0.0) -> BandResult:
    """Extreme-value plug-in band (d = 1, Gaussian kernel, h < 1).

    Uses the leading-order centering d_n = sqrt(-2 log h) plus a configurable
    additive correction; the exact second-order centering constant is not
    implemented.  Convergence to the extreme-value limit is very slow, so the
    result carries a warning tag and no coverage guarantee at practical n.
    """
    _check_alpha(alpha)
    if model.dim != 1 or model.kernel.family is not KernelFamily.GAUSSIAN:
        raise ValueError("extreme-value band requires d = 1 and the Gaussian kernel")
    h = model.bandwidth
    if h >= 1.0:
        raise ValueError("extreme-value band requires h < 1")
    grid = _as_grid(model.dim, grid)
    center = estimator.density(model, grid)
    mu_k = kernels.constants(model.kernel)["mu_k"]
    root = math.sqrt(-2.0 * math.log(h))
    dn = root + dn_correction
    factor = dn + evt_quantile(alpha) / root
    hw = np.sqrt(center * mu_k / (model.n * h)) * factor
    return BandResult(
        grid=grid, center=center, lower=center - hw, upper=center + hw,
        alpha=alpha, method="band-evt", halfwidth=None,
        warnings=("slow-convergence",),
    )


def band_bootstrap(model: DensityModel, grid, alpha: float,
                   plan: BootstrapPlan) -> BandResult:
    """Constant-width band from the sup-norm bootstrap deviation quantile.

    Valid (asymptotically) for the smoothed density p_h; undercovers the true
    density unless h is undersmoothed.
    """
    _check_alpha(alpha)
    if plan.replicates < 20:
        raise ValueError("need B >= 20 for quantile resolution")
    grid = _as_grid(model.dim, grid)
    center = estimator.density(model, grid)
    boot = bootstrap_density_matrix(model, grid, plan)
    sup_dev = np.max(np.abs(boot - center[None, :]), axis=1)
    c = empirical_quantile(sup_dev, alpha)
    return BandResult(
        grid=grid, center=center, lower=center - c, upper=center + c,
        alpha=alpha, method="band-bootstrap", halfwidth=c,
    )


class DebiasedDensity:
    """The bias-corrected KDE p_tilde = p_hat - (h^2/2) sigma_k^2 lap p_hat,
    with the curvature estimated at bandwidth b = h.

    Values may be negative; they are deliberately not clipped, since the band
    constructions need the raw corrected curve.
    """

    def __init__(self, model: DensityModel):
        if not model.kernel.differentiable:
            raise kernels.UnsupportedDerivativeError(
                "debiasing requires the Gaussian kernel"
            )
        self.model = model
        self.sigma_k2 = kernels.constants(model.kernel)["sigma_k2"]

    def correction_matrix(self, grid: np.ndarray) -> np.ndarray:
        """(n, m) per-observation contributions to p_tilde on the grid."""
        m = self.model
        h = m.bandwidth
        phi = estimator.kernel_value_matrix(m, grid)
        lap = estimator.kernel_laplacian_matrix(m, grid)
        return (phi - 0.5 * self.sigma_k2 * lap) / (m.n * h**m.dim)

    def evaluate(self, queries) -> np.ndarray:
        grid = _as_grid(self.model.dim, queries)
        return self.correction_matrix(grid).sum(axis=0)

    def __call__(self, x) -> float:
        return float(self.evaluate(x)[0])


def debias(model: DensityModel) -> DebiasedDensity:
    """Return the debiased evaluator for ``model``."""
    return DebiasedDensity(model)


def band_debiased_bootstrap(sample: Sample, kernel: kernels.KernelSpec, h: float,
                            grid, alpha: float, plan: BootstrapPlan) -> BandResult:
    """Bootstrap sup-norm band around the bias-corrected KDE.

    Each replicate recomputes the full bias-corrected estimate from the
    resampled data, so the quantile reflects the fluctuation of the corrected
    curve.  Targets the true density; generally wider than ``band_bootstrap``.
    """
    _check_alpha(alpha)
    if plan.replicates < 20:
        raise ValueError("need B >= 20 for quantile resolution")
    model = DensityModel(sample, kernel, h)
    grid = _as_grid(model.dim, grid)
    deb = DebiasedDensity(model)
    contrib = deb.correction_matrix(grid)
    center = contrib.sum(axis=0)
    counts = resample_counts(sample, plan)
    boot = counts @ contrib
    sup_dev = np.max(np.abs(boot - center[None, :]), axis=1)
    c = empirical_quantile(sup_dev, alpha)
    return BandResult(
        grid=grid, center=center, lower=center - c, upper=center + c,
        alpha=alpha, method="band-debiased", target="true", halfwidth=c,
        center_clipped=np.maximum(center, 0.0),
    )
