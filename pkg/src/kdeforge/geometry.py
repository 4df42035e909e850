"""Geometric features of the estimated density.

* ``mean_shift`` / ``find_modes`` -- fixed-point ascent to local modes and the
  induced mode clustering (each start is assigned to the basin it flows to).
* ``level_set`` -- superlevel threshold of a density grid plus connected
  components under face adjacency.
* ``scms`` -- subspace-constrained mean shift: the mean-shift step projected
  onto the trailing (d-1) Hessian eigenvectors, converging to density ridges.
* ``morse_smale`` -- grid partition by the (ascent destination, descent
  destination) pair of the gradient flow.

Convergence tolerances are artifact choices: the gradient tolerance defaults
to 1e-6 * max(grid density) / h and the mode merge radius to h / 2, keeping
both thresholds scale-aware.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import estimator
from .estimator import DensityModel, EvalGrid
from .kernels import KernelFamily

EXTERIOR = -1  # shared descent label for flows leaving the evaluation domain


@dataclass(frozen=True)
class ModeSet:
    """Local modes plus the basin assignment of every start point."""

    modes: np.ndarray          # (k, d) mode locations
    density: np.ndarray        # (k,) KDE values at the modes
    assignments: np.ndarray    # (m,) mode index per start, -1 if unassigned
    converged: np.ndarray      # (m,) convergence flag per start

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]


@dataclass(frozen=True)
class LevelSet:
    """Superlevel mask of a grid with connected-component labels."""

    level: float
    mask: np.ndarray           # boolean, grid-shaped
    labels: np.ndarray         # int, grid-shaped; 0..k-1 inside, -1 outside
    n_components: int


@dataclass(frozen=True)
class RidgeSet:
    """Converged SCMS outputs with their ridge-condition diagnostics."""

    points: np.ndarray             # (k, d)
    projected_grad_norms: np.ndarray
    lambda2: np.ndarray
    converged: np.ndarray          # per-start flag
    dropped_degenerate: int


@dataclass(frozen=True)
class MorseSmalePartition:
    """Per-grid-point flow destinations and the induced cell labels.

    Descent flows that leave the domain (or fail to converge) get the shared
    EXTERIOR destination; all such points form a single boundary cell.
    """

    ascent_ids: np.ndarray
    descent_ids: np.ndarray
    cell_labels: np.ndarray
    modes: np.ndarray
    minima: np.ndarray


def _grad_tolerance(model: DensityModel, ref_density: float | None = None) -> float:
    if ref_density is None:
        ref_density = float(
            estimator.density(model, model.sample.data).max()
        )
    return 1e-6 * ref_density / model.bandwidth


def _mean_shift_batch(model: DensityModel, points: np.ndarray, tol: float,
                      max_iter: int):
    """Iterate the mean-shift update on all rows of ``points`` at once.

    Density is nondecreasing along Gaussian mean-shift iterates, so the
    update needs no step-size control.
    """
    data = model.sample.data
    h = model.bandwidth
    x = np.array(points, dtype=float)
    active = np.ones(x.shape[0], dtype=bool)
    iters = np.zeros(x.shape[0], dtype=int)
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        diff = (xa[:, None, :] - data[None, :, :]) / h
        w = np.exp(-0.5 * np.sum(np.square(diff), axis=-1))
        wsum = w.sum(axis=1)
        target = (w @ data) / wsum[:, None]
        step = np.linalg.norm(target - xa, axis=1)
        x[active] = target
        iters[active] += 1
        still = step >= tol
        idx = np.flatnonzero(active)
        active[idx[~still]] = False
    return x, ~active, iters


def mean_shift(model: DensityModel, start, tol: float = 1e-8,
               max_iter: int = 500):
    """Run mean shift from a single start; returns (point, converged, iters).

    Exceeding ``max_iter`` clears the converged flag rather than raising.
    """
    if model.kernel.family is not KernelFamily.GAUSSIAN:
        raise ValueError("mean shift requires the Gaussian kernel")
    start = np.atleast_1d(np.asarray(start, dtype=float))
    pts, conv, iters = _mean_shift_batch(model, start[None, :], tol, max_iter)
    return pts[0], bool(conv[0]), int(iters[0])


def _merge_points(points: np.ndarray, densities: np.ndarray, radius: float):
    """Greedy merge of nearby destinations, highest density first.

    Returns (representatives, representative densities, member -> rep index).
    """
    order = np.argsort(-densities, kind="stable")
    reps: list[int] = []
    assign = np.full(points.shape[0], -1, dtype=int)
    for i in order:
        placed = False
        for rid, rep_idx in enumerate(reps):
            if np.linalg.norm(points[i] - points[rep_idx]) <= radius:
                assign[i] = rid
                placed = True
                break
        if not placed:
            assign[i] = len(reps)
            reps.append(i)
    return points[reps], densities[reps], assign


def find_modes(model: DensityModel, starts=None, tol: float = 1e-8,
               max_iter: int = 500, merge_radius: float | None = None) -> ModeSet:
    """Mode clustering: mean shift from every start, merged destinations.

    Candidate modes failing the negative-curvature check (largest Hessian
    eigenvalue < 0) are discarded together with their basins.
    """
    if starts is None:
        starts = model.sample.data
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.size == 0:
        raise ValueError("starts must be nonempty")
    if merge_radius is None:
        merge_radius = model.bandwidth / 2.0
    dest, converged, _ = _mean_shift_batch(model, starts, tol, max_iter)
    dens = estimator.density(model, dest)
    reps, rep_dens, assign = _merge_points(dest, dens, merge_radius)
    assign[~converged] = -1

    keep = []
    for k in range(reps.shape[0]):
        lam1 = np.linalg.eigvalsh(estimator.hessian_at(model, reps[k]))[-1]
        if lam1 < 0:
            keep.append(k)
    remap = {old: new for new, old in enumerate(keep)}
    assignments = np.array([remap.get(a, -1) for a in assign], dtype=int)
    return ModeSet(
        modes=reps[keep], density=rep_dens[keep],
        assignments=assignments, converged=converged,
    )


def level_set(grid: EvalGrid, level: float) -> LevelSet:
    """Threshold the grid at ``level`` and label face-adjacent components."""
    mask = (grid.values >= level).reshape(grid.shape)
    structure = ndimage.generate_binary_structure(mask.ndim, 1)
    labeled, n = ndimage.label(mask, structure=structure)
    labels = labeled - 1  # 0-based component ids, -1 outside the mask
    return LevelSet(level=float(level), mask=mask, labels=labels, n_components=int(n))


def scms(model: DensityModel, starts=None, tol: float = 1e-7,
         max_iter: int = 500, max_starts: int = 2000,
         eigen_gap_tol: float = 1e-10,
         grad_tol: float | None = None) -> RidgeSet:
    """Subspace-constrained mean shift toward density ridges.

    Each iterate projects the mean-shift step onto the span of the trailing
    d-1 Hessian eigenvectors; a converged point x satisfies
    ||V V^T grad p_hat(x)|| <= grad_tol with lambda_2(x) < 0.  Points whose
    leading Hessian eigengap collapses below ``eigen_gap_tol`` are dropped.
    """
    if model.dim < 2:
        raise ValueError("SCMS requires d >= 2")
    if model.kernel.family is not KernelFamily.GAUSSIAN:
        raise ValueError("SCMS requires the Gaussian kernel")
    if starts is None:
        starts = model.sample.data
        if starts.shape[0] > max_starts:
            stride = int(np.ceil(starts.shape[0] / max_starts))
            starts = starts[::stride]
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if grad_tol is None:
        grad_tol = _grad_tolerance(model)

    data = model.sample.data
    h = model.bandwidth
    out_points, out_norms, out_lam2 = [], [], []
    converged = np.zeros(starts.shape[0], dtype=bool)
    dropped = 0
    for s in range(starts.shape[0]):
        x = starts[s].copy()
        degenerate = False
        for _ in range(max_iter):
            diff = (x[None, :] - data) / h
            w = np.exp(-0.5 * np.sum(np.square(diff), axis=1))
            target = (w[:, None] * data).sum(axis=0) / w.sum()
            hess = estimator.hessian_at(model, x)
            eigvals, eigvecs = np.linalg.eigh(hess)  # ascending
            if eigvals[-1] - eigvals[-2] < eigen_gap_tol:
                degenerate = True
                break
            v_trailing = eigvecs[:, :-1]  # all but the leading eigenvector
            step = v_trailing @ (v_trailing.T @ (target - x))
            x = x + step
            if np.linalg.norm(step) < tol:
                converged[s] = True
                break
        if degenerate:
            dropped += 1
            continue
        if converged[s]:
            g = estimator.gradient_at(model, x)
            hess = estimator.hessian_at(model, x)
            eigvals, eigvecs = np.linalg.eigh(hess)
            v_trailing = eigvecs[:, :-1]
            proj_norm = np.linalg.norm(v_trailing @ (v_trailing.T @ g))
            lam2 = eigvals[-2]
            if lam2 < 0 and proj_norm <= grad_tol:
                out_points.append(x)
                out_norms.append(proj_norm)
                out_lam2.append(lam2)
    return RidgeSet(
        points=np.array(out_points).reshape(-1, model.dim),
        projected_grad_norms=np.array(out_norms),
        lambda2=np.array(out_lam2),
        converged=converged,
        dropped_degenerate=dropped,
    )


def _descend(model: DensityModel, start: np.ndarray, step: float,
             bounds_lo: np.ndarray, bounds_hi: np.ndarray,
             tol: float, max_steps: int) -> np.ndarray | None:
    """Fixed-step normalized gradient descent; the step is halved whenever the
    gradient direction reverses.  Returns the destination, or None when the
    flow exits the domain or fails to settle."""
    x = start.copy()
    prev_dir = None
    for _ in range(max_steps):
        g = estimator.gradient(model, x[None, :])[0]
        gnorm = np.linalg.norm(g)
        if gnorm == 0.0:
            return x
        direction = -g / gnorm
        if prev_dir is not None and float(direction @ prev_dir) < 0:
            step *= 0.5
            if step < tol:
                return x
        x = x + step * direction
        prev_dir = direction
        if np.any(x < bounds_lo) or np.any(x > bounds_hi):
            return None
    return None


def morse_smale(model: DensityModel, grid: EvalGrid, step: float | None = None,
                tol: float | None = None, max_iter: int = 500,
                max_steps: int = 2000) -> MorseSmalePartition:
    """Partition the grid by gradient-flow destinations (d <= 2).

    Ascent uses mean shift (which only climbs); descent uses fixed-step
    gradient descent with step = h / 10.  Interior destinations are merged
    within h / 2; descent flows leaving the grid domain collapse into one
    exterior cell.
    """
    if model.dim > 2:
        raise ValueError("grid-based Morse-Smale supports d <= 2 only")
    if model.kernel.family is not KernelFamily.GAUSSIAN:
        raise ValueError("Morse-Smale flows require the Gaussian kernel")
    h = model.bandwidth
    if step is None:
        step = h / 10.0
    if tol is None:
        tol = h / 1000.0
    pts = grid.points
    lo = np.array([ax[0] for ax in grid.axes])
    hi = np.array([ax[-1] for ax in grid.axes])

    dest_up, conv_up, _ = _mean_shift_batch(model, pts, tol=1e-8, max_iter=max_iter)
    dens_up = estimator.density(model, dest_up)
    modes, _, ascent_ids = _merge_points(dest_up, dens_up, h / 2.0)
    ascent_ids = ascent_ids.copy()
    ascent_ids[~conv_up] = EXTERIOR

    down_dests = []
    descent_raw = np.full(pts.shape[0], EXTERIOR, dtype=int)
    for j in range(pts.shape[0]):
        d = _descend(model, pts[j], step, lo, hi, tol, max_steps)
        if d is not None:
            down_dests.append((j, d))
    if down_dests:
        idx = np.array([j for j, _ in down_dests])
        dd = np.array([d for _, d in down_dests])
        # merge by proximity; density ordering is irrelevant for minima
        minima, _, assign = _merge_points(dd, -estimator.density(model, dd), h / 2.0)
        descent_raw[idx] = assign
    else:
        minima = np.empty((0, model.dim))

    # Cell label: unique (ascent, descent) pair; every exterior-descent point
    # belongs to the single boundary cell.
    pair_ids = {}
    cells = np.empty(pts.shape[0], dtype=int)
    for j in range(pts.shape[0]):
        key = "exterior" if descent_raw[j] == EXTERIOR else (
            int(ascent_ids[j]), int(descent_raw[j]))
        if key not in pair_ids:
            pair_ids[key] = len(pair_ids)
        cells[j] = pair_ids[key]
    return MorseSmalePartition(
        ascent_ids=ascent_ids, descent_ids=descent_raw, cell_labels=cells,
        modes=modes, minima=minima,
    )
