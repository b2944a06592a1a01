"""Independent verification of solver outputs.

Two instruments: an exhaustive grid search over the raw decision variables
for one- and two-device instances, and a random feasible-perturbation check
that certifies first-order optimality of a given allocation. Both evaluate
constraints from the raw closed forms, never through solver shortcuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .model import Allocation, SystemConfig, TerminalDevice, semantic_constants
from .solver import FeasibilityCause, FeasibilityError

__all__ = ["GridSpec", "default_grid_bounds", "grid_optimum", "perturbation_certify"]

_AXES = ("beta", "f_local", "t_transmit", "e_transmit")
_N2_RESOLUTION_CAP = 32
_N2_SPLITS = 31  # k/32 for k=1..31, keeping the even split on the grid


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution and per-variable [lo, hi] bounds.

    ``beta`` and ``f_local`` axes are laid out geometrically, matching the
    log substitution of the convexified problem; ``t_transmit`` and
    ``e_transmit`` linearly.
    """

    resolution_per_axis: int
    variable_bounds: Dict[str, Tuple[float, float]]

    def __post_init__(self) -> None:
        if self.resolution_per_axis < 8:
            raise ValueError("resolution_per_axis must be at least 8")
        for name in _AXES:
            if name not in self.variable_bounds:
                raise ValueError(f"missing bounds for {name}")
            lo, hi = self.variable_bounds[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"bounds for {name} must be finite and ordered")


def default_grid_bounds(tds: Sequence[TerminalDevice], cfg: SystemConfig) -> Dict[str, Tuple[float, float]]:
    """Reasonable bounds around the feasible region, from raw formulas only."""
    active = [td for td in tds if td.task_bits > 0]
    if not active:
        raise ValueError("default bounds need at least one device with work")
    sigma2 = cfg.noise_power_w
    t_caps = []
    t_floors = []
    for td in active:
        r_full = cfg.bandwidth_hz * math.log2(1.0 + td.channel_gain * td.p_tx_max / sigma2)
        t_raw = td.task_bits / r_full
        t_floors.append(0.95 * td.beta_min * t_raw)
        # widen when the peak-power upload does not fit the energy budget
        factor = 1.05 if td.p_tx_max * t_raw <= td.energy_budget else 8.0
        t_caps.append(factor * t_raw)
    t_hi = max(t_caps)
    e_caps = [min(td.energy_budget, td.p_tx_max * t_hi) for td in active]
    f_hi = max(td.f_local_max for td in active)
    return {
        "beta": (min(td.beta_min for td in active), 1.0),
        "f_local": (f_hi * 1e-3, f_hi),
        "t_transmit": (min(t_floors), t_hi),
        "e_transmit": (0.0, max(e_caps)),
    }


def _axis(lo: float, hi: float, resolution: int, geometric: bool) -> np.ndarray:
    if lo == hi:
        return np.array([lo], dtype=float)
    if geometric:
        if lo <= 0:
            raise ValueError("geometric axes need positive bounds")
        return np.geomspace(lo, hi, resolution)
    return np.linspace(lo, hi, resolution)


def _best_single(td: TerminalDevice, cfg: SystemConfig, f_share: float,
                 grid: GridSpec, resolution: int) -> Optional[Tuple[float, Tuple[float, float, float, float]]]:
    """Best feasible grid point for one device with a fixed server share."""
    a, k, p = semantic_constants(td, cfg)
    if td.task_bits == 0:
        fl = grid.variable_bounds["f_local"][1]
        return 0.0, (1.0, fl, 0.0, 0.0)

    betas = _axis(*grid.variable_bounds["beta"], resolution, geometric=True)
    f_loc = _axis(*grid.variable_bounds["f_local"], resolution, geometric=True)
    times = _axis(*grid.variable_bounds["t_transmit"], resolution, geometric=False)
    energies = _axis(*grid.variable_bounds["e_transmit"], resolution, geometric=False)

    sigma2 = cfg.noise_power_w
    bits_cap = np.zeros((times.size, energies.size))
    positive_t = times > 0
    if np.any(positive_t):
        t_col = times[positive_t][:, None]
        bits_cap[positive_t, :] = t_col * cfg.bandwidth_hz * np.log2(
            1.0 + td.channel_gain * energies[None, :] / (t_col * sigma2))
    power_ok = energies[None, :] <= td.p_tx_max * times[:, None]

    A, intensity = td.task_bits, td.intensity
    best_obj = math.inf
    best_point = None
    for b in betas:
        t_local = a * A / (b**k * f_loc)
        e_extract = a * A * td.energy_coeff * f_loc**2 / b**k
        t_remote = A * intensity * b ** (1.0 - p) / f_share

        feas_te = power_ok & (bits_cap >= b * A)
        has_e = feas_te.any(axis=1)
        if not has_e.any():
            continue
        first_e = np.argmax(feas_te, axis=1)
        e_min = np.where(has_e, energies[first_e], math.inf)

        headroom = td.energy_budget - e_extract
        feasible = e_min[None, :] <= headroom[:, None]
        if not feasible.any():
            continue
        objective = t_local[:, None] + times[None, :] + t_remote
        masked = np.where(feasible, objective, math.inf)
        flat = int(np.argmin(masked))
        value = float(masked.flat[flat])
        if value < best_obj:
            i_f, i_t = np.unravel_index(flat, masked.shape)
            best_obj = value
            best_point = (float(b), float(f_loc[i_f]), float(times[i_t]),
                          float(energies[first_e[i_t]]))
    if best_point is None:
        return None
    return best_obj, best_point


def grid_optimum(tds: Sequence[TerminalDevice], cfg: SystemConfig,
                 grid: GridSpec) -> Tuple[float, Allocation]:
    """Exhaustive min-max optimum over the grid for one or two devices.

    Every returned point is a grid point that passed the raw constraint
    checks. With two devices a shared capacity-split axis is added; devices
    decouple once the split is fixed, so each split is scanned exhaustively
    per device.
    """
    n = len(tds)
    if n == 0 or n > 2:
        raise ValueError("grid_optimum supports one or two devices")

    if n == 1:
        result = _best_single(tds[0], cfg, cfg.f_mec_total, grid, grid.resolution_per_axis)
        if result is None:
            raise FeasibilityError(0, FeasibilityCause.INVALID_SCENARIO,
                                   "no feasible grid point")
        obj, (b, fl, t, e) = result
        share = cfg.f_mec_total if tds[0].task_bits > 0 else 0.0
        alloc = Allocation(np.array([fl]), np.array([share]), np.array([t]),
                           np.array([e]), np.array([b]), obj)
        return obj, alloc

    resolution = min(grid.resolution_per_axis, _N2_RESOLUTION_CAP)
    splits = np.arange(1, _N2_SPLITS + 1) / (_N2_SPLITS + 1)
    best = None
    for s in splits:
        shares = (s * cfg.f_mec_total, (1.0 - s) * cfg.f_mec_total)
        points = [_best_single(td, cfg, share, grid, resolution)
                  for td, share in zip(tds, shares)]
        if any(pt is None for pt in points):
            continue
        objective = max(pt[0] for pt in points)
        if best is None or objective < best[0]:
            best = (objective, shares, [pt[1] for pt in points])
    if best is None:
        raise FeasibilityError(-1, FeasibilityCause.INVALID_SCENARIO,
                               "no feasible grid point")
    objective, shares, pts = best
    alloc = Allocation(
        np.array([pt[1] for pt in pts]),
        np.array([share if td.task_bits > 0 else 0.0 for td, share in zip(tds, shares)]),
        np.array([pt[2] for pt in pts]),
        np.array([pt[3] for pt in pts]),
        np.array([pt[0] for pt in pts]),
        objective,
    )
    return objective, alloc


def _feasible(alloc_vectors, tds: Sequence[TerminalDevice], cfg: SystemConfig,
              tol: float) -> bool:
    beta, f_local, f_remote, t_transmit, e_transmit = alloc_vectors
    sigma2 = cfg.noise_power_w
    total_remote = 0.0
    for i, td in enumerate(tds):
        a, k, _ = semantic_constants(td, cfg)
        if not (td.beta_min * (1 - tol) <= beta[i] <= 1 + tol):
            return False
        if f_local[i] <= 0 or f_local[i] > td.f_local_max * (1 + tol):
            return False
        if e_transmit[i] < -tol or t_transmit[i] < -tol:
            return False
        if e_transmit[i] > td.p_tx_max * t_transmit[i] * (1 + tol) + 1e-300:
            return False
        total_remote += f_remote[i]
        if td.task_bits == 0:
            continue
        e_extract = a * td.task_bits * td.energy_coeff * f_local[i]**2 / beta[i]**k
        if e_extract + e_transmit[i] > td.energy_budget * (1 + tol):
            return False
        bits = beta[i] * td.task_bits
        if t_transmit[i] <= 0:
            return False
        cap = t_transmit[i] * cfg.bandwidth_hz * math.log2(
            1.0 + td.channel_gain * e_transmit[i] / (t_transmit[i] * sigma2))
        if cap < bits * (1 - tol):
            return False
    return total_remote <= cfg.f_mec_total * (1 + tol)


def _max_delay(alloc_vectors, tds: Sequence[TerminalDevice], cfg: SystemConfig) -> float:
    beta, f_local, f_remote, t_transmit, _ = alloc_vectors
    worst = 0.0
    for i, td in enumerate(tds):
        if td.task_bits == 0:
            continue
        a, k, p = semantic_constants(td, cfg)
        t_local = a * td.task_bits / (beta[i]**k * f_local[i])
        t_remote = td.task_bits * td.intensity * beta[i] ** (1.0 - p) / f_remote[i]
        worst = max(worst, t_local + t_transmit[i] + t_remote)
    return worst


def _structured_directions(n: int) -> list[np.ndarray]:
    """Directions aligned with the tight-constraint structure of optima.

    The deliverable-bits constraint is 1-homogeneous in (time, energy), so
    scaling the factor and the uplink pair together walks exactly along a
    tight rate constraint; these directions expose suboptimal points whose
    improving cone is too narrow for isotropic sampling to hit.
    """
    directions = []
    comm = np.zeros((5, n))
    comm[0] = comm[3] = comm[4] = 1.0  # beta, t_transmit, e_transmit together
    directions.append(comm.ravel())
    directions.append(-comm.ravel())
    for i in range(min(n, 32)):
        single = np.zeros((5, n))
        single[0, i] = single[3, i] = single[4, i] = 1.0
        directions.append(single.ravel())
        directions.append(-single.ravel())
    return directions


def perturbation_certify(alloc: Allocation, tds: Sequence[TerminalDevice],
                         cfg: SystemConfig, n_probes: int, step: float,
                         seed: int = 0) -> bool:
    """First-order optimality check by random feasible perturbations.

    Moves the allocation by ``step`` along unit directions over the
    log-domain decision coordinates (a structured family first, isotropic
    draws after), discards infeasible probes, and reports False as soon as
    one feasible probe improves the objective by more than the second-order
    allowance step^2 * objective. For a convex problem this certifies
    (approximate) optimality.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = len(tds)
    base_vectors = (alloc.beta.copy(), alloc.f_local.copy(), alloc.f_remote.copy(),
                    alloc.t_transmit.copy(), alloc.e_transmit.copy())
    if not _feasible(base_vectors, tds, cfg, tol=1e-9):
        raise ValueError("allocation must be feasible before certification")
    base = _max_delay(base_vectors, tds, cfg)
    allowance = step * step * max(base, 1e-300)

    rng = np.random.default_rng(seed)
    structured = _structured_directions(n)
    for probe_index in range(n_probes):
        if probe_index < len(structured):
            z = structured[probe_index]
        else:
            z = rng.standard_normal(5 * n)
        z = z / (np.linalg.norm(z) + 1e-300)
        shift = np.exp(step * z.reshape(5, n))
        probe = tuple(v * s for v, s in zip(base_vectors, shift))
        if not _feasible(probe, tds, cfg, tol=1e-12):
            continue
        if base - _max_delay(probe, tds, cfg) > allowance:
            return False
    return True
