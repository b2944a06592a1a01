"""Alternating solver for the min-max task-delay allocation problem.

The relaxed problem is convex once the extraction factor and the two compute
rates are substituted by their logarithms, so block-coordinate descent with
exact block solves converges monotonically. One outer iteration runs:

1. uplink block: per-device smallest transmit time and its energy, by
   bracketed bisection on the perspective rate constraint;
2. extraction block: the closed-form optimal factor on its feasible
   interval, then a per-device joint refinement of (factor, uplink time,
   uplink energy) that accounts for the induced change of the minimal
   transmit time (without it the factor cannot leave a tight rate
   constraint when the remote-intensity exponent is >= 1);
3. rate block: the energy-capped local rate in closed form, then one
   bisection on the delay cap that splits the server capacity so every
   active device finishes at the same time.

Bisections iterate past the configured accuracies down to relative machine
precision; the configured epsilons remain guaranteed upper bounds on the
returned bracket widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .model import Allocation, SystemConfig, TerminalDevice

__all__ = [
    "FeasibilityCause",
    "FeasibilityError",
    "SolverReport",
    "ConstraintResiduals",
    "optimal_local_rate",
    "transmit_bisection",
    "remote_rate_bisection",
    "optimal_beta",
    "solve",
    "log_domain_residuals",
]

_LN2 = math.log(2.0)
_MAX_DOUBLINGS = 60
_MAX_BISECT_ITERS = 240
_REL_FLOOR = 1e-15


class FeasibilityCause(Enum):
    EXTRACTION_ENERGY_EXCEEDS_BUDGET = "ExtractionEnergyExceedsBudget"
    RATE_CAP_TOO_LOW = "RateCapTooLow"
    INVALID_SCENARIO = "InvalidScenario"


class FeasibilityError(Exception):
    """Raised when a block subproblem has no feasible point."""

    def __init__(self, device_index: int, cause: FeasibilityCause, detail: str = ""):
        self.device_index = device_index
        self.cause = cause
        msg = f"device {device_index}: {cause.value}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one solve: allocation, objective trace, and exit data.

    ``tightness_residuals`` holds the per-device slack of the delay cap at
    exit; at an optimum the cap binds for every active device.
    """

    allocation: Allocation
    objective_trace: List[float]
    iterations: int
    converged: bool
    tightness_residuals: np.ndarray


@dataclass(frozen=True)
class ConstraintResiduals:
    """Signed slacks of every constraint family; nonnegative means satisfied.

    Scalar ``capacity`` aggregates the shared server budget; everything else
    is per device. ``beta_floor``/``beta_ceiling`` and ``f_local_cap`` are
    expressed in the log domain to match the convexified problem.
    """

    delay_cap: np.ndarray
    energy: np.ndarray
    rate: np.ndarray
    f_local_cap: np.ndarray
    capacity: float
    e_nonneg: np.ndarray
    e_power_cap: np.ndarray
    beta_floor: np.ndarray
    beta_ceiling: np.ndarray

    def worst(self) -> float:
        parts = [self.delay_cap, self.energy, self.rate, self.f_local_cap,
                 self.e_nonneg, self.e_power_cap, self.beta_floor, self.beta_ceiling]
        values = [float(np.min(p)) for p in parts if p.size] + [self.capacity]
        return min(values)


class _Scenario:
    """Array view of the device list, precomputed once per solve."""

    __slots__ = ("n", "A", "I", "kappa", "f_max", "p_max", "beta_min", "E", "h",
                 "a", "k", "p", "B", "sigma2", "F", "active", "r_full", "extraction")

    def __init__(self, tds: Sequence[TerminalDevice], cfg: SystemConfig, extraction: bool = True):
        self.n = len(tds)
        self.A = np.array([td.task_bits for td in tds], dtype=float)
        self.I = np.array([td.intensity for td in tds], dtype=float)
        self.kappa = np.array([td.energy_coeff for td in tds], dtype=float)
        self.f_max = np.array([td.f_local_max for td in tds], dtype=float)
        self.p_max = np.array([td.p_tx_max for td in tds], dtype=float)
        self.beta_min = np.array([td.beta_min for td in tds], dtype=float)
        self.E = np.array([td.energy_budget for td in tds], dtype=float)
        self.h = np.array([td.channel_gain for td in tds], dtype=float)
        self.a = np.array([cfg.sem_a if td.sem_a is None else td.sem_a for td in tds])
        self.k = np.array([cfg.sem_k if td.sem_k is None else td.sem_k for td in tds])
        self.p = np.array([cfg.sem_p if td.sem_p is None else td.sem_p for td in tds])
        self.B = cfg.bandwidth_hz
        self.sigma2 = cfg.noise_power_w
        self.F = cfg.f_mec_total
        self.active = self.A > 0
        self.r_full = self.B * np.log2(1.0 + self.h * self.p_max / self.sigma2)
        self.extraction = extraction


def _extraction_energy(sc: _Scenario, beta: np.ndarray, f_local: np.ndarray) -> np.ndarray:
    if not sc.extraction:
        return np.zeros(sc.n)
    return np.where(sc.active, sc.a * sc.A * sc.kappa * f_local**2 / beta**sc.k, 0.0)


def _t_local(sc: _Scenario, beta: np.ndarray, f_local: np.ndarray) -> np.ndarray:
    if not sc.extraction:
        return np.zeros(sc.n)
    return np.where(sc.active, sc.a * sc.A / (beta**sc.k * f_local), 0.0)


def _remote_cycles(sc: _Scenario, beta: np.ndarray) -> np.ndarray:
    if not sc.extraction:
        return np.where(sc.active, sc.A * sc.I, 0.0)
    return np.where(sc.active, sc.A * sc.I * beta ** (1.0 - sc.p), 0.0)


def _uplink_bits(sc: _Scenario, e: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros(sc.n)
    m = t > 0
    if np.any(m):
        out[m] = t[m] * sc.B * np.log2(1.0 + sc.h[m] * e[m] / (t[m] * sc.sigma2))
    return out


def _delays(sc: _Scenario, beta, f_local, t_transmit, f_remote) -> np.ndarray:
    w = _remote_cycles(sc, beta)
    t_remote = np.zeros(sc.n)
    m = sc.active
    t_remote[m] = w[m] / f_remote[m]
    return _t_local(sc, beta, f_local) + t_transmit + t_remote


def _objective(sc: _Scenario, beta, f_local, t_transmit, f_remote) -> float:
    if not np.any(sc.active):
        return 0.0
    return float(np.max(_delays(sc, beta, f_local, t_transmit, f_remote)[sc.active]))


# --- block solves -----------------------------------------------------------


def _local_rate_block(sc: _Scenario, beta: np.ndarray, e_transmit: np.ndarray) -> np.ndarray:
    remaining = sc.E - e_transmit
    bad = sc.active & (remaining <= 0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise FeasibilityError(idx, FeasibilityCause.EXTRACTION_ENERGY_EXCEEDS_BUDGET,
                               "no energy left for extraction")
    with np.errstate(divide="ignore", invalid="ignore"):
        unclamped = np.sqrt(beta**sc.k * np.maximum(remaining, 0.0) / (sc.a * sc.A * sc.kappa))
    return np.where(sc.active, np.minimum(sc.f_max, unclamped), sc.f_max)


def _rate_condition(sc: _Scenario, bits: np.ndarray, e_budget: np.ndarray,
                    t: np.ndarray) -> np.ndarray:
    nu = np.minimum(e_budget, sc.p_max * t)
    safe_t = np.maximum(t, 1e-300)
    lhs = t * sc.B * np.log2(1.0 + sc.h * nu / (safe_t * sc.sigma2))
    return np.where(t > 0, lhs, 0.0) >= bits


def _transmit_block(sc: _Scenario, beta: np.ndarray, f_local: np.ndarray,
                    cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    t_out = np.zeros(sc.n)
    e_out = np.zeros(sc.n)
    act = sc.active
    if not np.any(act):
        return t_out, e_out
    bits = np.where(act, beta * sc.A, 0.0)
    e_budget = sc.E - _extraction_energy(sc, beta, f_local)
    bad = act & (e_budget <= 0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise FeasibilityError(idx, FeasibilityCause.EXTRACTION_ENERGY_EXCEEDS_BUDGET,
                               "extraction energy exhausts the budget")

    t_power = np.where(act, bits / sc.r_full, 0.0)
    power_limited = act & (sc.p_max * t_power <= e_budget)
    t_out[power_limited] = t_power[power_limited]
    e_out[power_limited] = (sc.p_max * t_power)[power_limited]

    energy_limited = act & ~power_limited
    if np.any(energy_limited):
        saturation = sc.B * sc.h * e_budget / (sc.sigma2 * _LN2)
        hopeless = energy_limited & (bits >= saturation)
        if np.any(hopeless):
            idx = int(np.argmax(hopeless))
            raise FeasibilityError(idx, FeasibilityCause.RATE_CAP_TOO_LOW,
                                   "required bits exceed the energy-capped capacity")
        ub0 = bits / (sc.B * np.log2(1.0 + sc.h * np.minimum(sc.p_max, e_budget) / sc.sigma2))
        ub = np.where(energy_limited, np.maximum(ub0, t_power), 1.0)
        lb = np.where(energy_limited, t_power, 0.0)
        growing = energy_limited & ~_rate_condition(sc, bits, e_budget, ub)
        for _ in range(_MAX_DOUBLINGS + 1):
            if not np.any(growing):
                break
            ub = np.where(growing, 2.0 * ub, ub)
            growing = growing & ~_rate_condition(sc, bits, e_budget, ub)
        if np.any(growing):
            idx = int(np.argmax(growing))
            raise FeasibilityError(idx, FeasibilityCause.RATE_CAP_TOO_LOW,
                                   "no bracket satisfies the rate condition")
        for _ in range(_MAX_BISECT_ITERS):
            tol = np.minimum(cfg.eps_bisect_transmit, np.maximum(ub * _REL_FLOOR, 1e-300))
            open_lanes = energy_limited & (ub - lb > tol)
            if not np.any(open_lanes):
                break
            mid = 0.5 * (lb + ub)
            ok = _rate_condition(sc, bits, e_budget, mid)
            ub = np.where(open_lanes & ok, mid, ub)
            lb = np.where(open_lanes & ~ok, mid, lb)
        t_out[energy_limited] = ub[energy_limited]
        e_out[energy_limited] = np.minimum(e_budget, sc.p_max * ub)[energy_limited]
    return t_out, e_out


def _remote_block(sc: _Scenario, beta: np.ndarray, f_local: np.ndarray,
                  t_transmit: np.ndarray, cfg: SystemConfig) -> tuple[float, np.ndarray]:
    f_remote = np.zeros(sc.n)
    act = sc.active
    n_act = int(np.count_nonzero(act))
    if n_act == 0:
        return 0.0, f_remote
    w = _remote_cycles(sc, beta)
    base = _t_local(sc, beta, f_local) + t_transmit
    t_min = float(np.max(np.where(act, base + w / sc.F, -np.inf)))
    t_max = float(np.max(np.where(act, base + w * n_act / sc.F, -np.inf)))
    if not np.all(t_max - base[act] > 0):
        idx = int(np.argmax(act & (t_max - base <= 0)))
        raise FeasibilityError(idx, FeasibilityCause.INVALID_SCENARIO,
                               "empty delay budget at the capacity upper bound")

    w_act = w[act]
    base_act = base[act]
    for _ in range(_MAX_BISECT_ITERS):
        tol = min(cfg.eps_bisect_capacity, max(t_max * _REL_FLOOR, 1e-300))
        if t_max - t_min <= tol:
            break
        t_mid = 0.5 * (t_min + t_max)
        den = t_mid - base_act
        if np.any(den <= 1e-15 * t_mid):
            t_min = t_mid  # degenerate probe, not an infinite capacity demand
            continue
        if float(np.sum(w_act / den)) - sc.F < 0:
            t_max = t_mid
        else:
            t_min = t_mid

    f_remote[act] = w_act / (t_max - base_act)
    total = float(f_remote.sum())
    if total > sc.F:
        f_remote *= sc.F / total
    return t_max, f_remote


def _beta_closed_form(sc: _Scenario, f_local, f_remote, t_transmit, e_transmit,
                      fallback_beta: Optional[np.ndarray] = None) -> np.ndarray:
    act = sc.active
    remaining = sc.E - e_transmit
    with np.errstate(divide="ignore", invalid="ignore"):
        eta1 = np.maximum(
            sc.beta_min,
            (sc.a * sc.A * sc.kappa * f_local**2 / np.maximum(remaining, 1e-300))
            ** (1.0 / sc.k),
        )
        cap_bits = _uplink_bits(sc, e_transmit, t_transmit)
        eta2 = np.minimum(1.0, cap_bits / np.maximum(sc.A, 1e-300))
    # the interval can come out empty from float cancellation alone when the
    # uplink spends the whole leftover budget; fall back to the incumbent
    # factor in that case instead of failing
    degenerate = act & ((remaining <= 0) | (eta1 > eta2 * (1.0 + 1e-12) + 1e-300))
    if np.any(degenerate):
        if fallback_beta is None:
            idx = int(np.argmax(degenerate))
            raise FeasibilityError(idx, FeasibilityCause.INVALID_SCENARIO,
                                   "empty extraction-factor interval")
        eta1 = np.where(degenerate, fallback_beta, eta1)
        eta2 = np.where(degenerate, fallback_beta, eta2)
    eta1 = np.minimum(eta1, eta2)
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = 1.0 / (sc.k + 1.0 - sc.p)
        mu = (sc.a * sc.k * f_remote / (f_local * sc.I * (1.0 - sc.p))) ** exponent
    beta = np.where(sc.p >= 1.0, eta2, np.clip(mu, eta1, eta2))
    return np.where(act, beta, 1.0)


def _transmit_feasible(sc: _Scenario, beta: np.ndarray, ext_coeff: np.ndarray) -> np.ndarray:
    e_budget = sc.E - ext_coeff * beta**-sc.k
    t_power = beta * sc.A / sc.r_full
    power_ok = sc.p_max * t_power <= e_budget
    saturation_ok = (e_budget > 0) & (
        beta * sc.A < sc.B * sc.h * e_budget / (sc.sigma2 * _LN2) * (1.0 - 1e-12)
    )
    return np.where(sc.active, power_ok | saturation_ok, True)


def _t_energy_limited(sc: _Scenario, bits, e_budget, t_power, lanes) -> np.ndarray:
    # solves t*B*log2(1 + h*e_budget/(t*sigma^2)) = bits above the power-limited time
    lb = np.where(lanes, t_power, 0.0)
    ub = np.where(lanes, np.maximum(t_power, 1e-300), 1.0)

    def satisfied(t: np.ndarray) -> np.ndarray:
        safe_t = np.maximum(t, 1e-300)
        lhs = t * sc.B * np.log2(1.0 + sc.h * e_budget / (safe_t * sc.sigma2))
        return lhs >= bits

    growing = lanes & ~satisfied(ub)
    for _ in range(_MAX_DOUBLINGS + 1):
        if not np.any(growing):
            break
        ub = np.where(growing, 2.0 * ub, ub)
        growing = growing & ~satisfied(ub)
    for _ in range(_MAX_BISECT_ITERS):
        open_lanes = lanes & (ub - lb > np.maximum(ub * _REL_FLOOR, 1e-300))
        if not np.any(open_lanes):
            break
        mid = 0.5 * (lb + ub)
        ok = satisfied(mid)
        ub = np.where(open_lanes & ok, mid, ub)
        lb = np.where(open_lanes & ~ok, mid, lb)
    return ub


def _refine_block(sc: _Scenario, beta, f_local, f_remote,
                  cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-device exact minimization over the extraction factor.

    Minimizes extraction delay + minimal uplink time + remote delay, which
    is convex in the log of the factor (partial minimization of the jointly
    convex subproblem), by bisecting the sign of its derivative. The uplink
    pair is refreshed at the chosen factor.
    """
    act = sc.active
    ext_coeff = np.where(act, sc.a * sc.A * sc.kappa * f_local**2, 0.0)
    b_cur = np.where(act, beta, 1.0)

    def locate_boundary(outer: np.ndarray, need: np.ndarray) -> np.ndarray:
        # bisects between an infeasible outer point and the feasible current one
        xa = np.log(outer)
        xb = np.log(b_cur)
        for _ in range(64):
            xm = 0.5 * (xa + xb)
            ok = _transmit_feasible(sc, np.exp(xm), ext_coeff)
            xb = np.where(need & ok, xm, xb)
            xa = np.where(need & ~ok, xm, xa)
        return np.exp(xb)

    lo = sc.beta_min.copy()
    need_lo = act & ~_transmit_feasible(sc, lo, ext_coeff)
    if np.any(need_lo):
        lo = np.where(need_lo, locate_boundary(sc.beta_min, need_lo), lo)
    hi = np.ones(sc.n)
    need_hi = act & ~_transmit_feasible(sc, hi, ext_coeff)
    if np.any(need_hi):
        hi = np.where(need_hi, locate_boundary(np.ones(sc.n), need_hi), hi)
    lo = np.minimum(lo, b_cur)
    hi = np.maximum(hi, b_cur)

    def slope(b: np.ndarray) -> np.ndarray:
        t_local = sc.a * sc.A / (np.maximum(f_local, 1e-300) * b**sc.k)
        t_remote = sc.A * sc.I * b ** (1.0 - sc.p) / np.maximum(f_remote, 1e-300)
        e_budget = sc.E - ext_coeff * b**-sc.k
        bits = b * sc.A
        t_power = bits / sc.r_full
        power_limited = sc.p_max * t_power <= e_budget
        d_uplink = np.where(power_limited, t_power, 0.0)
        lanes = act & ~power_limited
        if np.any(lanes):
            t_el = _t_energy_limited(sc, bits, e_budget, t_power, lanes)
            q = sc.h * e_budget / (np.maximum(t_el, 1e-300) * sc.sigma2)
            dF_dt = (sc.B / _LN2) * (np.log1p(q) - q / (1.0 + q))
            de_db = sc.k * ext_coeff * b ** (-sc.k - 1.0)
            dF_db = (sc.B / _LN2) * sc.h * de_db / (sc.sigma2 * (1.0 + q)) - sc.A
            dt_db = -dF_db / np.maximum(dF_dt, 1e-300)
            d_uplink = np.where(lanes, b * dt_db, d_uplink)
        return np.where(act, -sc.k * t_local + (1.0 - sc.p) * t_remote + d_uplink, 0.0)

    slope_lo = slope(lo)
    slope_hi = slope(hi)
    at_lo = act & (slope_lo >= 0)
    at_hi = act & ~at_lo & (slope_hi <= 0)
    interior = act & ~at_lo & ~at_hi
    x_star = np.log(np.where(interior, b_cur, 1.0))
    if np.any(interior):
        xa = np.log(lo)
        xb = np.log(hi)
        for _ in range(70):
            xm = 0.5 * (xa + xb)
            positive = slope(np.exp(xm)) > 0
            xb = np.where(interior & positive, xm, xb)
            xa = np.where(interior & ~positive, xm, xa)
        x_star = 0.5 * (xa + xb)
    candidate = np.where(at_lo, lo, np.where(at_hi, hi, np.exp(x_star)))
    candidate = np.clip(candidate, lo, hi)

    # pick the best of {lower end, candidate, upper end} with a fresh uplink
    # solve each, so boundary optima are hit exactly
    best_beta = np.where(act, hi, 1.0)
    best_t, best_e = _transmit_block(sc, best_beta, f_local, cfg)
    t_loc = _t_local(sc, best_beta, f_local)
    best_val = t_loc + best_t + np.where(act, _remote_cycles(sc, best_beta) / np.maximum(f_remote, 1e-300), 0.0)
    for trial in (candidate, lo):
        trial_beta = np.where(act, trial, 1.0)
        t_t, e_t = _transmit_block(sc, trial_beta, f_local, cfg)
        val = (_t_local(sc, trial_beta, f_local) + t_t
               + np.where(act, _remote_cycles(sc, trial_beta) / np.maximum(f_remote, 1e-300), 0.0))
        better = act & (val < best_val)
        best_beta = np.where(better, trial_beta, best_beta)
        best_t = np.where(better, t_t, best_t)
        best_e = np.where(better, e_t, best_e)
        best_val = np.where(better, val, best_val)
    return best_beta, best_t, best_e


# --- public operations ------------------------------------------------------


def optimal_local_rate(td: TerminalDevice, beta: float, e_transmit: float,
                       cfg: SystemConfig) -> float:
    """Largest admissible local CPU rate given the leftover energy budget.

    Either the hardware cap or the energy budget binds; the energy-bound
    branch is the rate that spends exactly the remaining budget on
    extraction.
    """
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if e_transmit < 0:
        raise ValueError("e_transmit must be nonnegative")
    if td.task_bits == 0:
        return td.f_local_max
    sc = _Scenario([td], _single_cfg(cfg))
    return float(_local_rate_block(sc, np.array([beta]), np.array([e_transmit]))[0])


def transmit_bisection(td: TerminalDevice, beta: float, f_local: float,
                       cfg: SystemConfig) -> tuple[float, float]:
    """Smallest transmit time able to carry beta*A bits, and its energy.

    The energy spent is the largest permissible at that time (the cap from
    the leftover budget or from peak power), since the minimal time meets
    the rate requirement only at maximal energy.
    """
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if f_local <= 0:
        raise ValueError("f_local must be positive")
    sc = _Scenario([td], _single_cfg(cfg))
    t, e = _transmit_block(sc, np.array([beta]), np.array([f_local]), cfg)
    return float(t[0]), float(e[0])


def remote_rate_bisection(tds: Sequence[TerminalDevice], beta: Sequence[float],
                          f_local: Sequence[float], t_transmit: Sequence[float],
                          cfg: SystemConfig) -> tuple[float, np.ndarray]:
    """Delay cap and server split that finish every active device together.

    Bisects the common completion time between the single-device and the
    evenly-split bounds; at the returned cap the per-device rates sum to the
    server capacity (within the bisection tolerance) and each active device
    meets the cap with equality.
    """
    sc = _Scenario(tds, cfg)
    return _remote_block(sc, np.asarray(beta, dtype=float), np.asarray(f_local, dtype=float),
                         np.asarray(t_transmit, dtype=float), cfg)


def optimal_beta(td: TerminalDevice, f_local: float, f_remote: float, t_transmit: float,
                 e_transmit: float, cfg: SystemConfig) -> float:
    """Closed-form optimal extraction factor with the uplink pair held fixed.

    The feasible interval comes from the energy budget (below) and the
    deliverable-bits cap (above). For remote-intensity exponents >= 1 the
    delay decreases in the factor, so the upper end is optimal; otherwise
    the interior stationary point is clamped into the interval.
    """
    for name, value in (("f_local", f_local), ("f_remote", f_remote)):
        if value <= 0:
            raise ValueError(f"{name} must be positive")
    if t_transmit < 0 or e_transmit < 0:
        raise ValueError("uplink time and energy must be nonnegative")
    if td.task_bits == 0:
        return 1.0
    sc = _Scenario([td], _single_cfg(cfg))
    beta = _beta_closed_form(sc, np.array([f_local]), np.array([f_remote]),
                             np.array([t_transmit]), np.array([e_transmit]))
    return float(beta[0])


def _single_cfg(cfg: SystemConfig) -> SystemConfig:
    return cfg if cfg.n_devices == 1 else replace(cfg, n_devices=1)


def _validate(tds: Sequence[TerminalDevice], cfg: SystemConfig) -> None:
    if len(tds) != cfg.n_devices:
        raise ValueError(f"scenario lists {len(tds)} devices but n_devices={cfg.n_devices}")


def _initial_local_rate(sc: _Scenario) -> np.ndarray:
    # full budget first; fall back to half so the uplink keeps strictly
    # positive energy headroom when extraction at the cap would exhaust it
    f0 = _local_rate_block(sc, np.ones(sc.n), np.zeros(sc.n))
    exhausted = sc.active & (_extraction_energy(sc, np.ones(sc.n), f0) >= sc.E)
    if np.any(exhausted):
        with np.errstate(divide="ignore", invalid="ignore"):
            half = np.sqrt(0.5 * sc.E / (sc.a * sc.A * sc.kappa))
        f0 = np.where(exhausted, np.minimum(sc.f_max, half), f0)
    return f0


def _solve_core(tds: Sequence[TerminalDevice], cfg: SystemConfig, *,
                extraction: bool = True, freeze_beta: bool = False,
                initial: Optional[Allocation] = None) -> SolverReport:
    _validate(tds, cfg)
    sc = _Scenario(tds, cfg, extraction)

    if not np.any(sc.active):
        alloc = Allocation(sc.f_max.copy(), np.zeros(sc.n), np.zeros(sc.n),
                           np.zeros(sc.n), np.ones(sc.n), 0.0)
        return SolverReport(alloc, [0.0], 0, True, np.zeros(sc.n))

    if initial is not None:
        if initial.n_devices != sc.n:
            raise ValueError("initial allocation has the wrong number of devices")
        residuals = log_domain_residuals(initial, tds, cfg)
        if residuals.worst() < -1e-9:
            raise FeasibilityError(-1, FeasibilityCause.INVALID_SCENARIO,
                                   "initial allocation is infeasible")
        beta = initial.beta.copy()
        f_local = initial.f_local.copy()
        t_transmit = initial.t_transmit.copy()
        e_transmit = initial.e_transmit.copy()
    else:
        beta = np.ones(sc.n)
        f_local = _initial_local_rate(sc) if extraction else sc.f_max.copy()
        t_transmit, e_transmit = _transmit_block(sc, beta, f_local, cfg)

    _, f_remote = _remote_block(sc, beta, f_local, t_transmit, cfg)
    trace = [_objective(sc, beta, f_local, t_transmit, f_remote)]

    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_outer_iters + 1):
        t_transmit, e_transmit = _transmit_block(sc, beta, f_local, cfg)
        if not freeze_beta:
            beta = _beta_closed_form(sc, f_local, f_remote, t_transmit, e_transmit,
                                     fallback_beta=beta)
            beta, t_transmit, e_transmit = _refine_block(sc, beta, f_local, f_remote, cfg)
        if extraction:
            f_local = _local_rate_block(sc, beta, e_transmit)
        _, f_remote = _remote_block(sc, beta, f_local, t_transmit, cfg)
        trace.append(_objective(sc, beta, f_local, t_transmit, f_remote))
        if abs(trace[-1] - trace[-2]) <= cfg.eps_outer * max(abs(trace[-1]), 1e-300):
            converged = True
            break

    allocation = Allocation(f_local, f_remote, t_transmit, e_transmit, beta, trace[-1])
    tightness = trace[-1] - _delays(sc, beta, f_local, t_transmit, f_remote)
    return SolverReport(allocation, trace, iterations, converged, tightness)


def solve(tds: Sequence[TerminalDevice], cfg: SystemConfig,
          initial: Optional[Allocation] = None) -> SolverReport:
    """Run the full alternating optimization on a scenario.

    Returns a monotonically non-increasing objective trace; convergence is
    declared when the relative objective change drops below ``eps_outer``.
    Infeasible scenarios raise :class:`FeasibilityError`; hitting the outer
    iteration cap reports ``converged=False`` instead of raising.
    """
    return _solve_core(tds, cfg, extraction=True, freeze_beta=False, initial=initial)


def log_domain_residuals(alloc: Allocation, tds: Sequence[TerminalDevice],
                         cfg: SystemConfig) -> ConstraintResiduals:
    """Signed slack of every constraint of the convexified problem.

    Positive values mean satisfied. Raises on nonpositive entries where the
    log substitution is taken.
    """
    _validate(tds, cfg)
    if alloc.n_devices != len(tds):
        raise ValueError("allocation does not match the device list")
    sc = _Scenario(tds, cfg)
    beta = alloc.beta
    f_local = alloc.f_local
    if np.any(beta <= 0) or np.any(f_local <= 0):
        raise ValueError("beta and f_local must be strictly positive")
    if np.any(alloc.t_transmit < 0) or np.any(alloc.e_transmit < 0):
        raise ValueError("uplink time and energy must be nonnegative")
    if np.any(sc.active & (alloc.f_remote <= 0)):
        raise ValueError("f_remote must be positive for devices with work")

    delays = _delays(sc, beta, f_local, alloc.t_transmit, alloc.f_remote)
    delay_cap = alloc.t_epigraph - delays
    energy = sc.E - _extraction_energy(sc, beta, f_local) - alloc.e_transmit
    rate = _uplink_bits(sc, alloc.e_transmit, alloc.t_transmit) - beta * sc.A
    rate = np.where(sc.active, rate, 0.0)
    f_local_cap = np.log(sc.f_max) - np.log(f_local)
    capacity = float(sc.F - alloc.f_remote.sum())
    e_nonneg = alloc.e_transmit.copy()
    e_power_cap = sc.p_max * alloc.t_transmit - alloc.e_transmit
    beta_floor = np.log(beta) - np.log(sc.beta_min)
    beta_ceiling = -np.log(beta)
    return ConstraintResiduals(delay_cap, energy, rate, f_local_cap, capacity,
                               e_nonneg, e_power_cap, beta_floor, beta_ceiling)
