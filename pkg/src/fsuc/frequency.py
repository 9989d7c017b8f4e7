"""Post-fault frequency security: analytic limits and a simulation oracle.

Sign convention: the frequency deviation after a generation loss is
negative (a drop); limits are compared on magnitudes.  All operations are
pure functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import FrequencyParams


class InfeasibleInertiaError(ValueError):
    """No finite PFR volume can secure the nadir at this inertia/EFR point."""


class NoNadirError(ValueError):
    """Total response never covers the loss; frequency does not stabilize."""


@dataclass(frozen=True)
class ServicePoint:
    """A candidate provision of inertia and response services."""

    inertia: float  # MW*s, post-fault system inertia
    efr: float      # MW, total fast response
    pfr: float      # MW, total primary response

    def __post_init__(self):
        if self.inertia < 0 or self.efr < 0 or self.pfr < 0:
            raise ValueError("service point components must be >= 0")


@dataclass(frozen=True)
class FrequencyTrajectory:
    times: np.ndarray       # s
    deviations: np.ndarray  # Hz, <= 0 while frequency is depressed
    nadir_dev: float        # Hz, magnitude of the largest drop
    nadir_time: float       # s
    initial_rocof: float    # Hz/s, magnitude at t = 0+
    qss_dev: float          # Hz, deviation at 60 s

    def to_csv(self) -> str:
        lines = ["t,delta_f"]
        lines += [f"{t:.6f},{d:.9f}" for t, d in zip(self.times, self.deviations)]
        return "\n".join(lines) + "\n"


def min_inertia_for_rocof(fp: FrequencyParams) -> float:
    """Smallest inertia keeping the initial RoCoF within its limit (MW*s)."""
    if not fp.rocof_max > 0:
        raise ValueError("rocof_max must be > 0")
    return fp.largest_loss * fp.f0 / (2.0 * fp.rocof_max)


def check_nadir(sp: ServicePoint, fp: FrequencyParams) -> float:
    """Nadir security margin; nonnegative means the drop stays within limits.

    margin = (H/f0 - EFR*T_EFR/(4*df_max)) * PFR
             - (P_L - EFR)^2 * T_PFR / (4*df_max)
    """
    lhs = (sp.inertia / fp.f0
           - sp.efr * fp.t_efr / (4.0 * fp.delta_f_max)) * sp.pfr
    rhs = (fp.largest_loss - sp.efr) ** 2 * fp.t_pfr / (4.0 * fp.delta_f_max)
    return lhs - rhs


def min_pfr_for_nadir(inertia: float, efr: float, fp: FrequencyParams) -> float:
    """Smallest PFR volume (MW) that makes the nadir margin nonnegative."""
    if efr >= fp.largest_loss:
        return 0.0
    factor = inertia / fp.f0 - efr * fp.t_efr / (4.0 * fp.delta_f_max)
    if factor <= 0:
        raise InfeasibleInertiaError(
            f"inertia {inertia:.1f} MW*s with {efr:.1f} MW EFR leaves no "
            "admissible nadir at any PFR volume")
    rhs = (fp.largest_loss - efr) ** 2 * fp.t_pfr / (4.0 * fp.delta_f_max)
    return rhs / factor


def check_qss(efr: float, pfr: float, p_l: float) -> bool:
    """Quasi-steady-state test: total response must cover the loss."""
    return efr + pfr >= p_l


def _stabilization_time(sp: ServicePoint, fp: FrequencyParams) -> float:
    """Instant at which ramping response first equals the lost power."""
    p_l = fp.largest_loss
    if p_l <= 0:
        return 0.0
    # Both services ramping: total(t) = (EFR/T_EFR + PFR/T_PFR) * t
    slope = sp.efr / fp.t_efr + sp.pfr / fp.t_pfr
    if slope > 0 and p_l / slope <= fp.t_efr:
        return p_l / slope
    # EFR saturated, PFR still ramping.
    if sp.pfr > 0:
        t = (p_l - sp.efr) * fp.t_pfr / sp.pfr
        if t <= fp.t_pfr:
            return max(t, fp.t_efr)
    raise NoNadirError("efr + pfr < largest loss: frequency never stabilizes")


def analytic_nadir(sp: ServicePoint, fp: FrequencyParams) -> float:
    """Magnitude of the frequency nadir (Hz) under the ramp response model."""
    p_l = fp.largest_loss
    if p_l <= 0:
        return 0.0
    if sp.inertia <= 0:
        raise ValueError("inertia must be > 0")
    t_star = _stabilization_time(sp, fp)  # raises NoNadirError if unstable
    if t_star <= fp.t_efr:
        # Both services ramping linearly up to t*: the deficit integral is a
        # triangle of base t* and height P_L.
        deficit = p_l * t_star / 2.0
    else:
        deficit = (sp.efr * fp.t_efr / 2.0
                   + (p_l - sp.efr) ** 2 * fp.t_pfr / (2.0 * sp.pfr))
    return fp.f0 / (2.0 * sp.inertia) * deficit


def _response_total(sp: ServicePoint, fp: FrequencyParams, t: np.ndarray) -> np.ndarray:
    efr = sp.efr * np.minimum(t / fp.t_efr, 1.0)
    pfr = sp.pfr * np.minimum(t / fp.t_pfr, 1.0)
    return efr + pfr


def simulate_post_fault(sp: ServicePoint, fp: FrequencyParams,
                        dt: float = 1e-3, t_end: float = 60.0) -> FrequencyTrajectory:
    """Numerically integrate the swing equation after a loss of P_L.

        2H/f0 * d(df)/dt = EFR(t) + PFR(t) - P_L,   df(0) = 0

    Fixed-step integration with the response breakpoints (T_EFR, T_PFR and
    the stabilization time) inserted as sample points; each step uses a
    Simpson update, exact for the piecewise-linear right-hand side.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if t_end < 60.0:
        raise ValueError("t_end must be >= 60 s")
    if not sp.inertia > 0:
        raise ValueError("inertia must be > 0")

    times = np.arange(0.0, t_end + dt / 2, dt)
    breaks = [fp.t_efr, fp.t_pfr]
    try:
        breaks.append(_stabilization_time(sp, fp))
    except NoNadirError:
        pass
    breaks = [b for b in breaks if 0.0 < b < t_end]
    times = np.unique(np.concatenate([times, np.asarray(breaks), [60.0]]))

    scale = fp.f0 / (2.0 * sp.inertia)
    g = scale * (_response_total(sp, fp, times) - fp.largest_loss)
    mid = 0.5 * (times[:-1] + times[1:])
    g_mid = scale * (_response_total(sp, fp, mid) - fp.largest_loss)
    h = np.diff(times)
    increments = h / 6.0 * (g[:-1] + 4.0 * g_mid + g[1:])
    dev = np.concatenate([[0.0], np.cumsum(increments)])

    i_nadir = int(np.argmin(dev))
    # The ramp model holds response at its full volume forever; once the
    # deviation recovers to zero the surplus is withdrawn in reality, so the
    # trajectory is clamped at recovery instead of overshooting upward.
    after = np.nonzero(dev[i_nadir:] >= 0.0)[0]
    if len(after) and dev[i_nadir] < 0.0:
        dev[i_nadir + after[0]:] = 0.0
    i_qss = int(np.searchsorted(times, 60.0))
    return FrequencyTrajectory(
        times=times, deviations=dev,
        nadir_dev=float(-dev[i_nadir]),
        nadir_time=float(times[i_nadir]),
        initial_rocof=fp.f0 * fp.largest_loss / (2.0 * sp.inertia),
        qss_dev=float(dev[min(i_qss, len(dev) - 1)]))
