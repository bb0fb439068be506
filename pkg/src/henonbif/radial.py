"""Radial profiles of the generalized Lane-Emden problem

    -(t^{M-1} v')' = t^{M-1} |v|^{p-1} v,   v'(0) = 0,  v(1) = 0,

with real fictitious dimension M = 2(N+alpha)/(2+alpha).

The initial-value problem v(0) = 1, v'(0) = 0 is integrated in the
logarithmic radius sigma = log r, where it reads

    v_ss + (M-2) v_s + e^{2s} |v|^{p-1} v = 0,

which is regular at the origin and keeps step counts small even when the
m-th zero sits at r ~ e^{20} (large p in the plane). The solution with m
nodal zones on the unit interval follows from the scaling invariance
v_p(t) = tau_m^{2/(p-1)} v(tau_m t).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import HorizonError, NumericalError, StiffnessError
from .params import ProblemParams

ORIGIN_RADIUS = 1e-6
RTOL = 1e-12
ATOL = 1e-14
LOG_HORIZON = 400.0
FIRST_STEP = 1e-2
RESIDUAL_TOL = 1e-7
DEFAULT_GRID = 2048


@dataclass(frozen=True)
class Shot:
    """Unscaled solution of the initial-value problem with v(0) = 1."""

    params: ProblemParams
    log_zeros: np.ndarray
    solution: object = field(repr=False)
    sigma0: float = math.log(ORIGIN_RADIUS)
    nfev: int = 0

    @property
    def log_tau(self):
        return float(self.log_zeros[-1])

    def state(self, sigma):
        """(v, dv/dsigma) at log-radius ``sigma``; the origin series is used left of sigma0."""
        sigma = np.asarray(sigma, dtype=float)
        M = self.params.M
        v = np.empty(sigma.shape)
        w = np.empty(sigma.shape)
        inner = sigma < self.sigma0
        r2 = np.exp(2 * sigma[inner])
        v[inner] = 1 - r2 / (2 * M)
        w[inner] = -r2 / M
        if np.any(~inner):
            y = self.solution(sigma[~inner])
            v[~inner], w[~inner] = y[0], y[1]
        return v, w

    def log_weighted_potential(self, sigma):
        """log of r^2 p |v(r)|^{p-1} at r = e^sigma (``-inf`` at zeros of v)."""
        p = self.params.p
        v, _ = self.state(sigma)
        with np.errstate(divide="ignore"):
            return 2 * np.asarray(sigma) + math.log(p) + (p - 1) * np.log(np.abs(v))


def _rhs(M, p):
    def f(s, y):
        v, w = y
        if v == 0.0:
            src = 0.0
        else:
            src = math.copysign(math.exp(min(2 * s + p * math.log(abs(v)), 700.0)), v)
        return [w, -(M - 2) * w - src]

    return f


def shoot(params: ProblemParams, first_step=FIRST_STEP, horizon=LOG_HORIZON, rtol=RTOL, atol=ATOL):
    """Integrate outward from the origin until the m-th zero is found."""
    if params.p is None:
        raise ValueError("shooting needs a power p")
    M, p, m = params.M, params.p, params.m
    s0 = math.log(ORIGIN_RADIUS)
    r2 = ORIGIN_RADIUS**2
    y0 = [1 - r2 / (2 * M), -r2 / M]

    def crossing(s, y):
        return y[0]

    crossing.terminal = m
    crossing.direction = 0
    # for large p a trial step can overflow the error estimate; that step is
    # rejected and retried smaller, so the overflow itself is harmless
    with np.errstate(over="ignore"):
        sol = solve_ivp(
            _rhs(M, p), (s0, s0 + horizon), y0, method="RK45", rtol=rtol, atol=atol,
            dense_output=True, events=crossing, first_step=first_step,
        )
    if sol.status == -1:
        raise StiffnessError(f"radial integration failed: {sol.message}")
    zeros = np.asarray(sol.t_events[0], dtype=float)
    if len(zeros) < m:
        raise HorizonError(
            f"only {len(zeros)} of {m} zeros found before r = exp({s0 + horizon:.1f})"
        )
    return Shot(params, zeros[:m], sol.sol, s0, sol.nfev)


def chebyshev_grid(K):
    """K+1 Chebyshev-Lobatto points on [0, 1], clustered at both ends."""
    k = np.arange(K + 1)
    t = 0.5 * (1 - np.cos(np.pi * k / K))
    t[0], t[-1] = 0.0, 1.0
    return t


@dataclass(frozen=True)
class RadialProfile:
    params: ProblemParams
    grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    zeros: np.ndarray
    potential: np.ndarray
    sup_norm: float
    shot: Shot = field(repr=False)

    @property
    def log_amplitude(self):
        """log v_p(0) = 2 log(tau_m)/(p-1)."""
        return 2 * self.shot.log_tau / (self.params.p - 1)

    def to_dict(self):
        return {
            "params": self.params.as_dict(),
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "derivatives": self.derivatives.tolist(),
            "zeros": self.zeros.tolist(),
            "sup_norm": self.sup_norm,
        }


def _potential_from_shot(shot, t):
    # a_p(t) = p tau^2 |v(tau t)|^{p-1}; written this way it never forms tau^{2/(p-1)}.
    p = shot.params.p
    log_tau = shot.log_tau
    out = np.empty(t.shape)
    pos = t > 0
    with np.errstate(divide="ignore"):
        sigma = log_tau + np.log(t[pos])
    v, _ = shot.state(sigma)
    with np.errstate(divide="ignore"):
        out[pos] = p * np.exp(2 * log_tau + (p - 1) * np.log(np.abs(v)))
    out[~pos] = p * math.exp(2 * log_tau)
    return out


def solve_radial(params: ProblemParams, grid_size=DEFAULT_GRID, first_step=FIRST_STEP, rtol=RTOL, atol=ATOL):
    """Radial profile with m nodal zones, positive at the origin, sampled on
    ``grid_size + 1`` Chebyshev points of [0, 1]."""
    if params.p is None:
        raise ValueError("solve_radial needs a power p")
    shot = shoot(params, first_step=first_step, rtol=rtol, atol=atol)
    p = params.p
    log_tau = shot.log_tau
    log_amp = 2 * log_tau / (p - 1)
    if log_amp > 700:
        raise NumericalError(f"amplitude exp({log_amp:.1f}) overflows; p is too close to 1")
    amp = math.exp(log_amp)

    t = chebyshev_grid(grid_size)
    values = np.empty_like(t)
    derivs = np.empty_like(t)
    values[0], derivs[0] = amp, 0.0
    with np.errstate(divide="ignore"):
        sigma = log_tau + np.log(t[1:])
    v, w = shot.state(sigma)
    values[1:] = amp * v
    # v_p'(t) = amp * tau * v'(tau t) and v'(r) = (dv/dsigma) / r
    derivs[1:] = amp * w / t[1:]
    values[-1] = 0.0
    zeros = np.exp(shot.log_zeros[:-1] - log_tau)
    potential = _potential_from_shot(shot, t)
    potential[-1] = 0.0
    return RadialProfile(params, t, values, derivs, zeros, potential, amp, shot)


def potential_on_grid(profile: RadialProfile, t=None):
    """a_p(t) = p |v_p(t)|^{p-1}, on the profile grid or at the given points."""
    if t is None:
        return profile.potential.copy()
    return _potential_from_shot(profile.shot, np.asarray(t, dtype=float))


def potential_via_w(profile: RadialProfile):
    """a_p computed from w_p = ((2+alpha)/2)^{2/(p-1)} v_p as p (2/(2+alpha))^2 |w_p|^{p-1}."""
    p, alpha = profile.params.p, profile.params.alpha
    w = ((2 + alpha) / 2) ** (2 / (p - 1)) * profile.values
    return p * (2 / (2 + alpha)) ** 2 * np.abs(w) ** (p - 1)


def _dense_derivative(solution, sigma):
    """d/dsigma of the RK dense-output polynomials (exact for the interpolant)."""
    idx = np.clip(np.searchsorted(solution.ts, sigma, side="right") - 1, 0, len(solution.interpolants) - 1)
    out = np.empty((2, len(sigma)))
    for k in np.unique(idx):
        sel = idx == k
        it = solution.interpolants[k]
        x = (sigma[sel] - it.t_old) / it.h
        powers = np.arange(1, it.order + 2)
        dp = powers[:, None] * x[None, :] ** (powers[:, None] - 1)
        out[:, sel] = it.Q @ dp
    return out


def ode_residual(profile: RadialProfile):
    """Pointwise residual |(t^{M-1} v')' + t^{M-1} |v|^{p-1} v| / max|v|^p on
    the grid interior, differentiating the integrator's dense-output
    polynomials (no finite differences, so the C^{p-1} kink at zeros of v is
    not amplified)."""
    shot = profile.shot
    M, p = profile.params.M, profile.params.p
    t = profile.grid[1:-1]
    sigma = shot.log_tau + np.log(t)
    # Unscaled variables: the normalized residual is invariant under v -> lambda v(tau t).
    inner = sigma < shot.sigma0
    sigma = sigma[~inner]
    v, w = shot.state(sigma)
    w_s = _dense_derivative(shot.solution, sigma)[1]
    lap = np.exp(-2 * sigma) * (w_s + (M - 2) * w)
    res = np.zeros(len(t))
    res[~inner] = np.abs(t[~inner] ** (M - 1) * (lap + np.abs(v) ** (p - 1) * v))
    return res


def sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
