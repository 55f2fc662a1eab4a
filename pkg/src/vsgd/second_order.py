"""Second-order VSGD: a third latent tracks curvature without a Hessian.

A hidden variable h (difference-quotient scale information extracted from
consecutive gradient estimates) gets its own precision with prior ratio k_h.
The local updates below use the previous rates b_h, b_g, b_ghat; btot is
their sum:

    sigma2_h = b_h*b_g   / (a*(b_h + b_g))
    sigma2_g = b_ghat*b_g/ (a*(b_ghat + b_g))
    mu_h' = ((g_hat - mu_g)/mu_g) * b_h/btot + mu_h * (b_g + b_ghat)/btot
    mu_g' = g_hat * (b_g + b_h)/btot + (mu_h + mu_g) * b_ghat/btot

The gradient-ratio term divides by the previous mean mu_g, which may be
zero; the denominator is guarded as sign(mu_g)*max(|mu_g|, mu_guard_eps)
(sign(0) taken as +1).  Rates interpolate with rho = 1 at t=1 and
rho = (t+1)**-kappa afterwards, and the parameter step scales by the
curvature magnitude sqrt(E[h^2]) = sqrt(mu_h'^2 + sigma2_h):

    theta <- theta - eta * mu_g' / sqrt(mu_h'^2 + sigma2_h)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import HyperParams
from .errors import ConfigError, NumericError
from .core import _checked_gradient

__all__ = [
    "SecondOrderState",
    "init_so_state",
    "so_rates",
    "so_local_update",
    "so_vsgd_step",
]


@dataclass(eq=False)
class SecondOrderState:
    t: int
    mu_g: np.ndarray
    mu_h: np.ndarray
    b_h: np.ndarray
    b_g: np.ndarray
    b_ghat: np.ndarray
    a: float

    @property
    def dim(self) -> int:
        return self.mu_g.shape[0]


def init_so_state(param_count: int, hp: HyperParams) -> SecondOrderState:
    """mu_g = mu_h = 0; b_h = k_h*gamma, b_g = gamma, b_ghat = k_g*gamma."""
    if param_count < 1:
        raise ConfigError(f"param_count must be >= 1, got {param_count}")
    return SecondOrderState(
        t=0,
        mu_g=np.zeros(param_count),
        mu_h=np.zeros(param_count),
        b_h=np.full(param_count, hp.k_h * hp.gamma),
        b_g=np.full(param_count, hp.gamma),
        b_ghat=np.full(param_count, hp.k_g * hp.gamma),
        a=hp.gamma,
    )


def so_rates(t: int, hp: HyperParams) -> tuple[float, float]:
    """rho = 1 at the first step, (t+1)**-kappa afterwards."""
    if t < 1:
        raise ValueError(f"rates are defined for t >= 1, got t={t}")
    if t == 1:
        return 1.0, 1.0
    return float(t + 1) ** -hp.kappa1, float(t + 1) ** -hp.kappa2


def guarded_denominator(mu_g: np.ndarray, eps: float) -> np.ndarray:
    """sign(mu_g)*max(|mu_g|, eps), with sign(0) taken as +1.

    eps = 0 with a zero entry raises instead of letting 0/0 produce NaN.
    """
    if eps == 0.0 and bool(np.any(mu_g == 0.0)):
        raise NumericError(
            "gradient-ratio denominator is zero (mu_g = 0 with mu_guard_eps = 0)"
        )
    sign = np.where(mu_g >= 0.0, 1.0, -1.0)
    return sign * np.maximum(np.abs(mu_g), eps)


def so_local_update(
    state: SecondOrderState, g_hat: np.ndarray, hp: HyperParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(mu_h', sigma2_h, mu_g', sigma2_g) from the previous state (pure)."""
    g_hat = _checked_gradient(g_hat, state.dim)
    a = state.a
    b_h, b_g, b_ghat = state.b_h, state.b_g, state.b_ghat
    btot = b_g + b_h + b_ghat
    sigma2_h = b_h * b_g / (a * (b_h + b_g))
    sigma2_g = b_ghat * b_g / (a * (b_ghat + b_g))
    ratio = (g_hat - state.mu_g) / guarded_denominator(state.mu_g, hp.mu_guard_eps)
    mu_h_new = ratio * (b_h / btot) + state.mu_h * ((b_g + b_ghat) / btot)
    mu_g_new = g_hat * ((b_g + b_h) / btot) + (state.mu_h + state.mu_g) * (
        b_ghat / btot
    )
    return mu_h_new, sigma2_h, mu_g_new, sigma2_g


def so_vsgd_step(
    state: SecondOrderState,
    theta: np.ndarray,
    g_hat: np.ndarray,
    hp: HyperParams,
) -> tuple[SecondOrderState, np.ndarray]:
    """One Second-order VSGD step; state and theta are updated in place."""
    g_hat = _checked_gradient(g_hat, state.dim)
    t = state.t + 1
    rho1, rho2 = so_rates(t, hp)
    mu_h_new, sigma2_h, mu_g_new, sigma2_g = so_local_update(state, g_hat, hp)
    mu_g_prev, mu_h_prev = state.mu_g, state.mu_h

    b_h_prime = hp.k_h * hp.gamma + 0.5 * (sigma2_h + (mu_h_new - mu_h_prev) ** 2)
    # as-written expansion; it mixes new and previous means and is not a
    # plain squared residual
    b_g_prime = hp.gamma + 0.5 * (
        sigma2_g
        + mu_g_new * mu_g_new
        - 2.0 * mu_g_new * (mu_g_prev + mu_h_prev)
        + mu_g_prev * mu_g_prev
        + 2.0 * mu_g_prev * mu_h_prev
        + sigma2_h
        + mu_h_new * mu_h_new
    )
    b_ghat_prime = hp.k_g * hp.gamma + 0.5 * (sigma2_g + (mu_g_new - g_hat) ** 2)

    state.b_h = (1.0 - rho1) * state.b_h + rho1 * b_h_prime
    state.b_g = (1.0 - rho1) * state.b_g + rho1 * b_g_prime
    state.b_ghat = (1.0 - rho2) * state.b_ghat + rho2 * b_ghat_prime
    state.mu_g = mu_g_new
    state.mu_h = mu_h_new
    state.a = hp.gamma + 0.5
    state.t = t
    theta -= hp.eta * mu_g_new / np.sqrt(mu_h_new * mu_h_new + sigma2_h)
    return state, theta
