"""Single-scattering phase functions for seawater and their angle samplers.

Two families are provided: the Henyey-Greenstein (HG) function, which has a
closed-form inverse CDF, and the Fournier-Forand (FF) function, which is
inverted numerically from an approximate cumulative expression.  Both are
normalized so that 2*pi * integral(beta(theta) * sin(theta)) over [0, pi]
equals 1 (the FF normalization holds to the accuracy of its approximation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Polar-angle clamp for the FF family: the formula diverges at theta = 0.
# The clamp must sit low enough that the probability mass of the forward
# spike below it stays under the normalization tolerance (about 2e-4 here).
FF_THETA_MIN = 1e-7

# Below this |g| the HG inverse CDF switches to its exact isotropic limit.
HG_ISOTROPIC_EPS = 1e-6


@dataclass(frozen=True)
class HgParams:
    """Henyey-Greenstein asymmetry parameter (mean scattering cosine)."""

    g: float = 0.924

    def __post_init__(self):
        if not abs(self.g) < 1.0:
            raise ValueError(f"HG asymmetry parameter must satisfy |g| < 1, got {self.g}")


@dataclass(frozen=True)
class FfParams:
    """Fournier-Forand parameters: particle refractive index and Junge slope.

    Defaults correspond to a clear-ocean particle mix (back-scattering ratio
    of about 0.0183).
    """

    n_s: float = 1.1
    mu_ff: float = 3.5835

    def __post_init__(self):
        if not self.n_s > 1.0:
            raise ValueError(f"particle refractive index must exceed 1, got {self.n_s}")
        if not 3.0 < self.mu_ff < 5.0:
            raise ValueError(f"Junge slope must lie in (3, 5), got {self.mu_ff}")

    @property
    def v(self) -> float:
        return (3.0 - self.mu_ff) / 2.0

    def delta(self, theta):
        """Auxiliary delta(theta) of the FF formula."""
        return 4.0 / (3.0 * (self.n_s - 1.0) ** 2) * np.sin(np.asarray(theta) / 2.0) ** 2


@dataclass(frozen=True)
class ScatterAngles:
    """One scattering deflection: polar angle and uniform azimuth."""

    theta_s: float
    phi_s: float

    def __post_init__(self):
        if not 0.0 <= self.theta_s <= np.pi:
            raise ValueError(f"theta_s out of [0, pi]: {self.theta_s}")
        if not 0.0 <= self.phi_s < 2.0 * np.pi:
            raise ValueError(f"phi_s out of [0, 2*pi): {self.phi_s}")


def hg_phase(theta, p: HgParams):
    """HG phase function value (1/sr) at polar angle theta."""
    g = p.g
    c = np.cos(theta)
    return (1.0 - g * g) / (4.0 * np.pi * (1.0 + g * g - 2.0 * g * c) ** 1.5)


def sample_hg(p: HgParams, xi):
    """Draw the polar scattering angle from the HG law by inverse transform.

    For |g| below HG_ISOTROPIC_EPS the exact isotropic limit mu = 2*xi - 1
    is used to avoid the 1/(2g) singularity of the closed form.
    """
    xi = np.asarray(xi, dtype=float)
    g = p.g
    if abs(g) < HG_ISOTROPIC_EPS:
        mu = 2.0 * xi - 1.0
    else:
        frac = (1.0 - g * g) / (1.0 - g + 2.0 * g * xi)
        mu = (1.0 + g * g - frac * frac) / (2.0 * g)
    return np.arccos(np.clip(mu, -1.0, 1.0))


def ff_phase(theta, p: FfParams):
    """FF phase function value (1/sr) at polar angle theta.

    theta is clamped to [FF_THETA_MIN, pi] to avoid the forward singularity.
    """
    theta = np.clip(np.asarray(theta, dtype=float), FF_THETA_MIN, np.pi)
    v = p.v
    d = p.delta(theta)
    d_pi = float(p.delta(np.pi))
    sin_half_sq = np.sin(theta / 2.0) ** 2
    dv = d**v
    term1 = (
        v * (1.0 - d)
        - (1.0 - dv)
        + (d * (1.0 - dv) - v * (1.0 - d)) / sin_half_sq
    ) / (4.0 * np.pi * (1.0 - d) ** 2 * dv)
    term2 = (
        (1.0 - d_pi**v)
        / (16.0 * np.pi * (d_pi - 1.0) * d_pi**v)
        * (3.0 * np.cos(theta) ** 2 - 1.0)
    )
    return term1 + term2


def ff_cumulative(theta, p: FfParams):
    """Approximate cumulative distribution of the FF polar angle.

    This is the closed-form approximation of 2*pi*int(beta_FF*sin) used for
    sampling; it reaches exactly 1 at theta = pi.
    """
    theta = np.asarray(theta, dtype=float)
    v = p.v
    d = p.delta(theta)
    d_pi = float(p.delta(np.pi))
    dv = d**v
    main = ((1.0 - d ** (v + 1.0)) - (1.0 - dv) * np.sin(theta / 2.0) ** 2) / (
        (1.0 - d) * dv
    )
    # exact polar integral of the oscillatory phase term:
    # 2*pi * int C (3 cos^2 - 1) sin = 2*pi*C * cos(theta) * sin^2(theta)
    osc = (
        (1.0 - d_pi**v)
        / (8.0 * (d_pi - 1.0) * d_pi**v)
        * np.cos(theta)
        * np.sin(theta) ** 2
    )
    return main + osc


def sample_ff(p: FfParams, xi, tol: float = 1e-9, max_iter: int = 128):
    """Invert the approximate FF cumulative by bisection on [theta_min, pi].

    Vectorized over xi; monotone in xi.  Raises if the root is not bracketed,
    which indicates invalid parameters.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lo = np.full(xi.shape, FF_THETA_MIN)
    hi = np.full(xi.shape, np.pi)
    f_lo = ff_cumulative(lo, p) - xi
    f_hi = ff_cumulative(hi, p) - xi
    out = np.empty_like(xi)
    at_lo = xi <= ff_cumulative(np.array(FF_THETA_MIN), p)
    at_hi = xi >= 1.0
    if np.any(~at_lo & ~at_hi & ((f_lo > 0) | (f_hi < 0))):
        raise ArithmeticError(
            "FF cumulative does not bracket the requested quantile; "
            f"check parameters {p}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = ff_cumulative(mid, p) - xi
        go_hi = f_mid < 0.0
        lo = np.where(go_hi, mid, lo)
        hi = np.where(go_hi, hi, mid)
        if np.max(hi - lo) < tol:
            break
    out = 0.5 * (lo + hi)
    out[at_lo] = FF_THETA_MIN
    out[at_hi] = np.pi
    return out if out.ndim else float(out)


def ff_inverse_cdf_table(p: FfParams, n: int = 4096):
    """Dense inverse-CDF lookup (xi grid, theta values) for fast bulk sampling.

    The tracer uses this table with linear interpolation; the interpolation
    error is far below the sampler acceptance tolerance.
    """
    xi_grid = np.linspace(0.0, 1.0, n)
    theta_grid = sample_ff(p, xi_grid)
    return xi_grid, theta_grid
