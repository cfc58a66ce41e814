"""UAV attitude response to turbulent wind and the induced pointing loss.

Wind gusts are synthesized with the Dryden turbulence model: per-axis linear
filters driven by white Gaussian noise, with MIL-F-8785C low-altitude length
scales and intensities (formulas evaluated in feet, results in SI).  The hover
deflection angle follows the drag-balance relation tan(alpha) = K * V^2, and
its stationary distribution is approximated in closed form by moment-matching
V^2 with a Gamma law.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal
from scipy.special import gammaln
from scipy.stats import gamma as gamma_dist

RHO_AIR = 1.293      # kg/m^3
GRAVITY = 9.81       # m/s^2
FOOT = 0.3048        # m
KNOT = 0.514444      # m/s


@dataclass(frozen=True)
class UavBody:
    """Quadcopter drag-balance parameters."""

    mass: float = 8.37    # kg
    c_d: float = 0.8      # drag coefficient
    area: float = 0.250   # m^2, equivalent flat-plate area

    def __post_init__(self):
        if min(self.mass, self.c_d, self.area) <= 0.0:
            raise ValueError("UAV body parameters must be positive")

    @property
    def k(self) -> float:
        """Deflection constant K = C_D rho_air A / (2 m g), s^2/m^2."""
        return self.c_d * RHO_AIR * self.area / (2.0 * self.mass * GRAVITY)


def w20_for_wind(u10: float) -> float:
    """Reference 20-ft wind speed (m/s) used for the turbulence intensities.

    The turbulence level is tied directly to the surface wind: W20 = U10.
    This mapping reproduces the tilt-angle statistics of the two reference
    sea states; the standard light/moderate class values (15/30 knots) can
    be supplied explicitly instead.
    """
    return u10


@dataclass(frozen=True)
class DrydenParams:
    """Mean wind, altitude, and turbulence intensity for the Dryden filters."""

    u: tuple[float, float, float]  # mean wind per axis, m/s
    d_air: float = 5.0             # m, altitude above the surface
    w20: float | None = None       # m/s, 20-ft reference wind speed
    dt: float = 0.01               # s, simulation sample interval

    def __post_init__(self):
        if self.speed <= 0.0:
            raise ValueError("mean wind speed must be positive")
        if self.d_air <= 0.0 or self.dt <= 0.0:
            raise ValueError("altitude and sample interval must be positive")
        if self.w20 is None:
            object.__setattr__(self, "w20", w20_for_wind(self.speed))

    @classmethod
    def for_wind(cls, u10: float, d_air: float = 5.0, dt: float = 0.01) -> "DrydenParams":
        """Mean wind of magnitude U10 along +x at the given altitude."""
        return cls(u=(u10, 0.0, 0.0), d_air=d_air, dt=dt)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.u))

    @property
    def d_air_ft(self) -> float:
        return self.d_air / FOOT

    @property
    def length_scales(self) -> tuple[float, float, float]:
        """(L_x, L_y, L_z) in meters; L_z equals the altitude."""
        h = self.d_air_ft
        l_xy = h / (0.177 + 0.000823 * h) ** 1.2 * FOOT
        return l_xy, l_xy, self.d_air

    @property
    def sigmas(self) -> tuple[float, float, float]:
        """(sigma_x, sigma_y, sigma_z) turbulence intensities in m/s."""
        s_z = 0.1 * self.w20
        ratio = 1.0 / (0.177 + 0.000823 * self.d_air_ft) ** 0.4
        return s_z * ratio, s_z * ratio, s_z


@dataclass(frozen=True)
class DrydenFilters:
    """Discrete per-axis turbulence shaping filters (bilinear transform)."""

    b: tuple[np.ndarray, np.ndarray, np.ndarray]
    a: tuple[np.ndarray, np.ndarray, np.ndarray]
    dt: float
    sigmas: tuple[float, float, float]


def dryden_design(p: DrydenParams) -> DrydenFilters:
    """Discretize the three Dryden transfer functions at rate 1/dt.

    The longitudinal filter is first order, the lateral and vertical filters
    second order with a zero.  Driving each filter with white Gaussian noise
    of variance 1/dt yields a stationary output variance of sigma_j^2/pi.
    """
    speed = p.speed
    l_x, l_y, l_z = p.length_scales
    s_x, s_y, s_z = p.sigmas
    tau = min(l_x, l_y, l_z) / speed
    if p.dt > tau / 10.0:
        raise ValueError(
            f"sample interval {p.dt} too coarse for time constant {tau:.3g}; "
            "need dt <= tau/10"
        )

    def first_order(sig, length):
        t = length / speed
        gain = sig * np.sqrt(2.0 * length / (np.pi * speed))
        return signal.bilinear([gain], [t, 1.0], fs=1.0 / p.dt)

    def second_order(sig, length):
        t = length / speed
        gain = sig * np.sqrt(length / (np.pi * speed))
        num = [gain * np.sqrt(3.0) * t, gain]
        den = [t * t, 2.0 * t, 1.0]
        return signal.bilinear(num, den, fs=1.0 / p.dt)

    bx, ax = first_order(s_x, l_x)
    by, ay = second_order(s_y, l_y)
    bz, az = second_order(s_z, l_z)
    return DrydenFilters(b=(bx, by, bz), a=(ax, ay, az), dt=p.dt,
                         sigmas=(s_x, s_y, s_z))


def simulate_wind(filters: DrydenFilters, u, duration: float, seed):
    """Wind time series V(t) = U + turbulence, shape (n, 3), plus times.

    Each axis filters an independent white-noise sequence; the realization is
    reproducible for a given seed.
    """
    n = int(round(duration / filters.dt))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3, n)) / np.sqrt(filters.dt)
    v = np.empty((n, 3))
    for j in range(3):
        v[:, j] = u[j] + signal.lfilter(filters.b[j], filters.a[j], noise[j])
    t = np.arange(n) * filters.dt
    return t, v


def deflection_angle(v_squared, body: UavBody):
    """Hover deflection angle alpha = arctan(K * V^2) in radians."""
    v_squared = np.asarray(v_squared, dtype=float)
    if np.any(v_squared < 0.0):
        raise ValueError("squared wind speed must be non-negative")
    return np.arctan(body.k * v_squared)


@dataclass(frozen=True)
class GammaFit:
    """Moment-matched Gamma approximation of the squared wind speed V^2."""

    alpha_g: float   # shape
    beta_g: float    # scale, m^2/s^2
    mean_v2: float
    var_v2: float


def fit_gamma(u, sigma) -> GammaFit:
    """Match Gamma shape/scale to the first two moments of V^2.

    V_j ~ N(u_j, sigma_j^2/pi) per axis.  Axes with sigma_j = 0 carry no
    randomness and contribute u_j^2 to the mean deterministically.
    """
    u = np.asarray(u, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0.0):
        raise ValueError("turbulence intensities must be non-negative")
    live = sigma > 0.0
    if not np.any(live):
        raise ValueError("at least one axis must have nonzero turbulence")
    lam = u[live] * np.sqrt(np.pi) / sigma[live]
    var_ax = sigma[live] ** 2 / np.pi
    mean_v2 = float(np.sum(var_ax * (1.0 + lam**2)) + np.sum(u[~live] ** 2))
    var_v2 = float(np.sum(var_ax**2 * (2.0 + 4.0 * lam**2)))
    return GammaFit(
        alpha_g=mean_v2**2 / var_v2,
        beta_g=var_v2 / mean_v2,
        mean_v2=mean_v2,
        var_v2=var_v2,
    )


def alpha_pdf(alpha, fit: GammaFit, k: float):
    """Closed-form density of the deflection angle (1/rad) on (0, pi/2)."""
    alpha = np.asarray(alpha, dtype=float)
    v2 = np.tan(alpha) / k
    jac = 1.0 / (np.cos(alpha) ** 2 * k)
    return gamma_dist.pdf(v2, a=fit.alpha_g, scale=fit.beta_g) * jac


def orientation_loss(alpha, fov: float):
    """Pointing loss h_alpha = cos(alpha) inside the field of view, else 0."""
    alpha = np.asarray(alpha, dtype=float)
    return np.where(alpha <= fov, np.cos(alpha), 0.0)


def h_alpha_pdf(h, fit: GammaFit, k: float):
    """Closed-form density of h_alpha = cos(alpha) on (0, 1]."""
    h = np.asarray(h, dtype=float)
    if np.any((h <= 0.0) | (h > 1.0)):
        raise ValueError("h_alpha must lie in (0, 1]")
    a_g, b_g = fit.alpha_g, fit.beta_g
    root = np.sqrt(np.maximum(1.0 - h * h, 0.0))
    with np.errstate(divide="ignore"):
        log_pdf = (
            -a_g * np.log(k)
            - gammaln(a_g)
            - a_g * np.log(b_g)
            - (a_g + 1.0) * np.log(h)
            + 0.5 * (a_g - 2.0) * np.log(np.maximum(1.0 - h * h, 1e-300))
            - root / (h * k * b_g)
        )
    out = np.exp(log_pdf)
    return np.where(h == 1.0, np.where(a_g > 2.0, 0.0, out), out)


def sample_h_alpha(fit: GammaFit, k: float, xi, fov: float | None = None):
    """Pointing-loss draws by Gamma quantile mapping of V^2.

    With fov given, deflections outside the field of view yield h = 0.
    """
    xi = np.asarray(xi, dtype=float)
    if k == 0.0:
        return np.ones_like(xi)
    v2 = gamma_dist.ppf(xi, a=fit.alpha_g, scale=fit.beta_g)
    alpha = np.arctan(k * v2)
    if fov is None:
        return np.cos(alpha)
    return np.where(alpha <= fov, np.cos(alpha), 0.0)
