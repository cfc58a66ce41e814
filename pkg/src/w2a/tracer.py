"""Monte Carlo photon transport for the direct water-to-air optical channel.

Photons are emitted from a submerged Lambertian LED, stepped through a
stratified water column (constant attenuation per layer, with the bubble
contribution concentrated near the surface), scattered by the Fournier-Forand
or bubble phase function, refracted through the rough sea surface with
Fresnel/Snell handling, and finally tested against the receiver aperture and
field of view in air.  The channel gain h_MC is the captured-weight fraction.

The hot loop is a compiled per-photon kernel; photons are processed in
fixed-size batches, each with its own counter-seeded RNG stream, and batch
results are reduced in index order, so estimates are bitwise-reproducible for
any worker count.
"""

from __future__ import annotations

import os
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bubbles import (
    BubblePhaseTable,
    HnParams,
    build_bubble_phase_table,
    bubble_scattering_coeff,
    e_folding_length,
)
from .scattering import FfParams, ff_inverse_cdf_table
from .seastate import SeaSurfaceRealization, _elevation_kernel, _gradient_kernel

# Termination controls
ROULETTE_THRESHOLD = 1e-4
ROULETTE_SURVIVAL = 0.1
MAX_INTERACTIONS = 10_000
DEAD_WEIGHT = 1e-12  # weights below this carry no information; stop tracking

# Stratification of the bubble layer
N_LAYERS = 100
LAYER_SPAN = 5.0  # m of depth split into uniform layers

# Photon outcome codes
ABSORBED = 0
REFLECTED = 1
ESCAPED = 2
TRANSMITTED = 3

FRESNEL_MODES = {"paper": 0, "kill-only": 1, "weight-only": 2}


@dataclass(frozen=True)
class WaterOptics:
    """Inherent optical properties of the water column."""

    a: float = 0.114    # 1/m absorption
    b: float = 0.037    # 1/m particle/molecule scattering
    n1: float = 1.33    # water refractive index
    n2: float = 1.0     # air refractive index
    ff: FfParams = field(default_factory=FfParams)

    def __post_init__(self):
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError("absorption and scattering coefficients must be >= 0")
        if not self.n1 > self.n2 >= 1.0:
            raise ValueError("refractive indices must satisfy n1 > n2 >= 1")


@dataclass(frozen=True)
class Geometry:
    """Transmitter, receiver, and beam geometry (world frame, z up, MSL at 0)."""

    tx: tuple[float, float, float] = (0.0, 0.0, -10.0)
    theta_half: float = np.deg2rad(10.0)   # LED semi-angle at half power
    rx: tuple[float, float, float] = (0.0, 0.0, 5.0)
    fov: float = np.deg2rad(60.0)          # full receiver field of view
    r_rx: float = 0.05                     # m aperture radius
    delta_m: float = 0.0                   # m horizontal Tx-Rx offset

    def __post_init__(self):
        if not 0.0 < self.theta_half < np.pi / 2:
            raise ValueError("LED semi-angle must lie in (0, pi/2)")
        if self.tx[2] >= 0.0 or self.rx[2] <= 0.0:
            raise ValueError("transmitter must be under water and receiver in air")
        if self.r_rx <= 0.0 or not 0.0 < self.fov <= np.pi:
            raise ValueError("invalid receiver aperture or field of view")

    @property
    def m_lambert(self) -> float:
        """Lambertian mode number m = -ln 2 / ln cos(theta_half)."""
        return -np.log(2.0) / np.log(np.cos(self.theta_half))

    @property
    def rx_center(self) -> np.ndarray:
        """Effective receiver center including the horizontal offset."""
        return np.array([self.rx[0] + self.delta_m, self.rx[1], self.rx[2]])


@dataclass
class Photon:
    """Single photon state (reference implementation; the kernel uses arrays)."""

    position: np.ndarray
    direction: np.ndarray
    weight: float = 1.0
    medium: str = "water"
    interactions: int = 0


@dataclass(frozen=True)
class ChannelEstimate:
    """Monte Carlo channel-gain estimate and bookkeeping."""

    h_mc: float
    std_error: float
    n_photons: int
    tallies: dict
    snell_residual_max: float
    offset_gains: dict | None = None   # delta_m -> (gain, std_error)
    histogram: np.ndarray | None = None
    histogram_extent: float = 50.0
    histogram_cell: float = 0.5


# ---------------------------------------------------------------------------
# Reference implementations of the elementary photon operations.  These are
# the testable building blocks; the batch kernel below repeats the same
# arithmetic in compiled form.
# ---------------------------------------------------------------------------

def emit_photon(g: Geometry, xi_theta: float, xi_phi: float) -> Photon:
    """Photon at the Tx position with a Lambertian-sampled direction, W = 1."""
    m = g.m_lambert
    theta = np.arccos((1.0 - xi_theta) ** (1.0 / (1.0 + m)))
    phi = 2.0 * np.pi * xi_phi
    direction = np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    return Photon(position=np.array(g.tx, dtype=float), direction=direction)


def sample_step(c_local: float, xi: float) -> float:
    """Exponential free path -log(xi)/c with mean 1/c."""
    if c_local <= 0.0:
        raise ValueError("attenuation coefficient must be positive")
    if xi <= 0.0 or xi > 1.0:
        raise ValueError("xi must lie in (0, 1]")
    return -np.log(xi) / c_local


def scatter_direction(direction, theta_s: float, phi_s: float) -> np.ndarray:
    """Deflect a unit vector by polar angle theta_s and azimuth phi_s.

    Uses the standard local-frame update; near-vertical directions take the
    degenerate-pole branch.
    """
    mx, my, mz = direction
    st, ct = np.sin(theta_s), np.cos(theta_s)
    sp, cp = np.sin(phi_s), np.cos(phi_s)
    sz = np.sqrt(max(1.0 - mz * mz, 0.0))
    if sz < 1e-6:
        out = np.array([st * cp, st * sp, np.sign(mz) * ct])
    else:
        out = np.array(
            [
                st * (mx * mz * cp - my * sp) / sz + mx * ct,
                st * (my * mz * cp + mx * sp) / sz + my * ct,
                -st * cp * sz + mz * ct,
            ]
        )
    return out / np.linalg.norm(out)


def interaction_event(
    weight: float,
    omega_al: float,
    bubble_fraction: float,
    xi1: float,
    xi2: float,
) -> tuple[str, float]:
    """Classify an interaction and apply the albedo weight update.

    Returns (event, new_weight) with event in {"scatter_by_water",
    "scatter_by_bubble", "absorb"}; the weight is multiplied by the
    single-scattering albedo in every case.
    """
    new_weight = weight * omega_al
    if xi1 <= omega_al:
        if bubble_fraction > 0.0 and xi2 <= bubble_fraction:
            return "scatter_by_bubble", new_weight
        return "scatter_by_water", new_weight
    return "absorb", new_weight


def fresnel_coefficients(theta_i: float, n1: float, n2: float):
    """(rho, T_f, theta_r) for an unpolarized ray hitting the interface.

    Valid below the critical angle; rho + T_f = 1.
    """
    sin_i = np.sin(theta_i)
    sin_r = n1 / n2 * sin_i
    if sin_r >= 1.0:
        raise ValueError("incidence beyond the critical angle")
    theta_r = np.arcsin(sin_r)
    if sin_i < 1e-9:
        rho = ((n1 - n2) / (n1 + n2)) ** 2
        t_f = 4.0 * n1 * n2 / (n1 + n2) ** 2
    else:
        s = (np.sin(theta_i - theta_r) / np.sin(theta_i + theta_r)) ** 2
        p = (np.tan(theta_i - theta_r) / np.tan(theta_i + theta_r)) ** 2
        rho = 0.5 * (s + p)
        t_s = np.sin(2.0 * theta_i) * np.sin(2.0 * theta_r) / np.sin(theta_i + theta_r) ** 2
        t_p = t_s / np.cos(theta_i - theta_r) ** 2
        t_f = 0.5 * (t_s + t_p)
    return rho, t_f, theta_r


def transmission_wind(u10: float) -> float:
    """Wind-roughness transmission factor T_u of the interface."""
    if u10 < 0.0:
        raise ValueError("wind speed must be non-negative")
    base = 1.2e-5 * u10**3.3
    if u10 <= 9.0:
        return 1.0 - base
    return 1.0 - base * (0.255 * u10 - 0.99)


def surface_crossing(
    direction,
    normal,
    optics: WaterOptics,
    u10: float,
    xi3: float,
    fresnel_mode: str = "paper",
):
    """Outcome of a photon reaching the interface: None if lost, else
    (new unit direction, weight multiplier).

    Photons beyond the critical angle are lost; below it a stochastic Fresnel
    reflection test and/or the deterministic T_f weight factor applies,
    depending on fresnel_mode, along with the wind roughness factor T_u.
    """
    direction = np.asarray(direction, dtype=float)
    normal = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(normal)
    if nn < 1e-12:
        raise ValueError("degenerate surface normal")
    normal = normal / nn
    cos_i = float(np.dot(direction, normal))
    if cos_i <= 0.0:
        return None
    theta_i = np.arccos(min(cos_i, 1.0))
    if np.sin(theta_i) >= optics.n2 / optics.n1:
        return None
    rho, t_f, theta_r = fresnel_coefficients(theta_i, optics.n1, optics.n2)
    mode = FRESNEL_MODES[fresnel_mode]
    factor = transmission_wind(u10)
    if mode in (0, 1) and xi3 < rho:
        return None
    if mode in (0, 2):
        factor *= t_f
    tangent = direction - normal * cos_i
    tn = np.linalg.norm(tangent)
    if tn < 1e-12:
        new_dir = normal.copy()
    else:
        new_dir = np.cos(theta_r) * normal + np.sin(theta_r) * tangent / tn
    return new_dir / np.linalg.norm(new_dir), factor


def receiver_capture(position, direction, g: Geometry) -> bool:
    """Both receiver conditions: FOV cone at the photon's height and the
    straight-line landing inside the aperture disk."""
    x_p, y_p, z_p = position
    mx, my, mz = direction
    if mz <= 0.0:
        return False
    x_r, y_r, z_r = g.rx_center
    cone = g.r_rx + (z_r - z_p) * np.tan(g.fov / 2.0)
    if (x_p - x_r) ** 2 + (y_p - y_r) ** 2 >= cone * cone:
        return False
    t = (z_r - z_p) / mz
    lx = x_p + mx * t - x_r
    ly = y_p + my * t - y_r
    return lx * lx + ly * ly < g.r_rx**2


# ---------------------------------------------------------------------------
# Compiled batch kernel
# ---------------------------------------------------------------------------

@njit(nogil=True, fastmath=False)
def _bilinear(grid, x0, y0, inv_dx, nx, ny, x, y):
    fx = (x - x0) * inv_dx
    fy = (y - y0) * inv_dx
    ix = int(fx)
    iy = int(fy)
    if ix < 0:
        ix = 0
    if ix > nx - 2:
        ix = nx - 2
    if iy < 0:
        iy = 0
    if iy > ny - 2:
        iy = ny - 2
    tx = fx - ix
    ty = fy - iy
    g00 = grid[iy, ix]
    g01 = grid[iy, ix + 1]
    g10 = grid[iy + 1, ix]
    g11 = grid[iy + 1, ix + 1]
    return (
        g00 * (1.0 - tx) * (1.0 - ty)
        + g01 * tx * (1.0 - ty)
        + g10 * (1.0 - tx) * ty
        + g11 * tx * ty
    )


@njit(nogil=True)
def _trace_batch(
    rng,
    pos,
    dirs,
    status,
    weight,
    sres,
    flat,
    gz,
    gzx,
    gzy,
    x0,
    y0,
    inv_dx,
    nx,
    ny,
    z_surf_min,
    ext_lim,
    c_layer,
    omega_layer,
    fbub_layer,
    layer_dz,
    c_deep,
    omega_deep,
    ff_xi,
    ff_theta,
    bub_cdf,
    bub_theta,
    has_bubbles,
    n1,
    n2,
    mode,
    t_u,
):
    n = pos.shape[0]
    n_layers = c_layer.shape[0]
    sin_crit = n2 / n1
    rho0 = ((n1 - n2) / (n1 + n2)) ** 2
    tf0 = 4.0 * n1 * n2 / (n1 + n2) ** 2

    for i in range(n):
        x = pos[i, 0]
        y = pos[i, 1]
        z = pos[i, 2]
        mx = dirs[i, 0]
        my = dirs[i, 1]
        mz = dirs[i, 2]
        w = 1.0
        n_int = 0
        res = 0.0
        out = ABSORBED
        guard = 0

        while True:
            guard += 1
            if guard > 1_000_000:
                out = ABSORBED
                break

            # local attenuation from the stratified column
            depth = -z
            if n_layers > 0 and depth < LAYER_SPAN:
                k = int(depth / layer_dz)
                if k < 0:
                    k = 0
                if k > n_layers - 1:
                    k = n_layers - 1
                c = c_layer[k]
                om = omega_layer[k]
                fb = fbub_layer[k]
                z_hi = -k * layer_dz
                z_lo = -(k + 1) * layer_dz
                top_layer = k == 0
            else:
                c = c_deep
                om = omega_deep
                fb = 0.0
                z_hi = -LAYER_SPAN if n_layers > 0 else 1e300
                z_lo = -1e300
                top_layer = n_layers == 0

            step = -np.log(1.0 - rng.random()) / c

            # truncate at layer boundaries (no interaction at a truncation)
            truncated = False
            if mz > 0.0 and not top_layer:
                dzb = z_hi - z
                if step * mz > dzb:
                    step = dzb / mz
                    truncated = True
            elif mz < 0.0 and z_lo > -1e299:
                dzb = z_lo - z
                if step * mz < dzb:
                    step = dzb / mz
                    truncated = True

            xe = x + step * mx
            ye = y + step * my
            ze = z + step * mz

            if abs(xe) > ext_lim or abs(ye) > ext_lim:
                out = ESCAPED
                break

            # surface test on the proposed segment
            if ze > z_surf_min:
                crossed = False
                tc = 0.0
                if flat:
                    if ze > 0.0:
                        crossed = True
                        tc = (0.0 - z) / (ze - z)
                else:
                    fe = ze - _bilinear(gz, x0, y0, inv_dx, nx, ny, xe, ye)
                    if fe > 0.0:
                        crossed = True
                        lo = 0.0
                        hi = 1.0
                        for _ in range(45):
                            mid = 0.5 * (lo + hi)
                            xm = x + mid * (xe - x)
                            ym = y + mid * (ye - y)
                            zm = z + mid * (ze - z)
                            if zm - _bilinear(gz, x0, y0, inv_dx, nx, ny, xm, ym) > 0.0:
                                hi = mid
                            else:
                                lo = mid
                        tc = 0.5 * (lo + hi)
                if crossed:
                    xc = x + tc * (xe - x)
                    yc = y + tc * (ye - y)
                    zc = z + tc * (ze - z)
                    if flat:
                        ncx = 0.0
                        ncy = 0.0
                        ncz = 1.0
                    else:
                        sx = _bilinear(gzx, x0, y0, inv_dx, nx, ny, xc, yc)
                        sy = _bilinear(gzy, x0, y0, inv_dx, nx, ny, xc, yc)
                        nn = np.sqrt(sx * sx + sy * sy + 1.0)
                        ncx = -sx / nn
                        ncy = -sy / nn
                        ncz = 1.0 / nn
                    cos_i = mx * ncx + my * ncy + mz * ncz
                    if cos_i <= 0.0:
                        out = REFLECTED
                        break
                    if cos_i > 1.0:
                        cos_i = 1.0
                    sin_i = np.sqrt(1.0 - cos_i * cos_i)
                    if sin_i >= sin_crit:
                        out = REFLECTED
                        break
                    sin_r = sin_i * n1 / n2
                    cos_r = np.sqrt(1.0 - sin_r * sin_r)
                    if sin_i < 1e-9:
                        rho = rho0
                        t_f = tf0
                    else:
                        theta_i = np.arcsin(sin_i)
                        theta_r = np.arcsin(sin_r)
                        ssum = np.sin(theta_i + theta_r)
                        sdif = np.sin(theta_i - theta_r)
                        cdif = np.cos(theta_i - theta_r)
                        csum = np.cos(theta_i + theta_r)
                        s_pol = (sdif / ssum) ** 2
                        p_pol = (sdif * csum / (ssum * cdif)) ** 2
                        rho = 0.5 * (s_pol + p_pol)
                        t_s = np.sin(2.0 * theta_i) * np.sin(2.0 * theta_r) / (ssum * ssum)
                        t_f = 0.5 * (t_s + t_s / (cdif * cdif))
                    if mode != 2 and rng.random() < rho:
                        out = REFLECTED
                        break
                    factor = t_u
                    if mode != 1:
                        factor *= t_f
                    w *= factor
                    # refraction about the local normal
                    tx_ = mx - ncx * cos_i
                    ty_ = my - ncy * cos_i
                    tz_ = mz - ncz * cos_i
                    tn = np.sqrt(tx_ * tx_ + ty_ * ty_ + tz_ * tz_)
                    if tn < 1e-12:
                        mx = ncx
                        my = ncy
                        mz = ncz
                    else:
                        mx = cos_r * ncx + sin_r * tx_ / tn
                        my = cos_r * ncy + sin_r * ty_ / tn
                        mz = cos_r * ncz + sin_r * tz_ / tn
                    norm = np.sqrt(mx * mx + my * my + mz * mz)
                    mx /= norm
                    my /= norm
                    mz /= norm
                    cos_out = mx * ncx + my * ncy + mz * ncz
                    sin_out = np.sqrt(max(1.0 - cos_out * cos_out, 0.0))
                    r = abs(n1 * sin_i - n2 * sin_out)
                    if r > res:
                        res = r
                    x = xc
                    y = yc
                    z = zc
                    out = TRANSMITTED
                    break

            x = xe
            y = ye
            z = ze

            if truncated:
                # nudge across the boundary so the next layer lookup advances
                if mz > 0.0:
                    z = z_hi + 1e-9
                else:
                    z = z_lo - 1e-9
                continue

            # interaction event: albedo weighting, then a possible deflection
            n_int += 1
            w *= om
            if rng.random() <= om:
                if fb > 0.0 and has_bubbles and rng.random() <= fb:
                    theta_s = np.interp(rng.random(), bub_cdf, bub_theta)
                else:
                    theta_s = np.interp(rng.random(), ff_xi, ff_theta)
                phi_s = 2.0 * np.pi * rng.random()
                st = np.sin(theta_s)
                ct = np.cos(theta_s)
                sp = np.sin(phi_s)
                cp = np.cos(phi_s)
                sz = np.sqrt(max(1.0 - mz * mz, 0.0))
                if sz < 1e-6:
                    mx = st * cp
                    my = st * sp
                    mz = ct if mz >= 0.0 else -ct
                else:
                    nmx = st * (mx * mz * cp - my * sp) / sz + mx * ct
                    nmy = st * (my * mz * cp + mx * sp) / sz + my * ct
                    nmz = -st * cp * sz + mz * ct
                    norm = np.sqrt(nmx * nmx + nmy * nmy + nmz * nmz)
                    mx = nmx / norm
                    my = nmy / norm
                    mz = nmz / norm

            if w < DEAD_WEIGHT:
                out = ABSORBED
                break
            if w < ROULETTE_THRESHOLD:
                if rng.random() < ROULETTE_SURVIVAL:
                    w /= ROULETTE_SURVIVAL
                else:
                    out = ABSORBED
                    break
            if n_int >= MAX_INTERACTIONS:
                out = ABSORBED
                break

        status[i] = out
        weight[i] = w
        sres[i] = res
        pos[i, 0] = x
        pos[i, 1] = y
        pos[i, 2] = z
        dirs[i, 0] = mx
        dirs[i, 1] = my
        dirs[i, 2] = mz


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def _surface_grid(surface: SeaSurfaceRealization, extent: float, step: float):
    """Sampled elevation and gradient grids for fast lookup in the kernel."""
    g = np.arange(-extent, extent + step / 2.0, step)
    xx, yy = np.meshgrid(g, g)
    xf = np.ascontiguousarray(xx.ravel())
    yf = np.ascontiguousarray(yy.ravel())
    ph0 = surface.phase_at_t
    z = _elevation_kernel(xf, yf, surface.amp, surface.kx, surface.ky, ph0)
    zx, zy = _gradient_kernel(xf, yf, surface.amp, surface.kx, surface.ky, ph0)
    shape = xx.shape
    return (
        z.reshape(shape),
        zx.reshape(shape),
        zy.reshape(shape),
        float(g[0]),
        float(np.min(z)) - 1e-6,
    )


def _capture_mask(pos, dirs, g: Geometry, delta_m: float):
    """Vectorized receiver test for transmitted photons at one Rx offset."""
    x_r = g.rx[0] + delta_m
    y_r = g.rx[1]
    z_r = g.rx[2]
    mz = dirs[:, 2]
    up = mz > 0.0
    cone = g.r_rx + (z_r - pos[:, 2]) * np.tan(g.fov / 2.0)
    in_cone = (pos[:, 0] - x_r) ** 2 + (pos[:, 1] - y_r) ** 2 < cone * cone
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(up, (z_r - pos[:, 2]) / mz, 0.0)
    lx = pos[:, 0] + dirs[:, 0] * t - x_r
    ly = pos[:, 1] + dirs[:, 1] * t - y_r
    in_disk = lx * lx + ly * ly < g.r_rx**2
    return up & in_cone & in_disk


def default_workers() -> int:
    env = os.environ.get("W2A_THREADS")
    if env:
        return max(1, int(env))
    return 1


@lru_cache(maxsize=8)
def _cached_bubble_table(u10: float, wavelength: float):
    """Memoized ensemble phase table; the Mie sweep is expensive and the
    table is read-only once built."""
    return build_bubble_phase_table(None, HnParams(u10=u10), wavelength=wavelength)


def run_channel(
    scenario,
    surface: SeaSurfaceRealization,
    n_photons: int | None = None,
    seed=None,
    workers: int | None = None,
    bubble_table: BubblePhaseTable | None = None,
    histogram: bool = False,
    extra_offsets=None,
    batch_size: int = 100_000,
    surface_extent: float = 100.0,
    surface_step: float = 0.25,
) -> ChannelEstimate:
    """Estimate the Monte Carlo channel gain h_MC for a link scenario.

    The scenario must expose: optics (WaterOptics), geometry (Geometry),
    u10 (m/s), wavelength (m), fresnel_mode, n_photons, seed.  extra_offsets
    is an optional iterable of horizontal Rx offsets evaluated from the same
    photon cloud.  Results are deterministic for a given seed and independent
    of the worker count.
    """
    optics: WaterOptics = scenario.optics
    geom: Geometry = scenario.geometry
    u10 = float(scenario.u10)
    mode = FRESNEL_MODES[scenario.fresnel_mode]
    n_photons = int(n_photons if n_photons is not None else scenario.n_photons)
    seed = seed if seed is not None else scenario.seed
    workers = workers if workers is not None else default_workers()

    # stratified attenuation column
    if u10 > 0.0:
        hn = HnParams(u10=u10)
        layer_dz = LAYER_SPAN / N_LAYERS
        depth_mid = (np.arange(N_LAYERS) + 0.5) * layer_dz
        b_bub = bubble_scattering_coeff(depth_mid, hn)
        if bubble_table is None:
            bubble_table = _cached_bubble_table(u10, float(scenario.wavelength))
        has_bubbles = True
    else:
        layer_dz = LAYER_SPAN / N_LAYERS
        b_bub = np.zeros(0)
        has_bubbles = False

    if has_bubbles:
        c_layer = optics.a + optics.b + b_bub
        omega_layer = (optics.b + b_bub) / c_layer
        fbub_layer = np.where(b_bub > 0.0, b_bub / (optics.b + b_bub), 0.0)
        bub_cdf = bubble_table.cdf
        bub_theta = bubble_table.theta
    else:
        c_layer = np.zeros(0)
        omega_layer = np.zeros(0)
        fbub_layer = np.zeros(0)
        bub_cdf = np.zeros(2)
        bub_theta = np.zeros(2)
    c_deep = optics.a + optics.b
    omega_deep = optics.b / c_deep if c_deep > 0.0 else 0.0

    ff_xi, ff_theta = ff_inverse_cdf_table(optics.ff)

    flat = surface.amp.size == 0
    if flat:
        gz = np.zeros((2, 2))
        gzx = np.zeros((2, 2))
        gzy = np.zeros((2, 2))
        x0 = -1.0
        z_surf_min = -1e-12
        inv_dx = 1.0
        ext_lim = 1e12
    else:
        gz, gzx, gzy, x0, z_surf_min = _surface_grid(
            surface, surface_extent, surface_step
        )
        inv_dx = 1.0 / surface_step
        ext_lim = surface_extent - 1.0

    nx = gz.shape[1]
    ny = gz.shape[0]
    t_u = transmission_wind(u10)
    m_lam = geom.m_lambert
    tx = np.asarray(geom.tx, dtype=float)
    offsets = [geom.delta_m] + [d for d in (extra_offsets or [])]

    n_batches = (n_photons + batch_size - 1) // batch_size

    def run_batch(idx: int):
        count = min(batch_size, n_photons - idx * batch_size)
        rng = np.random.default_rng([np.uint64(seed), np.uint64(idx)])
        zeta1 = rng.random(count)
        zeta2 = rng.random(count)
        theta = np.arccos((1.0 - zeta1) ** (1.0 / (1.0 + m_lam)))
        phi = 2.0 * np.pi * zeta2
        dirs = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
            axis=-1,
        )
        pos = np.tile(tx, (count, 1))
        status = np.zeros(count, dtype=np.int64)
        weight = np.zeros(count)
        sres = np.zeros(count)
        _trace_batch(
            rng, pos, dirs, status, weight, sres,
            flat, gz, gzx, gzy, x0, x0, inv_dx, nx, ny, z_surf_min, ext_lim,
            c_layer, omega_layer, fbub_layer, layer_dz, c_deep, omega_deep,
            ff_xi, ff_theta, bub_cdf, bub_theta, has_bubbles,
            optics.n1, optics.n2, mode, t_u,
        )
        trans = status == TRANSMITTED
        sums = np.zeros((len(offsets), 3))
        for j, delta in enumerate(offsets):
            cap = np.zeros(count, dtype=bool)
            cap[trans] = _capture_mask(pos[trans], dirs[trans], geom, delta)
            cw = weight[cap]
            sums[j] = [cw.sum(), np.sum(cw * cw), cap.sum()]
        tallies = np.array(
            [
                np.sum(status == ABSORBED),
                np.sum(status == REFLECTED),
                np.sum(status == ESCAPED),
                np.sum(trans),
            ],
            dtype=np.int64,
        )
        hist = None
        if histogram:
            up = trans & (dirs[:, 2] > 0.0)
            t = (geom.rx[2] - pos[up, 2]) / dirs[up, 2]
            lx = pos[up, 0] + dirs[up, 0] * t
            ly = pos[up, 1] + dirs[up, 1] * t
            hist, _, _ = np.histogram2d(
                lx, ly, bins=200, range=[[-50.0, 50.0], [-50.0, 50.0]],
                weights=weight[up],
            )
        return sums, tallies, float(np.max(sres, initial=0.0)), hist

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_batch, range(n_batches)))
    else:
        results = [run_batch(i) for i in range(n_batches)]

    sums = np.zeros((len(offsets), 3))
    tallies = np.zeros(4, dtype=np.int64)
    res_max = 0.0
    hist_total = np.zeros((200, 200)) if histogram else None
    for s, t, r, h in results:  # fixed batch order: reproducible reduction
        sums += s
        tallies += t
        res_max = max(res_max, r)
        if histogram:
            hist_total += h

    def gain_se(row):
        sw, sw2, _ = row
        h = sw / n_photons
        var = (sw2 - sw * sw / n_photons) / max(n_photons - 1, 1)
        return h, float(np.sqrt(var / n_photons))

    h_mc, se = gain_se(sums[0])
    n_received = int(sums[0, 2])
    offset_gains = None
    if extra_offsets is not None:
        offset_gains = {
            float(d): gain_se(sums[j + 1]) for j, d in enumerate(extra_offsets)
        }
    tally_dict = {
        "received": n_received,
        "absorbed": int(tallies[0]),
        "reflected_lost": int(tallies[1]),
        "escaped": int(tallies[2]) + int(tallies[3]) - n_received,
    }
    if histogram:
        hist_total = hist_total / n_photons
    return ChannelEstimate(
        h_mc=h_mc,
        std_error=se,
        n_photons=n_photons,
        tallies=tally_dict,
        snell_residual_max=res_max,
        offset_gains=offset_gains,
        histogram=hist_total,
    )
