"""Photon transport: elementary operations and channel-gain estimation."""

import numpy as np
import pytest

from w2a import seastate, tracer
from w2a.config import LinkScenario

THETA_C = np.arcsin(1.0 / 1.33)


# --- elementary operations ------------------------------------------------

def test_emit_photon_state():
    g = tracer.Geometry()
    p = tracer.emit_photon(g, 0.3, 0.6)
    assert p.weight == 1.0
    assert p.medium == "water"
    assert np.allclose(p.position, g.tx)
    assert np.linalg.norm(p.direction) == pytest.approx(1.0)
    expected_theta = np.arccos((1.0 - 0.3) ** (1.0 / (1.0 + g.m_lambert)))
    assert np.arccos(p.direction[2]) == pytest.approx(expected_theta)


def test_emit_lambertian_distribution(rng):
    g = tracer.Geometry()
    m = g.m_lambert
    xi = rng.uniform(size=200_000)
    theta = np.arccos((1.0 - xi) ** (1.0 / (1.0 + m)))
    # mean of cos^(m+1) law: E[cos theta] = (m+1)/(m+2)
    assert np.cos(theta).mean() == pytest.approx((m + 1.0) / (m + 2.0), abs=1e-4)


def test_sample_step_statistics(rng):
    c = 0.151
    steps = np.array([tracer.sample_step(c, x) for x in rng.uniform(1e-12, 1.0, 20_000)])
    assert steps.mean() == pytest.approx(1.0 / c, rel=0.03)
    with pytest.raises(ValueError):
        tracer.sample_step(0.0, 0.5)
    with pytest.raises(ValueError):
        tracer.sample_step(c, 0.0)


def test_scatter_direction_angle_preserved(rng):
    for _ in range(200):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        theta_s = rng.uniform(0.0, np.pi)
        out = tracer.scatter_direction(d, theta_s, rng.uniform(0.0, 2 * np.pi))
        assert np.linalg.norm(out) == pytest.approx(1.0)
        assert np.dot(out, d) == pytest.approx(np.cos(theta_s), abs=1e-9)


def test_scatter_direction_pole_branch():
    out = tracer.scatter_direction(np.array([0.0, 0.0, 1.0]), 0.3, 1.0)
    assert np.dot(out, [0, 0, 1]) == pytest.approx(np.cos(0.3))
    out_down = tracer.scatter_direction(np.array([0.0, 0.0, -1.0]), 0.3, 1.0)
    assert np.dot(out_down, [0, 0, -1]) == pytest.approx(np.cos(0.3))


def test_interaction_event_classification():
    # scatter when xi1 <= albedo, bubble split by xi2, absorb otherwise
    ev, w = tracer.interaction_event(1.0, 0.245, 0.0, 0.2, 0.9)
    assert ev == "scatter_by_water" and w == pytest.approx(0.245)
    ev, _ = tracer.interaction_event(1.0, 0.245, 0.7, 0.2, 0.5)
    assert ev == "scatter_by_bubble"
    ev, w = tracer.interaction_event(0.5, 0.245, 0.7, 0.9, 0.5)
    assert ev == "absorb" and w == pytest.approx(0.5 * 0.245)


def test_fresnel_energy_identity(rng):
    for theta_i in rng.uniform(0.0, THETA_C - 1e-6, size=1000):
        rho, t_f, theta_r = tracer.fresnel_coefficients(theta_i, 1.33, 1.0)
        assert rho + t_f == pytest.approx(1.0, abs=1e-9)
        assert 1.33 * np.sin(theta_i) == pytest.approx(np.sin(theta_r), abs=1e-12)


def test_fresnel_normal_incidence():
    rho, t_f, _ = tracer.fresnel_coefficients(0.0, 1.33, 1.0)
    assert rho == pytest.approx(((1.33 - 1.0) / (1.33 + 1.0)) ** 2)
    assert t_f == pytest.approx(1.0 - rho)


def test_fresnel_beyond_critical_rejected():
    with pytest.raises(ValueError):
        tracer.fresnel_coefficients(THETA_C + 0.01, 1.33, 1.0)


def test_transmission_wind_values():
    assert tracer.transmission_wind(0.0) == 1.0
    assert tracer.transmission_wind(5.0) == pytest.approx(1.0 - 1.2e-5 * 5.0**3.3)
    assert tracer.transmission_wind(13.0) == pytest.approx(0.8677, abs=5e-4)
    with pytest.raises(ValueError):
        tracer.transmission_wind(-1.0)


def test_surface_crossing_refraction_snell():
    optics = tracer.WaterOptics()
    d = np.array([np.sin(0.3), 0.0, np.cos(0.3)])
    res = tracer.surface_crossing(d, np.array([0.0, 0.0, 1.0]), optics, 0.0, 0.99)
    assert res is not None
    new_dir, factor = res
    sin_out = np.linalg.norm(np.cross(new_dir, [0, 0, 1.0]))
    assert 1.33 * np.sin(0.3) == pytest.approx(sin_out, abs=1e-9)
    assert 0.0 < factor <= 1.0


def test_surface_crossing_total_internal_reflection():
    optics = tracer.WaterOptics()
    theta = THETA_C + 0.05
    d = np.array([np.sin(theta), 0.0, np.cos(theta)])
    assert tracer.surface_crossing(d, np.array([0.0, 0.0, 1.0]), optics, 0.0, 0.5) is None


def test_surface_crossing_fresnel_modes():
    optics = tracer.WaterOptics()
    d = np.array([np.sin(0.2), 0.0, np.cos(0.2)])
    n = np.array([0.0, 0.0, 1.0])
    rho, t_f, _ = tracer.fresnel_coefficients(0.2, optics.n1, optics.n2)
    # paper mode: survivors (xi3 > rho) still carry the T_f weight
    _, f_paper = tracer.surface_crossing(d, n, optics, 0.0, 0.999, fresnel_mode="paper")
    assert f_paper == pytest.approx(t_f)
    # kill-only: survivors keep unit surface weight
    _, f_kill = tracer.surface_crossing(d, n, optics, 0.0, 0.999, fresnel_mode="kill-only")
    assert f_kill == pytest.approx(1.0)
    # weight-only: no killing, deterministic T_f = 1 - rho factor
    _, f_weight = tracer.surface_crossing(d, n, optics, 0.0, 0.0, fresnel_mode="weight-only")
    assert f_weight == pytest.approx(1.0 - rho)
    # paper mode kills the photon when xi3 < rho
    assert tracer.surface_crossing(d, n, optics, 0.0, rho * 0.5, fresnel_mode="paper") is None


def test_geometry_validation():
    with pytest.raises(ValueError):
        tracer.Geometry(tx=(0.0, 0.0, 5.0))
    with pytest.raises(ValueError):
        tracer.Geometry(theta_half=2.0)
    assert tracer.Geometry(theta_half=np.deg2rad(10)).m_lambert == pytest.approx(45.28, rel=1e-3)


# --- end-to-end gain estimation -------------------------------------------

def scenario(u10=0.0, **kw):
    return LinkScenario(u10=u10, n_photons=100_000, seed=7, **kw)


def test_flat_sea_gain_positive_and_tallies_complete():
    s = scenario()
    est = tracer.run_channel(s, seastate.flat_surface())
    assert est.h_mc > 0.0
    assert sum(est.tallies.values()) == est.n_photons
    assert est.snell_residual_max < 1e-9


def test_same_seed_bitwise_reproducible():
    s = scenario()
    a = tracer.run_channel(s, seastate.flat_surface())
    b = tracer.run_channel(s, seastate.flat_surface())
    assert a.h_mc == b.h_mc
    assert a.std_error == b.std_error
    assert a.tallies == b.tallies


def test_worker_count_does_not_change_result():
    s = scenario(u10=5.0)
    surf = seastate.synthesize_surface(s.jonswap, seed=1)
    a = tracer.run_channel(s, surf, workers=1)
    b = tracer.run_channel(s, surf, workers=4)
    assert a.h_mc == b.h_mc
    assert a.tallies == b.tallies


def test_different_seed_changes_result():
    s = scenario()
    a = tracer.run_channel(s, seastate.flat_surface(), seed=1)
    b = tracer.run_channel(s, seastate.flat_surface(), seed=2)
    assert a.h_mc != b.h_mc


def test_offset_gain_no_larger_than_centered():
    s = scenario()
    est = tracer.run_channel(s, seastate.flat_surface(), extra_offsets=[0.0, 1.0])
    assert est.offset_gains[0.0][0] == pytest.approx(est.h_mc)
    assert est.offset_gains[1.0][0] <= est.h_mc


def test_gain_decreases_with_depth():
    shallow = tracer.run_channel(scenario(), seastate.flat_surface())
    deep_geom = tracer.Geometry(tx=(0.0, 0.0, -20.0))
    deep = tracer.run_channel(
        scenario(geometry=deep_geom), seastate.flat_surface()
    )
    assert deep.h_mc < shallow.h_mc


def test_histogram_accounts_for_transmitted_weight():
    s = scenario()
    est = tracer.run_channel(s, seastate.flat_surface(), histogram=True)
    assert est.histogram is not None
    assert est.histogram.shape == (200, 200)
    assert est.histogram.sum() > 0.0


def test_wide_receiver_flat_quadrature_oracle():
    # analytic 1-D oracle for a flat sea, pure absorption, wide receiver
    optics = tracer.WaterOptics(b=0.0)
    geom = tracer.Geometry(r_rx=500.0, fov=np.pi)
    s = LinkScenario(optics=optics, geometry=geom, u10=0.0,
                     n_photons=400_000, seed=3)
    est = tracer.run_channel(s, seastate.flat_surface())
    m = geom.m_lambert
    d_w = 10.0
    theta = np.linspace(0.0, THETA_C - 1e-9, 20001)
    rho_tf = np.array([tracer.fresnel_coefficients(t, 1.33, 1.0)[:2] for t in theta])
    integrand = (
        (m + 1.0) * np.cos(theta) ** m * np.sin(theta)
        * (1.0 - rho_tf[:, 0]) * rho_tf[:, 1]
        * np.exp(-optics.a * d_w / np.cos(theta))
    )
    oracle = np.trapezoid(integrand, theta)
    assert est.h_mc == pytest.approx(oracle, abs=3.5 * est.std_error)
