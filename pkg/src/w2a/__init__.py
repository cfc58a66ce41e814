"""Monte Carlo simulator for direct water-to-air optical wireless channels.

The package models an underwater LED transmitter whose photons traverse the
water column (absorption, particle and bubble scattering), refract through a
wind-driven random sea surface, and are collected by a UAV-mounted SiPM
receiver hovering above the surface.  Modules:

    scattering  Henyey-Greenstein and Fournier-Forand phase functions
    mie         Lorenz-Mie amplitudes for single spheres
    bubbles     Hall-Novarini bubble population and ensemble phase table
    seastate    Directional wave-spectrum surface synthesis
    tracer      Photon transport and channel-gain estimation
    uav         Dryden wind turbulence and UAV pointing loss
    link        SiPM noise, SNR, and OOK BER evaluation
    config/cli  Scenario files and the `w2a` command-line driver
"""

__version__ = "1.0.0"

from . import bubbles, config, link, mie, scattering, seastate, tracer, uav
from .config import LinkScenario, load_scenario
from .tracer import ChannelEstimate, Geometry, WaterOptics, run_channel

__all__ = [
    "__version__",
    "bubbles", "config", "link", "mie", "scattering", "seastate", "tracer",
    "uav", "LinkScenario", "load_scenario", "ChannelEstimate", "Geometry",
    "WaterOptics", "run_channel",
]
