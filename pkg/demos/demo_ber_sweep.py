"""Average OOK BER versus transmitter depth for the flat-sea benchmark.

Fits the mean-gain depth model from Monte Carlo runs, then evaluates the
Gaussian OOK decision model at several depths and bit rates.

    python demos/demo_ber_sweep.py
"""

import numpy as np

from w2a import link
from w2a.config import LinkScenario


def main():
    scenario = LinkScenario(u10=0.0, n_photons=500_000)
    model = link.fit_gain_model(scenario, n_photons=500_000, seed=3)
    print(f"gain model: mean_gain(d) = exp({model.intercept:.3f} - {model.slope:.4f} d)")
    depths = np.arange(25.0, 50.0, 2.5)
    for rb in (1e6, 5e6, 10e6):
        res = link.evaluate_ber(scenario, rb, 100, model, depths=depths, seed=3)
        print(f"\nRb = {rb / 1e6:.0f} Mbps (P_n = {link.noise_power(res.nep, rb / 2):.2e} W)")
        for p in res.points:
            print(f"  d_water = {p.d_water:5.1f} m  BER = {p.mean_ber:.3e}  "
                  f"SNR = {p.mean_snr_db:6.2f} dB")


if __name__ == "__main__":
    main()
