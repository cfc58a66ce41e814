"""Lorenz-Mie scattering amplitudes for homogeneous spheres.

Standard Bohren-Huffman recurrences: downward recursion for the logarithmic
derivative of the Riccati-Bessel function, upward recursion for the angular
functions pi_n and tau_n.  Works for relative refractive indices below 1
(air cavity in water) as well as above.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def mie_intensity(x: float, m: float, mu: np.ndarray):
    """Unpolarized scattered intensity and scattering efficiency.

    Returns (i, q_sca) where i[j] = (|S1|^2 + |S2|^2)/2 at mu[j] = cos(theta)
    and q_sca = (2/x^2) sum (2n+1)(|a_n|^2 + |b_n|^2).  x is the size
    parameter 2*pi*r*n_medium/lambda; m is the sphere refractive index
    relative to the medium (real).
    """
    nstop = int(x + 4.0 * x ** (1.0 / 3.0) + 2.0)
    nmx = int(max(nstop, abs(m) * x) + 16)

    # logarithmic derivative D_n(mx) by downward recurrence
    mx = m * x
    d = np.zeros(nmx + 1)
    for n in range(nmx, 0, -1):
        d[n - 1] = n / mx - 1.0 / (d[n] + n / mx)

    na = mu.shape[0]
    s1_re = np.zeros(na)
    s1_im = np.zeros(na)
    s2_re = np.zeros(na)
    s2_im = np.zeros(na)
    pi0 = np.zeros(na)
    pi1 = np.ones(na)

    # Riccati-Bessel functions psi_n = x j_n(x), chi_n = -x y_n(x)
    psi0 = np.cos(x)
    psi1 = np.sin(x)
    chi0 = -np.sin(x)
    chi1 = np.cos(x)
    qsum = 0.0
    for n in range(1, nstop + 1):
        psi = (2.0 * n - 1.0) / x * psi1 - psi0
        chi = (2.0 * n - 1.0) / x * chi1 - chi0
        # a_n = num_a / (num_a - i den_a) with zeta_n = psi_n - i chi_n
        fa = d[n] / m + n / x
        fb = d[n] * m + n / x
        num_a = fa * psi - psi1
        den_a = fa * chi - chi1
        num_b = fb * psi - psi1
        den_b = fb * chi - chi1
        mag_a = num_a * num_a + den_a * den_a
        mag_b = num_b * num_b + den_b * den_b
        an_re = num_a * num_a / mag_a
        an_im = num_a * den_a / mag_a
        bn_re = num_b * num_b / mag_b
        bn_im = num_b * den_b / mag_b

        qsum += (2.0 * n + 1.0) * (an_re * an_re + an_im * an_im
                                   + bn_re * bn_re + bn_im * bn_im)

        fac = (2.0 * n + 1.0) / (n * (n + 1.0))
        for j in range(na):
            tau = n * mu[j] * pi1[j] - (n + 1.0) * pi0[j]
            s1_re[j] += fac * (an_re * pi1[j] + bn_re * tau)
            s1_im[j] += fac * (an_im * pi1[j] + bn_im * tau)
            s2_re[j] += fac * (an_re * tau + bn_re * pi1[j])
            s2_im[j] += fac * (an_im * tau + bn_im * pi1[j])
        for j in range(na):
            pin = ((2.0 * n + 1.0) * mu[j] * pi1[j] - (n + 1.0) * pi0[j]) / n
            pi0[j] = pi1[j]
            pi1[j] = pin

        psi0, psi1 = psi1, psi
        chi0, chi1 = chi1, chi

    out = np.empty(na)
    for j in range(na):
        out[j] = 0.5 * (
            s1_re[j] ** 2 + s1_im[j] ** 2 + s2_re[j] ** 2 + s2_im[j] ** 2
        )
    return out, 2.0 / (x * x) * qsum
