"""Independent reference computations used by the test suite.

None of these call into the package's numerical paths.
"""

import cmath
import math

import mpmath
from scipy.optimize import brentq
from scipy.special import jv, kv

C = 299792458.0
SILICA_B = (0.6961663, 0.4079426, 0.8974794)
SILICA_C = (0.0684043, 0.1162414, 9.896161)


def _sellmeier(lam_nm):
    x2 = (mpmath.mpf(lam_nm) / 1000) ** 2
    s = sum(mpmath.mpf(b) * x2 / (x2 - mpmath.mpf(c) ** 2) for b, c in zip(SILICA_B, SILICA_C))
    return mpmath.sqrt(1 + s)


def sellmeier_mp(lam_nm, dps=40):
    """Malitson fused silica at high precision."""
    with mpmath.workdps(dps):
        return _sellmeier(lam_nm)


def material_d_mp(lam_nm):
    """Material dispersion -lam/c d2n/dlam2 in ps/(km nm), via mpmath differentiation."""
    with mpmath.workdps(40):
        d2 = mpmath.diff(_sellmeier, mpmath.mpf(lam_nm), 2)  # per nm^2
        return float(-mpmath.mpf(lam_nm) * d2 / C * 1e3 * 1e12)


def step_index_neff(a_um, delta_pct, lam_nm):
    """LP01 root of U J1(U)/J0(U) = W K1(W)/K0(W) for a step-index core.

    Core index n1^2 = n2^2 / (1 - 2 delta), cladding n2 = silica.
    """
    n2 = float(sellmeier_mp(lam_nm))
    n1 = n2 / math.sqrt(1 - 2 * delta_pct / 100)
    k = 2 * math.pi / (lam_nm * 1e-3)
    v = k * a_um * math.sqrt(n1 * n1 - n2 * n2)

    def f(u):
        w = math.sqrt(v * v - u * u)
        return u * jv(1, u) / jv(0, u) - w * kv(1, w) / kv(0, w)

    u = brentq(f, 1e-9, min(v, 2.404825557695773) * (1 - 1e-13), xtol=1e-15, rtol=1e-15)
    b = 1 - (u / v) ** 2
    return math.sqrt(n2 * n2 + b * (n1 * n1 - n2 * n2))


def step_index_dispersion(a_um, delta_pct, lam0, span=8.0, n=33):
    """tau0 (ps/km) and D (ps/(km nm)) from a dense quadratic-in-wavelength fit.

    n_eff is sampled densely around lam0 and fitted with a degree-6
    polynomial; derivatives come from the polynomial, independently of any
    finite-difference stencil.
    """
    import numpy as np
    lams = np.linspace(lam0 - span, lam0 + span, n)
    ne = np.array([step_index_neff(a_um, delta_pct, l) for l in lams])
    p = np.polynomial.Polynomial.fit(lams - lam0, ne, 6)
    d1 = p.deriv(1)(0.0)
    d2 = p.deriv(2)(0.0)
    ps_km = 1e3 / C * 1e12
    return (p(0.0) - lam0 * d1) * ps_km, -lam0 * d2 * ps_km


def phasor_sum(delays_ps, amps, f_ghz):
    """Brute-force |sum a exp(-i 2 pi f tau)| with plain Python complex numbers."""
    acc = 0j
    for t, a in zip(delays_ps, amps):
        acc += a * cmath.exp(-2j * math.pi * f_ghz * t * 1e-3)
    return abs(acc)
