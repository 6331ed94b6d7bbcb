"""Reference computations written independently of the package under test.

Nothing here imports rtd_swipt; every value is derived from first principles,
from mpmath at high precision, or from the published Table I parameters.
"""

import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40

# published EH parameters: rho in mW, psi in W
TABLE_I_PARAMS = [(7.16e-5, 1.432, 0.778, 2174.86), (2.5e-5, 1.841, 0.445, 956.75)]
TABLE_I_RHO1_MW = 1.8
TABLE_I_RHO_MAX_MW = 2.4

# evaluation setup: G_T = G_R = 100, f_c = 100 GHz, d = 0.3 m, sigma^2 = -50 dBm
REF_G = 100.0
REF_FC = 100e9
REF_D = 0.3
REF_SIGMA2_DBM = -50.0
C_LIGHT = 299_792_458.0


def rel_err(a, b):
    a, b = float(a), float(b)
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def erfi_series30(z):
    """Maclaurin series of erfi truncated at 30 terms: 2/sqrt(pi) sum_{k<30} z^(2k+1)/(k!(2k+1))."""
    return 2.0 / math.sqrt(math.pi) * math.fsum(z ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)) for k in range(30))


def erfi_asymptotic(z):
    """exp(z^2)/(z sqrt(pi)) * sum (2k-1)!!/(2z^2)^k, truncated at the smallest term."""
    terms = [1.0]
    k = 1
    while True:
        nxt = terms[-1] * (2 * k - 1) / (2.0 * z * z)
        if nxt >= terms[-1] or k > 200:
            break
        terms.append(nxt)
        k += 1
    return math.exp(z * z) / (z * math.sqrt(math.pi)) * math.fsum(terms)


def erfi_mp(z):
    return mp.erfi(mp.mpf(z))


def log_erfi_mp(z):
    return float(mp.log(mp.erfi(mp.mpf(z))))


def dawson_mp(z):
    z = mp.mpf(z)
    return float(mp.sqrt(mp.pi) / 2 * mp.exp(-z * z) * mp.erfi(z))


def psi_table_i(rho_w):
    """Two-segment 5PL transfer function of Table I, written out directly."""
    r = float(rho_w) * 1e3
    (B1, a1, b1, t1), (B2, a2, b2, t2) = TABLE_I_PARAMS
    if r < TABLE_I_RHO1_MW:
        return B1 - B1 * (1.0 + t1 * r**a1) ** (-b1)
    phi2 = B1 - B1 * (1.0 + t1 * TABLE_I_RHO1_MW**a1) ** (-b1)
    return B2 + (phi2 - B2) * (1.0 + t2 * (r - TABLE_I_RHO1_MW) ** a2) ** (-b2)


def reference_h_tilde():
    return C_LIGHT / (4.0 * math.pi * REF_D * REF_FC) * REF_G


def mu2_condition_sides_mp(mu2, p_max, p_req):
    """(LHS, RHS) of the mu2 condition in 40-digit arithmetic."""
    mu2, pm, pr = mp.mpf(mu2), mp.mpf(p_max), mp.mpf(p_req)
    lhs = mp.log(1 + 2 * mu2 * pr) + mp.log(mp.erfi(mp.sqrt(mu2 * pm)))
    rhs = mp.log(4 * pm * mu2 / mp.pi) / 2 + mu2 * pm
    return lhs, rhs


def maxent_moments_mp(mu0, mu2, p_max):
    """(int f, int x^2 f) for f = exp(-mu0 + mu2 x^2) on [0, sqrt(P_max)] via mpmath quadrature."""
    a = mp.sqrt(mp.mpf(p_max))
    mu0, mu2 = mp.mpf(mu0), mp.mpf(mu2)
    f = lambda x: mp.exp(-mu0 + mu2 * x * x)
    # split near the top where the density concentrates
    pts = [0, a * (1 - mp.mpf(1) / (1 + mu2 * a * a)), a] if mu2 > 0 else [0, a]
    m0 = mp.quad(f, pts)
    m2 = mp.quad(lambda x: x * x * f(x), pts)
    return float(m0), float(m2)


def uniform_awgn_mi(a, sigma, n=20001):
    """I(x; x + n) for x ~ U[0, a], n ~ N(0, sigma^2), by dense numpy quadrature.

    f_y(y) = (Phi((y)/sigma) - Phi((y - a)/sigma)) / a; erfc from math keeps tails accurate.
    """
    y = np.linspace(-10 * sigma, a + 10 * sigma, n)
    cdf = np.vectorize(lambda t: 0.5 * math.erfc(-t / math.sqrt(2.0)))
    fy = (cdf(y / sigma) - cdf((y - a) / sigma)) / a
    fy = np.maximum(fy, 1e-300)
    g = fy * np.log(fy)
    h_y = -float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(y)))
    return h_y - 0.5 * math.log(2 * math.pi * math.e * sigma * sigma)
