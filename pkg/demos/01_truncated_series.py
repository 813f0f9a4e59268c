"""Truncated series with certified tails: the representation layer.

A truncated series stores Taylor coefficients up to degree N around an
anchor, a validity radius, and a certified bound for everything dropped.
The sandwich

    sampled sup  <=  true sup  <=  majorant norm

survives every operation, which is what makes the rest of the package's
checks meaningful.
"""

import numpy as np

from germlie.series import (
    TruncatedSeries, cauchy_coefficients, invert, matrix_space,
    multiply, scalar_space, series_exp, series_json_dumps, series_json_loads,
    series_log,
)

sp = scalar_space()

# --- the geometric series, with its tail certified -------------------------
one_minus_z = TruncatedSeries.from_coeff_list([(0, 1.0), (1, -1.0)], 0.0, 0.5, sp)
geo = invert(one_minus_z)
print("1/(1-z) coefficients:", np.round(geo.coeffs.real[:6], 12))
print("certified tail on |z| <= 0.5:", geo.tail_bound)
zs = 0.3 * np.exp(1j * np.linspace(0, 2 * np.pi, 9))
print("worst eval error vs closed form:",
      np.max(np.abs(geo.eval(zs) - 1 / (1 - zs))), "(inside the tail bound)")

# --- exp/log as series, against the matrix exponential ---------------------
ms = matrix_space(2)
rng = np.random.default_rng(0)
coeffs = (rng.standard_normal((13, 2, 2)) * 0.04
          * 0.4 ** np.arange(13)[:, None, None]).astype(complex)
a = TruncatedSeries(0.0, 12, coeffs, 0.5, 0.0, ms)
back = series_log(series_exp(a))
print("\nlog(exp(a)) vs a, coefficientwise:",
      np.max(ms.norm(back.coeffs - a.coeffs)))

# --- the norm sandwich ------------------------------------------------------
print("sampled sup:", a.sample_sup(0.5), "<= majorant:", a.majorant_norm(0.5))

# --- Cauchy-formula coefficient extraction = trapezoid quadrature = FFT -----
betas, sup, rq = cauchy_coefficients(lambda z: np.exp(z) / (2 - z), 0.0, 1.0, 10, 256)
print("\nextracted coefficients of exp(z)/(2-z):", np.round(betas.real[:5], 10))
print("each satisfies |beta_k| <= circle sup / r_q^k:",
      bool(np.all(np.abs(betas) <= sup / rq ** np.arange(11) + 1e-12)))

# --- exact JSON round trip ---------------------------------------------------
text = series_json_dumps(a)
again = series_json_loads(text)
print("\nJSON round trip bit-exact:", bool(np.array_equal(a.coeffs, again.coeffs)))
print("product tail (certified):", multiply(a, a).tail_bound)
