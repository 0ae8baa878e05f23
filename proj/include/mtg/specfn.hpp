#pragma once

#include <complex>

namespace mtg::specfn {

using Complex = std::complex<double>;

// Largest |Im z| accepted by erf_complex.
inline constexpr double kErfImagBound = 50.0;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Power series near the origin, Gautschi's truncated Laplace continued
/// fraction with a Taylor correction at intermediate |z|, and the bare
/// continued fraction for large |z|. Accurate to ~1e-14 relative in the
/// upper half plane. In the lower half plane the reflection
/// w(z) = 2 exp(-z^2) - w(-z) is used and may overflow, in which case a
/// DomainError is thrown.
Complex faddeeva(Complex z);

/// Complex error function for |Im z| <= kErfImagBound.
/// Throws DomainError outside that strip or when the result is not
/// representable as a double.
Complex erf_complex(Complex z);

/// exp(s) * erf(z) evaluated without forming either factor on its own, so
/// large Gaussian prefactors can be cancelled analytically. No bound on Im z;
/// throws DomainError only if the result itself overflows.
Complex exp_scaled_erf(Complex z, double s);

/// M(-n, 1, z), i.e. the Laguerre polynomial L_n(z), by upward recurrence.
double confluent_m_neg(unsigned n, double z);

/// Li_{1/2}(z) by direct summation, |z| < 1.
double polylog_half(double z);

/// Polygamma of order 1 or 2 at a positive integer.
double polygamma_int(int order, long n);

double harmonic_number(long k);

// Generalized harmonic number sum_{j=1..k} 1/j^p (p = 2, 3 used here),
// summed smallest term first.
double harmonic_number(long k, int p);

}  // namespace mtg::specfn
