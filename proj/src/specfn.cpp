#include "mtg/specfn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mtg/constants.hpp"
#include "mtg/errors.hpp"

namespace mtg::specfn {

namespace {

constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
constexpr double kMaxExp = 708.0;

// w(z) for x >= 0, y >= 0 (Poppe & Wijers region scheme).
Complex faddeeva_first_quadrant(double x, double y) {
    const double qx = x / 6.3;
    const double qy = y / 4.4;
    double qrho = qx * qx + qy * qy;
    const double xquad = x * x - y * y;
    const double yquad = 2.0 * x * y;

    if (qrho < 0.085264) {
        // Power series of erf-like sum, then multiply by exp(-z^2).
        qrho = (1.0 - 0.85 * qy) * std::sqrt(qrho);
        const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
        int j = 2 * n + 1;
        double xsum = 1.0 / j;
        double ysum = 0.0;
        for (int i = n; i >= 1; --i) {
            j -= 2;
            const double xaux = (xsum * xquad - ysum * yquad) / i;
            ysum = (xsum * yquad + ysum * xquad) / i;
            xsum = xaux + 1.0 / j;
        }
        const double u1 = -kTwoOverSqrtPi * (xsum * y + ysum * x) + 1.0;
        const double v1 = kTwoOverSqrtPi * (xsum * x - ysum * y);
        const double daux = std::exp(-xquad);
        const double u2 = daux * std::cos(yquad);
        const double v2 = -daux * std::sin(yquad);
        return {u1 * u2 - v1 * v2, u1 * v2 + v1 * u2};
    }

    double h = 0.0;
    int kapn = 0;
    int nu = 0;
    if (qrho > 1.0) {
        nu = static_cast<int>(3.0 + 1442.0 / (26.0 + 77.0 * std::sqrt(qrho)));
    } else {
        const double q = (1.0 - qy) * std::sqrt(1.0 - qrho);
        h = 1.88 * q;
        kapn = static_cast<int>(std::lround(7.0 + 34.0 * q));
        nu = static_cast<int>(std::lround(16.0 + 26.0 * q));
    }
    const double h2 = 2.0 * h;
    double qlambda = h > 0.0 ? std::pow(h2, kapn) : 0.0;
    double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
    for (int n = nu; n >= 0; --n) {
        const double np1 = n + 1.0;
        double tx = y + h + np1 * rx;
        const double ty = x - np1 * ry;
        const double c = 0.5 / (tx * tx + ty * ty);
        rx = c * tx;
        ry = c * ty;
        if (h > 0.0 && n <= kapn) {
            tx = qlambda + sx;
            sx = rx * tx - ry * sy;
            sy = ry * tx + rx * sy;
            qlambda /= h2;
        }
    }
    double u = h > 0.0 ? kTwoOverSqrtPi * sx : kTwoOverSqrtPi * rx;
    const double v = h > 0.0 ? kTwoOverSqrtPi * sy : kTwoOverSqrtPi * ry;
    if (y == 0.0) u = std::exp(-x * x);
    return {u, v};
}

Complex checked_exp(Complex a, const char* what) {
    if (a.real() > kMaxExp)
        throw DomainError(std::string(what) + ": result exceeds double range");
    return std::exp(a);
}

// Maclaurin series of erf; used for |z| < 1 where 1 - exp(-z^2) w(iz) cancels.
Complex erf_series(Complex z) {
    const Complex z2 = z * z;
    Complex term = z;
    Complex sum = z;
    for (int n = 1; n < 60; ++n) {
        term *= -z2 / static_cast<double>(n);
        const Complex add = term / static_cast<double>(2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return kTwoOverSqrtPi * sum;
}

}  // namespace

Complex faddeeva(Complex z) {
    const double x = z.real();
    const double y = z.imag();
    if (!std::isfinite(x) || !std::isfinite(y)) throw DomainError("faddeeva: non-finite argument");
    if (y >= 0.0) {
        const Complex w = faddeeva_first_quadrant(std::abs(x), y);
        return x < 0.0 ? std::conj(w) : w;
    }
    // w(z) = 2 exp(-z^2) - w(-z), with -z in the upper half plane.
    const Complex wm = faddeeva(-z);
    return 2.0 * checked_exp(-z * z, "faddeeva") - wm;
}

Complex erf_complex(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError("erf_complex: non-finite argument");
    if (std::abs(z.imag()) > kErfImagBound)
        throw DomainError("erf_complex: |Im z| must not exceed 50");
    // Reduce to the first quadrant: erf(-z) = -erf(z), erf(conj z) = conj erf(z).
    const bool neg = z.real() < 0.0;
    const Complex z1 = neg ? -z : z;
    const bool flip = z1.imag() < 0.0;
    const Complex q = flip ? std::conj(z1) : z1;
    Complex r;
    if (std::abs(q) < 1.0) {
        r = erf_series(q);
    } else {
        const Complex iz{-q.imag(), q.real()};  // upper half plane
        r = 1.0 - checked_exp(-q * q, "erf_complex") * faddeeva(iz);
    }
    if (flip) r = std::conj(r);
    return neg ? -r : r;
}

Complex exp_scaled_erf(Complex z, double s) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::isnan(s))
        throw DomainError("exp_scaled_erf: non-finite argument");
    if (std::abs(z) < 1.0) return checked_exp(Complex{s, 0.0}, "exp_scaled_erf") * erf_series(z);
    // Re z >= 0: e^s - e^{s - z^2} w(iz);  Re z < 0: -e^s + e^{s - z^2} w(-iz).
    const Complex iz{-z.imag(), z.real()};
    const Complex tail_exp = Complex{s, 0.0} - z * z;
    const double sign = z.real() >= 0.0 ? 1.0 : -1.0;
    const Complex w = faddeeva(sign * iz);
    const double head = s < -kMaxExp - 50.0 ? 0.0 : std::exp(s);
    if (!std::isfinite(head)) throw DomainError("exp_scaled_erf: result exceeds double range");
    Complex tail{0.0, 0.0};
    if (tail_exp.real() > -kMaxExp - 50.0) tail = checked_exp(tail_exp, "exp_scaled_erf") * w;
    return sign * (head - tail);
}

double confluent_m_neg(unsigned n, double z) {
    if (n == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 - z;
    for (unsigned k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - z) * l - k * lm1) / (k + 1.0);
        lm1 = l;
        l = next;
    }
    return l;
}

double polylog_half(double z) {
    if (!(std::abs(z) < 1.0)) throw DomainError("polylog_half: requires |z| < 1");
    if (z == 0.0) return 0.0;
    double sum = 0.0;
    double zk = 1.0;
    for (long k = 1;; ++k) {
        zk *= z;
        const double term = zk / std::sqrt(static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-15 * std::abs(sum)) break;
        if (k > 100000000L) throw NumericError("polylog_half: series did not converge");
    }
    return sum;
}

double harmonic_number(long k, int p) {
    if (k < 0) throw DomainError("harmonic_number: k must be non-negative");
    double s = 0.0;
    for (long j = k; j >= 1; --j) s += 1.0 / std::pow(static_cast<double>(j), p);
    return s;
}

double harmonic_number(long k) { return harmonic_number(k, 1); }

double polygamma_int(int order, long n) {
    if (n < 1) throw DomainError("polygamma_int: n must be a positive integer");
    using constants::pi;
    using constants::zeta3;
    switch (order) {
        case 1:
            return pi * pi / 6.0 - harmonic_number(n - 1, 2);
        case 2:
            return -2.0 * zeta3 + 2.0 * harmonic_number(n - 1, 3);
        default:
            throw DomainError("polygamma_int: only orders 1 and 2 are supported");
    }
}

}  // namespace mtg::specfn
