#include "mtg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtg/errors.hpp"

namespace mtg::quad {

namespace {

Rule from_jacobi(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
    const auto n = diag.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    j.diagonal() = diag;
    j.diagonal(1) = offdiag;
    j.diagonal(-1) = offdiag;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    if (es.info() != Eigen::Success) throw NumericError("Golub-Welsch eigen-decomposition failed");
    Rule r;
    r.nodes = es.eigenvalues();
    r.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
    return r;
}

}  // namespace

Rule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n >= 1 required");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    Rule r = from_jacobi(diag, off, 2.0);
    // Symmetrize to remove eigen-solver noise.
    for (int k = 0; k < n / 2; ++k) {
        const double x = 0.5 * (r.nodes[n - 1 - k] - r.nodes[k]);
        const double w = 0.5 * (r.weights[n - 1 - k] + r.weights[k]);
        r.nodes[k] = -x;
        r.nodes[n - 1 - k] = x;
        r.weights[k] = r.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

Rule gauss_laguerre(int n) {
    if (n < 1) throw DomainError("gauss_laguerre: n >= 1 required");
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = k;
    return from_jacobi(diag, off, 1.0);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const auto half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace mtg::quad
