#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace mtg::quad {

struct Rule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Golub-Welsch from the Jacobi matrix of the orthogonal polynomials.
Rule gauss_legendre(int n);  // on [-1, 1]
Rule gauss_laguerre(int n);  // weight exp(-x) on [0, inf)

double pairwise_sum(std::span<const double> v);

// Composite rule over `panels` equal panels of [a, b].
template <class F>
auto integrate(F&& f, double a, double b, int panels, const Rule& rule) {
    using R = decltype(f(a));
    const double h = (b - a) / panels;
    R total{};
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        R part{};
        for (Eigen::Index k = 0; k < rule.nodes.size(); ++k)
            part += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
        total += 0.5 * h * part;
    }
    return total;
}

}  // namespace mtg::quad
