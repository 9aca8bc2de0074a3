#pragma once

#include <functional>
#include <span>
#include <string>

namespace mmc {

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double integrate_adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol = 1e-10, int max_depth = 48);

/// Sum of adaptive Simpson integrals over consecutive pieces [nodes[i], nodes[i+1]].
/// Put discontinuities and support ends of the integrand in `nodes`.
double integrate_pieces(const std::function<double(double)>& f, std::span<const double> nodes,
                        double tol = 1e-10);

/// A one-dimensional density with its support and first two moments.
struct ScalarDensity {
    std::function<double(double)> pdf;
    double lo;
    double hi;
    double mean;
    double variance;
    std::string description;

    /// Standard normal truncated to [-12, 12] for integration (tail mass below 1e-32).
    static ScalarDensity standard_normal();
    /// Uniform on (-√3, √3): mean 0, variance 1.
    static ScalarDensity unit_uniform();
    /// Exp(1) truncated to [0, 60].
    static ScalarDensity exponential();
};

/// 𝔼[g(X)] for X with the given density; `inner_nodes` are extra breakpoints (for
/// example the support ends of g) clipped to the density's support.
double expectation(const ScalarDensity& density, const std::function<double(double)>& g,
                   std::span<const double> inner_nodes = {}, double tol = 1e-10);

}  // namespace mmc
