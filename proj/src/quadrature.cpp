#include "mmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mmc/error.hpp"
#include "mmc/normal.hpp"

namespace mmc {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth) {
    if (a == b) return 0.0;
    if (!(b > a)) throw Error(ErrorCode::InvalidParams, "integrate_adaptive_simpson: need a < b");
    // Seed with a fixed split so narrow features are not missed by the first 3-point rule.
    constexpr int kSeed = 16;
    const double h = (b - a) / kSeed;
    double total = 0.0;
    for (int i = 0; i < kSeed; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == kSeed) ? b : a + (i + 1) * h;
        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo), fhi = f(hi), fmid = f(mid);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / kSeed, max_depth);
    }
    return total;
}

double integrate_pieces(const std::function<double(double)>& f, std::span<const double> nodes, double tol) {
    if (nodes.size() < 2) throw Error(ErrorCode::InvalidParams, "integrate_pieces: need at least two nodes");
    const double pieces = static_cast<double>(nodes.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        total += integrate_adaptive_simpson(f, nodes[i], nodes[i + 1], tol / pieces);
    }
    return total;
}

ScalarDensity ScalarDensity::standard_normal() {
    return {[](double x) { return standard_normal_pdf(x); }, -12.0, 12.0, 0.0, 1.0, "N(0,1)"};
}

ScalarDensity ScalarDensity::unit_uniform() {
    const double h = std::numbers::sqrt3;
    return {[h](double x) { return (x >= -h && x <= h) ? 0.5 / h : 0.0; }, -h, h, 0.0, 1.0, "U(-sqrt3,sqrt3)"};
}

ScalarDensity ScalarDensity::exponential() {
    return {[](double x) { return x >= 0.0 ? std::exp(-x) : 0.0; }, 0.0, 60.0, 1.0, 1.0, "Exp(1)"};
}

double expectation(const ScalarDensity& density, const std::function<double(double)>& g,
                   std::span<const double> inner_nodes, double tol) {
    std::vector<double> nodes{density.lo, density.hi};
    for (double x : inner_nodes) {
        if (x > density.lo && x < density.hi) nodes.push_back(x);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return integrate_pieces([&](double x) { return g(x) * density.pdf(x); }, nodes, tol);
}

}  // namespace mmc
