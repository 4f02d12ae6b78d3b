#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "heavytail/common.hpp"

namespace heavytail {

/// Gauss-Legendre nodes and weights on [-1,1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes by Newton iteration on the Legendre recurrence; cached per order.
inline const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendre gl;
    gl.nodes.resize(static_cast<std::size_t>(n));
    gl.weights.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0, dz;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            dz = -p1 / pp;
            z += dz;
        } while (std::abs(dz) >= std::numeric_limits<double>::epsilon());
        gl.nodes[static_cast<std::size_t>(i)] = -z;
        gl.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
        gl.weights[static_cast<std::size_t>(n - 1 - i)] =
            gl.weights[static_cast<std::size_t>(i)];
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

/// Raised when the adaptive integrator cannot reach the requested absolute
/// accuracy within the refinement depth cap; carries the achieved estimate.
struct QuadratureAccuracyError : std::runtime_error {
    QuadratureAccuracyError(double estimate_, double achieved_, double requested_)
        : std::runtime_error("quadrature: requested accuracy " + format_double(requested_) +
                             " not met (achieved ~" + format_double(achieved_) +
                             ", estimate " + format_double(estimate_) + ")"),
          estimate(estimate_), achieved_error(achieved_), requested_tol(requested_) {}
    double estimate, achieved_error, requested_tol;
};

namespace detail {

inline double gl_panel(const std::function<double(double)>& f, double a, double b, int order,
                       double* fmin = nullptr, double* fmax = nullptr) {
    const GaussLegendre& gl = gauss_legendre(order);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double sum = 0.0, lo = kInf, hi = -kInf;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double v = f(c + h * gl.nodes[k]);
        sum += gl.weights[k] * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (fmin) *fmin = lo;
    if (fmax) *fmax = hi;
    return h * sum;
}

}  // namespace detail

/// Adaptive Gauss-Legendre integration of f over [a,b].
///
/// Starts from a single 64-node panel and bisects dyadically where either the
/// split-comparison error estimate exceeds the panel's proportional share of
/// abs_tol, or the panel's integral-scale variation (node range times width)
/// exceeds variation_tol. Depth cap 20; throws QuadratureAccuracyError when
/// the accumulated error estimate still exceeds abs_tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol = 1e-6, double variation_tol = 1e-7,
                                 int depth_cap = 20) {
    if (!(b > a)) return 0.0;
    struct Panel {
        double a, b;
        int depth;
    };
    std::deque<Panel> todo{{a, b, 0}};
    const double total_width = b - a;
    double total = 0.0, err_total = 0.0;

    while (!todo.empty()) {
        const Panel p = todo.front();
        todo.pop_front();
        double fmin = 0.0, fmax = 0.0;
        const double coarse = detail::gl_panel(f, p.a, p.b, 64, &fmin, &fmax);
        const double mid = 0.5 * (p.a + p.b);
        const double fine = detail::gl_panel(f, p.a, mid, 64) + detail::gl_panel(f, mid, p.b, 64);
        const double err = std::abs(coarse - fine);
        const double share = 0.5 * abs_tol * (p.b - p.a) / total_width;
        const double variation = (fmax - fmin) * (p.b - p.a);
        const bool converged = err <= share && variation <= variation_tol;
        if (converged || p.depth >= depth_cap) {
            total += fine;
            err_total += err;
        } else {
            todo.push_back({p.a, mid, p.depth + 1});
            todo.push_back({mid, p.b, p.depth + 1});
        }
    }
    if (err_total > abs_tol) throw QuadratureAccuracyError(total, err_total, abs_tol);
    return total;
}

}  // namespace heavytail
