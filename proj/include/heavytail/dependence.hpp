#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/distribution.hpp"
#include "heavytail/membership.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

enum class DepKind { independent, counter_monotone, gaussian, clayton_negative, comonotone };

/// Joint-sampling specification. Which models carry an NLOD guarantee is
/// part of the contract: the counter-monotone coupling and Gaussian copulas
/// with non-positive correlations are asserted NLOD; the negative Clayton
/// family is only ever labeled "empirically NLOD-checked" and dominance runs
/// pass its samples through verify_nlod_empirical.
class DependenceModel {
  public:
    static DependenceModel independent(std::size_t n) {
        DependenceModel m(DepKind::independent, n);
        m.expr_ = "indep";
        return m;
    }

    static DependenceModel counter_monotone() {
        DependenceModel m(DepKind::counter_monotone, 2);
        m.expr_ = "countermono";
        return m;
    }

    static DependenceModel comonotone(std::size_t n) {
        DependenceModel m(DepKind::comonotone, n);
        m.expr_ = "comono";
        return m;
    }

    /// theta in [-1,0); theta = -1 coincides with the counter-monotone
    /// coupling, theta -> 0- with independence. Pairs only.
    static DependenceModel clayton_negative(double theta) {
        if (!(theta >= -1.0) || !(theta < 0.0))
            throw std::invalid_argument("clayton: theta must be in [-1,0)");
        DependenceModel m(DepKind::clayton_negative, 2);
        m.theta_ = theta;
        m.expr_ = "clayton(theta=" + format_double(theta) + ")";
        return m;
    }

    /// General correlation matrix: symmetric, unit diagonal, PSD (checked by
    /// Cholesky with a one-shot 1e-12 diagonal jitter at the PSD boundary).
    static DependenceModel gaussian(const std::vector<std::vector<double>>& sigma) {
        const std::size_t n = sigma.size();
        if (n < 2) throw std::invalid_argument("gauss: dimension must be >= 2");
        for (std::size_t i = 0; i < n; ++i) {
            if (sigma[i].size() != n) throw std::invalid_argument("gauss: matrix not square");
            if (std::abs(sigma[i][i] - 1.0) > 1e-12)
                throw std::invalid_argument("gauss: diagonal must be 1");
            for (std::size_t j = 0; j < n; ++j)
                if (std::abs(sigma[i][j] - sigma[j][i]) > 1e-12)
                    throw std::invalid_argument("gauss: matrix not symmetric");
        }
        DependenceModel m(DepKind::gaussian, n);
        m.chol_ = cholesky_with_jitter(sigma);
        m.nonpositive_offdiag_ = true;
        for (std::size_t i = 0; i < n && m.nonpositive_offdiag_; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && sigma[i][j] > 0.0) m.nonpositive_offdiag_ = false;
        m.expr_ = "gauss(matrix)";
        return m;
    }

    /// Equicorrelated Sigma with off-diagonal rho; the pairwise-negative
    /// feasibility bound rho >= -1/(n-1) is validated here.
    static DependenceModel gaussian_equicorrelated(std::size_t n, double rho) {
        if (n < 2) throw std::invalid_argument("gauss: dimension must be >= 2");
        if (rho < -1.0 / (static_cast<double>(n) - 1.0) - 1e-12 || rho > 1.0)
            throw std::invalid_argument("gauss: rho must be in [-1/(n-1), 1]");
        std::vector<std::vector<double>> sigma(n, std::vector<double>(n, rho));
        for (std::size_t i = 0; i < n; ++i) sigma[i][i] = 1.0;
        DependenceModel m = gaussian(sigma);
        m.expr_ = "gauss(rho=" + format_double(rho) + ")";
        return m;
    }

    DepKind kind() const { return kind_; }
    std::size_t dim() const { return n_; }
    double theta() const { return theta_; }
    const std::string& expression() const { return expr_; }

    /// True for models whose NLOD property is asserted, not merely sampled.
    bool nlod_guaranteed() const {
        switch (kind_) {
            case DepKind::independent:
            case DepKind::counter_monotone: return true;
            case DepKind::gaussian: return nonpositive_offdiag_;
            default: return false;
        }
    }

    /// Copula uniforms for one row; writes dim() values into u. Consumes a
    /// fixed number of engine draws per row for every model.
    void draw_row(Rng& rng, double* u) const {
        switch (kind_) {
            case DepKind::independent:
                for (std::size_t i = 0; i < n_; ++i) u[i] = rng.uniform();
                return;
            case DepKind::counter_monotone: {
                const double v = rng.uniform();
                u[0] = v;
                u[1] = 1.0 - v;
                return;
            }
            case DepKind::comonotone: {
                const double v = rng.uniform();
                for (std::size_t i = 0; i < n_; ++i) u[i] = v;
                return;
            }
            case DepKind::clayton_negative: {
                const double a = rng.uniform();
                const double w = rng.uniform();
                u[0] = a;
                u[1] = clayton_conditional(a, w, theta_);
                return;
            }
            case DepKind::gaussian: {
                std::vector<double> g(n_ + 1);
                for (std::size_t i = 0; i < n_; i += 2) {
                    const auto [z1, z2] = rng.normal_pair();
                    g[i] = z1;
                    g[i + 1] = z2;
                }
                for (std::size_t i = 0; i < n_; ++i) {
                    double z = 0.0;
                    for (std::size_t j = 0; j <= i; ++j) z += chol_[i * n_ + j] * g[j];
                    u[i] = clamp_open(normal_cdf(z));
                }
                return;
            }
        }
    }

    /// Bivariate copula CDF in closed form (all kinds except general
    /// Gaussian matrices); used by the analytic oracles.
    double copula_cdf2(double u, double v) const {
        switch (kind_) {
            case DepKind::independent: return u * v;
            case DepKind::counter_monotone: return std::max(u + v - 1.0, 0.0);
            case DepKind::comonotone: return std::min(u, v);
            case DepKind::clayton_negative: {
                const double s = -theta_;
                const double t = std::pow(u, s) + std::pow(v, s) - 1.0;
                return t <= 0.0 ? 0.0 : std::pow(t, 1.0 / s);
            }
            default:
                throw std::invalid_argument("copula_cdf2: no closed form for this model");
        }
    }

  private:
    DependenceModel(DepKind k, std::size_t n) : kind_(k), n_(n) {}

    static double clamp_open(double p) {
        constexpr double lo = 0x1.0p-54;
        const double hi = std::nextafter(1.0, 0.0);
        return std::min(std::max(p, lo), hi);
    }

    /// Conditional-distribution inverse of the Clayton copula for theta < 0:
    /// v = (1 - u^s (1 - w^{s/(1-s)}))^{1/s} with s = -theta; s = 1 is the
    /// counter-monotone limit.
    static double clayton_conditional(double u, double w, double theta) {
        const double s = -theta;
        if (s >= 1.0) return 1.0 - u;
        const double us = std::exp(s * std::log(u));
        const double one_minus_wpow = -std::expm1(s / (1.0 - s) * std::log(w));
        const double inner = -us * one_minus_wpow;  // = u^s (w^{s/(1-s)} - 1), in (-1, 0)
        return clamp_open(std::exp(std::log1p(inner) / s));
    }

    static std::vector<double> cholesky_with_jitter(
        const std::vector<std::vector<double>>& sigma) {
        const std::size_t n = sigma.size();
        for (double jitter : {0.0, 1e-12}) {
            std::vector<double> L(n * n, 0.0);
            bool ok = true;
            for (std::size_t i = 0; i < n && ok; ++i) {
                for (std::size_t j = 0; j <= i && ok; ++j) {
                    double s = sigma[i][j] + (i == j ? jitter : 0.0);
                    for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
                    if (i == j) {
                        if (s <= 0.0) { ok = false; break; }
                        L[i * n + i] = std::sqrt(s);
                    } else {
                        L[i * n + j] = s / L[j * n + j];
                    }
                }
            }
            if (ok) return L;
        }
        throw std::invalid_argument("gauss: correlation matrix is not PSD");
    }

    DepKind kind_;
    std::size_t n_;
    double theta_ = 0.0;
    bool nonpositive_offdiag_ = false;
    std::vector<double> chol_;
    std::string expr_;
};

/// Streams the joint sample row by row. Rows are drawn in fixed blocks of
/// kSampleBlockRows, each block from its own derived seed, so the output is
/// identical however the blocks are consumed.
template <typename Visitor>  // void(const double* row, std::size_t n)
void sample_joint_visit(const DependenceModel& model,
                        const std::vector<Distribution>& marginals, std::uint64_t seed,
                        std::size_t m, Visitor&& visit) {
    const std::size_t n = model.dim();
    if (marginals.size() != n)
        throw std::invalid_argument("sample_joint: marginals/dimension mismatch");
    if (m < 1) throw std::invalid_argument("sample_joint: m must be >= 1");
    std::vector<double> u(n + 1), x(n);
    const std::size_t blocks = (m + kSampleBlockRows - 1) / kSampleBlockRows;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng(stream_seed(seed, b));
        const std::size_t hi = std::min(m, (b + 1) * kSampleBlockRows);
        for (std::size_t r = b * kSampleBlockRows; r < hi; ++r) {
            model.draw_row(rng, u.data());
            for (std::size_t i = 0; i < n; ++i) x[i] = marginals[i].quantile(u[i]);
            visit(static_cast<const double*>(x.data()), n);
        }
    }
}

/// m x n joint sample, row-major.
inline std::vector<double> sample_joint(const DependenceModel& model,
                                        const std::vector<Distribution>& marginals,
                                        std::uint64_t seed, std::size_t m) {
    std::vector<double> out;
    out.reserve(m * model.dim());
    sample_joint_visit(model, marginals, seed, m,
                       [&](const double* row, std::size_t n) {
                           out.insert(out.end(), row, row + n);
                       });
    return out;
}

/// Empirical NLOD verdict on a grid of orthant corners placed at
/// per-coordinate empirical quantile levels.
struct NlodReport {
    Verdict verdict = Verdict::inconclusive;
    std::size_t m = 0, dim = 0;
    double delta = 1e-3;
    double eps_stat = 0.0;
    /// min over corners of  prod_i Fhat_i(x_i) - Hhat(x_1..x_n); NLOD needs
    /// this >= -eps_stat.
    double worst_margin = 0.0;
    std::vector<double> witness_corner;
    int levels = 0;

    json to_json() const {
        json j{{"criterion", "nlod-empirical"},
               {"verdict", to_string(verdict)},
               {"m", m},
               {"dim", dim},
               {"delta", delta},
               {"eps_stat", eps_stat},
               {"worst_margin", worst_margin},
               {"levels", levels}};
        j["witness"] = witness_corner.empty() ? json(nullptr) : json(witness_corner);
        return j;
    }
};

inline NlodReport verify_nlod_empirical(const std::vector<double>& samples, std::size_t n,
                                        double delta = 1e-3, int levels = 0) {
    if (n < 2 || samples.size() % n != 0)
        throw std::invalid_argument("verify_nlod_empirical: bad sample shape");
    const std::size_t m = samples.size() / n;
    if (levels <= 0) levels = n == 2 ? 19 : 7;

    NlodReport rep;
    rep.m = m;
    rep.dim = n;
    rep.delta = delta;
    rep.levels = levels;
    // one band per marginal plus one for the joint empirical CDF
    rep.eps_stat = static_cast<double>(n + 1) *
                   dkw_epsilon(m, delta / static_cast<double>(n + 1));

    // Corner values: empirical quantiles at evenly spaced interior levels.
    std::vector<std::vector<double>> cuts(n, std::vector<double>(static_cast<std::size_t>(levels)));
    {
        std::vector<double> col(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < m; ++r) col[r] = samples[r * n + i];
            std::sort(col.begin(), col.end());
            for (int l = 0; l < levels; ++l) {
                const double p = static_cast<double>(l + 1) / (levels + 1);
                const std::size_t rank =
                    std::min(m - 1, static_cast<std::size_t>(std::ceil(p * m)) - 1);
                cuts[i][static_cast<std::size_t>(l)] = col[rank];
            }
        }
    }

    // (levels+1)^n histogram of per-coordinate bin indices, then an in-place
    // prefix sum along each axis turns it into joint CDF counts at corners.
    const std::size_t side = static_cast<std::size_t>(levels) + 1;
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= side;
    if (cells > (std::size_t{1} << 26))
        throw std::invalid_argument("verify_nlod_empirical: dimension too large");
    std::vector<std::uint64_t> hist(cells, 0);
    for (std::size_t r = 0; r < m; ++r) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = cuts[i];
            // bin(x) = #{cuts < x}, so the prefix sum at level l counts
            // x <= cuts[l] exactly, ties included.
            const std::size_t bin = static_cast<std::size_t>(
                std::lower_bound(c.begin(), c.end(), samples[r * n + i]) - c.begin());
            idx = idx * side + bin;
        }
        ++hist[idx];
    }
    for (std::size_t axis = 0; axis < n; ++axis) {
        std::size_t stride = 1;
        for (std::size_t i = axis + 1; i < n; ++i) stride *= side;
        for (std::size_t base = 0; base < cells; ++base) {
            const std::size_t coord = (base / stride) % side;
            if (coord > 0) hist[base] += hist[base - stride];
        }
    }

    const double dm = static_cast<double>(m);
    double worst = kInf;
    std::vector<double> witness(n, 0.0);

    // Scan all corners (levels^n of them; the histogram holds joint counts
    // at bin boundaries, bin l corresponds to cut value cuts[i][l]).
    std::vector<std::size_t> it(n, 0);
    std::vector<double> marg(n);
    while (true) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) idx = idx * side + it[i];
        const double joint = static_cast<double>(hist[idx]) / dm;
        double prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            // marginal empirical CDF at cuts[i][it[i]]: joint count with all
            // other coordinates at the top bin
            std::size_t midx = 0;
            for (std::size_t kdim = 0; kdim < n; ++kdim)
                midx = midx * side + (kdim == i ? it[i] : side - 1);
            marg[i] = static_cast<double>(hist[midx]) / dm;
            prod *= marg[i];
        }
        const double margin = prod - joint;
        if (margin < worst) {
            worst = margin;
            for (std::size_t i = 0; i < n; ++i) witness[i] = cuts[i][it[i]];
        }
        // odometer over levels^n corners
        std::size_t axis = n;
        while (axis > 0) {
            --axis;
            if (++it[axis] < static_cast<std::size_t>(levels)) break;
            it[axis] = 0;
            if (axis == 0) { axis = n + 1; break; }
        }
        if (axis == n + 1) break;
    }

    rep.worst_margin = worst;
    rep.verdict = worst >= -rep.eps_stat ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::fail) rep.witness_corner = witness;
    return rep;
}

}  // namespace heavytail
