#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/combinators.hpp"
#include "heavytail/common.hpp"
#include "heavytail/dependence.hpp"
#include "heavytail/distribution.hpp"
#include "heavytail/membership.hpp"
#include "heavytail/quadrature.hpp"

namespace heavytail {

/// Shared shape of every dominance verdict. Margins are
/// F_target(x) - F_sum(x); dominance of the sum requires margin >= -epsilon
/// at every grid point (epsilon = 0 up to rounding for analytic modes, a DKW
/// band for empirical ones).
struct DominanceReport {
    std::string mode;  // "analytic-bound" | "quadrature" | "empirical"
    json config;
    std::vector<double> grid_points, target_cdf, sum_cdf, margins;
    double min_margin = 0.0;
    double epsilon = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    double delta = 0.0;
    json extras;

    json to_json() const {
        json j = config;
        j["mode"] = mode;
        j["min_margin"] = min_margin;
        j["epsilon"] = epsilon;
        j["verdict"] = pass ? "pass" : "fail";
        j["m"] = m;
        j["delta"] = delta;
        j["seed"] = seed;
        if (!extras.is_null()) j["extras"] = extras;
        j["table"] = json{{"x", grid_points},
                          {"target_cdf", target_cdf},
                          {"sum_cdf", sum_cdf},
                          {"margin", margins}};
        return j;
    }

    /// CSV projection, one row per grid point.
    std::string to_csv() const {
        std::string out = "x,target_cdf,sum_cdf,margin\n";
        for (std::size_t i = 0; i < grid_points.size(); ++i)
            out += format_double(grid_points[i]) + "," + format_double(target_cdf[i]) + "," +
                   format_double(sum_cdf[i]) + "," + format_double(margins[i]) + "\n";
        return out;
    }

    void finalize() {
        min_margin = margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
        pass = min_margin >= -epsilon;
    }
};

/// Exact certificate behind the main dominance theorem: prod_i F(x/theta_i)
/// <= F(x) pointwise. Valid for every NLOD joint law with these marginals,
/// no sampling involved. The product is evaluated in log space.
inline DominanceReport check_product_bound(const Distribution& dist, const WeightVector& w,
                                           const GridSpec& grid = {}) {
    const Distribution d = recentred_to_zero(dist);
    DominanceReport rep;
    rep.mode = "analytic-bound";
    rep.epsilon = 1e-12;  // floating-point rounding allowance; exact in the reals
    rep.config = json{{"dist", dist.expression()},
                      {"weights", w.values()},
                      {"dep", nullptr},
                      {"grid", grid.to_json()}};
    for (double x : grid.make()) {
        double lsum = 0.0;
        for (double t : w) lsum += d.log_cdf(x / t);
        const double bound = std::exp(lsum);
        const double fx = d.cdf(x);
        rep.grid_points.push_back(x);
        rep.target_cdf.push_back(fx);
        rep.sum_cdf.push_back(bound);
        rep.margins.push_back(fx - bound);
    }
    rep.finalize();
    return rep;
}

namespace detail {

/// P(sum_i w_i X_i <= x) for independent X_i with raw positive weights, by
/// quantile-space quadrature: condition on U_1 = F_1(X_1) and recurse.
inline double sum_cdf_raw(std::span<const Distribution> dists, std::span<const double> w,
                          double x, double abs_tol) {
    if (x <= 0.0) return 0.0;
    if (dists.size() == 1) return dists[0].cdf(x / w[0]);
    const double u_max = dists[0].cdf(x / w[0]);
    if (u_max <= 0.0) return 0.0;
    const auto rest_d = dists.subspan(1);
    const auto rest_w = w.subspan(1);
    const double inner_tol = abs_tol * 0.5;
    const auto integrand = [&](double u) {
        const double q = dists[0].quantile(u);
        const double rem = x - w[0] * q;
        // clamp: u slightly above F_1(x/w_1) can appear through node rounding
        if (rem <= 0.0) return 0.0;
        return sum_cdf_raw(rest_d, rest_w, rem, inner_tol);
    };
    const double v = integrate_adaptive(integrand, 0.0, u_max, abs_tol * 0.5);
    return std::min(1.0, std::max(0.0, v));
}

inline std::vector<double> sorted_weighted_sums(const DependenceModel& dep,
                                                const std::vector<Distribution>& marginals,
                                                const WeightVector& w, std::uint64_t seed,
                                                std::size_t m) {
    std::vector<double> sums;
    sums.reserve(m);
    sample_joint_visit(dep, marginals, seed, m, [&](const double* row, std::size_t n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * row[i];
        sums.push_back(s);
    });
    std::sort(sums.begin(), sums.end());
    return sums;
}

/// Default margin grid plus the finite sample deciles (mid-distribution
/// violations hide between log-grid points otherwise).
inline std::vector<double> grid_with_deciles(const GridSpec& grid,
                                             const std::vector<double>& sorted_sums) {
    std::vector<double> xs = grid.make();
    const std::size_t m = sorted_sums.size();
    for (int d = 1; d <= 9; ++d) {
        const double q = sorted_sums[std::min(m - 1, m * static_cast<std::size_t>(d) / 10)];
        if (std::isfinite(q)) xs.push_back(q);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace detail

/// Oracle for the independence case: P(sum_i theta_i X_i <= x) by nested
/// Gauss-Legendre quadrature with dyadic refinement toward the quantile
/// singularity. Throws QuadratureAccuracyError if abs_tol cannot be met.
inline double sum_cdf_independent(const std::vector<Distribution>& dists,
                                  const WeightVector& w, double x, double abs_tol = 1e-6) {
    if (dists.size() < 2)
        throw std::invalid_argument("sum_cdf_independent: need n >= 2 marginals");
    if (dists.size() != w.size())
        throw std::invalid_argument("sum_cdf_independent: weights/marginals mismatch");
    for (const auto& d : dists)
        if (!d.continuous())
            throw std::invalid_argument("sum_cdf_independent: marginals must be continuous");
    return detail::sum_cdf_raw(std::span<const Distribution>(dists.data(), dists.size()),
                               std::span<const double>(w.values().data(), w.size()), x,
                               abs_tol);
}

/// Empirical dominance check with a one-sided DKW band: samples
/// sum_i theta_i X_i under the given dependence model and requires
/// F_target >= F_hat_sum - eps on the grid (plus sample deciles). Infinite
/// samples count above every finite grid point. For the negative Clayton
/// model the drawn sample is also NLOD-verified and the sub-report attached.
inline DominanceReport check_dominance_empirical(const Distribution& target,
                                                 const std::vector<Distribution>& marginals,
                                                 const WeightVector& w,
                                                 const DependenceModel& dep,
                                                 std::uint64_t seed, std::size_t m,
                                                 double delta = 1e-3,
                                                 const GridSpec& grid = {}) {
    if (marginals.size() != dep.dim() || marginals.size() != w.size())
        throw std::invalid_argument("check_dominance_empirical: dimension mismatch");
    DominanceReport rep;
    rep.mode = "empirical";
    rep.seed = seed;
    rep.m = m;
    rep.delta = delta;
    rep.epsilon = dkw_epsilon(m, delta);
    json margs = json::array();
    for (const auto& d : marginals) margs.push_back(d.expression());
    rep.config = json{{"dist", target.expression()},
                      {"marginals", margs},
                      {"weights", w.values()},
                      {"dep", dep.expression()},
                      {"grid", grid.to_json()}};

    std::vector<double> sums;
    sums.reserve(m);
    if (dep.kind() == DepKind::clayton_negative) {
        const std::vector<double> mat = sample_joint(dep, marginals, seed, m);
        const std::size_t n = dep.dim();
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * mat[r * n + i];
            sums.push_back(s);
        }
        rep.extras["nlod_check"] = verify_nlod_empirical(mat, n, delta).to_json();
        std::sort(sums.begin(), sums.end());
    } else {
        sums = detail::sorted_weighted_sums(dep, marginals, w, seed, m);
    }

    for (double x : detail::grid_with_deciles(grid, sums)) {
        const double ft = target.cdf(x);
        const double fs = ecdf_at(sums, x);
        rep.grid_points.push_back(x);
        rep.target_cdf.push_back(ft);
        rep.sum_cdf.push_back(fs);
        rep.margins.push_back(ft - fs);
    }
    rep.finalize();
    return rep;
}

inline double value_at_risk(const Distribution& dist, double p) { return dist.quantile(p); }

/// VaR superadditivity at each level: sum_i VaR_p(theta_i X_i) = VaR_p(X)
/// by comonotonic additivity, compared against the empirical VaR of the
/// weighted sum with an order-statistic confidence slack.
struct VarSuperadditivityReport {
    json config;
    std::vector<double> p_levels, var_target, var_sum_empirical, var_sum_upper_ci;
    std::vector<bool> level_pass;
    bool pass = false;
    bool additivity_identity = true;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    double delta = 0.0;

    json to_json() const {
        json j = config;
        j["criterion"] = "var-superadditivity";
        j["verdict"] = pass ? "pass" : "fail";
        j["m"] = m;
        j["delta"] = delta;
        j["seed"] = seed;
        j["additivity_identity"] = additivity_identity;
        json table = json::array();
        for (std::size_t i = 0; i < p_levels.size(); ++i)
            table.push_back(json{{"p", p_levels[i]},
                                 {"var_target", var_target[i]},
                                 {"var_sum_empirical", var_sum_empirical[i]},
                                 {"var_sum_upper_ci", var_sum_upper_ci[i]},
                                 {"pass", static_cast<bool>(level_pass[i])}});
        j["var_table"] = table;
        return j;
    }

    std::string to_csv() const {
        std::string out = "p,var_target,var_sum_empirical,var_sum_upper_ci,pass\n";
        for (std::size_t i = 0; i < p_levels.size(); ++i)
            out += format_double(p_levels[i]) + "," + format_double(var_target[i]) + "," +
                   format_double(var_sum_empirical[i]) + "," +
                   format_double(var_sum_upper_ci[i]) + "," +
                   (level_pass[i] ? "true" : "false") + "\n";
        return out;
    }
};

inline VarSuperadditivityReport check_var_superadditivity(
    const Distribution& dist, const WeightVector& w, const std::vector<double>& p_levels,
    const DependenceModel& dep, std::uint64_t seed, std::size_t m, double delta = 1e-3) {
    for (double p : p_levels)
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("check_var_superadditivity: p-grid outside (0,1)");
    if (w.size() != dep.dim())
        throw std::invalid_argument("check_var_superadditivity: dimension mismatch");

    VarSuperadditivityReport rep;
    rep.seed = seed;
    rep.m = m;
    rep.delta = delta;
    rep.config = json{{"dist", dist.expression()},
                      {"weights", w.values()},
                      {"dep", dep.expression()},
                      {"p_levels", p_levels}};

    const std::vector<Distribution> marginals(w.size(), dist);
    const std::vector<double> sums = detail::sorted_weighted_sums(dep, marginals, w, seed, m);
    const double z = normal_quantile(1.0 - delta);
    const double dm = static_cast<double>(m);

    bool all = true;
    for (double p : p_levels) {
        const double v = dist.quantile(p);
        // comonotonic additivity at the quantile level
        double split = 0.0;
        for (double t : w) split += t * v;
        if (std::isfinite(v) && std::abs(split - v) > 1e-9 * std::max(1.0, std::abs(v)))
            rep.additivity_identity = false;

        const double rank = std::ceil(dm * p);
        const double rank_hi =
            std::min(dm, std::ceil(dm * p + z * std::sqrt(dm * p * (1.0 - p))));
        const double emp = sums[static_cast<std::size_t>(rank) - 1];
        const double emp_hi = sums[static_cast<std::size_t>(rank_hi) - 1];
        const bool ok = v <= emp_hi * (1.0 + 1e-12) || (std::isinf(v) && std::isinf(emp_hi));
        rep.p_levels.push_back(p);
        rep.var_target.push_back(v);
        rep.var_sum_empirical.push_back(emp);
        rep.var_sum_upper_ci.push_back(emp_hi);
        rep.level_pass.push_back(ok);
        all = all && ok;
    }
    rep.pass = all && rep.additivity_identity;
    return rep;
}

enum class RatioMethod { quadrature, monte_carlo };

/// VaR_p(X_1+...+X_n) / (n VaR_p(X_1)) for iid marginals, tabulated along a
/// p-sequence. Regular variation with tail index alpha < 1 predicts the
/// limit n^{1/alpha - 1} as p -> 1.
struct VarRatioReport {
    json config;
    std::vector<double> p_levels, var_single, var_sum, ratio;
    std::optional<double> expected_limit;
    std::uint64_t seed = 0;
    std::size_t m = 0;

    json to_json() const {
        json j = config;
        j["criterion"] = "asymptotic-var-ratio";
        j["expected_limit"] = expected_limit ? json(*expected_limit) : json(nullptr);
        if (m > 0) {
            j["m"] = m;
            j["seed"] = seed;
        }
        json table = json::array();
        for (std::size_t i = 0; i < p_levels.size(); ++i)
            table.push_back(json{{"p", p_levels[i]},
                                 {"var_single", var_single[i]},
                                 {"var_sum", var_sum[i]},
                                 {"ratio", ratio[i]}});
        j["ratio_table"] = table;
        return j;
    }

    std::string to_csv() const {
        std::string out = "p,var_single,var_sum,ratio\n";
        for (std::size_t i = 0; i < p_levels.size(); ++i)
            out += format_double(p_levels[i]) + "," + format_double(var_single[i]) + "," +
                   format_double(var_sum[i]) + "," + format_double(ratio[i]) + "\n";
        return out;
    }
};

inline VarRatioReport asymptotic_var_ratio(const Distribution& dist, std::size_t n,
                                           const std::vector<double>& p_levels,
                                           RatioMethod method = RatioMethod::quadrature,
                                           std::uint64_t seed = 42, std::size_t m = 1000000,
                                           double quad_tol = 1e-6) {
    if (n < 2) throw std::invalid_argument("asymptotic_var_ratio: need n >= 2");
    const auto alpha = dist.tail_index();
    if (!alpha)
        throw std::invalid_argument(
            "asymptotic_var_ratio: distribution has no regular-variation tail index");
    for (double p : p_levels)
        if (!(p > 0.0) || !(p < 1.0))
            throw std::invalid_argument("asymptotic_var_ratio: p outside (0,1)");

    VarRatioReport rep;
    rep.config = json{{"dist", dist.expression()},
                      {"n", n},
                      {"p_levels", p_levels},
                      {"method", method == RatioMethod::quadrature ? "quadrature" : "mc"},
                      {"tail_index", *alpha}};
    rep.expected_limit =
        *alpha < 1.0 ? std::optional<double>(std::pow(static_cast<double>(n), 1.0 / *alpha - 1.0))
                     : std::optional<double>(1.0);

    const std::vector<Distribution> dists(n, dist);
    const std::vector<double> ones(n, 1.0);
    std::vector<double> mc_sums;
    if (method == RatioMethod::monte_carlo) {
        rep.seed = seed;
        rep.m = m;
        WeightVector wn(std::vector<double>(n, 1.0 / static_cast<double>(n)));
        mc_sums = detail::sorted_weighted_sums(DependenceModel::independent(n), dists, wn,
                                               seed, m);
    }

    for (double p : p_levels) {
        const double v1 = dist.quantile(p);
        double vsum;
        if (method == RatioMethod::quadrature) {
            const auto cdf_sum = [&](double x) {
                return detail::sum_cdf_raw(std::span<const Distribution>(dists.data(), n),
                                           std::span<const double>(ones.data(), n), x,
                                           quad_tol);
            };
            double lo = 0.0;
            double hi = static_cast<double>(n) *
                        dist.quantile(std::exp(std::log(p) / static_cast<double>(n)));
            while (cdf_sum(hi) < p) hi *= 2.0;  // defensive; p^{1/n} bracket should hold
            for (int it = 0; it < 200 && (hi - lo) > 1e-6 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (cdf_sum(mid) >= p)
                    hi = mid;
                else
                    lo = mid;
            }
            vsum = hi;
        } else {
            const double rank = std::ceil(static_cast<double>(m) * p);
            vsum = static_cast<double>(n) * mc_sums[static_cast<std::size_t>(rank) - 1];
        }
        rep.p_levels.push_back(p);
        rep.var_single.push_back(v1);
        rep.var_sum.push_back(vsum);
        rep.ratio.push_back(vsum / (static_cast<double>(n) * v1));
    }
    return rep;
}

/// Thrown when the scaling hypothesis P(cX > t) >= c P(X > t) fails on the
/// pre-check grid; carries the witnessing pair.
struct ScalingHypothesisError : std::domain_error {
    ScalingHypothesisError(double c_, double t_)
        : std::domain_error("random-weight bound: scaling hypothesis P(cX>t) >= cP(X>t) "
                            "fails at c=" + format_double(c_) + ", t=" + format_double(t_)),
          c(c_), t(t_) {}
    double c, t;
};

/// Random weight vector source: draws (xi_1..xi_n) with xi_i >= 0 and
/// sum <= 1, independently of the risks.
struct WeightSampler {
    std::size_t dim;
    std::function<std::vector<double>(Rng&)> draw;
    std::string expression;
};

/// Deterministic weights (reduces to the plain dominance bound).
inline WeightSampler constant_weight_sampler(const WeightVector& w) {
    std::vector<double> vals = w.values();
    std::string expr = "const(";
    for (std::size_t i = 0; i < vals.size(); ++i)
        expr += (i ? "," : "") + format_double(vals[i]);
    expr += ")";
    return {vals.size(), [vals](Rng&) { return vals; }, expr};
}

/// Triggering events: xi_i = theta_i 1{A_i} with independent events A_i.
inline WeightSampler triggering_event_sampler(const WeightVector& theta,
                                              const std::vector<double>& event_probs) {
    if (theta.size() != event_probs.size())
        throw std::invalid_argument("triggering_event_sampler: size mismatch");
    for (double p : event_probs)
        if (!(p >= 0.0) || !(p <= 1.0))
            throw std::invalid_argument("triggering_event_sampler: probs must be in [0,1]");
    std::vector<double> th = theta.values();
    std::string expr = "events(";
    for (std::size_t i = 0; i < th.size(); ++i)
        expr += (i ? ";" : "") + format_double(th[i]) + ":" + format_double(event_probs[i]);
    expr += ")";
    return {th.size(),
            [th, event_probs](Rng& rng) {
                std::vector<double> xi(th.size());
                for (std::size_t i = 0; i < th.size(); ++i)
                    xi[i] = rng.uniform() < event_probs[i] ? th[i] : 0.0;
                return xi;
            },
            expr};
}

/// Random-weight lower bound P(sum xi_i X_i > x) >= E(sum xi_i) P(X > x),
/// checked empirically after an analytic pre-check of the scaling
/// hypothesis on a (c,t) grid. Risks are sampled iid.
struct RandomWeightReport {
    json config;
    std::vector<double> grid_points, lhs, rhs, margins;
    double min_margin = 0.0, eps_stat = 0.0, mean_weight_sum = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    double delta = 0.0;

    json to_json() const {
        json j = config;
        j["criterion"] = "random-weight-bound";
        j["verdict"] = pass ? "pass" : "fail";
        j["m"] = m;
        j["delta"] = delta;
        j["seed"] = seed;
        j["eps_stat"] = eps_stat;
        j["min_margin"] = min_margin;
        j["mean_weight_sum"] = mean_weight_sum;
        j["table"] =
            json{{"x", grid_points}, {"lhs", lhs}, {"rhs", rhs}, {"margin", margins}};
        return j;
    }
};

inline void check_scaling_hypothesis(const Distribution& dist, int c_points = 20,
                                     int t_points = 50, const GridSpec& t_grid = {}) {
    const std::vector<double> ts = [&] {
        GridSpec g = t_grid;
        g.points = t_points;
        return g.make();
    }();
    for (int j = 1; j <= c_points; ++j) {
        const double c = static_cast<double>(j) / c_points;
        for (double t : ts) {
            const double lhs = dist.survival(t / c);
            const double rhs = c * dist.survival(t);
            if (lhs < rhs - 1e-12 * std::max(1.0, rhs)) throw ScalingHypothesisError(c, t);
        }
    }
}

inline RandomWeightReport check_random_weight_bound(const Distribution& dist,
                                                    const WeightSampler& sampler,
                                                    std::uint64_t seed, std::size_t m,
                                                    const GridSpec& grid = {},
                                                    double delta = 1e-3) {
    check_scaling_hypothesis(dist);

    RandomWeightReport rep;
    rep.seed = seed;
    rep.m = m;
    rep.delta = delta;
    rep.eps_stat = 2.0 * dkw_epsilon(m, delta);  // LHS band + weight-mean band
    rep.config = json{{"dist", dist.expression()},
                      {"weights", sampler.expression},
                      {"dep", "indep"},
                      {"grid", grid.to_json()},
                      {"scaling_precheck", "pass"}};

    const std::size_t n = sampler.dim;
    const std::vector<double> xs = grid.make();
    std::vector<std::uint64_t> exceed(xs.size(), 0);
    double weight_sum_acc = 0.0;

    Rng rng(seed);
    std::vector<double> risks(n);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t i = 0; i < n; ++i) risks[i] = dist.quantile(rng.uniform());
        const std::vector<double> xi = sampler.draw(rng);
        double s = 0.0, xsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xsum += xi[i];
            if (xi[i] > 0.0) s += xi[i] * risks[i];  // 0 * inf must not poison the sum
        }
        if (xsum > 1.0 + 1e-12)
            throw std::invalid_argument("check_random_weight_bound: sampler drew sum > 1");
        weight_sum_acc += xsum;
        for (std::size_t k = 0; k < xs.size(); ++k)
            if (s > xs[k]) ++exceed[k];
    }
    rep.mean_weight_sum = weight_sum_acc / static_cast<double>(m);

    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double lhs = static_cast<double>(exceed[k]) / static_cast<double>(m);
        const double rhs = rep.mean_weight_sum * dist.survival(xs[k]);
        rep.grid_points.push_back(xs[k]);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.margins.push_back(lhs - rhs);
    }
    rep.min_margin = *std::min_element(rep.margins.begin(), rep.margins.end());
    rep.pass = rep.min_margin >= -rep.eps_stat;
    return rep;
}

/// Exploratory Schur-type comparison: with gamma majorized by eta and iid
/// (or dependent) risks, compares the empirical CDFs of the two weighted
/// sums. Reports evidence only; no theorem backs the general case.
struct MajorizationReport {
    json config;
    std::vector<double> grid_points, eta_cdf, gamma_cdf, margins;
    double min_margin = 0.0, eps_stat = 0.0;
    bool consistent = false;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    double delta = 0.0;

    json to_json() const {
        json j = config;
        j["criterion"] = "majorization-experiment";
        j["verdict"] = consistent ? "consistent" : "violation-candidate";
        j["exploratory"] = true;
        j["m"] = m;
        j["delta"] = delta;
        j["seed"] = seed;
        j["eps_stat"] = eps_stat;
        j["min_margin"] = min_margin;
        j["table"] = json{{"x", grid_points},
                          {"eta_sum_cdf", eta_cdf},
                          {"gamma_sum_cdf", gamma_cdf},
                          {"margin", margins}};
        return j;
    }
};

inline bool is_majorized_by(const std::vector<double>& gamma, const std::vector<double>& eta) {
    if (gamma.size() != eta.size() || gamma.empty()) return false;
    double sg = std::accumulate(gamma.begin(), gamma.end(), 0.0);
    double se = std::accumulate(eta.begin(), eta.end(), 0.0);
    if (std::abs(sg - se) > 1e-9 * std::max(1.0, std::abs(se))) return false;
    std::vector<double> g = gamma, e = eta;
    std::sort(g.begin(), g.end());
    std::sort(e.begin(), e.end());
    double pg = 0.0, pe = 0.0;
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        pg += g[k];
        pe += e[k];
        if (pg < pe - 1e-12) return false;  // ascending partial sums of gamma dominate
    }
    return true;
}

inline MajorizationReport majorization_experiment(const Distribution& dist,
                                                  const std::vector<double>& eta,
                                                  const std::vector<double>& gamma,
                                                  const DependenceModel& dep,
                                                  std::uint64_t seed, std::size_t m,
                                                  double delta = 1e-3,
                                                  const GridSpec& grid = {}) {
    if (eta.size() != dep.dim() || gamma.size() != dep.dim())
        throw std::invalid_argument("majorization_experiment: dimension mismatch");
    for (double v : eta)
        if (!(v > 0.0)) throw std::invalid_argument("majorization_experiment: eta must be > 0");
    for (double v : gamma)
        if (!(v > 0.0))
            throw std::invalid_argument("majorization_experiment: gamma must be > 0");
    if (!is_majorized_by(gamma, eta))
        throw std::invalid_argument(
            "majorization_experiment: gamma is not majorized by eta");

    MajorizationReport rep;
    rep.seed = seed;
    rep.m = m;
    rep.delta = delta;
    rep.eps_stat = 2.0 * dkw_epsilon(m, delta);  // two empirical CDFs compared
    rep.config = json{{"dist", dist.expression()},
                      {"eta", eta},
                      {"gamma", gamma},
                      {"dep", dep.expression()},
                      {"grid", grid.to_json()}};

    const std::size_t n = dep.dim();
    const std::vector<Distribution> marginals(n, dist);
    std::vector<double> se, sg;
    se.reserve(m);
    sg.reserve(m);
    sample_joint_visit(dep, marginals, seed, m, [&](const double* row, std::size_t nn) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            a += eta[i] * row[i];
            b += gamma[i] * row[i];
        }
        se.push_back(a);
        sg.push_back(b);
    });
    std::sort(se.begin(), se.end());
    std::sort(sg.begin(), sg.end());

    for (double x : detail::grid_with_deciles(grid, se)) {
        const double fe = ecdf_at(se, x);
        const double fg = ecdf_at(sg, x);
        rep.grid_points.push_back(x);
        rep.eta_cdf.push_back(fe);
        rep.gamma_cdf.push_back(fg);
        rep.margins.push_back(fe - fg);  // Schur order predicts eta-sum <=_st gamma-sum
    }
    rep.min_margin = *std::min_element(rep.margins.begin(), rep.margins.end());
    rep.consistent = rep.min_margin >= -rep.eps_stat;
    return rep;
}

/// Two-point risks P(X=0)=1-p, P(X=inf)=p: the mass of the weighted sum at
/// +inf has closed form under independence (1-(1-p)^n) and comonotonicity
/// (p), and the counting identity #{sum=inf} >= #{X_1=inf} holds row by row
/// for any joint law.
struct DeadlyRiskReport {
    json config;
    std::size_t count_inf = 0, count_first_inf = 0;
    double observed = 0.0;
    std::optional<double> expected;  // set for indep / comono models
    double binomial_3sd = 0.0;
    bool count_identity = false;
    bool pass = false;
    std::uint64_t seed = 0;
    std::size_t m = 0;

    json to_json() const {
        json j = config;
        j["criterion"] = "deadly-risk";
        j["verdict"] = pass ? "pass" : "fail";
        j["m"] = m;
        j["seed"] = seed;
        j["count_inf"] = count_inf;
        j["count_first_inf"] = count_first_inf;
        j["observed_p_sum_inf"] = observed;
        j["expected"] = expected ? json(*expected) : json(nullptr);
        j["binomial_3sd"] = binomial_3sd;
        j["count_identity"] = count_identity;
        return j;
    }
};

inline DeadlyRiskReport deadly_risk_experiment(double p, const WeightVector& w,
                                               const DependenceModel& dep,
                                               std::uint64_t seed, std::size_t m) {
    const std::size_t n = dep.dim();
    if (w.size() != n) throw std::invalid_argument("deadly_risk_experiment: dim mismatch");
    DeadlyRiskReport rep;
    rep.seed = seed;
    rep.m = m;
    rep.config = json{{"dist", deadly(p).expression()},
                      {"weights", w.values()},
                      {"dep", dep.expression()}};

    const std::vector<Distribution> marginals(n, deadly(p));
    sample_joint_visit(dep, marginals, seed, m, [&](const double* row, std::size_t nn) {
        bool any_inf = false;
        for (std::size_t i = 0; i < nn; ++i) any_inf = any_inf || std::isinf(row[i]);
        if (any_inf) ++rep.count_inf;              // sum = inf iff some coordinate is
        if (std::isinf(row[0])) ++rep.count_first_inf;
    });
    rep.observed = static_cast<double>(rep.count_inf) / static_cast<double>(m);
    rep.count_identity = rep.count_inf >= rep.count_first_inf;

    if (dep.kind() == DepKind::independent)
        rep.expected = 1.0 - std::pow(1.0 - p, static_cast<double>(n));
    else if (dep.kind() == DepKind::comonotone)
        rep.expected = p;
    bool stat_ok = true;
    if (rep.expected) {
        rep.binomial_3sd =
            3.0 * std::sqrt(*rep.expected * (1.0 - *rep.expected) / static_cast<double>(m));
        stat_ok = std::abs(rep.observed - *rep.expected) <= rep.binomial_3sd;
    }
    rep.pass = stat_ok && rep.count_identity;
    return rep;
}

}  // namespace heavytail
