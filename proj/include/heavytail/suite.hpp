#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/combinators.hpp"
#include "heavytail/common.hpp"
#include "heavytail/dependence.hpp"
#include "heavytail/distribution.hpp"
#include "heavytail/dominance.hpp"
#include "heavytail/membership.hpp"
#include "heavytail/parse.hpp"

namespace heavytail {

/// One verification-battery item. The report is the deterministic body that
/// reproducibility compares byte for byte: no timestamps or wall times here.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    json report;
};

struct BatteryOptions {
    bool with_reproducibility = true;
    /// Extra distribution added to the membership battery and expected to
    /// pass; injecting a known counterexample flips the suite red.
    std::optional<std::string> inject_expression;
};

namespace suite_detail {

inline std::vector<Distribution> h_valid_members() {
    return {frechet(0.5),         frechet(1.0),   pareto(0.5),
            pareto(1.0),          generalized_pareto(1.0, 1.0),
            generalized_pareto(2.0, 1.0),         burr(0.8, 0.9),
            inverse_burr(2.0, 0.8),               log_pareto(0.9),
            stoppa(0.9, 2.0),     inverse_geometric(1.0)};
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) {
    return stream_seed(seed, 0x100 + k);
}

inline CriterionResult membership_battery(std::uint64_t /*seed*/,
                                          const std::optional<std::string>& inject) {
    CriterionResult r{1, "membership-battery", true, json::object()};
    json members = json::array(), counterexamples = json::array();
    std::vector<Distribution> good = h_valid_members();
    if (inject) good.push_back(parse_distribution(*inject));
    for (const auto& d : good) {
        const MembershipReport rep = check_subadditive(d);
        r.pass = r.pass && rep.verdict == Verdict::pass;
        members.push_back(rep.to_json());
    }
    for (const auto& d : {frechet(1.5), pareto(2.0), burr(1.2, 1.0)}) {
        const MembershipReport rep = check_subadditive(d);
        r.pass = r.pass && rep.verdict == Verdict::fail && rep.witness.has_value();
        counterexamples.push_back(rep.to_json());
    }
    r.report = json{{"members", members}, {"counterexamples", counterexamples}};
    return r;
}

inline CriterionResult closure_battery(std::uint64_t /*seed*/) {
    CriterionResult r{2, "closure-battery", true, json::object()};
    const std::vector<Distribution> outputs = {
        power(pareto(0.8), 0.5),
        power(pareto(0.8), 2.0),
        max_of(pareto(1.0), frechet(0.8)),
        convex_transform(pareto(1.0), transform_square()),
        mixture({pareto(1.0), pareto(0.5)}, WeightVector{0.3, 0.7}),
    };
    json checks = json::array();
    for (const auto& d : outputs) {
        const MembershipReport rep = check_subadditive(d);
        r.pass = r.pass && rep.verdict == Verdict::pass;
        checks.push_back(rep.to_json());
    }
    const OrderingVerdict ord = check_stochastic_ordering({pareto(1.0), pareto(0.5)});
    r.pass = r.pass && ord.ordered;
    r.report = json{{"closure_checks", checks}, {"mixture_ordering", ord.ordered}};
    return r;
}

inline CriterionResult product_bound_battery(std::uint64_t /*seed*/) {
    CriterionResult r{3, "exact-product-bound", true, json::object()};
    const std::vector<std::vector<double>> weight_sets = {
        {0.5, 0.5}, {0.9, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.7, 0.2, 0.1}};
    json rows = json::array();
    for (const auto& d : h_valid_members()) {
        for (const auto& ws : weight_sets) {
            const DominanceReport rep = check_product_bound(d, WeightVector(ws));
            r.pass = r.pass && rep.pass;
            rows.push_back(json{{"dist", d.expression()},
                                {"weights", ws},
                                {"min_margin", rep.min_margin},
                                {"verdict", rep.pass ? "pass" : "fail"}});
        }
    }
    // boundary equality: additive h means the certificate is tight
    double worst_abs = 0.0;
    for (const auto& ws : weight_sets) {
        const DominanceReport rep = check_product_bound(frechet(1.0), WeightVector(ws));
        for (double mg : rep.margins) worst_abs = std::max(worst_abs, std::abs(mg));
    }
    r.pass = r.pass && worst_abs <= 1e-12;
    r.report = json{{"checks", rows}, {"frechet1_max_abs_margin", worst_abs}};
    return r;
}

inline CriterionResult empirical_dominance_battery(std::uint64_t seed) {
    CriterionResult r{4, "statistical-dominance", true, json::object()};
    const std::size_t m = 1000000;
    json runs = json::array();
    std::uint64_t k = 0;
    for (const auto& d : {pareto(1.0), burr(0.8, 0.9)}) {
        const std::vector<Distribution> marginals = {d, d};
        const WeightVector w{0.5, 0.5};
        const std::vector<DependenceModel> deps = {
            DependenceModel::independent(2), DependenceModel::counter_monotone(),
            DependenceModel::gaussian_equicorrelated(2, -0.4),
            DependenceModel::clayton_negative(-0.5)};
        for (const auto& dep : deps) {
            const DominanceReport rep =
                check_dominance_empirical(d, marginals, w, dep, sub_seed(seed, k++), m);
            r.pass = r.pass && rep.pass;
            runs.push_back(json{{"dist", d.expression()},
                                {"dep", dep.expression()},
                                {"min_margin", rep.min_margin},
                                {"epsilon", rep.epsilon},
                                {"verdict", rep.pass ? "pass" : "fail"}});
        }
    }
    r.report = json{{"m", m}, {"delta", 1e-3}, {"runs", runs}};
    return r;
}

inline CriterionResult oracle_agreement(std::uint64_t seed) {
    CriterionResult r{5, "quadrature-vs-monte-carlo", true, json::object()};
    const std::size_t m = 10000000;
    const double tol = 3.0 * std::sqrt(std::log(2.0 / 1e-3) / (2.0 * static_cast<double>(m)));
    const std::vector<Distribution> dists = {pareto(1.0), pareto(1.0)};
    const WeightVector w{0.5, 0.5};
    GridSpec grid;
    grid.points = 20;
    const std::vector<double> xs = grid.make();

    // streaming counts of sum <= x at the grid points (no 10^7-row matrix)
    std::vector<std::uint64_t> counts(xs.size(), 0);
    sample_joint_visit(DependenceModel::independent(2), dists, sub_seed(seed, 50), m,
                       [&](const double* row, std::size_t) {
                           const double s = 0.5 * row[0] + 0.5 * row[1];
                           const auto it = std::lower_bound(xs.begin(), xs.end(), s);
                           if (it != xs.end())
                               ++counts[static_cast<std::size_t>(it - xs.begin())];
                       });
    // counts[k] currently holds #{x_{k-1} < s <= x_k}; prefix-sum to CDF counts
    for (std::size_t k2 = 1; k2 < counts.size(); ++k2) counts[k2] += counts[k2 - 1];

    json rows = json::array();
    double worst = 0.0;
    for (std::size_t k2 = 0; k2 < xs.size(); ++k2) {
        const double quad = sum_cdf_independent(dists, w, xs[k2]);
        const double mc = static_cast<double>(counts[k2]) / static_cast<double>(m);
        const double diff = std::abs(quad - mc);
        worst = std::max(worst, diff);
        rows.push_back(json{{"x", xs[k2]}, {"quadrature", quad}, {"mc", mc}, {"abs_diff", diff}});
    }
    r.pass = worst <= tol;
    r.report = json{{"m", m}, {"tolerance", tol}, {"max_abs_diff", worst}, {"rows", rows}};
    return r;
}

inline CriterionResult deadly_battery(std::uint64_t seed) {
    CriterionResult r{6, "deadly-risks", true, json::object()};
    const std::size_t m = 1000000;
    json runs = json::array();
    std::uint64_t k = 100;
    for (std::size_t n : {std::size_t{2}, std::size_t{3}}) {
        const WeightVector w(std::vector<double>(n, 1.0 / static_cast<double>(n)));
        for (const auto& dep :
             {DependenceModel::independent(n), DependenceModel::comonotone(n)}) {
            const DeadlyRiskReport rep =
                deadly_risk_experiment(0.3, w, dep, sub_seed(seed, k++), m);
            r.pass = r.pass && rep.pass;
            runs.push_back(rep.to_json());
        }
    }
    r.report = json{{"m", m}, {"runs", runs}};
    return r;
}

inline CriterionResult r_mean_battery(std::uint64_t seed) {
    CriterionResult r{7, "generalized-mean-dominance", true, json::object()};
    const std::size_t m = 1000000;
    const std::vector<Distribution> marginals = {pareto(0.7), burr(0.8, 0.9)};
    const WeightVector w{0.5, 0.5};
    json runs = json::array();
    std::uint64_t k = 200;
    for (double rr : {0.0, 1.0}) {
        const Distribution target = generalized_r_mean(marginals, w, rr);
        const DominanceReport rep = check_dominance_empirical(
            target, marginals, w, DependenceModel::independent(2), sub_seed(seed, k++), m);
        r.pass = r.pass && rep.pass;
        runs.push_back(json{{"r", rr},
                            {"min_margin", rep.min_margin},
                            {"epsilon", rep.epsilon},
                            {"verdict", rep.pass ? "pass" : "fail"}});
    }
    // power-mean monotonicity of the target CDFs on the grid
    const Distribution m0 = generalized_r_mean(marginals, w, 0.0);
    const Distribution m1 = generalized_r_mean(marginals, w, 1.0);
    const Distribution m2 = generalized_r_mean(marginals, w, 2.0);
    double worst = kInf;
    for (double x : GridSpec{}.make()) {
        const double c0 = m0.cdf(x), c1 = m1.cdf(x), c2 = m2.cdf(x);
        worst = std::min(worst, std::min(c1 - c0, c2 - c1));
    }
    const bool monotone = worst >= -1e-12;
    r.pass = r.pass && monotone;
    r.report = json{{"m", m}, {"runs", runs}, {"r_monotonicity_min_gap", worst}};
    return r;
}

inline CriterionResult super_classes_battery(std::uint64_t /*seed*/) {
    CriterionResult r{8, "super-frechet-super-pareto", true, json::object()};
    json rows = json::array();
    for (const auto& d : {pareto(1.0), frechet(0.9), burr(0.9, 0.9)}) {
        const MembershipReport rep = check_super_frechet(d);
        r.pass = r.pass && rep.verdict == Verdict::pass;
        rows.push_back(rep.to_json());
    }
    for (const auto& d : {pareto(0.8), burr(0.8, 0.9), log_pareto(0.9)}) {
        const MembershipReport rep = check_super_pareto(d);
        r.pass = r.pass && rep.verdict == Verdict::pass;
        rows.push_back(rep.to_json());
    }
    // the separating example: in H but not super-Frechet
    const MembershipReport sf = check_super_frechet(inverse_geometric(1.0));
    const MembershipReport sub = check_subadditive(inverse_geometric(1.0));
    r.pass = r.pass && sf.verdict == Verdict::fail && sub.verdict == Verdict::pass;
    rows.push_back(sf.to_json());
    rows.push_back(sub.to_json());
    r.report = json{{"checks", rows}};
    return r;
}

inline CriterionResult var_battery(std::uint64_t seed) {
    CriterionResult r{9, "value-at-risk", true, json::object()};
    const double v99 = value_at_risk(pareto(1.0), 0.99);
    const bool exact = std::abs(v99 - 99.0) <= 99.0 * 1e-12;
    const VarSuperadditivityReport rep = check_var_superadditivity(
        pareto(1.0), WeightVector{0.5, 0.5}, {0.9, 0.99, 0.999},
        DependenceModel::independent(2), sub_seed(seed, 300), 1000000);
    r.pass = exact && rep.pass;
    r.report = json{{"var_99_pareto1", v99},
                    {"var_99_exact", exact},
                    {"superadditivity", rep.to_json()}};
    return r;
}

inline CriterionResult ratio_battery(std::uint64_t /*seed*/) {
    CriterionResult r{10, "asymptotic-var-ratio", true, json::object()};
    const VarRatioReport rep =
        asymptotic_var_ratio(pareto(0.5), 2, {1.0 - 1e-4}, RatioMethod::quadrature);
    const double ratio = rep.ratio.front();
    r.pass = ratio >= 1.7 && ratio <= 2.3;
    r.report = rep.to_json();
    return r;
}

inline CriterionResult random_weight_battery(std::uint64_t seed) {
    CriterionResult r{11, "random-weight-bound", true, json::object()};
    check_scaling_hypothesis(pareto(1.0));  // throws on failure
    const RandomWeightReport rep = check_random_weight_bound(
        pareto(1.0), triggering_event_sampler(WeightVector{0.5, 0.5}, {0.5, 0.5}),
        sub_seed(seed, 400), 1000000);
    r.pass = rep.pass;
    r.report = rep.to_json();
    return r;
}

inline std::vector<CriterionResult> run_items(std::uint64_t seed,
                                              const std::optional<std::string>& inject) {
    return {membership_battery(seed, inject),
            closure_battery(seed),
            product_bound_battery(seed),
            empirical_dominance_battery(seed),
            oracle_agreement(seed),
            deadly_battery(seed),
            r_mean_battery(seed),
            super_classes_battery(seed),
            var_battery(seed),
            ratio_battery(seed),
            random_weight_battery(seed)};
}

}  // namespace suite_detail

/// Runs the verification battery. With reproducibility enabled the first
/// eleven items are evaluated three times: twice with the given seed (report
/// bodies must match byte for byte) and once with a flipped seed (verdicts
/// must be unchanged).
inline std::vector<CriterionResult> run_acceptance_battery(std::uint64_t seed,
                                                           const BatteryOptions& opt = {}) {
    std::vector<CriterionResult> items = suite_detail::run_items(seed, opt.inject_expression);
    if (!opt.with_reproducibility) return items;

    const std::vector<CriterionResult> again =
        suite_detail::run_items(seed, opt.inject_expression);
    const std::vector<CriterionResult> other = suite_detail::run_items(
        seed ^ 0x9E3779B97F4A7C15ULL, opt.inject_expression);

    bool bytes_equal = again.size() == items.size();
    bool verdicts_stable = other.size() == items.size();
    for (std::size_t i = 0; i < items.size() && bytes_equal; ++i)
        bytes_equal = items[i].report.dump() == again[i].report.dump();
    for (std::size_t i = 0; i < items.size() && verdicts_stable; ++i)
        verdicts_stable = items[i].pass == other[i].pass;

    CriterionResult c12{12, "reproducibility", bytes_equal && verdicts_stable,
                        json{{"bodies_byte_identical", bytes_equal},
                             {"verdicts_stable_across_seeds", verdicts_stable}}};
    items.push_back(std::move(c12));
    return items;
}

inline json battery_index_json(const std::vector<CriterionResult>& results,
                               std::uint64_t seed) {
    json idx{{"seed", seed}};
    bool all = true;
    json arr = json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        arr.push_back(json{{"id", r.id}, {"name", r.name}, {"verdict", r.pass ? "pass" : "fail"}});
    }
    idx["all_pass"] = all;
    idx["criteria"] = arr;
    return idx;
}

}  // namespace heavytail
