#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/combinators.hpp"
#include "heavytail/common.hpp"
#include "heavytail/distribution.hpp"

namespace heavytail {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

/// Evidence-grid verdict. Margins are relative to max(1, |scale|) of the
/// quantity under test; a pass is "numerically consistent on this grid",
/// never a proof.
struct MembershipReport {
    std::string criterion;
    Verdict verdict = Verdict::inconclusive;
    GridSpec grid;
    double tol = 1e-9;
    double worst_margin = 0.0;
    std::optional<std::array<double, 2>> witness;
    std::string dist;
    std::vector<std::string> flags;

    json to_json() const {
        json j{{"criterion", criterion},
               {"verdict", to_string(verdict)},
               {"grid", grid.to_json()},
               {"tol", tol},
               {"worst_margin", worst_margin},
               {"dist", dist}};
        j["witness"] = witness ? json{(*witness)[0], (*witness)[1]} : json(nullptr);
        if (!flags.empty()) j["flags"] = flags;
        return j;
    }
};

namespace detail {

inline double rel_margin(double defect, double scale) {
    return defect / std::max(1.0, std::abs(scale));
}

}  // namespace detail

/// Subadditivity scan of h_F(x) = -log F(1/x) over all grid pairs (the
/// class-H criterion). The strict variant demands margin > tol at every pair
/// whose coordinates are both interior to the grid.
inline MembershipReport check_subadditive(const Distribution& dist,
                                          const GridSpec& grid = {}, double tol = 1e-9,
                                          bool strict = false) {
    MembershipReport rep;
    rep.criterion = strict ? "class-h-strict" : "class-h";
    rep.grid = grid;
    rep.tol = tol;
    rep.dist = dist.expression();

    const Distribution d = recentred_to_zero(dist);
    const std::vector<double> xs = grid.make();
    const std::size_t n = xs.size();

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = d.h_f(xs[i]);
        if (!std::isfinite(h[i])) {
            rep.verdict = Verdict::inconclusive;
            rep.flags.push_back("h-infinite");
            rep.witness = {{xs[i], xs[i]}};
            return rep;
        }
    }

    double worst = kInf;
    std::array<double, 2> worst_pair{};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (strict && (i == 0 || j == 0 || i == n - 1 || j == n - 1)) continue;
            const double hsum = d.h_f(xs[i] + xs[j]);
            if (!std::isfinite(hsum)) {
                rep.verdict = Verdict::inconclusive;
                rep.flags.push_back("h-infinite");
                rep.witness = {{xs[i], xs[j]}};
                return rep;
            }
            const double defect = h[i] + h[j] - hsum;
            // For monotone subadditive h the defect lies in [0, min(h(x),h(y))],
            // so the strict margin is measured against that bound; the plain
            // check scales against the magnitude of the terms.
            const double m = strict
                                 ? defect / std::max(1e-300, std::min(h[i], h[j]))
                                 : detail::rel_margin(defect, h[i] + h[j]);
            if (m < worst) {
                worst = m;
                worst_pair = {xs[i], xs[j]};
            }
        }
    }
    rep.worst_margin = worst;
    const bool ok = strict ? (worst > tol) : (worst >= -tol);
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    if (!ok) rep.witness = worst_pair;
    return rep;
}

/// The two classic sufficient conditions, reported separately: h(x)/x
/// non-increasing, and discrete concavity of h (divided-difference slopes
/// non-increasing). Either one passing implies subadditivity.
struct SufficientConditionsReport {
    MembershipReport ratio_decreasing;
    MembershipReport concavity;

    json to_json() const {
        return json{{"ratio_decreasing", ratio_decreasing.to_json()},
                    {"concavity", concavity.to_json()}};
    }
};

inline SufficientConditionsReport check_sufficient_conditions(const Distribution& dist,
                                                              const GridSpec& grid = {},
                                                              double tol = 1e-9) {
    SufficientConditionsReport out;
    for (MembershipReport* r : {&out.ratio_decreasing, &out.concavity}) {
        r->grid = grid;
        r->tol = tol;
        r->dist = dist.expression();
    }
    out.ratio_decreasing.criterion = "h-ratio-decreasing";
    out.concavity.criterion = "h-concave";

    const Distribution d = recentred_to_zero(dist);
    const std::vector<double> xs = grid.make();
    const std::size_t n = xs.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = d.h_f(xs[i]);
        if (!std::isfinite(h[i])) {
            for (MembershipReport* r : {&out.ratio_decreasing, &out.concavity}) {
                r->verdict = Verdict::inconclusive;
                r->flags.push_back("h-infinite");
                r->witness = {{xs[i], xs[i]}};
            }
            return out;
        }
    }

    {
        double worst = kInf;
        std::array<double, 2> wp{};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double ri = h[i] / xs[i], rj = h[i + 1] / xs[i + 1];
            const double m = detail::rel_margin(ri - rj, ri);
            if (m < worst) {
                worst = m;
                wp = {xs[i], xs[i + 1]};
            }
        }
        out.ratio_decreasing.worst_margin = worst;
        out.ratio_decreasing.verdict = worst >= -tol ? Verdict::pass : Verdict::fail;
        if (out.ratio_decreasing.verdict == Verdict::fail) out.ratio_decreasing.witness = wp;
    }
    {
        double worst = kInf;
        std::array<double, 2> wp{};
        for (std::size_t i = 0; i + 2 < n; ++i) {
            const double s0 = (h[i + 1] - h[i]) / (xs[i + 1] - xs[i]);
            const double s1 = (h[i + 2] - h[i + 1]) / (xs[i + 2] - xs[i + 1]);
            const double m = detail::rel_margin(s0 - s1, s0);
            if (m < worst) {
                worst = m;
                wp = {xs[i], xs[i + 2]};
            }
        }
        out.concavity.worst_margin = worst;
        out.concavity.verdict = worst >= -tol ? Verdict::pass : Verdict::fail;
        if (out.concavity.verdict == Verdict::fail) out.concavity.witness = wp;
    }
    return out;
}

/// Super-Frechet scan: g(x) = 1/(-log F(x)) must be strictly increasing and
/// concave with g(0+) = 0. The limit condition is tested as F(grid.min) <=
/// limit_cdf_tol, since g -> 0 exactly when F -> 0.
inline MembershipReport check_super_frechet(const Distribution& dist,
                                            const GridSpec& grid = {}, double tol = 1e-9,
                                            double limit_cdf_tol = 1e-3) {
    MembershipReport rep;
    rep.criterion = "super-frechet";
    rep.grid = grid;
    rep.tol = tol;
    rep.dist = dist.expression();

    const Distribution d = recentred_to_zero(dist);
    if (!d.continuous()) rep.flags.push_back("not-continuous");

    const std::vector<double> xs = grid.make();
    std::vector<double> gx, gv;  // usable points and g values
    bool truncated = false;
    for (double x : xs) {
        const double l = d.log_cdf(x);
        if (!std::isfinite(l) || !(l < 0.0)) {  // F in {0,1}: g degenerate
            truncated = true;
            continue;
        }
        gx.push_back(x);
        gv.push_back(-1.0 / l);
    }
    if (truncated) rep.flags.push_back("grid-truncated");
    if (gx.size() < 3) {
        rep.verdict = Verdict::inconclusive;
        return rep;
    }

    bool ok = true;
    double worst = kInf;
    auto note = [&](double m, double a, double b, bool violated) {
        worst = std::min(worst, m);
        if (violated) {
            ok = false;
            if (!rep.witness) rep.witness = {{a, b}};
        }
    };

    if (d.cdf(grid.min) > limit_cdf_tol) {
        rep.flags.push_back("limit-check-failed");
        rep.witness = {{grid.min, grid.min}};
        ok = false;
    }
    for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
        const double m = detail::rel_margin(gv[i + 1] - gv[i], gv[i]);
        note(m, gx[i], gx[i + 1], !(m > tol));  // strictly increasing
    }
    for (std::size_t i = 0; i + 2 < gx.size(); ++i) {
        const double s0 = (gv[i + 1] - gv[i]) / (gx[i + 1] - gx[i]);
        const double s1 = (gv[i + 2] - gv[i + 1]) / (gx[i + 2] - gx[i + 1]);
        const double m = detail::rel_margin(s0 - s1, s0);
        note(m, gx[i], gx[i + 2], m < -tol);  // concave
    }
    rep.worst_margin = worst;
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    return rep;
}

/// Super-Pareto scan: with f(x) = F^{-1}(1 - 1/(x+1)) (so X = f(Y) for
/// Y ~ Pareto(1)), f must vanish at 0, be non-decreasing, non-constant, and
/// midpoint-convex on the grid.
inline MembershipReport check_super_pareto(const Distribution& dist,
                                           const GridSpec& grid = {}, double tol = 1e-9,
                                           double limit_tol = 1e-3) {
    MembershipReport rep;
    rep.criterion = "super-pareto";
    rep.grid = grid;
    rep.tol = tol;
    rep.dist = dist.expression();

    const Distribution d = recentred_to_zero(dist);
    const std::vector<double> xs = grid.make();

    auto f_at = [&](double x) { return d.quantile(x / (x + 1.0)); };

    std::vector<double> fx, fv;
    bool truncated = false;
    for (double x : xs) {
        const double y = f_at(x);
        if (std::isnan(y)) {
            rep.verdict = Verdict::inconclusive;
            rep.flags.push_back("quantile-failure");
            return rep;
        }
        if (!std::isfinite(y)) {
            truncated = true;
            continue;
        }
        fx.push_back(x);
        fv.push_back(y);
    }
    if (truncated) rep.flags.push_back("grid-truncated");
    if (fx.size() < 3) {
        rep.verdict = Verdict::inconclusive;
        return rep;
    }

    bool ok = true;
    double worst = kInf;
    auto note = [&](double m, double a, double b, bool violated) {
        worst = std::min(worst, m);
        if (violated) {
            ok = false;
            if (!rep.witness) rep.witness = {{a, b}};
        }
    };

    if (!(fv.front() >= 0.0) || fv.front() > limit_tol) {
        rep.flags.push_back("f0-limit-failed");
        rep.witness = {{fx.front(), fx.front()}};
        ok = false;
    }
    for (std::size_t i = 0; i + 1 < fx.size(); ++i) {
        const double m = detail::rel_margin(fv[i + 1] - fv[i], fv[i]);
        note(m, fx[i], fx[i + 1], m < -tol);  // non-decreasing
    }
    if (!(fv.back() > fv.front() + tol * std::max(1.0, std::abs(fv.back())))) {
        rep.flags.push_back("constant-f");
        if (!rep.witness) rep.witness = {{fx.front(), fx.back()}};
        ok = false;
    }
    for (std::size_t i = 0; i < fx.size(); ++i) {
        for (std::size_t j = i + 1; j < fx.size(); ++j) {
            const double avg = 0.5 * (fv[i] + fv[j]);
            const double fm = f_at(0.5 * (fx[i] + fx[j]));
            if (!std::isfinite(fm)) continue;
            const double m = detail::rel_margin(avg - fm, avg);
            note(m, fx[i], fx[j], m < -tol);  // midpoint convexity
        }
    }
    rep.worst_margin = worst;
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    return rep;
}

}  // namespace heavytail
