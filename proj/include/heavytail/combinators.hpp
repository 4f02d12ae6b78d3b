#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/distribution.hpp"

namespace heavytail {

namespace detail {

inline double logsumexp(const std::vector<double>& a) {
    double mx = -kInf;
    for (double v : a) mx = std::max(mx, v);
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - mx);
    return mx + std::log(s);
}

class AffineImpl final : public DistImpl {
  public:
    // Internal: b may be negative (used to recentre essinf to 0); the public
    // scale_shift factory enforces b >= 0.
    AffineImpl(std::shared_ptr<const DistImpl> child, double a, double b)
        : child_(std::move(child)), a_(a), b_(b) {
        require_param(a >= 0.0 && std::isfinite(a), "affine: a must be >= 0");
        require_param(std::isfinite(b), "affine: b must be finite");
    }

    double survival(double x) const override {
        if (a_ == 0.0) return x >= b_ ? 0.0 : 1.0;
        const double arg = (x - b_) / a_;
        return arg < 0.0 ? 1.0 : child_->survival(arg);
    }
    double log_cdf(double x) const override {
        if (a_ == 0.0) return x >= b_ ? 0.0 : -kInf;
        const double arg = (x - b_) / a_;
        return arg < 0.0 ? -kInf : child_->log_cdf(arg);
    }
    double quantile(double p) const override {
        if (a_ == 0.0) return b_;
        return a_ * child_->quantile(p) + b_;
    }
    Support support() const override {
        if (a_ == 0.0) return {b_, b_};
        const Support s = child_->support();
        return {a_ * s.essinf + b_, a_ * s.esssup + b_};
    }
    double cdf_limit_at_inf() const override {
        return a_ == 0.0 ? 1.0 : child_->cdf_limit_at_inf();
    }
    InfiniteMean infinite_mean() const override {
        return a_ == 0.0 ? InfiniteMean::no : child_->infinite_mean();
    }
    bool continuous() const override { return a_ > 0.0 && child_->continuous(); }
    bool h_parameters_valid() const override { return child_->h_parameters_valid(); }
    std::optional<double> tail_index() const override {
        return a_ > 0.0 ? child_->tail_index() : std::nullopt;
    }
    std::string expression() const override {
        return "affine(" + child_->expression() + ",a=" + format_double(a_) +
               ",b=" + format_double(b_) + ")";
    }

  private:
    std::shared_ptr<const DistImpl> child_;
    double a_, b_;
};

class PowerImpl final : public DistImpl {
  public:
    PowerImpl(std::shared_ptr<const DistImpl> child, double beta)
        : child_(std::move(child)), beta_(beta) {
        require_param(beta > 0.0 && std::isfinite(beta), "power: beta must be > 0");
    }
    double log_cdf(double x) const override { return beta_ * child_->log_cdf(x); }
    double survival(double x) const override { return -std::expm1(log_cdf(x)); }
    double quantile(double p) const override {
        // F^beta(t) >= p  <=>  F(t) >= p^{1/beta}
        double q = std::exp(std::log(p) / beta_);
        if (q >= 1.0) q = std::nextafter(1.0, 0.0);
        return child_->quantile(q);
    }
    Support support() const override { return child_->support(); }
    double cdf_limit_at_inf() const override {
        return std::exp(beta_ * std::log(child_->cdf_limit_at_inf()));
    }
    InfiniteMean infinite_mean() const override { return child_->infinite_mean(); }
    bool continuous() const override { return child_->continuous(); }
    bool h_parameters_valid() const override { return child_->h_parameters_valid(); }
    std::optional<double> tail_index() const override { return child_->tail_index(); }
    std::string expression() const override {
        return "power(" + child_->expression() + ",beta=" + format_double(beta_) + ")";
    }

  private:
    std::shared_ptr<const DistImpl> child_;
    double beta_;
};

class MaxImpl final : public DistImpl {
  public:
    MaxImpl(std::shared_ptr<const DistImpl> a, std::shared_ptr<const DistImpl> b)
        : a_(std::move(a)), b_(std::move(b)) {}

    double log_cdf(double x) const override { return a_->log_cdf(x) + b_->log_cdf(x); }
    double survival(double x) const override {
        const double sa = a_->survival(x), sb = b_->survival(x);
        return sa + sb - sa * sb;
    }
    Support support() const override {
        const Support s1 = a_->support(), s2 = b_->support();
        return {std::max(s1.essinf, s2.essinf), std::max(s1.esssup, s2.esssup)};
    }
    double cdf_limit_at_inf() const override {
        return a_->cdf_limit_at_inf() * b_->cdf_limit_at_inf();
    }
    InfiniteMean infinite_mean() const override {
        const auto fa = a_->infinite_mean(), fb = b_->infinite_mean();
        if (fa == InfiniteMean::yes || fb == InfiniteMean::yes) return InfiniteMean::yes;
        if (fa == InfiniteMean::no && fb == InfiniteMean::no) return InfiniteMean::no;
        return InfiniteMean::unknown;
    }
    bool continuous() const override { return a_->continuous() && b_->continuous(); }
    bool h_parameters_valid() const override {
        return a_->h_parameters_valid() && b_->h_parameters_valid();
    }
    std::optional<double> tail_index() const override {
        const auto ta = a_->tail_index(), tb = b_->tail_index();
        if (ta && tb) return std::min(*ta, *tb);
        return std::nullopt;
    }
    std::string expression() const override {
        return "max(" + a_->expression() + "," + b_->expression() + ")";
    }

  private:
    std::shared_ptr<const DistImpl> a_, b_;
};

class ConvexTransformImpl final : public DistImpl {
  public:
    ConvexTransformImpl(std::shared_ptr<const DistImpl> child,
                        std::function<double(double)> f,
                        std::function<double(double)> inv_plus_closed,  // may be empty
                        std::string name, bool strictly_increasing)
        : child_(std::move(child)),
          f_(std::move(f)),
          inv_closed_(std::move(inv_plus_closed)),
          name_(std::move(name)),
          strict_(strictly_increasing) {}

    /// Right-continuous generalized inverse f^{-1+}(y) = inf{x>=0 : f(x) > y}.
    double inv_plus(double y) const {
        if (inv_closed_) return inv_closed_(y);
        if (f_(0.0) > y) return 0.0;
        double hi = 1.0;
        int grow = 0;
        while (!(f_(hi) > y)) {
            hi *= 2.0;
            if (++grow > 1000) return kInf;
        }
        double lo = (grow == 0) ? 0.0 : hi / 2.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(hi, 1e-300); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f_(mid) > y)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    double log_cdf(double x) const override {
        const double z = inv_plus(x);
        return z == kInf ? 0.0 : child_->log_cdf(z);
    }
    double survival(double x) const override {
        const double z = inv_plus(x);
        return z == kInf ? 0.0 : child_->survival(z);
    }
    double quantile(double p) const override {
        const double q = child_->quantile(p);
        return q == kInf ? kInf : f_(q);
    }
    Support support() const override {
        const Support s = child_->support();
        return {f_(s.essinf), s.esssup == kInf ? kInf : f_(s.esssup)};
    }
    double cdf_limit_at_inf() const override { return child_->cdf_limit_at_inf(); }
    InfiniteMean infinite_mean() const override {
        return child_->infinite_mean() == InfiniteMean::yes ? InfiniteMean::yes
                                                            : InfiniteMean::unknown;
    }
    bool continuous() const override { return strict_ && child_->continuous(); }
    bool h_parameters_valid() const override { return child_->h_parameters_valid(); }
    std::string expression() const override {
        return "convex(" + child_->expression() + ",f=" + name_ + ")";
    }

  private:
    std::shared_ptr<const DistImpl> child_;
    std::function<double(double)> f_;
    std::function<double(double)> inv_closed_;
    std::string name_;
    bool strict_;
};

class MixtureImpl final : public DistImpl {
  public:
    MixtureImpl(std::vector<std::shared_ptr<const DistImpl>> children, WeightVector w)
        : children_(std::move(children)), w_(std::move(w)) {
        require_param(children_.size() == w_.size(),
                      "mixture: children/weights size mismatch");
    }

    double survival(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < children_.size(); ++i)
            s += w_[i] * children_[i]->survival(x);
        return s;
    }
    double log_cdf(double x) const override {
        std::vector<double> terms(children_.size());
        for (std::size_t i = 0; i < children_.size(); ++i)
            terms[i] = std::log(w_[i]) + children_[i]->log_cdf(x);
        return logsumexp(terms);
    }
    Support support() const override {
        double lo = kInf, hi = 0.0;
        for (const auto& c : children_) {
            const Support s = c->support();
            lo = std::min(lo, s.essinf);
            hi = std::max(hi, s.esssup);
        }
        return {lo, hi};
    }
    double cdf_limit_at_inf() const override {
        double l = 0.0;
        for (std::size_t i = 0; i < children_.size(); ++i)
            l += w_[i] * children_[i]->cdf_limit_at_inf();
        return l;
    }
    InfiniteMean infinite_mean() const override { return combined_mean_flag(children_); }
    bool continuous() const override {
        return std::all_of(children_.begin(), children_.end(),
                           [](const auto& c) { return c->continuous(); });
    }
    bool h_parameters_valid() const override {
        return std::all_of(children_.begin(), children_.end(),
                           [](const auto& c) { return c->h_parameters_valid(); });
    }
    std::optional<double> tail_index() const override { return min_tail_index(children_); }
    std::string expression() const override {
        std::string e = "mix(";
        for (std::size_t i = 0; i < children_.size(); ++i) {
            if (i) e += ",";
            e += format_double(w_[i]) + ":" + children_[i]->expression();
        }
        return e + ")";
    }

    static InfiniteMean combined_mean_flag(
        const std::vector<std::shared_ptr<const DistImpl>>& cs) {
        bool any_yes = false, any_unknown = false;
        for (const auto& c : cs) {
            const auto f = c->infinite_mean();
            any_yes |= (f == InfiniteMean::yes);
            any_unknown |= (f == InfiniteMean::unknown);
        }
        if (any_yes) return InfiniteMean::yes;
        return any_unknown ? InfiniteMean::unknown : InfiniteMean::no;
    }
    static std::optional<double> min_tail_index(
        const std::vector<std::shared_ptr<const DistImpl>>& cs) {
        double t = kInf;
        for (const auto& c : cs) {
            const auto ti = c->tail_index();
            if (!ti) return std::nullopt;
            t = std::min(t, *ti);
        }
        return t;
    }

  private:
    std::vector<std::shared_ptr<const DistImpl>> children_;
    WeightVector w_;
};

/// CDF M_r(F_1..F_n)(x) = (sum w_i F_i(x)^r)^{1/r}, weighted geometric mean
/// at r = 0. Tail-equivalent to the arithmetic mixture to first order.
class GeneralizedMeanImpl final : public DistImpl {
  public:
    GeneralizedMeanImpl(std::vector<std::shared_ptr<const DistImpl>> children,
                        WeightVector w, double r)
        : children_(std::move(children)), w_(std::move(w)), r_(r) {
        require_param(children_.size() == w_.size(), "gmean: children/weights size mismatch");
        require_param(r >= 0.0 && std::isfinite(r), "gmean: r must be >= 0");
    }

    double log_cdf(double x) const override {
        std::vector<double> l(children_.size());
        for (std::size_t i = 0; i < children_.size(); ++i) l[i] = children_[i]->log_cdf(x);
        return log_mean(l);
    }
    double survival(double x) const override { return -std::expm1(log_cdf(x)); }
    Support support() const override {
        double lo = kInf, hi = 0.0;
        for (const auto& c : children_) {
            const Support s = c->support();
            lo = std::min(lo, s.essinf);
            hi = std::max(hi, s.esssup);
        }
        return {lo, hi};
    }
    double cdf_limit_at_inf() const override {
        std::vector<double> l(children_.size());
        for (std::size_t i = 0; i < children_.size(); ++i)
            l[i] = std::log(children_[i]->cdf_limit_at_inf());
        return std::exp(log_mean(l));
    }
    InfiniteMean infinite_mean() const override {
        return MixtureImpl::combined_mean_flag(children_);
    }
    bool continuous() const override {
        return std::all_of(children_.begin(), children_.end(),
                           [](const auto& c) { return c->continuous(); });
    }
    bool h_parameters_valid() const override {
        return std::all_of(children_.begin(), children_.end(),
                           [](const auto& c) { return c->h_parameters_valid(); });
    }
    std::optional<double> tail_index() const override {
        return MixtureImpl::min_tail_index(children_);
    }
    std::string expression() const override {
        std::string e = "gmean(r=" + format_double(r_);
        for (std::size_t i = 0; i < children_.size(); ++i)
            e += "," + format_double(w_[i]) + ":" + children_[i]->expression();
        return e + ")";
    }

  private:
    /// log M_r given log F_i. For r > 0 uses sum w_i expm1(r log F_i), which
    /// keeps relative accuracy both near 0 and near 1.
    double log_mean(const std::vector<double>& l) const {
        if (r_ == 0.0) {
            double s = 0.0;
            for (std::size_t i = 0; i < l.size(); ++i) s += w_[i] * l[i];
            return s;
        }
        double d = 0.0;
        for (std::size_t i = 0; i < l.size(); ++i) d += w_[i] * std::expm1(r_ * l[i]);
        if (d <= -1.0) return -kInf;
        return std::log1p(d) / r_;
    }

    std::vector<std::shared_ptr<const DistImpl>> children_;
    WeightVector w_;
    double r_;
};

}  // namespace detail

/// aX + b with a, b >= 0; a = 0 degenerates to a point mass at b.
inline Distribution scale_shift(const Distribution& d, double a, double b) {
    if (!(a >= 0.0)) throw std::invalid_argument("scale_shift: a must be >= 0");
    if (!(b >= 0.0)) throw std::invalid_argument("scale_shift: b must be >= 0");
    return Distribution(std::make_shared<detail::AffineImpl>(d.impl_ptr(), a, b));
}

/// F^beta, beta > 0.
inline Distribution power(const Distribution& d, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("power: beta must be > 0");
    return Distribution(std::make_shared<detail::PowerImpl>(d.impl_ptr(), beta));
}

/// Distribution of max{X,Y} for independent X, Y (CDF product).
inline Distribution max_of(const Distribution& a, const Distribution& b) {
    return Distribution(std::make_shared<detail::MaxImpl>(a.impl_ptr(), b.impl_ptr()));
}

/// Shifts the law so its essential infimum sits at 0 (identity if already so).
inline Distribution recentred_to_zero(const Distribution& d) {
    const double e = d.support().essinf;
    if (e == 0.0) return d;
    return Distribution(std::make_shared<detail::AffineImpl>(d.impl_ptr(), 1.0, -e));
}

/// Thrown when a user-supplied transform fails the midpoint-convexity gate;
/// carries the witnessing triple.
struct ConvexityError : std::invalid_argument {
    ConvexityError(double x_, double y_, double gap_)
        : std::invalid_argument("convex_transform: midpoint convexity violated at x=" +
                                format_double(x_) + ", y=" + format_double(y_) +
                                ", gap=" + format_double(gap_)),
          x(x_), y(y_), gap(gap_) {}
    double x, y, gap;
};

/// Named monotone transform with an optional closed-form right-continuous
/// generalized inverse.
struct MonotoneTransform {
    std::function<double(double)> f;
    std::function<double(double)> inv_plus;  // may be empty -> bisection
    std::string name;
};

inline MonotoneTransform transform_square() {
    return {[](double x) { return x * x; }, [](double y) { return std::sqrt(y); },
            "square"};
}
/// f(x) = (x+1)^{1/alpha} - 1: maps Pareto(1) onto Pareto(alpha).
inline MonotoneTransform transform_pareto_power(double alpha) {
    return {[alpha](double x) { return std::expm1(std::log1p(x) / alpha); },
            [alpha](double y) { return std::expm1(alpha * std::log1p(y)); },
            "parpow(alpha=" + format_double(alpha) + ")"};
}
/// f(x) = e^x - 1: maps Pareto(alpha) onto the log-Pareto law.
inline MonotoneTransform transform_expm1() {
    return {[](double x) { return std::expm1(x); }, [](double y) { return std::log1p(y); },
            "expm1"};
}

/// Distribution of f(X) for non-decreasing convex f with f(0) = 0. The gate
/// is a midpoint test on a log grid: necessary, not sufficient.
inline Distribution convex_transform(const Distribution& d, const MonotoneTransform& t,
                                     int gate_points = 200, double gate_tol = 1e-9) {
    const auto& f = t.f;
    if (std::abs(f(0.0)) > 1e-12)
        throw std::invalid_argument("convex_transform: f(0) must be 0");
    GridSpec gs;
    gs.points = gate_points;
    const std::vector<double> xs = gs.make();
    std::vector<double> fx(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fx[i] = f(xs[i]);

    bool strictly_increasing = true;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (fx[i + 1] < fx[i] - gate_tol * std::max(1.0, std::abs(fx[i])))
            throw std::invalid_argument("convex_transform: f must be non-decreasing (at x=" +
                                        format_double(xs[i + 1]) + ")");
        if (!(fx[i + 1] > fx[i])) strictly_increasing = false;
    }
    std::size_t last_finite = xs.size();
    while (last_finite > 0 && !std::isfinite(fx[last_finite - 1])) --last_finite;
    if (last_finite < 2 || !(fx[last_finite - 1] > fx[0] + 1e-12))
        throw std::invalid_argument("convex_transform: f must be non-constant");
    for (std::size_t i = 0; i < last_finite; ++i) {
        for (std::size_t j = i + 1; j < last_finite; ++j) {
            const double avg = 0.5 * (fx[i] + fx[j]);
            const double mid = f(0.5 * (xs[i] + xs[j]));
            const double gap = avg - mid;
            if (gap < -gate_tol * std::max(1.0, std::abs(avg)))
                throw ConvexityError(xs[i], xs[j], gap);
        }
    }
    return Distribution(std::make_shared<detail::ConvexTransformImpl>(
        d.impl_ptr(), t.f, t.inv_plus, t.name, strictly_increasing));
}

/// sum_i w_i F_i. The class-H guarantee additionally needs the components to
/// be comparable in stochastic order; see check_stochastic_ordering.
inline Distribution mixture(const std::vector<Distribution>& dists, WeightVector w) {
    std::vector<std::shared_ptr<const DistImpl>> cs;
    cs.reserve(dists.size());
    for (const auto& d : dists) cs.push_back(d.impl_ptr());
    return Distribution(std::make_shared<detail::MixtureImpl>(std::move(cs), std::move(w)));
}

/// Generalized r-mean of the component CDFs, r >= 0 (r = 0: geometric mean,
/// r = 1: mixture).
inline Distribution generalized_r_mean(const std::vector<Distribution>& dists,
                                       WeightVector w, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("generalized_r_mean: r must be >= 0");
    std::vector<std::shared_ptr<const DistImpl>> cs;
    cs.reserve(dists.size());
    for (const auto& d : dists) cs.push_back(d.impl_ptr());
    return Distribution(
        std::make_shared<detail::GeneralizedMeanImpl>(std::move(cs), std::move(w), r));
}

/// Result of the pointwise CDF-comparability scan.
struct OrderingVerdict {
    bool ordered = false;
    /// Permutation pi with F_{pi[0]} >= ... >= F_{pi[n-1]} pointwise on the
    /// grid, i.e. X_{pi[0]} <=_st ... <=_st X_{pi[n-1]}.
    std::vector<std::size_t> permutation;
    /// Grid point where two CDFs cross (when not ordered).
    std::optional<double> witness;
};

inline OrderingVerdict check_stochastic_ordering(const std::vector<Distribution>& dists,
                                                 const GridSpec& grid = {}) {
    if (dists.size() < 2)
        throw std::invalid_argument("check_stochastic_ordering: need >= 2 distributions");
    const std::vector<double> xs = grid.make();
    const std::size_t n = dists.size();

    std::vector<std::vector<double>> cdf(n, std::vector<double>(xs.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < xs.size(); ++k) cdf[i][k] = dists[i].cdf(xs[k]);

    // rel[i][j] = +1 if F_i >= F_j with strictness somewhere, -1 the reverse,
    // 0 equal within tolerance. Crossing -> early out with witness.
    std::vector<std::vector<int>> rel(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            bool has_pos = false, has_neg = false;
            double cross_at = 0.0;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                const double tol = 1e-12;
                const double diff = cdf[i][k] - cdf[j][k];
                if (diff > tol) {
                    if (has_neg) { cross_at = xs[k]; has_pos = true; break; }
                    has_pos = true;
                } else if (diff < -tol) {
                    if (has_pos) { cross_at = xs[k]; has_neg = true; break; }
                    has_neg = true;
                }
            }
            if (has_pos && has_neg) {
                OrderingVerdict v;
                v.witness = cross_at;
                return v;
            }
            rel[i][j] = has_pos ? 1 : (has_neg ? -1 : 0);
            rel[j][i] = -rel[i][j];
        }
    }
    OrderingVerdict v;
    v.ordered = true;
    v.permutation.resize(n);
    std::iota(v.permutation.begin(), v.permutation.end(), std::size_t{0});
    std::stable_sort(v.permutation.begin(), v.permutation.end(),
                     [&](std::size_t i, std::size_t j) { return rel[i][j] > 0; });
    return v;
}

}  // namespace heavytail
