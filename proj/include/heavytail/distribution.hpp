#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

struct Support {
    double essinf = 0.0;
    double esssup = kInf;
};

enum class InfiniteMean { yes, no, unknown };

inline const char* to_string(InfiniteMean f) {
    switch (f) {
        case InfiniteMean::yes: return "yes";
        case InfiniteMean::no: return "no";
        default: return "unknown";
    }
}

/// Internal distribution node. Implementations provide numerically stable
/// survival and log-CDF forms for finite x >= 0; everything else lives on
/// the Distribution facade.
///
/// Conventions:
///  - survival(x) is evaluated in closed form per family (no 1-F cancellation),
///  - log_cdf(x) is the closed-form log F where one exists, otherwise
///    log1p(-survival),
///  - quantile(p) is the generalized inverse inf{t : F(t) >= p} for p in (0,1),
///    closed form where available, else monotone bisection.
class DistImpl {
  public:
    virtual ~DistImpl() = default;

    virtual double survival(double x) const = 0;
    virtual double log_cdf(double x) const = 0;
    virtual double quantile(double p) const { return quantile_by_bisection(p); }

    /// lim_{x->inf} F(x) over the reals; < 1 exactly when the law carries an
    /// atom at +inf (deadly and inverse-geometric members do).
    virtual double cdf_limit_at_inf() const { return 1.0; }
    virtual Support support() const { return {}; }
    virtual InfiniteMean infinite_mean() const = 0;
    virtual bool continuous() const { return true; }
    /// Advisory class-H parameter validity (checkers still run either way).
    virtual bool h_parameters_valid() const { return true; }
    /// Regular-variation index of the survival tail, when known.
    virtual std::optional<double> tail_index() const { return std::nullopt; }
    virtual std::string expression() const = 0;

    double cdf_finite(double x) const {
        double c = 1.0 - survival(x);
        return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
    }

  protected:
    /// Generalized-inverse fallback: geometric bracket growth (heavy tails),
    /// then bisection to relative width 1e-12 or 200 steps. Returns the
    /// upper end so that F(result) >= p holds for step CDFs as well.
    double quantile_by_bisection(double p) const {
        if (cdf_finite(0.0) >= p) return 0.0;
        double hi = 1.0;
        int grow = 0;
        while (cdf_finite(hi) < p) {
            hi *= 2.0;
            if (++grow > 1000) return kInf;  // bracket beyond 2^1000: treat as +inf
        }
        double lo = (grow == 0) ? 0.0 : hi / 2.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(hi, 1e-300); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cdf_finite(mid) >= p)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
};

/// Immutable distribution value on the extended non-negative reals.
/// Cheap to copy and safe to share across threads.
class Distribution {
  public:
    explicit Distribution(std::shared_ptr<const DistImpl> impl) : impl_(std::move(impl)) {
        if (!impl_) throw std::invalid_argument("Distribution: null impl");
    }

    double cdf(double x) const {
        if (std::isnan(x)) throw std::invalid_argument("cdf: x is NaN");
        if (x == kInf) return 1.0;
        if (x < 0.0) return 0.0;
        return impl_->cdf_finite(x);
    }

    double survival(double x) const {
        if (std::isnan(x)) throw std::invalid_argument("survival: x is NaN");
        if (x == kInf) return 0.0;
        if (x < 0.0) return 1.0;
        return impl_->survival(x);
    }

    double log_cdf(double x) const {
        if (std::isnan(x)) throw std::invalid_argument("log_cdf: x is NaN");
        if (x == kInf) return 0.0;
        if (x < 0.0) return -kInf;
        return impl_->log_cdf(x);
    }

    /// Generalized inverse F^{-1}(p) = inf{t : F(t) >= p}; may be +inf.
    double quantile(double p) const {
        if (!(p > 0.0) || !(p < 1.0))
            throw std::domain_error("quantile: p must be in (0,1)");
        return impl_->quantile(p);
    }

    /// h_F(x) = -log F(1/x), evaluated in log space. Returns +inf where
    /// F(1/x) = 0 (checkers treat that as inconclusive evidence).
    double h_f(double x) const {
        if (!(x > 0.0)) throw std::domain_error("h_f: x must be > 0");
        const double inv = 1.0 / x;  // may underflow to 0 for huge x; log_cdf(0) handles it
        return -impl_->log_cdf(inv);
    }

    Support support() const { return impl_->support(); }
    InfiniteMean infinite_mean() const { return impl_->infinite_mean(); }
    bool continuous() const { return impl_->continuous(); }
    bool h_parameters_valid() const { return impl_->h_parameters_valid(); }
    std::optional<double> tail_index() const { return impl_->tail_index(); }
    double cdf_limit_at_inf() const { return impl_->cdf_limit_at_inf(); }
    bool has_inf_atom() const { return impl_->cdf_limit_at_inf() < 1.0; }
    std::string expression() const { return impl_->expression(); }
    const DistImpl& impl() const { return *impl_; }
    std::shared_ptr<const DistImpl> impl_ptr() const { return impl_; }

    /// Inverse-transform samples quantile(U_i); deterministic per seed.
    std::vector<double> sample(std::uint64_t seed, std::size_t m) const {
        if (m < 1) throw std::invalid_argument("sample: m must be >= 1");
        Rng rng(seed);
        std::vector<double> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = impl_->quantile(rng.uniform());
        return out;
    }

    /// Running means of one sample path. Rejects laws with an atom at +inf
    /// (the running mean would be identically infinite past the first hit).
    std::vector<double> sample_mean_trajectory(std::uint64_t seed, std::size_t m) const {
        if (m < 1) throw std::invalid_argument("sample_mean_trajectory: m must be >= 1");
        if (has_inf_atom())
            throw std::invalid_argument(
                "sample_mean_trajectory: distribution has an atom at +inf");
        Rng rng(seed);
        std::vector<double> means(m);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sum += impl_->quantile(rng.uniform());
            means[i] = sum / static_cast<double>(i + 1);
        }
        return means;
    }

  private:
    std::shared_ptr<const DistImpl> impl_;
};

namespace detail {

inline void require_param(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

class FrechetImpl final : public DistImpl {
  public:
    explicit FrechetImpl(double alpha) : alpha_(alpha) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "frechet: alpha must be > 0");
    }
    double log_cdf(double x) const override {
        if (x <= 0.0) return -kInf;
        return -std::pow(x, -alpha_);
    }
    double survival(double x) const override {
        if (x <= 0.0) return 1.0;
        return -std::expm1(-std::pow(x, -alpha_));
    }
    double quantile(double p) const override { return std::pow(-std::log(p), -1.0 / alpha_); }
    InfiniteMean infinite_mean() const override {
        return alpha_ <= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return alpha_ <= 1.0; }
    std::optional<double> tail_index() const override { return alpha_; }
    std::string expression() const override {
        return "frechet(alpha=" + format_double(alpha_) + ")";
    }

  private:
    double alpha_;
};

class ParetoImpl final : public DistImpl {
  public:
    explicit ParetoImpl(double alpha) : alpha_(alpha) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "pareto: alpha must be > 0");
    }
    double survival(double x) const override { return std::exp(-alpha_ * std::log1p(x)); }
    double log_cdf(double x) const override { return std::log1p(-survival(x)); }
    double quantile(double p) const override {
        return std::expm1(-std::log1p(-p) / alpha_);
    }
    InfiniteMean infinite_mean() const override {
        return alpha_ <= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return alpha_ <= 1.0; }
    std::optional<double> tail_index() const override { return alpha_; }
    std::string expression() const override {
        return "pareto(alpha=" + format_double(alpha_) + ")";
    }

  private:
    double alpha_;
};

class GeneralizedParetoImpl final : public DistImpl {
  public:
    GeneralizedParetoImpl(double xi, double beta) : xi_(xi), beta_(beta) {
        // Catalog keeps the heavy-tailed branch; xi <= 0 has a light or
        // bounded tail and none of the checkers apply to it.
        require_param(xi > 0.0 && std::isfinite(xi), "gpd: xi must be > 0");
        require_param(beta > 0.0 && std::isfinite(beta), "gpd: beta must be > 0");
    }
    double survival(double x) const override {
        return std::exp(-std::log1p(xi_ * x / beta_) / xi_);
    }
    double log_cdf(double x) const override { return std::log1p(-survival(x)); }
    double quantile(double p) const override {
        return beta_ / xi_ * std::expm1(-xi_ * std::log1p(-p));
    }
    InfiniteMean infinite_mean() const override {
        return xi_ >= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return xi_ >= 1.0; }
    std::optional<double> tail_index() const override { return 1.0 / xi_; }
    std::string expression() const override {
        return "gpd(xi=" + format_double(xi_) + ",beta=" + format_double(beta_) + ")";
    }

  private:
    double xi_, beta_;
};

class BurrImpl final : public DistImpl {
  public:
    BurrImpl(double alpha, double tau) : alpha_(alpha), tau_(tau) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "burr: alpha must be > 0");
        require_param(tau > 0.0 && std::isfinite(tau), "burr: tau must be > 0");
    }
    double survival(double x) const override {
        return std::exp(-alpha_ * std::log1p(std::pow(x, tau_)));
    }
    double log_cdf(double x) const override { return std::log1p(-survival(x)); }
    double quantile(double p) const override {
        return std::pow(std::expm1(-std::log1p(-p) / alpha_), 1.0 / tau_);
    }
    InfiniteMean infinite_mean() const override {
        return alpha_ * tau_ <= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return alpha_ <= 1.0 && tau_ <= 1.0; }
    std::optional<double> tail_index() const override { return alpha_ * tau_; }
    std::string expression() const override {
        return "burr(alpha=" + format_double(alpha_) + ",tau=" + format_double(tau_) + ")";
    }

  private:
    double alpha_, tau_;
};

class InverseBurrImpl final : public DistImpl {
  public:
    InverseBurrImpl(double alpha, double tau) : alpha_(alpha), tau_(tau) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "invburr: alpha must be > 0");
        require_param(tau > 0.0 && std::isfinite(tau), "invburr: tau must be > 0");
    }
    double log_cdf(double x) const override {
        if (x <= 0.0) return -kInf;
        return -alpha_ * std::log1p(std::pow(x, -tau_));
    }
    double survival(double x) const override { return -std::expm1(log_cdf(x)); }
    double quantile(double p) const override {
        const double v = std::exp(std::log(p) / alpha_);  // p^{1/alpha}
        return std::pow(v / -std::expm1(std::log(p) / alpha_), 1.0 / tau_);
    }
    InfiniteMean infinite_mean() const override {
        return tau_ <= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return tau_ <= 1.0; }
    std::optional<double> tail_index() const override { return tau_; }
    std::string expression() const override {
        return "invburr(alpha=" + format_double(alpha_) + ",tau=" + format_double(tau_) +
               ")";
    }

  private:
    double alpha_, tau_;
};

class LogParetoImpl final : public DistImpl {
  public:
    explicit LogParetoImpl(double alpha) : alpha_(alpha) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "logpareto: alpha must be > 0");
    }
    double survival(double x) const override {
        return std::exp(-alpha_ * std::log1p(std::log1p(x)));
    }
    double log_cdf(double x) const override { return std::log1p(-survival(x)); }
    double quantile(double p) const override {
        return std::expm1(std::expm1(-std::log1p(-p) / alpha_));
    }
    // Slowly varying survival: infinite mean for every alpha.
    InfiniteMean infinite_mean() const override { return InfiniteMean::yes; }
    bool h_parameters_valid() const override { return alpha_ <= 1.0; }
    std::string expression() const override {
        return "logpareto(alpha=" + format_double(alpha_) + ")";
    }

  private:
    double alpha_;
};

class StoppaImpl final : public DistImpl {
  public:
    StoppaImpl(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        require_param(alpha > 0.0 && std::isfinite(alpha), "stoppa: alpha must be > 0");
        require_param(beta > 0.0 && std::isfinite(beta), "stoppa: beta must be > 0");
    }
    double log_cdf(double x) const override {
        if (x <= 0.0) return -kInf;
        return beta_ * std::log1p(-std::exp(-alpha_ * std::log1p(x)));
    }
    double survival(double x) const override { return -std::expm1(log_cdf(x)); }
    double quantile(double p) const override {
        const double one_minus_q = -std::expm1(std::log(p) / beta_);  // 1 - p^{1/beta}
        return std::expm1(-std::log(one_minus_q) / alpha_);
    }
    InfiniteMean infinite_mean() const override {
        return alpha_ <= 1.0 ? InfiniteMean::yes : InfiniteMean::no;
    }
    bool h_parameters_valid() const override { return alpha_ <= 1.0; }
    std::optional<double> tail_index() const override { return alpha_; }
    std::string expression() const override {
        return "stoppa(alpha=" + format_double(alpha_) + ",beta=" + format_double(beta_) +
               ")";
    }

  private:
    double alpha_, beta_;
};

/// F(x) = exp(-c * ceil(1/x)) on (0,inf), F(inf) = 1. A non-continuous
/// class-H member: X = 1/K for K geometric, with mass 1-e^{-c} at +inf.
class InverseGeometricImpl final : public DistImpl {
  public:
    explicit InverseGeometricImpl(double c) : c_(c) {
        require_param(c > 0.0 && std::isfinite(c), "invgeo: c must be > 0");
    }

    /// ceil with a snap-down guard so that 1/(1/k) landing one ulp above an
    /// integer k does not fall onto the next step.
    static double step_index(double r) {
        const double fl = std::floor(r);
        if (r - fl <= 1e-9 * std::max(1.0, r)) return fl;
        return fl + 1.0;
    }

    double log_cdf(double x) const override {
        if (x <= 0.0) return -kInf;
        return -c_ * step_index(1.0 / x);
    }
    double survival(double x) const override { return -std::expm1(log_cdf(x)); }
    double quantile(double p) const override {
        // largest integer k >= 1 with exp(-c k) >= p, else +inf
        double k = std::floor(-std::log(p) / c_);
        while (std::exp(-c_ * (k + 1.0)) >= p) k += 1.0;
        while (k >= 1.0 && std::exp(-c_ * k) < p) k -= 1.0;
        if (k < 1.0) return kInf;
        return 1.0 / k;
    }
    double cdf_limit_at_inf() const override { return std::exp(-c_); }
    InfiniteMean infinite_mean() const override { return InfiniteMean::yes; }
    bool continuous() const override { return false; }
    std::string expression() const override { return "invgeo(c=" + format_double(c_) + ")"; }

  private:
    double c_;
};

/// Two-point law P(X=0) = 1-p, P(X=+inf) = p.
class DeadlyImpl final : public DistImpl {
  public:
    explicit DeadlyImpl(double p) : p_(p) {
        require_param(p > 0.0 && p < 1.0, "deadly: p must be in (0,1)");
    }
    double survival(double) const override { return p_; }
    double log_cdf(double) const override { return std::log1p(-p_); }
    double quantile(double q) const override { return q <= 1.0 - p_ ? 0.0 : kInf; }
    double cdf_limit_at_inf() const override { return 1.0 - p_; }
    InfiniteMean infinite_mean() const override { return InfiniteMean::yes; }
    bool continuous() const override { return false; }
    std::string expression() const override { return "deadly(p=" + format_double(p_) + ")"; }

  private:
    double p_;
};

}  // namespace detail

inline Distribution frechet(double alpha) {
    return Distribution(std::make_shared<detail::FrechetImpl>(alpha));
}
inline Distribution pareto(double alpha) {
    return Distribution(std::make_shared<detail::ParetoImpl>(alpha));
}
inline Distribution generalized_pareto(double xi, double beta) {
    return Distribution(std::make_shared<detail::GeneralizedParetoImpl>(xi, beta));
}
inline Distribution burr(double alpha, double tau) {
    return Distribution(std::make_shared<detail::BurrImpl>(alpha, tau));
}
inline Distribution paralogistic(double alpha) { return burr(alpha, alpha); }
inline Distribution loglogistic(double tau) { return burr(1.0, tau); }
inline Distribution inverse_burr(double alpha, double tau) {
    return Distribution(std::make_shared<detail::InverseBurrImpl>(alpha, tau));
}
inline Distribution log_pareto(double alpha) {
    return Distribution(std::make_shared<detail::LogParetoImpl>(alpha));
}
inline Distribution stoppa(double alpha, double beta) {
    return Distribution(std::make_shared<detail::StoppaImpl>(alpha, beta));
}
inline Distribution inverse_geometric(double c) {
    return Distribution(std::make_shared<detail::InverseGeometricImpl>(c));
}
inline Distribution deadly(double p) {
    return Distribution(std::make_shared<detail::DeadlyImpl>(p));
}

}  // namespace heavytail
