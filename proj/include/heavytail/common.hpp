#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace heavytail {

using json = nlohmann::json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

enum class GridScale { log, linear };

/// Evaluation grid shared by the membership and dominance checkers.
/// Defaults to 200 log-spaced points on [1e-6, 1e6]; families in the
/// catalog live on very different scales, so the span is deliberately wide.
struct GridSpec {
    double min = 1e-6;
    double max = 1e6;
    int points = 200;
    GridScale scale = GridScale::log;

    std::vector<double> make() const {
        if (!(min > 0) && scale == GridScale::log)
            throw std::invalid_argument("GridSpec: log scale requires min > 0");
        if (!(min < max)) throw std::invalid_argument("GridSpec: min must be < max");
        if (points < 2) throw std::invalid_argument("GridSpec: points must be >= 2");
        std::vector<double> xs(static_cast<std::size_t>(points));
        if (scale == GridScale::log) {
            const double lo = std::log(min), hi = std::log(max);
            for (int i = 0; i < points; ++i)
                xs[static_cast<std::size_t>(i)] =
                    std::exp(lo + (hi - lo) * i / (points - 1));
            xs.front() = min;
            xs.back() = max;
        } else {
            for (int i = 0; i < points; ++i)
                xs[static_cast<std::size_t>(i)] = min + (max - min) * i / (points - 1);
        }
        return xs;
    }

    json to_json() const {
        return json{{"min", min},
                    {"max", max},
                    {"points", points},
                    {"scale", scale == GridScale::log ? "log" : "linear"}};
    }
};

/// Strictly positive weights summing to one (the open simplex).
class WeightVector {
  public:
    explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
        if (w_.size() < 1) throw std::invalid_argument("WeightVector: empty");
        double sum = 0.0;
        for (double v : w_) {
            if (!(v > 0.0)) throw std::invalid_argument("WeightVector: weights must be > 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("WeightVector: weights must sum to 1 (got " +
                                        format_double(sum) + ")");
    }
    WeightVector(std::initializer_list<double> w) : WeightVector(std::vector<double>(w)) {}

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const { return w_; }
    auto begin() const { return w_.begin(); }
    auto end() const { return w_.end(); }

  private:
    std::vector<double> w_;
};

/// One-sided Dvoretzky-Kiefer-Wolfowitz band: sup |F_hat - F| <= eps
/// with probability >= 1 - delta.
inline double dkw_epsilon(std::size_t m, double delta) {
    if (m == 0 || !(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("dkw_epsilon: need m >= 1 and delta in (0,1)");
    return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(m)));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Inverse standard normal CDF, Acklam's rational approximation polished
/// with one Halley step against erfc. Accurate to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("normal_quantile: p must be in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

/// Empirical CDF value at x from a sorted sample (+inf entries sort last and
/// count above every finite x).
inline double ecdf_at(const std::vector<double>& sorted, double x) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace heavytail
