#pragma once

// Interference power distributions g and the expectations over g that the
// coverage formulas need. Power values are dimensionless multipliers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "cellcov/csv.hpp"
#include "cellcov/rng.hpp"
#include "cellcov/specfun.hpp"

namespace cellcov {

/// Path-loss exponent at or below 2: the interference field does not converge.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace fading {

/// ln(10)/10, converts dB to natural-log units.
inline constexpr double kDbToNeper = std::numbers::ln10 / 10.0;

struct Exponential {
  double rate = 1.0;
};

/// Power 10^{X/10} with X ~ Normal(mean_db, std_db^2).
struct LognormalDb {
  double mean_db = 0.0;
  double std_db = 0.0;
};

/// Piecewise-linear pdf through (power[i], pdf[i]).
struct Tabulated {
  std::vector<double> power;
  std::vector<double> pdf;
  std::vector<double> cdf;  // trapezoid mass up to power[i]
};

class FadingModel {
 public:
  using Params = std::variant<Exponential, LognormalDb, Tabulated>;

  static FadingModel exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw std::invalid_argument("exponential fading requires rate mu > 0");
    }
    return FadingModel(Exponential{rate});
  }

  static FadingModel lognormal_db(double mean_db, double std_db) {
    if (!std::isfinite(mean_db) || !(std_db >= 0.0) || !std::isfinite(std_db)) {
      throw std::invalid_argument("lognormal fading requires finite mean and std_db >= 0");
    }
    return FadingModel(LognormalDb{mean_db, std_db});
  }

  static FadingModel tabulated(std::vector<double> power, std::vector<double> pdf) {
    if (power.size() != pdf.size() || power.size() < 2) {
      throw std::invalid_argument("tabulated fading needs >= 2 (power, pdf) pairs");
    }
    if (!(power.front() >= 0.0)) {
      throw std::invalid_argument("tabulated fading support must be nonnegative");
    }
    for (std::size_t i = 0; i < power.size(); ++i) {
      if (!std::isfinite(power[i]) || !std::isfinite(pdf[i]) || pdf[i] < 0.0) {
        throw std::invalid_argument("tabulated fading pdf values must be finite and >= 0");
      }
      if (i > 0 && !(power[i] > power[i - 1])) {
        throw std::invalid_argument("tabulated fading power column must be strictly increasing");
      }
    }
    std::vector<double> cdf(power.size(), 0.0);
    for (std::size_t i = 1; i < power.size(); ++i) {
      cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (power[i] - power[i - 1]);
    }
    if (std::abs(cdf.back() - 1.0) > 1e-6) {
      throw std::invalid_argument("tabulated fading pdf must integrate to 1 (trapezoid), got " +
                                  std::to_string(cdf.back()));
    }
    return FadingModel(Tabulated{std::move(power), std::move(pdf), std::move(cdf)});
  }

  const Params& params() const noexcept { return params_; }

  template <class T>
  bool is() const noexcept { return std::holds_alternative<T>(params_); }

  template <class T>
  const T& as() const { return std::get<T>(params_); }

 private:
  explicit FadingModel(Params p) : params_(std::move(p)) {}
  Params params_;
};

inline std::string describe(const FadingModel& m) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return "exp(rate=" + std::to_string(p.rate) + ")";
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          return "lognormal_db(xi=" + std::to_string(p.mean_db) +
                 ", kappa=" + std::to_string(p.std_db) + ")";
        } else {
          return "tabulated(" + std::to_string(p.power.size()) + " points)";
        }
      },
      m.params());
}

/// E[f(g)] under the model, by adaptive quadrature against its density.
/// Lognormal integrates over +-8 standard deviations of the Gaussian exponent;
/// tabulated integrates segment by segment against the interpolated pdf.
template <class F>
double expectation(const FadingModel& m, const F& f, const specfun::QuadSpec& spec = {}) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          const double scale = 1.0 / p.rate;
          return specfun::integrate_semi_infinite(
              [&](double y) { return f(y * scale) * std::exp(-y); }, 0.0, spec);
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          if (p.std_db == 0.0) return f(std::exp(kDbToNeper * p.mean_db));
          constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
          auto integrand = [&](double z) {
            const double g = std::exp(kDbToNeper * (p.mean_db + p.std_db * z));
            return f(g) * inv_sqrt_2pi * std::exp(-0.5 * z * z);
          };
          return specfun::integrate(integrand, -8.0, 0.0, spec).value +
                 specfun::integrate(integrand, 0.0, 8.0, spec).value;
        } else {
          double total = 0.0;
          for (std::size_t i = 1; i < p.power.size(); ++i) {
            const double g0 = p.power[i - 1];
            const double g1 = p.power[i];
            const double p0 = p.pdf[i - 1];
            const double slope = (p.pdf[i] - p0) / (g1 - g0);
            if (p0 == 0.0 && p.pdf[i] == 0.0) continue;
            total += specfun::integrate(
                         [&](double g) { return f(g) * (p0 + slope * (g - g0)); }, g0, g1,
                         spec)
                         .value;
          }
          return total;
        }
      },
      m.params());
}

/// E[g].
inline double mean_power(const FadingModel& m) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return 1.0 / p.rate;
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          const double s = kDbToNeper * p.std_db;
          return std::exp(kDbToNeper * p.mean_db + 0.5 * s * s);
        } else {
          double first = 0.0;
          for (std::size_t i = 1; i < p.power.size(); ++i) {
            first += 0.5 * (p.power[i] * p.pdf[i] + p.power[i - 1] * p.pdf[i - 1]) *
                     (p.power[i] - p.power[i - 1]);
          }
          return first;
        }
      },
      m.params());
}

/// E[g^2]; sizes the simulation window.
inline double second_moment(const FadingModel& m) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return 2.0 / (p.rate * p.rate);
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          const double s = kDbToNeper * p.std_db;
          return std::exp(2.0 * kDbToNeper * p.mean_db + 2.0 * s * s);
        } else {
          double second = 0.0;
          for (std::size_t i = 1; i < p.power.size(); ++i) {
            second += 0.5 *
                      (p.power[i] * p.power[i] * p.pdf[i] +
                       p.power[i - 1] * p.power[i - 1] * p.pdf[i - 1]) *
                      (p.power[i] - p.power[i - 1]);
          }
          return second;
        }
      },
      m.params());
}

/// Same kind of model rescaled so that E[g] = target_mean. Lognormal models
/// only move xi; tabulated models stretch the support and keep unit mass.
inline FadingModel normalize_to_mean(const FadingModel& m, double target_mean) {
  if (!(target_mean > 0.0) || !std::isfinite(target_mean)) {
    throw std::invalid_argument("normalize_to_mean: target mean must be > 0");
  }
  return std::visit(
      [&](const auto& p) -> FadingModel {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return FadingModel::exponential(1.0 / target_mean);
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          const double s = kDbToNeper * p.std_db;
          const double xi = (std::log(target_mean) - 0.5 * s * s) / kDbToNeper;
          return FadingModel::lognormal_db(xi, p.std_db);
        } else {
          const double current = mean_power(m);
          if (!(current > 0.0)) {
            throw std::invalid_argument("normalize_to_mean: tabulated model has zero mean");
          }
          const double k = target_mean / current;
          std::vector<double> power(p.power), pdf(p.pdf);
          for (auto& g : power) g *= k;
          for (auto& v : pdf) v /= k;
          return FadingModel::tabulated(std::move(power), std::move(pdf));
        }
      },
      m.params());
}

/// E[1 - exp(-s g)], computed without the cancellation of 1 - E[exp(-s g)].
inline double one_minus_laplace(const FadingModel& m, double s,
                                const specfun::QuadSpec& spec = {1e-11, 1e-300, 2000}) {
  if (s < 0.0) throw std::invalid_argument("one_minus_laplace: s must be >= 0");
  if (s == 0.0) return 0.0;
  if (m.is<Exponential>()) {
    const double rate = m.as<Exponential>().rate;
    return s / (rate + s);
  }
  return expectation(m, [s](double g) { return -std::expm1(-s * g); }, spec);
}

/// E[exp(-s g)].
inline double laplace_of_power(const FadingModel& m, double s,
                               const specfun::QuadSpec& spec = {1e-11, 1e-300, 2000}) {
  return 1.0 - one_minus_laplace(m, s, spec);
}

namespace detail {

// x^{2/alpha} (Gamma(-2/alpha, x) - Gamma(-2/alpha)). Equals alpha/2 at x = 0.
inline double beta_kernel(double x, double alpha) {
  const double a = -2.0 / alpha;
  if (x < 1.0) {
    // -sum_n (-x)^n / (n! (a + n))
    double term = 1.0;
    double sum = term / a;
    for (int n = 1; n < 200; ++n) {
      term *= -x / n;
      const double add = term / (a + n);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return -sum;
  }
  return std::pow(x, -a) * (specfun::upper_incomplete_gamma(a, x) - specfun::gamma_neg(a));
}

}  // namespace detail

/// beta(T, alpha) = (2 (mu T)^{2/alpha} / alpha) E[g^{2/alpha} (Gamma(-2/alpha, mu T g)
/// - Gamma(-2/alpha))]. Equals 1 + rho(T, alpha) when g ~ exp(mu).
inline double beta_expectation(const FadingModel& m, double threshold, double alpha, double mu,
                               const specfun::QuadSpec& spec = {1e-11, 1e-14, 4000}) {
  if (!(alpha > 2.0)) {
    throw DivergenceError("path-loss exponent alpha must exceed 2 (interference diverges)");
  }
  if (!(threshold > 0.0) || !(mu > 0.0)) {
    throw std::invalid_argument("beta_expectation: need T > 0 and mu > 0");
  }
  const double scale = mu * threshold;
  const double mean_kernel =
      expectation(m, [&](double g) { return detail::beta_kernel(scale * g, alpha); }, spec);
  return 2.0 / alpha * mean_kernel;
}

/// One draw of g from the stream.
inline double sample_power(const FadingModel& m, Stream& stream) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return std::exponential_distribution<double>(p.rate)(stream);
        } else if constexpr (std::is_same_v<T, LognormalDb>) {
          if (p.std_db == 0.0) return std::exp(kDbToNeper * p.mean_db);
          const double x = std::normal_distribution<double>(p.mean_db, p.std_db)(stream);
          return std::exp(kDbToNeper * x);
        } else {
          const double target = stream.uniform() * p.cdf.back();
          auto it = std::upper_bound(p.cdf.begin(), p.cdf.end(), target);
          std::size_t i = static_cast<std::size_t>(it - p.cdf.begin());
          i = std::clamp<std::size_t>(i, 1, p.cdf.size() - 1);
          const double g0 = p.power[i - 1];
          const double p0 = p.pdf[i - 1];
          const double slope = (p.pdf[i] - p0) / (p.power[i] - g0);
          const double need = target - p.cdf[i - 1];
          // Solve p0 d + slope d^2 / 2 = need for d in the segment.
          const double root = std::sqrt(std::max(0.0, p0 * p0 + 2.0 * slope * need));
          const double denom = p0 + root;
          const double d = denom > 0.0 ? 2.0 * need / denom : 0.0;
          return std::min(g0 + d, p.power[i]);
        }
      },
      m.params());
}

/// Two-column CSV (power, pdf), '#' comment lines allowed.
inline FadingModel load_tabulated_csv(std::istream& in, const std::string& source) {
  const auto rows = read_numeric_csv(in, source, 2, 2);
  std::vector<double> power, pdf;
  for (const auto& row : rows) {
    if (!power.empty() && !(row.fields[0] > power.back())) {
      throw ParseError(source, row.line, "power column must be strictly increasing");
    }
    if (row.fields[0] < 0.0 || row.fields[1] < 0.0) {
      throw ParseError(source, row.line, "power and pdf must be nonnegative");
    }
    power.push_back(row.fields[0]);
    pdf.push_back(row.fields[1]);
  }
  return FadingModel::tabulated(std::move(power), std::move(pdf));
}

inline FadingModel load_tabulated_csv(const std::string& path) {
  auto in = open_input(path);
  return load_tabulated_csv(in, path);
}

}  // namespace fading

using fading::FadingModel;

}  // namespace cellcov
