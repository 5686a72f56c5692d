#pragma once

// Coverage probability P[SINR > T] and mean rate E[ln(1 + SINR/G)] for a
// typical user served by its nearest base station in a Poisson field of
// density lambda. Interference fading is general (beta functional) or
// exponential (rho integral); the desired link always has h ~ exp(mu).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cellcov/fading.hpp"
#include "cellcov/specfun.hpp"

namespace cellcov {

/// Operation called with inputs outside its declared scope (wrong fading
/// kind, alpha != 4 for the Q-function form, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NetworkParams {
  double lambda = 1.0;  // base stations per unit area
  double alpha = 4.0;   // path-loss exponent
  double mu = 1.0;      // desired-link fading rate, E[h] = 1/mu
  double sigma2 = 0.0;  // noise power; SNR = 1/(mu sigma2)
  FadingModel fading = FadingModel::exponential(1.0);

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("invariant violated: lambda > 0");
    }
    if (!(alpha > 2.0) || !std::isfinite(alpha)) {
      throw DivergenceError("invariant violated: alpha > 2 (interference diverges)");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw std::invalid_argument("invariant violated: mu > 0");
    }
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
      throw std::invalid_argument("invariant violated: sigma2 >= 0");
    }
  }

  double snr() const {
    return sigma2 == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (mu * sigma2);
  }

  /// Noise power giving the requested linear SNR (infinite SNR gives 0).
  static double sigma2_for_snr(double snr_linear, double mu) {
    if (!(snr_linear > 0.0)) throw std::invalid_argument("invariant violated: SNR > 0");
    return std::isinf(snr_linear) ? 0.0 : 1.0 / (mu * snr_linear);
  }
};

enum class CoverageMethod {
  general_fading,
  exponential,
  alpha4_closed,
  no_noise_closed,
  small_noise,
  simulated,
};

inline std::string_view to_string(CoverageMethod m) {
  switch (m) {
    case CoverageMethod::general_fading: return "general_fading";
    case CoverageMethod::exponential: return "exponential";
    case CoverageMethod::alpha4_closed: return "alpha4_closed";
    case CoverageMethod::no_noise_closed: return "no_noise_closed";
    case CoverageMethod::small_noise: return "small_noise";
    case CoverageMethod::simulated: return "simulated";
  }
  return "unknown";
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// CCDF values over a threshold grid. ci_halfwidths is empty for analytic
/// curves and holds 95% half-widths for simulated ones.
struct CoverageCurve {
  std::vector<double> thresholds;  // linear T
  std::vector<double> thresholds_db;
  std::vector<double> values;
  std::vector<double> ci_halfwidths;
  CoverageMethod method = CoverageMethod::exponential;
  int reuse_delta = 1;
  std::size_t trials = 0;
  std::size_t resamples = 0;
};

struct RateResult {
  double tau = 0.0;  // nats/s/Hz
  int reuse_delta = 1;
  double gap = 1.0;
  std::string method;
};

/// Small-noise expansion. value is the raw expansion, clamped is value
/// restricted to [0,1]; valid is false when clamping was needed.
struct SmallNoiseApprox {
  double value = 0.0;
  double clamped = 0.0;
  bool valid = true;
};

namespace analytic {

namespace detail {

// int_0^Y y / (1 + y^q) dy, q > 2.
inline double rho_core(double upper, double q) {
  if (upper <= 2.0) {
    return specfun::integrate([q](double y) { return y / (1.0 + std::pow(y, q)); }, 0.0, upper,
                              {1e-13, 1e-300, 2000})
        .value;
  }
  // Complete integral pi/(q sin(2 pi/q)) minus the tail
  // int_Y^inf = sum_k (-1)^k Y^{2 - q(k+1)} / (q(k+1) - 2).
  const double complete = std::numbers::pi / (q * std::sin(2.0 * std::numbers::pi / q));
  const double ratio = std::pow(upper, -q);
  double power = upper * upper * ratio;
  double tail = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double term = power / (q * (k + 1) - 2.0);
    tail += (k % 2 == 0) ? term : -term;
    if (term < 1e-17 * std::abs(tail)) break;
    power *= ratio;
  }
  return complete - tail;
}

inline void require_threshold(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("threshold T must be a positive finite number");
  }
}

// Scale that maps an exponential(rate) interferer onto the unit-mean-ratio
// form used by rho: beta = 1 + rho(T mu / rate, alpha).
inline double exponential_threshold_scale(const NetworkParams& p) {
  if (!p.fading.is<fading::Exponential>()) {
    throw ContractError("operation requires exponential interference fading");
  }
  return p.mu / p.fading.as<fading::Exponential>().rate;
}

}  // namespace detail

/// rho(T, alpha) = T^{2/alpha} int_{T^{-2/alpha}}^inf du / (1 + u^{alpha/2}).
/// Evaluated after u = y^{-4/(alpha-2)}, which makes the integrand smooth.
inline double rho(double threshold, double alpha) {
  if (!(alpha > 2.0)) throw DivergenceError("rho: alpha must exceed 2");
  if (std::isnan(threshold) || threshold < 0.0) {
    throw std::invalid_argument("rho: threshold must be >= 0");
  }
  if (threshold == 0.0) return 0.0;
  if (std::isinf(threshold)) return threshold;
  const double p = 4.0 / (alpha - 2.0);
  const double q = 2.0 * alpha / (alpha - 2.0);
  const double upper = std::pow(threshold, 1.0 / q);
  return std::pow(threshold, 2.0 / alpha) * p * detail::rho_core(upper, q);
}

/// kappa(T) = 1 + rho(T, 4) in closed form.
inline double kappa(double threshold) {
  const double s = std::sqrt(threshold);
  return 1.0 + s * (std::numbers::pi / 2.0 - std::atan(1.0 / s));
}

/// L_{I_r}(s) = exp(-2 pi lambda int_r^inf (1 - E_g[exp(-s g v^{-alpha})]) v dv).
inline double laplace_interference(const NetworkParams& p, double r, double s) {
  p.validate();
  if (!(r > 0.0)) throw std::invalid_argument("laplace_interference: r must be > 0");
  if (!(s >= 0.0)) throw std::invalid_argument("laplace_interference: s must be >= 0");
  if (s == 0.0) return 1.0;
  // v = r y^{-k}, k = 2/(alpha-2): the integrand becomes O(y) at y -> 0.
  const double k = 2.0 / (p.alpha - 2.0);
  const double scaled = s * std::pow(r, -p.alpha);
  auto integrand = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double arg = scaled * std::pow(y, k * p.alpha);
    return fading::one_minus_laplace(p.fading, arg) * std::pow(y, -2.0 * k - 1.0);
  };
  const double inner =
      specfun::integrate(integrand, 0.0, 1.0, {1e-12, 1e-300, 4000}).value * r * r * k;
  return std::exp(-2.0 * std::numbers::pi * p.lambda * inner);
}

/// pi lambda int_0^inf exp(-pi lambda v c - mu T sigma2 v^{alpha/2}) dv for an
/// interference constant c >= 1. After w = pi lambda v the integrand is
/// bounded by exp(-c w), so [0, 40/c] loses under e^{-40}/c.
inline double coverage_integral(const NetworkParams& p, double threshold, double c) {
  if (p.sigma2 == 0.0 || threshold == 0.0) return 1.0 / c;
  const double noise = p.mu * threshold * p.sigma2;
  const double inv_pl = 1.0 / (std::numbers::pi * p.lambda);
  const double half_alpha = 0.5 * p.alpha;
  auto integrand = [&](double w) {
    return std::exp(-c * w - noise * std::pow(w * inv_pl, half_alpha));
  };
  return specfun::integrate(integrand, 0.0, 40.0 / c, {1e-12, 1e-16, 4000}).value;
}

/// General interference fading: pi lambda int exp(-pi lambda v beta - mu T sigma2 v^{alpha/2}) dv.
inline double coverage_general(const NetworkParams& p, double threshold) {
  p.validate();
  detail::require_threshold(threshold);
  const double beta = fading::beta_expectation(p.fading, threshold, p.alpha, p.mu);
  return coverage_integral(p, threshold, beta);
}

/// Exponential interference fading: beta collapses to 1 + rho(T, alpha).
inline double coverage_exponential(const NetworkParams& p, double threshold) {
  p.validate();
  detail::require_threshold(threshold);
  const double scale = detail::exponential_threshold_scale(p);
  return coverage_integral(p, threshold, 1.0 + rho(threshold * scale, p.alpha));
}

/// alpha = 4 form (pi^{3/2} lambda / sqrt(T/SNR)) exp(x^2/2) Q(x), evaluated as
/// a Mills ratio so small noise never overflows. c = kappa(T) for exponential
/// interference, beta(T, 4) otherwise.
inline double coverage_alpha4(const NetworkParams& p, double threshold) {
  p.validate();
  detail::require_threshold(threshold);
  if (p.alpha != 4.0) throw ContractError("coverage_alpha4 requires alpha = 4");
  const double c = p.fading.is<fading::Exponential>()
                       ? kappa(threshold * detail::exponential_threshold_scale(p))
                       : fading::beta_expectation(p.fading, threshold, 4.0, p.mu);
  if (p.sigma2 == 0.0) return 1.0 / c;
  const double a = std::numbers::pi * p.lambda * c;
  const double b = p.mu * threshold * p.sigma2;
  const double x = a / std::sqrt(2.0 * b);
  constexpr double pi_3_2 = 5.568327996831707845284817982118835702;
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  return pi_3_2 * p.lambda / std::sqrt(b) * specfun::mills_ratio(x) * inv_sqrt_2pi;
}

/// First-order small-noise expansion
/// 1/c - mu T sigma2 (lambda pi)^{-alpha/2} Gamma(1 + alpha/2) / c^{1 + alpha/2},
/// c = beta (1 + rho for exponential interference). Error is o(sigma2).
inline SmallNoiseApprox coverage_small_noise(const NetworkParams& p, double threshold) {
  p.validate();
  detail::require_threshold(threshold);
  const double c = p.fading.is<fading::Exponential>()
                       ? 1.0 + rho(threshold * detail::exponential_threshold_scale(p), p.alpha)
                       : fading::beta_expectation(p.fading, threshold, p.alpha, p.mu);
  const double half_alpha = 0.5 * p.alpha;
  const double correction = p.mu * threshold * p.sigma2 *
                            std::pow(p.lambda * std::numbers::pi, -half_alpha) *
                            std::tgamma(1.0 + half_alpha) / std::pow(c, 1.0 + half_alpha);
  SmallNoiseApprox out;
  out.value = 1.0 / c - correction;
  out.clamped = std::clamp(out.value, 0.0, 1.0);
  out.valid = out.value == out.clamped;
  return out;
}

namespace detail {

// Coverage with random reuse over delta bands; T = 0 gives 1.
inline double reuse_coverage_unchecked(const NetworkParams& p, double threshold, double delta,
                                       double scale) {
  if (threshold == 0.0) return 1.0;
  if (std::isinf(threshold)) return 0.0;
  return coverage_integral(p, threshold, 1.0 + rho(threshold * scale, p.alpha) / delta);
}

}  // namespace detail

/// Random frequency reuse over delta bands: same-band interferers are a
/// thinned PPP, so rho is divided by delta.
inline double coverage_with_reuse(const NetworkParams& p, double threshold, int delta) {
  p.validate();
  detail::require_threshold(threshold);
  if (delta < 1) throw std::invalid_argument("reuse factor delta must be >= 1");
  const double scale = detail::exponential_threshold_scale(p);
  return detail::reuse_coverage_unchecked(p, threshold, delta, scale);
}

/// No-noise coverage 1/(1 + rho/delta).
inline double no_noise_reuse_coverage(double threshold, double alpha, int delta) {
  return 1.0 / (1.0 + rho(threshold, alpha) / delta);
}

/// Smallest delta with no-noise reuse coverage >= 1 - epsilon:
/// ceil(rho (1 - epsilon) / epsilon), at least 1.
inline int min_reuse_factor(double epsilon, double threshold, double alpha) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("min_reuse_factor: epsilon must lie in (0, 1)");
  }
  detail::require_threshold(threshold);
  const double r = rho(threshold, alpha);
  const double raw = std::ceil(r * (1.0 - epsilon) / epsilon);
  if (raw > 1e9) throw std::overflow_error("min_reuse_factor: required delta is too large");
  int delta = std::max(1, static_cast<int>(raw));
  // The ceiling can land one off when r (1 - eps)/eps is within rounding of an integer.
  const double target = 1.0 - epsilon;
  while (no_noise_reuse_coverage(threshold, alpha, delta) < target) ++delta;
  while (delta > 1 && no_noise_reuse_coverage(threshold, alpha, delta - 1) >= target) --delta;
  return delta;
}

/// Mean rate (1/delta) E[ln(1 + SINR/G)] with delta randomly reused bands and
/// exponential interference. Uses E[X] = int P[X > t] dt, so the inner
/// integral is the reuse coverage at threshold G (e^t - 1).
inline RateResult mean_rate(const NetworkParams& p, int delta = 1, double gap = 1.0) {
  p.validate();
  if (delta < 1) throw std::invalid_argument("reuse factor delta must be >= 1");
  if (!(gap >= 1.0) || !std::isfinite(gap)) {
    throw std::invalid_argument("SINR gap G must be >= 1");
  }
  const double scale = detail::exponential_threshold_scale(p);
  auto integrand = [&](double t) {
    if (t > 700.0) return 0.0;
    return detail::reuse_coverage_unchecked(p, gap * std::expm1(t), delta, scale);
  };
  const double total = specfun::integrate_semi_infinite(integrand, 0.0, {1e-9, 1e-13, 4000});
  RateResult out;
  out.tau = total / delta;
  out.reuse_delta = delta;
  out.gap = gap;
  out.method = delta == 1 ? "rate" : "reuse_rate";
  return out;
}

/// Evaluates one coverage method at T.
inline double coverage(const NetworkParams& p, double threshold, CoverageMethod method,
                       int delta = 1) {
  switch (method) {
    case CoverageMethod::general_fading:
      if (delta != 1) throw ContractError("general-fading coverage has no reuse form");
      return coverage_general(p, threshold);
    case CoverageMethod::exponential:
      return delta == 1 ? coverage_exponential(p, threshold)
                        : coverage_with_reuse(p, threshold, delta);
    case CoverageMethod::alpha4_closed:
      if (delta != 1) throw ContractError("alpha = 4 closed form has no reuse form");
      return coverage_alpha4(p, threshold);
    case CoverageMethod::no_noise_closed: {
      p.validate();
      detail::require_threshold(threshold);
      if (p.fading.is<fading::Exponential>()) {
        return no_noise_reuse_coverage(threshold * detail::exponential_threshold_scale(p),
                                       p.alpha, delta);
      }
      if (delta != 1) throw ContractError("reuse requires exponential interference");
      return 1.0 / fading::beta_expectation(p.fading, threshold, p.alpha, p.mu);
    }
    case CoverageMethod::small_noise:
      if (delta != 1) throw ContractError("small-noise expansion has no reuse form");
      return coverage_small_noise(p, threshold).clamped;
    case CoverageMethod::simulated:
      break;
  }
  throw ContractError("coverage: simulated curves come from the sim module");
}

/// Analytic curve over linear thresholds.
inline CoverageCurve coverage_curve(const NetworkParams& p, const std::vector<double>& thresholds,
                                    CoverageMethod method, int delta = 1) {
  CoverageCurve curve;
  curve.method = method;
  curve.reuse_delta = delta;
  curve.thresholds = thresholds;
  for (double t : thresholds) {
    curve.thresholds_db.push_back(linear_to_db(t));
    curve.values.push_back(coverage(p, t, method, delta));
  }
  return curve;
}

}  // namespace analytic
}  // namespace cellcov
