#pragma once

// Special functions and adaptive quadrature used by the coverage and rate
// formulas. Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellcov::specfun {

/// Tolerances for the adaptive integrators.
struct QuadSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1) {
      throw std::invalid_argument(
          "QuadSpec requires rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1");
    }
  }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/// Thrown when the subdivision budget runs out. Carries the best estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double estimate, double error, int subdivisions)
      : std::runtime_error(describe(estimate, error, subdivisions)),
        estimate_(estimate),
        error_(error),
        subdivisions_(subdivisions) {}

  double best_estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_; }
  int subdivisions() const noexcept { return subdivisions_; }

 private:
  static std::string describe(double estimate, double error, int n) {
    std::ostringstream os;
    os.precision(17);
    os << "quadrature did not converge after " << n
       << " subdivisions (estimate " << estimate << ", error " << error << ")";
    return os.str();
  }

  double estimate_;
  double error_;
  int subdivisions_;
};

namespace detail {

// 10-point Gauss / 21-point Kronrod pair (QUADPACK qk21 abscissae and weights).
inline constexpr double kGaussWeights[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};
inline constexpr double kKronrodNodes[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.14887433898163121088482600112972,
    0.0};
inline constexpr double kKronrodWeights[11] = {
    0.011694638867371874278064396062192, 0.03255816230796472747881897245939,
    0.05475589657435199603138130024458,  0.07503967481091995276704314091619,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_21(const F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  double fv1[10], fv2[10];
  const double fc = f(center);
  double resg = 0.0;
  double resk = kKronrodWeights[10] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kKronrodNodes[jtw];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kGaussWeights[j] * (f1 + f2);
    resk += kKronrodWeights[jtw] * (f1 + f2);
    resabs += kKronrodWeights[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kKronrodNodes[jtwm1];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kKronrodWeights[jtwm1] * (f1 + f2);
    resabs += kKronrodWeights[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = kKronrodWeights[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kKronrodWeights[j] *
              (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * half;
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > tiny / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, result, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]: the panel
/// with the largest error estimate is bisected until the summed error meets
/// max(rel_tol * |result|, abs_tol).
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadSpec& spec = {}) {
  spec.validate();
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("integrate: finite limits required");
  }

  std::vector<detail::Panel> panels;
  panels.reserve(static_cast<std::size_t>(spec.max_subdivisions) + 2);
  panels.push_back(detail::gauss_kronrod_21(f, a, b));
  double total = panels.front().value;
  double total_err = panels.front().error;
  int splits = 0;

  auto resum = [&] {
    total = 0.0;
    total_err = 0.0;
    for (const auto& p : panels) {
      total += p.value;
      total_err += p.error;
    }
  };
  auto converged = [&] {
    return total_err <= std::max(spec.rel_tol * std::abs(total), spec.abs_tol);
  };

  while (!converged()) {
    if (!std::isfinite(total) || splits >= spec.max_subdivisions) {
      throw QuadratureError(total, total_err, splits);
    }
    std::pop_heap(panels.begin(), panels.end());
    const detail::Panel worst = panels.back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
      // Panel is at machine resolution; nothing left to refine.
      throw QuadratureError(total, total_err, splits);
    }
    panels.back() = detail::gauss_kronrod_21(f, worst.a, mid);
    std::push_heap(panels.begin(), panels.end());
    panels.push_back(detail::gauss_kronrod_21(f, mid, worst.b));
    std::push_heap(panels.begin(), panels.end());
    ++splits;
    // Exact re-summation keeps the running totals from drifting.
    resum();
  }
  return {total, total_err, splits};
}

/// Integral of f over [lower, inf) via x = lower + t/(1-t), t in [0,1).
template <class F>
QuadResult integrate_semi_infinite_result(const F& f, double lower,
                                          const QuadSpec& spec = {}) {
  if (!std::isfinite(lower)) {
    throw std::invalid_argument("integrate_semi_infinite: finite lower limit required");
  }
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    if (one_minus <= 0.0) return 0.0;
    const double x = lower + t / one_minus;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x) / (one_minus * one_minus);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(mapped, 0.0, 1.0, spec);
}

template <class F>
double integrate_semi_infinite(const F& f, double lower, const QuadSpec& spec = {}) {
  return integrate_semi_infinite_result(f, lower, spec).value;
}

/// Standard Gaussian tail probability Q(x) = P[N(0,1) > x].
inline double gaussian_q(double x) {
  return 0.5 * std::erfc(x * (std::numbers::sqrt2 / 2.0));
}

/// Mills ratio Q(x)/phi(x) for x >= 0. Uses erfc below x = 8 and the Laplace
/// continued fraction 1/(x + 1/(x + 2/(x + ...))) above, so it never forms
/// exp(x^2/2) for large x.
inline double mills_ratio(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    throw std::domain_error("mills_ratio: x must be nonnegative");
  }
  constexpr double sqrt_2pi = 2.506628274631000502415765284811;
  if (x <= 8.0) {
    return gaussian_q(x) * sqrt_2pi * std::exp(0.5 * x * x);
  }
  if (std::isinf(x)) return 0.0;
  // Modified Lentz for f = x + 1/(x + 2/(x + 3/(x + ...))).
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    d = x + n * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + n / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

/// x Q(x) exp(x^2/2); tends to 1/sqrt(2 pi) as x grows.
inline double scaled_gaussian_tail(double x) {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  if (std::isinf(x)) return inv_sqrt_2pi;
  return x * mills_ratio(x) * inv_sqrt_2pi;
}

/// Gamma(z) for z in (-1, 0) via Gamma(z+1)/z.
inline double gamma_neg(double z) {
  if (!(z > -1.0 && z < 0.0)) {
    throw std::domain_error("gamma_neg: argument must lie in (-1, 0)");
  }
  const double g = std::tgamma(z + 1.0) / z;
  if (!std::isfinite(g)) {
    throw std::overflow_error("gamma_neg: pole at 0, result overflows");
  }
  return g;
}

namespace detail {

// Lower incomplete gamma gamma(a, x) by its power series, a > 0.
inline double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 2000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(a * std::log(x) - x);
}

// Upper incomplete gamma Gamma(a, x) by Legendre's continued fraction
// (modified Lentz); valid for x > 0 and converges quickly for x >= a + 1.
inline double upper_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 2000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(a * std::log(x) - x) * h;
}

// E1(x) = Gamma(0, x), x > 0.
inline double exponential_integral_e1(double x) {
  if (x >= 1.0) return upper_gamma_cf(0.0, x);
  constexpr double euler_gamma = 0.57721566490153286060651209008240;
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < 1e-18) break;
  }
  return -euler_gamma - std::log(x) - sum;
}

inline double upper_gamma_positive(double a, double x) {
  if (x == 0.0) return std::tgamma(a);
  if (x < a + 1.0) return std::tgamma(a) - lower_gamma_series(a, x);
  return upper_gamma_cf(a, x);
}

}  // namespace detail

/// Upper incomplete gamma Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt for
/// a > -1. Negative a uses one step of a Gamma(a,x) = Gamma(a+1,x) - x^a e^{-x}.
inline double upper_incomplete_gamma(double a, double x) {
  if (!std::isfinite(a) || std::isnan(x) || x < 0.0) {
    throw std::domain_error("upper_incomplete_gamma: need finite a and x >= 0");
  }
  if (a <= -1.0) {
    throw std::domain_error("upper_incomplete_gamma: a must exceed -1");
  }
  if (std::isinf(x)) return 0.0;
  if (a > 0.0) return detail::upper_gamma_positive(a, x);
  if (x == 0.0) {
    throw std::domain_error(
        "upper_incomplete_gamma: integral diverges at the origin for a <= 0");
  }
  if (a == 0.0) return detail::exponential_integral_e1(x);
  const double upper_next = detail::upper_gamma_positive(a + 1.0, x);
  return (upper_next - std::exp(a * std::log(x) - x)) / a;
}

}  // namespace cellcov::specfun
