#pragma once

// Monte-Carlo SINR for a typical user. Every trial owns the Philox stream
// (seed, trial index) and writes one SINR sample into its own slot, so the
// estimates do not depend on the thread count or scheduling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "cellcov/analytic.hpp"
#include "cellcov/deployment.hpp"
#include "cellcov/fading.hpp"
#include "cellcov/rng.hpp"

namespace cellcov::sim {

struct PppSource {
  double lambda = 1.0;
};

struct GridSource {
  double cell_radius = 0.5;
  int tiers = 1;
};

struct LatticeSource {
  double cell_radius = 0.5;
  double jitter = 0.0;
  int tiers = 2;
};

/// A fixed layout reused by every trial (imported CSV or a prepared grid).
struct FixedSource {
  Deployment deployment;
};

using DeploymentSource = std::variant<PppSource, GridSource, LatticeSource, FixedSource>;

enum class WindowPolicy { automatic, fixed };
enum class Allocation { random, greedy };

struct SimConfig {
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  WindowPolicy window_policy = WindowPolicy::automatic;
  double window_radius = 0.0;  // used when window_policy == fixed
  int reuse_delta = 1;
  Allocation allocation = Allocation::random;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (trials < 1) throw std::invalid_argument("invariant violated: trials >= 1");
    if (reuse_delta < 1) throw std::invalid_argument("invariant violated: reuse_delta >= 1");
    if (window_policy == WindowPolicy::fixed && !(window_radius > 0.0)) {
      throw std::invalid_argument("fixed window policy needs window_radius > 0");
    }
  }
};

struct SimEstimate {
  double value = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t trials_used = 0;
  std::size_t resamples = 0;
};

struct LinkSample {
  double sinr = 0.0;
  std::size_t serving = 0;
  double distance = 0.0;
};

namespace detail {

inline double path_gain(double dist2, double alpha) {
  if (alpha == 4.0) return 1.0 / (dist2 * dist2);
  return std::pow(dist2, -0.5 * alpha);
}

inline Site draw_user(const Deployment& d, Stream& stream) {
  if (!d.user_region) return {0.0, 0.0};
  const auto& r = *d.user_region;
  const double ux = r.xmin + (r.xmax - r.xmin) * stream.uniform();
  const double uy = r.ymin + (r.ymax - r.ymin) * stream.uniform();
  return {ux, uy};
}

}  // namespace detail

/// One SINR draw. Draw order: user position (when the deployment has a user
/// region), serving fade h ~ exp(mu), then g_i for co-band interferers in
/// site order. The user's band is the serving site's band unless given.
inline LinkSample sample_link(const Deployment& d, const NetworkParams& p, Stream& stream,
                              std::optional<int> band_of_user = std::nullopt) {
  if (d.sites.empty()) throw std::invalid_argument("deployment has no sites");
  const Site u = detail::draw_user(d, stream);
  std::size_t serving = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.sites.size(); ++i) {
    const double dx = d.sites[i].x - u.x;
    const double dy = d.sites[i].y - u.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      serving = i;
    }
  }
  const bool banded = !d.bands.empty();
  const int band = band_of_user ? *band_of_user : (banded ? d.bands[serving] : 1);

  const double h = std::exponential_distribution<double>(p.mu)(stream);
  double interference = 0.0;
  for (std::size_t i = 0; i < d.sites.size(); ++i) {
    if (i == serving || (banded && d.bands[i] != band)) continue;
    const double dx = d.sites[i].x - u.x;
    const double dy = d.sites[i].y - u.y;
    interference += fading::sample_power(p.fading, stream) * detail::path_gain(dx * dx + dy * dy, p.alpha);
  }
  if (d.far_field_density > 0.0) {
    if (const auto* disc = std::get_if<DiscWindow>(&d.window)) {
      const double density = d.far_field_density / (banded ? d.band_count : 1);
      interference += 2.0 * std::numbers::pi * density * fading::mean_power(p.fading) *
                      std::pow(disc->radius, 2.0 - p.alpha) / (p.alpha - 2.0);
    }
  }
  return {h * detail::path_gain(best, p.alpha) / (p.sigma2 + interference), serving,
          std::sqrt(best)};
}

inline double sinr_at_origin(const Deployment& d, const NetworkParams& p, Stream& stream,
                             std::optional<int> band_of_user = std::nullopt) {
  return sample_link(d, p, stream, band_of_user).sinr;
}

/// Window for the auto policy: at least 500 expected points, and the
/// standard deviation of the interference beyond the window at most 1% of the
/// mean serving power at distance 1/(2 sqrt(lambda)). The mean of that far
/// field is added deterministically (see sample_link).
inline double auto_window_radius(const NetworkParams& p, int delta = 1) {
  p.validate();
  const double by_count = std::sqrt(500.0 / (std::numbers::pi * p.lambda));
  const double r0 = 0.5 / std::sqrt(p.lambda);
  const double serving = std::pow(r0, -p.alpha) / p.mu;
  const double density = p.lambda / std::max(delta, 1);
  const double m2 = fading::second_moment(p.fading);
  // Var of far field = 2 pi lambda E[g^2] R^(2 - 2 alpha) / (2 alpha - 2).
  const double limit = 1e-2 * serving;
  const double var_coeff = 2.0 * std::numbers::pi * density * m2 / (2.0 * p.alpha - 2.0);
  const double by_tail = std::pow(var_coeff / (limit * limit), 1.0 / (2.0 * p.alpha - 2.0));
  return std::max(by_count, by_tail);
}

/// Fixed-order pairwise sum; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Sample mean and 95% normal-approximation half-width.
inline SimEstimate mean_with_ci(std::span<const double> v) {
  SimEstimate e;
  e.trials_used = v.size();
  if (v.empty()) return e;
  const double n = static_cast<double>(v.size());
  e.value = pairwise_sum(v) / n;
  if (v.size() < 2) {
    e.ci_halfwidth = std::numeric_limits<double>::infinity();
    return e;
  }
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - e.value) * (v[i] - e.value);
  const double var = pairwise_sum(sq) / (n - 1.0);
  e.ci_halfwidth = 1.96 * std::sqrt(var / n);
  return e;
}

struct SinrSamples {
  std::vector<double> sinr;  // one entry per trial, in trial order
  std::size_t resamples = 0;
};

namespace detail {

inline Deployment allocate(Deployment d, int delta, Allocation a, Stream& stream) {
  if (delta == 1) return d;
  if (a == Allocation::greedy) return assign_bands_greedy(std::move(d), delta);
  return assign_bands_random(std::move(d), delta, stream);
}

// Layout used by every trial, or nullopt when each trial draws its own.
inline std::optional<Deployment> shared_deployment(const DeploymentSource& src,
                                                   const SimConfig& cfg) {
  const int delta = cfg.reuse_delta;
  if (const auto* g = std::get_if<GridSource>(&src)) {
    Deployment d = make_grid(g->cell_radius, g->tiers);
    if (delta == 1) return d;
    return cfg.allocation == Allocation::greedy ? assign_bands_greedy(std::move(d), delta)
                                                : assign_bands_grid_pattern(std::move(d), delta);
  }
  if (const auto* f = std::get_if<FixedSource>(&src)) {
    Deployment d = f->deployment;
    d.validate();
    if (!d.bands.empty() || delta == 1) return d;
    if (cfg.allocation == Allocation::greedy) return assign_bands_greedy(std::move(d), delta);
    return std::nullopt;  // random bands are redrawn per trial
  }
  return std::nullopt;
}

}  // namespace detail

/// Runs cfg.trials independent trials and returns their SINR samples.
inline SinrSamples simulate_sinr(const DeploymentSource& src, const NetworkParams& p,
                                 const SimConfig& cfg) {
  p.validate();
  cfg.validate();
  const int delta = cfg.reuse_delta;
  const std::optional<Deployment> shared = detail::shared_deployment(src, cfg);
  double window = 0.0;
  if (const auto* ppp = std::get_if<PppSource>(&src)) {
    NetworkParams q = p;
    q.lambda = ppp->lambda;
    window = cfg.window_policy == WindowPolicy::fixed ? cfg.window_radius
                                                      : auto_window_radius(q, delta);
  }

  const std::size_t n = cfg.trials;
  SinrSamples out;
  out.sinr.assign(n, 0.0);
  std::vector<std::size_t> resamples(n, 0);

  auto run_trial = [&](std::size_t t) {
    Stream stream(cfg.seed, t);
    if (shared) {
      out.sinr[t] = sinr_at_origin(*shared, p, stream);
      return;
    }
    Deployment d;
    if (const auto* ppp = std::get_if<PppSource>(&src)) {
      d = sample_ppp_deployment(ppp->lambda, window, stream);
      if (cfg.window_policy == WindowPolicy::automatic) d.far_field_density = ppp->lambda;
    } else if (const auto* lat = std::get_if<LatticeSource>(&src)) {
      d = generate_perturbed_lattice(lat->cell_radius, lat->jitter, lat->tiers, stream);
    } else {
      d = std::get<FixedSource>(src).deployment;
    }
    resamples[t] = d.resamples;
    d = detail::allocate(std::move(d), delta, cfg.allocation, stream);
    out.sinr[t] = sinr_at_origin(d, p, stream);
  };

  unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::min<std::size_t>(n, 256)));
  if (workers == 1) {
    for (std::size_t t = 0; t < n; ++t) run_trial(t);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < n; t += workers) run_trial(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t r : resamples) out.resamples += r;
  return out;
}

/// Empirical CCDF of the samples at each linear threshold.
inline CoverageCurve coverage_from_samples(const SinrSamples& s,
                                           const std::vector<double>& thresholds,
                                           int reuse_delta = 1) {
  CoverageCurve curve;
  curve.method = CoverageMethod::simulated;
  curve.reuse_delta = reuse_delta;
  curve.trials = s.sinr.size();
  curve.resamples = s.resamples;
  const double n = static_cast<double>(s.sinr.size());
  for (double t : thresholds) {
    if (!(t >= 0.0)) throw std::invalid_argument("invariant violated: T >= 0");
    std::size_t hits = 0;
    for (double x : s.sinr) hits += x > t ? 1 : 0;
    const double phat = static_cast<double>(hits) / n;
    curve.thresholds.push_back(t);
    curve.thresholds_db.push_back(linear_to_db(t));
    curve.values.push_back(phat);
    curve.ci_halfwidths.push_back(s.sinr.size() < 2
                                      ? std::numeric_limits<double>::infinity()
                                      : 1.96 * std::sqrt(phat * (1.0 - phat) / (n - 1.0)));
  }
  return curve;
}

/// Coverage over a threshold grid from one shared set of trials.
inline CoverageCurve estimate_coverage(const DeploymentSource& src, const NetworkParams& p,
                                       const std::vector<double>& thresholds,
                                       const SimConfig& cfg) {
  return coverage_from_samples(simulate_sinr(src, p, cfg), thresholds, cfg.reuse_delta);
}

/// Mean of (1/delta) ln(1 + SINR/G) over the samples.
inline SimEstimate rate_from_samples(const SinrSamples& s, int delta, double gap) {
  if (delta < 1) throw std::invalid_argument("reuse factor delta must be >= 1");
  if (!(gap >= 1.0)) throw std::invalid_argument("SINR gap G must be >= 1");
  std::vector<double> v(s.sinr.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::isinf(gap) ? 0.0 : std::log1p(s.sinr[i] / gap) / delta;
  }
  SimEstimate e = mean_with_ci(v);
  e.resamples = s.resamples;
  return e;
}

inline SimEstimate estimate_rate(const DeploymentSource& src, const NetworkParams& p,
                                 SimConfig cfg, int delta, double gap) {
  cfg.reuse_delta = delta;
  return rate_from_samples(simulate_sinr(src, p, cfg), delta, gap);
}

}  // namespace cellcov::sim
