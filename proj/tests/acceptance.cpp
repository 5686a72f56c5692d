// Acceptance suite: one PASS/FAIL line per criterion, indented detail lines
// before it. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cellcov/analytic.hpp"
#include "cellcov/cli.hpp"
#include "cellcov/sim.hpp"

using cellcov::CoverageCurve;
using cellcov::FadingModel;
using cellcov::NetworkParams;
namespace an = cellcov::analytic;
namespace sim = cellcov::sim;

namespace {

constexpr std::size_t kTrials = 100000;

int failures = 0;

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

void verdict(int id, const char* name, bool ok) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, name);
  std::fflush(stdout);
  if (!ok) ++failures;
}

NetworkParams params(double alpha, double snr_linear = INFINITY, double lambda = 1.0) {
  NetworkParams p;
  p.alpha = alpha;
  p.lambda = lambda;
  p.sigma2 = NetworkParams::sigma2_for_snr(snr_linear, p.mu);
  return p;
}

sim::SimConfig config(std::uint64_t seed, int delta = 1) {
  sim::SimConfig c;
  c.trials = kTrials;
  c.seed = seed;
  c.reuse_delta = delta;
  return c;
}

std::vector<double> t_grid_db(double lo, double hi, double step) {
  std::vector<double> v;
  for (double db = lo; db <= hi + 1e-9; db += step) v.push_back(db);
  return v;
}

std::vector<double> linear(const std::vector<double>& db) {
  std::vector<double> v;
  for (double d : db) v.push_back(cellcov::db_to_linear(d));
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// upper >= lower at every T, allowing 3 joint half-widths.
bool dominates(const CoverageCurve& upper, const CoverageCurve& lower, const char* label) {
  bool ok = true;
  double worst = INFINITY;
  for (std::size_t i = 0; i < upper.values.size(); ++i) {
    const double joint = std::hypot(upper.ci_halfwidths[i],
                                    lower.ci_halfwidths.empty() ? 0.0 : lower.ci_halfwidths[i]);
    const double margin = upper.values[i] - lower.values[i] + 3.0 * joint;
    worst = std::min(worst, margin);
    if (margin < 0.0) {
      ok = false;
      detail("%s violated at T=%g dB: %.5f vs %.5f (3 joint CI %.5f)", label,
             upper.thresholds_db[i], upper.values[i], lower.values[i], 3.0 * joint);
    }
  }
  detail("%s: smallest margin (upper - lower + 3 joint CI) = %.5f -> %s", label, worst,
         ok ? "ok" : "violated");
  return ok;
}

// Shared PPP run at alpha = 4 without noise, used by criteria 1 and 7.
sim::SinrSamples ppp_alpha4_samples;

void criterion1() {
  const NetworkParams p = params(4.0);
  const double exact = 4.0 / (4.0 + std::numbers::pi);
  const double general = an::coverage_general(p, 1.0);
  const double expo = an::coverage_exponential(p, 1.0);
  const double q_form = an::coverage_alpha4(p, 1.0);
  const double err = std::max({std::abs(general - exact), std::abs(expo - exact),
                               std::abs(q_form - exact)});
  detail("analytic p_c(0 dB) general=%.12f exponential=%.12f alpha4=%.12f, target %.12f, "
         "max error %.2e",
         general, expo, q_form, exact, err);

  const auto t0 = std::chrono::steady_clock::now();
  ppp_alpha4_samples = sim::simulate_sinr(sim::PppSource{1.0}, p, config(1001));
  const auto curve = sim::coverage_from_samples(ppp_alpha4_samples, {1.0});
  const double elapsed = seconds_since(t0);
  const double sim_err = std::abs(curve.values[0] - exact);
  detail("PPP simulation, %zu trials: %.5f +/- %.5f (|error| %.5f, limit 0.006), %.2f s "
         "(limit 10 s), %zu empty-draw resamples",
         kTrials, curve.values[0], curve.ci_halfwidths[0], sim_err, elapsed,
         ppp_alpha4_samples.resamples);
  verdict(1, "coverage constant 4/(4+pi) analytic and simulated",
          err <= 1e-9 && sim_err <= 0.006 && elapsed < 10.0);
}

void criterion2() {
  const NetworkParams p = params(4.0);
  const double targets[] = {1.49, 1.10, 0.87};
  bool ok = true;
  for (int delta = 1; delta <= 3; ++delta) {
    const double tau = an::mean_rate(p, delta).tau;
    const bool close = std::abs(tau - targets[delta - 1]) <= 0.01;
    const auto est = sim::estimate_rate(sim::PppSource{1.0}, p, config(2000 + delta), delta, 1.0);
    const bool sim_ok = std::abs(est.value - tau) <= 3.0 * est.ci_halfwidth;
    detail("delta=%d analytic tau=%.6f (target %.2f +/- 0.01: %s), simulated %.5f +/- %.5f "
           "(within 3 CI of analytic: %s)",
           delta, tau, targets[delta - 1], close ? "ok" : "MISS", est.value, est.ci_halfwidth,
           sim_ok ? "ok" : "MISS");
    ok = ok && close && sim_ok;
  }
  verdict(2, "mean-rate constants for delta = 1, 2, 3", ok);
}

void criterion3() {
  double worst = 0.0;
  for (double alpha : {2.5, 3.0, 4.0}) {
    for (double snr : {10.0, static_cast<double>(INFINITY)}) {
      const NetworkParams p = params(alpha, snr);
      for (double db : t_grid_db(-10.0, 20.0, 1.0)) {
        const double T = cellcov::db_to_linear(db);
        const double a = an::coverage_general(p, T);
        const double b = an::coverage_exponential(p, T);
        worst = std::max(worst, std::abs(a - b));
        if (alpha == 4.0) {
          const double c = an::coverage_alpha4(p, T);
          worst = std::max({worst, std::abs(a - c), std::abs(b - c)});
        }
      }
    }
  }
  detail("largest pairwise difference over 31 T x 3 alpha x 2 SNR: %.3e (limit 1e-6)", worst);
  verdict(3, "general-fading, exponential and Q-function forms agree", worst <= 1e-6);
}

void criterion4() {
  const std::vector<double> lambdas{0.1, 1.0, 10.0};
  const auto grid_db = t_grid_db(-10.0, 20.0, 1.0);
  const auto grid = linear(grid_db);
  double cov_diff = 0.0, rate_diff = 0.0;
  for (double alpha : {2.5, 4.0}) {
    const NetworkParams base = params(alpha, INFINITY, 1.0);
    const double base_rate = an::mean_rate(base, 1).tau;
    for (double lambda : lambdas) {
      const NetworkParams p = params(alpha, INFINITY, lambda);
      for (double T : grid) {
        cov_diff = std::max(cov_diff, std::abs(an::coverage_general(p, T) -
                                               an::coverage_general(base, T)));
      }
      rate_diff = std::max(rate_diff, std::abs(an::mean_rate(p, 1).tau - base_rate));
    }
  }
  detail("analytic: max coverage spread %.3e, max rate spread %.3e across lambda (limit 1e-6)",
         cov_diff, rate_diff);
  const bool analytic_ok = cov_diff <= 1e-6 && rate_diff <= 1e-6;

  // Common random numbers: the same seed for every lambda.
  std::vector<CoverageCurve> curves;
  std::vector<sim::SimEstimate> rates;
  for (double lambda : lambdas) {
    const auto samples =
        sim::simulate_sinr(sim::PppSource{lambda}, params(4.0, INFINITY, lambda), config(4004));
    curves.push_back(sim::coverage_from_samples(samples, grid));
    rates.push_back(sim::rate_from_samples(samples, 1, 1.0));
  }
  bool sim_ok = true;
  double worst_cov = 0.0, worst_rate = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (k == 1) continue;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double diff = std::abs(curves[k].values[i] - curves[1].values[i]);
      const double joint = std::hypot(curves[k].ci_halfwidths[i], curves[1].ci_halfwidths[i]);
      worst_cov = std::max(worst_cov, diff / joint);
      sim_ok = sim_ok && diff <= joint;
    }
    const double diff = std::abs(rates[k].value - rates[1].value);
    const double joint = std::hypot(rates[k].ci_halfwidth, rates[1].ci_halfwidth);
    worst_rate = std::max(worst_rate, diff / joint);
    sim_ok = sim_ok && diff <= joint;
  }
  detail("simulated (alpha=4, %zu trials per lambda): largest |difference| / joint CI: "
         "coverage %.3f, rate %.3f (limit 1)",
         kTrials, worst_cov, worst_rate);
  verdict(4, "density invariance without noise", analytic_ok && sim_ok);
}

void criterion5() {
  bool ok = true;
  for (double tdb : {0.0, 10.0}) {
    const double T = cellcov::db_to_linear(tdb);
    std::vector<double> xs, ys;
    for (int k = 2; k <= 5; ++k) {
      NetworkParams p = params(4.0);
      p.sigma2 = std::pow(10.0, -k);
      const double residual =
          std::abs(an::coverage_small_noise(p, T).value - an::coverage_alpha4(p, T));
      xs.push_back(std::log10(p.sigma2));
      ys.push_back(std::log10(residual));
      detail("T=%g dB sigma2=1e-%d residual=%.3e", tdb, k, residual);
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / n;
      my += ys[i] / n;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = num / den;
    detail("T=%g dB fitted log-log slope %.3f (need >= 1.8)", tdb, slope);
    ok = ok && slope >= 1.8;
  }
  verdict(5, "small-noise expansion error is second order", ok);
}

void criterion6() {
  bool ok = true;
  for (double eps : {0.05, 0.1, 0.2}) {
    for (double tdb : {0.0, 3.0}) {
      const double T = cellcov::db_to_linear(tdb);
      const int d = an::min_reuse_factor(eps, T, 4.0);
      const double at = an::no_noise_reuse_coverage(T, 4.0, d);
      const double below = d > 1 ? an::no_noise_reuse_coverage(T, 4.0, d - 1) : 0.0;
      const bool good = at >= 1.0 - eps && (d == 1 || below < 1.0 - eps);
      detail("eps=%.2f T=%g dB: delta=%d, p_c(delta)=%.6f, p_c(delta-1)=%.6f -> %s", eps, tdb, d,
             at, below, good ? "ok" : "MISS");
      ok = ok && good;
    }
  }
  const int spot = an::min_reuse_factor(0.1, 1.0, 4.0);
  detail("spot value eps=0.1 T=0 dB: delta=%d (expected 8)", spot);
  verdict(6, "minimum reuse factor", ok && spot == 8);
}

void criterion7() {
  const auto grid_db = t_grid_db(-10.0, 20.0, 1.0);
  const auto grid = linear(grid_db);
  bool ok = true;

  // Grid above PPP.
  for (double alpha : {2.5, 4.0}) {
    const NetworkParams p = params(alpha);
    const auto ppp = alpha == 4.0
                         ? sim::coverage_from_samples(ppp_alpha4_samples, grid)
                         : sim::estimate_coverage(sim::PppSource{1.0}, p, grid, config(7001));
    const auto lattice = sim::estimate_coverage(sim::GridSource{0.5, 2}, p, grid, config(7002));
    char label[64];
    std::snprintf(label, sizeof label, "grid (24 interferers) >= PPP, alpha=%g", alpha);
    ok = dominates(lattice, ppp, label) && ok;
  }

  // One tier against two tiers.
  {
    const NetworkParams p = params(4.0);
    const auto n8 = sim::estimate_coverage(sim::GridSource{0.5, 1}, p, grid, config(7003));
    const auto n24 = sim::estimate_coverage(sim::GridSource{0.5, 2}, p, grid, config(7003));
    ok = dominates(n8, n24, "8 interferers >= 24 interferers, alpha=4") && ok;
    double gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) gap = std::max(gap, n8.values[i] - n24.values[i]);
    detail("largest 8-vs-24 gap %.4f (small: <= 0.05)", gap);
    ok = ok && gap <= 0.05;
  }

  // Lognormal interference ordering, mean-matched to the exponential model.
  {
    NetworkParams ln3 = params(4.0), ln6 = params(4.0);
    ln3.fading = cellcov::fading::normalize_to_mean(FadingModel::lognormal_db(0.0, 3.0), 1.0);
    ln6.fading = cellcov::fading::normalize_to_mean(FadingModel::lognormal_db(0.0, 6.0), 1.0);
    const auto expo = sim::coverage_from_samples(ppp_alpha4_samples, grid);
    const auto s3 = sim::estimate_coverage(sim::PppSource{1.0}, ln3, grid, config(7004));
    const auto s6 = sim::estimate_coverage(sim::PppSource{1.0}, ln6, grid, config(7005));
    ok = dominates(s6, s3, "lognormal 6 dB >= lognormal 3 dB") && ok;
    ok = dominates(s3, expo, "lognormal 3 dB >= exponential") && ok;
    for (double db : {-10.0, 0.0, 10.0, 20.0}) {
      const double T = cellcov::db_to_linear(db);
      detail("analytic at T=%g dB: exponential %.4f, lognormal 3 dB %.4f, lognormal 6 dB %.4f", db,
             an::coverage_exponential(params(4.0), T), an::coverage_general(ln3, T),
             an::coverage_general(ln6, T));
    }
  }

  // Greedy against random allocation on a jittered lattice.
  {
    const NetworkParams p = params(4.0);
    const sim::LatticeSource lattice{0.5, 0.2, 2};
    auto greedy_cfg = config(7006, 4);
    greedy_cfg.allocation = sim::Allocation::greedy;
    auto random_cfg = config(7007, 4);
    random_cfg.allocation = sim::Allocation::random;
    const auto greedy = sim::estimate_coverage(lattice, p, grid, greedy_cfg);
    const auto random = sim::estimate_coverage(lattice, p, grid, random_cfg);
    ok = dominates(greedy, random, "greedy >= random allocation, delta=4, jitter 0.4R") && ok;
  }
  verdict(7, "coverage orderings (grid/PPP, tiers, lognormal, allocation)", ok);
}

void criterion8() {
  bool ok = true;
  for (double alpha : {2.5, 4.0}) {
    double prev = INFINITY;
    std::string line;
    for (int d = 1; d <= 4; ++d) {
      const double tau = an::mean_rate(params(alpha), d).tau;
      char buf[48];
      std::snprintf(buf, sizeof buf, " delta=%d:%.5f", d, tau);
      line += buf;
      ok = ok && tau < prev;
      prev = tau;
    }
    detail("alpha=%g%s", alpha, line.c_str());
  }
  verdict(8, "mean rate strictly decreasing in reuse factor", ok);
}

void criterion9() {
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "cellcov");
    std::ostringstream out, err;
    const int code = cellcov::cli::run(args, out, err);
    return std::pair{code, out.str()};
  };
  const std::vector<std::vector<std::string>> commands{
      {"compare", "--alpha", "4", "--t-db", "-10:20:1", "--trials", "20000", "--seed", "9"},
      {"compare", "--alpha", "2.5", "--snr", "10", "--t-db", "-10:20:2", "--trials", "20000",
       "--seed", "10", "--delta", "2"},
      {"compare", "--source", "lattice", "--jitter", "0.2", "--tiers", "2", "--delta", "4",
       "--allocation", "random", "--trials", "20000", "--seed", "11"},
      {"compare", "--fading", "lognormal:6", "--trials", "20000", "--seed", "12"}};
  bool ok = true;
  for (const auto& cmd : commands) {
    auto one = cmd, four = cmd;
    one.insert(one.end(), {"--threads", "1"});
    four.insert(four.end(), {"--threads", "4"});
    const auto a = run(one), b = run(one), c = run(four);
    const bool same = a.first == 0 && a.second == b.second && a.second == c.second;
    detail("%s %s ... : %zu bytes, repeat identical %s, 1 vs 4 threads identical %s",
           cmd[0].c_str(), cmd[1].c_str(), a.second.size(), a.second == b.second ? "yes" : "NO",
           a.second == c.second ? "yes" : "NO");
    ok = ok && same;
  }
  verdict(9, "compare output byte-identical across runs and thread counts", ok);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%d of 9 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures;
}
