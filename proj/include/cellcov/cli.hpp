#pragma once

// Command-line front end. run() takes argv-style arguments and two streams so
// it can be driven in-process; exit codes: 0 ok, 2 invalid parameters, 3 I/O.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellcov/analytic.hpp"
#include "cellcov/csv.hpp"
#include "cellcov/deployment.hpp"
#include "cellcov/fading.hpp"
#include "cellcov/sim.hpp"

namespace cellcov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;

/// Every setting a command can use, as it appears after merging defaults,
/// the JSON config file and explicit flags (in rising precedence).
struct Settings {
  double lambda = 1.0;
  double alpha = 4.0;
  double mu = 1.0;
  std::string snr = "inf";  // dB, or "inf"
  std::string fading = "exp";
  std::string t_db = "-10:20:1";
  int delta = 1;
  double gap_db = 0.0;
  double trials = 0;  // 0: analytic only
  std::uint64_t seed = 1;
  std::string deployment;
  std::string allocation = "random";
  std::string source = "ppp";
  double cell_radius = 0.5;
  int tiers = 1;
  double jitter = 0.0;
  double epsilon = 0.1;
  std::string method = "auto";
  double window_radius = 0.0;  // 0: auto policy
  unsigned threads = 0;
  std::string out;
};

inline nlohmann::json to_json(const Settings& s) {
  return {{"lambda", s.lambda},       {"alpha", s.alpha},
          {"mu", s.mu},               {"snr", s.snr},
          {"fading", s.fading},       {"t_db", s.t_db},
          {"delta", s.delta},         {"gap_db", s.gap_db},
          {"trials", s.trials},       {"seed", s.seed},
          {"deployment", s.deployment}, {"allocation", s.allocation},
          {"source", s.source},       {"cell_radius", s.cell_radius},
          {"tiers", s.tiers},         {"jitter", s.jitter},
          {"epsilon", s.epsilon},     {"method", s.method},
          {"window_radius", s.window_radius}, {"threads", s.threads},
          {"out", s.out}};
}

/// Overwrites fields present in `j`; unknown keys are rejected.
inline void apply_json(Settings& s, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  const nlohmann::json known = to_json(s);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    // Numbers are accepted for string settings such as snr or t_db.
    auto as_text = [&]() { return value.is_string() ? value.get<std::string>() : value.dump(); };
    if (key == "lambda") s.lambda = value.get<double>();
    else if (key == "alpha") s.alpha = value.get<double>();
    else if (key == "mu") s.mu = value.get<double>();
    else if (key == "snr") s.snr = as_text();
    else if (key == "fading") s.fading = value.get<std::string>();
    else if (key == "t_db") s.t_db = as_text();
    else if (key == "delta") s.delta = value.get<int>();
    else if (key == "gap_db") s.gap_db = value.get<double>();
    else if (key == "trials") s.trials = value.get<double>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else if (key == "deployment") s.deployment = value.get<std::string>();
    else if (key == "allocation") s.allocation = value.get<std::string>();
    else if (key == "source") s.source = value.get<std::string>();
    else if (key == "cell_radius") s.cell_radius = value.get<double>();
    else if (key == "tiers") s.tiers = value.get<int>();
    else if (key == "jitter") s.jitter = value.get<double>();
    else if (key == "epsilon") s.epsilon = value.get<double>();
    else if (key == "method") s.method = value.get<std::string>();
    else if (key == "window_radius") s.window_radius = value.get<double>();
    else if (key == "threads") s.threads = value.get<unsigned>();
    else if (key == "out") s.out = value.get<std::string>();
  }
}

struct ThresholdGrid {
  std::vector<double> db;
  std::vector<double> linear;
};

/// "start:stop:step" (inclusive stop) or a single dB value.
inline ThresholdGrid parse_t_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    double v = 0.0;
    if (!cellcov::detail::parse_double(s, v) || !std::isfinite(v)) {
      throw std::invalid_argument("--t-db: '" + s + "' is not a finite number");
    }
    return v;
  };
  ThresholdGrid g;
  const auto first = text.find(':');
  if (first == std::string::npos) {
    g.db.push_back(number(text));
  } else {
    const auto second = text.find(':', first + 1);
    if (second == std::string::npos) {
      throw std::invalid_argument("--t-db expects start:stop:step");
    }
    const double start = number(text.substr(0, first));
    const double stop = number(text.substr(first + 1, second - first - 1));
    const double step = number(text.substr(second + 1));
    if (!(step > 0.0)) throw std::invalid_argument("invariant violated: T grid step > 0");
    if (stop < start) throw std::invalid_argument("invariant violated: T grid nonempty");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw std::invalid_argument("T grid has too many points");
    for (long i = 0; i < count; ++i) g.db.push_back(start + static_cast<double>(i) * step);
  }
  for (double d : g.db) g.linear.push_back(db_to_linear(d));
  return g;
}

/// exp | exp:rate | lognormal:xi,kappa | lognormal:kappa (scaled to E[g] = 1) | table:path
inline FadingModel parse_fading(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&](const std::string& s) {
    double v = 0.0;
    if (!cellcov::detail::parse_double(s, v) || !std::isfinite(v)) {
      throw std::invalid_argument("--fading: '" + s + "' is not a finite number");
    }
    return v;
  };
  if (kind == "exp") {
    return FadingModel::exponential(arg.empty() ? 1.0 : number(arg));
  }
  if (kind == "lognormal") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) {
      return fading::normalize_to_mean(FadingModel::lognormal_db(0.0, number(arg)), 1.0);
    }
    return FadingModel::lognormal_db(number(arg.substr(0, comma)), number(arg.substr(comma + 1)));
  }
  if (kind == "table") {
    if (arg.empty()) throw std::invalid_argument("--fading table: needs a file path");
    return fading::load_tabulated_csv(arg);
  }
  throw std::invalid_argument("--fading must be exp, lognormal:xi,kappa or table:path");
}

inline NetworkParams make_params(const Settings& s) {
  NetworkParams p;
  p.lambda = s.lambda;
  p.alpha = s.alpha;
  p.mu = s.mu;
  p.fading = parse_fading(s.fading);
  if (s.snr == "inf" || s.snr == "Inf" || s.snr == "INF") {
    p.sigma2 = 0.0;
  } else {
    double snr_db = 0.0;
    if (!cellcov::detail::parse_double(s.snr, snr_db) || !std::isfinite(snr_db)) {
      throw std::invalid_argument("--snr must be a dB value or 'inf'");
    }
    if (!(s.mu > 0.0)) throw std::invalid_argument("invariant violated: mu > 0");
    p.sigma2 = NetworkParams::sigma2_for_snr(db_to_linear(snr_db), s.mu);
  }
  p.validate();
  return p;
}

inline CoverageMethod parse_method(const std::string& name, const NetworkParams& p) {
  if (name == "auto") {
    if (p.sigma2 == 0.0) return CoverageMethod::no_noise_closed;
    if (p.fading.is<fading::Exponential>()) return CoverageMethod::exponential;
    return CoverageMethod::general_fading;
  }
  for (auto m : {CoverageMethod::general_fading, CoverageMethod::exponential,
                 CoverageMethod::alpha4_closed, CoverageMethod::no_noise_closed,
                 CoverageMethod::small_noise}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument(
      "--method must be auto, general_fading, exponential, alpha4_closed, no_noise_closed or "
      "small_noise");
}

inline sim::SimConfig make_sim_config(const Settings& s) {
  if (!(s.trials >= 1.0) || s.trials != std::floor(s.trials) || s.trials > 1e10) {
    throw std::invalid_argument("invariant violated: trials >= 1 (integer)");
  }
  sim::SimConfig c;
  c.trials = static_cast<std::size_t>(s.trials);
  c.seed = s.seed;
  c.reuse_delta = s.delta;
  c.threads = s.threads;
  if (s.window_radius > 0.0) {
    c.window_policy = sim::WindowPolicy::fixed;
    c.window_radius = s.window_radius;
  } else if (s.window_radius < 0.0) {
    throw std::invalid_argument("window radius must be >= 0 (0 selects the auto policy)");
  }
  if (s.allocation == "random") c.allocation = sim::Allocation::random;
  else if (s.allocation == "greedy") c.allocation = sim::Allocation::greedy;
  else throw std::invalid_argument("--allocation must be random or greedy");
  c.validate();
  return c;
}

inline sim::DeploymentSource make_source(const Settings& s) {
  if (!s.deployment.empty()) return sim::FixedSource{sim::load_deployment_csv(s.deployment)};
  if (s.source == "ppp") return sim::PppSource{s.lambda};
  if (s.source == "grid") {
    sim::detail::require_lattice(s.cell_radius, s.tiers);
    return sim::GridSource{s.cell_radius, s.tiers};
  }
  if (s.source == "lattice") {
    sim::detail::require_lattice(s.cell_radius, s.tiers);
    if (!(s.jitter >= 0.0)) throw std::invalid_argument("lattice jitter must be >= 0");
    return sim::LatticeSource{s.cell_radius, s.jitter, s.tiers};
  }
  throw std::invalid_argument("--source must be ppp, grid or lattice");
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter() { text_ << "T_dB,method,value,ci_halfwidth\n"; }

  void analytic(double t_db, std::string_view method, double value) {
    text_ << format_number(t_db) << ',' << method << ',' << format_number(value) << ",\n";
  }
  void simulated(double t_db, std::string_view method, double value, double ci) {
    text_ << format_number(t_db) << ',' << method << ',' << format_number(value) << ','
          << format_number(ci) << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw IoError("write failure on '" + path + "'");
}

inline void require_delta(const Settings& s) {
  if (s.delta < 1) throw std::invalid_argument("invariant violated: delta >= 1");
}

inline double gap_linear(const Settings& s) {
  if (!(s.gap_db >= 0.0) || !std::isfinite(s.gap_db)) {
    throw std::invalid_argument("invariant violated: gap G >= 0 dB");
  }
  return db_to_linear(s.gap_db);
}

// Analytic rows over the T grid, using the reuse form when delta > 1.
inline void analytic_rows(CsvWriter& w, const Settings& s, const NetworkParams& p,
                          const ThresholdGrid& grid) {
  const CoverageMethod m = parse_method(s.method, p);
  for (std::size_t i = 0; i < grid.db.size(); ++i) {
    w.analytic(grid.db[i], to_string(m), analytic::coverage(p, grid.linear[i], m, s.delta));
  }
}

inline void simulated_rows(CsvWriter& w, const Settings& s, const NetworkParams& p,
                           const ThresholdGrid& grid) {
  const auto cfg = make_sim_config(s);
  const auto curve = sim::estimate_coverage(make_source(s), p, grid.linear, cfg);
  for (std::size_t i = 0; i < grid.db.size(); ++i) {
    w.simulated(grid.db[i], to_string(CoverageMethod::simulated), curve.values[i],
                curve.ci_halfwidths[i]);
  }
}

inline std::string cmd_coverage(const Settings& s) {
  require_delta(s);
  const auto p = make_params(s);
  const auto grid = parse_t_grid(s.t_db);
  CsvWriter w;
  analytic_rows(w, s, p, grid);
  if (s.trials > 0) simulated_rows(w, s, p, grid);
  return w.str();
}

// Rate rows carry the gap G in the T_dB column.
inline std::string cmd_rate(const Settings& s) {
  require_delta(s);
  const auto p = make_params(s);
  const double gap = gap_linear(s);
  CsvWriter w;
  if (!p.fading.is<fading::Exponential>()) {
    throw ContractError("analytic rate requires exponential interference fading");
  }
  const auto r = analytic::mean_rate(p, s.delta, gap);
  w.analytic(s.gap_db, r.method, r.tau);
  if (s.trials > 0) {
    const auto e = sim::estimate_rate(make_source(s), p, make_sim_config(s), s.delta, gap);
    w.simulated(s.gap_db, "simulated_rate", e.value, e.ci_halfwidth);
  }
  return w.str();
}

// Coverage and rate for every reuse factor 1..delta.
inline std::string cmd_reuse(const Settings& s) {
  require_delta(s);
  const auto p = make_params(s);
  const auto grid = parse_t_grid(s.t_db);
  const double gap = gap_linear(s);
  CsvWriter w;
  for (int d = 1; d <= s.delta; ++d) {
    Settings one = s;
    one.delta = d;
    const std::string tag = "delta=" + std::to_string(d);
    const CoverageMethod m = parse_method(s.method, p);
    for (std::size_t i = 0; i < grid.db.size(); ++i) {
      w.analytic(grid.db[i], std::string(to_string(m)) + ' ' + tag,
                 analytic::coverage(p, grid.linear[i], m, d));
    }
    if (p.fading.is<fading::Exponential>()) {
      w.analytic(s.gap_db, analytic::mean_rate(p, d, gap).method + ' ' + tag,
                 analytic::mean_rate(p, d, gap).tau);
    }
    if (s.trials > 0) {
      const auto samples = sim::simulate_sinr(make_source(one), p, make_sim_config(one));
      const auto curve = sim::coverage_from_samples(samples, grid.linear, d);
      for (std::size_t i = 0; i < grid.db.size(); ++i) {
        w.simulated(grid.db[i], "simulated " + tag, curve.values[i], curve.ci_halfwidths[i]);
      }
      const auto e = sim::rate_from_samples(samples, d, gap);
      w.simulated(s.gap_db, "simulated_rate " + tag, e.value, e.ci_halfwidth);
    }
  }
  return w.str();
}

inline std::string cmd_compare(Settings s) {
  require_delta(s);
  if (s.trials == 0) s.trials = 100000;
  const auto p = make_params(s);
  const auto grid = parse_t_grid(s.t_db);
  CsvWriter w;
  analytic_rows(w, s, p, grid);
  simulated_rows(w, s, p, grid);
  return w.str();
}

inline std::string cmd_min_delta(const Settings& s) {
  const auto grid = parse_t_grid(s.t_db);
  if (grid.db.size() != 1) throw std::invalid_argument("min-delta takes a single --t-db value");
  if (!(s.alpha > 2.0)) throw DivergenceError("invariant violated: alpha > 2 (interference diverges)");
  return std::to_string(analytic::min_reuse_factor(s.epsilon, grid.linear.front(), s.alpha)) +
         "\n";
}

// Writes a deployment CSV (grid, jittered lattice or one PPP draw).
inline std::string cmd_generate(const Settings& s) {
  Stream stream(s.seed, 0);
  sim::Deployment d;
  if (s.source == "grid") {
    d = sim::make_grid(s.cell_radius, s.tiers);
  } else if (s.source == "lattice") {
    d = sim::generate_perturbed_lattice(s.cell_radius, s.jitter, s.tiers, stream);
  } else if (s.source == "ppp") {
    if (!(s.window_radius > 0.0)) throw std::invalid_argument("generate ppp needs --window-radius > 0");
    d = sim::sample_ppp_deployment(s.lambda, s.window_radius, stream);
  } else {
    throw std::invalid_argument("--source must be ppp, grid or lattice");
  }
  if (s.delta > 1) {
    d = s.allocation == "greedy" ? sim::assign_bands_greedy(std::move(d), s.delta)
                                 : sim::assign_bands_random(std::move(d), s.delta, stream);
  }
  std::ostringstream out;
  sim::write_deployment_csv(out, d);
  return out.str();
}

/// Parses and executes one command line. argv[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coverage and rate of cellular downlinks with Poisson or lattice base stations"};
  app.require_subcommand(1, 1);

  std::optional<double> lambda, alpha, mu, gap_db, trials, cell_radius, jitter, epsilon,
      window_radius;
  std::optional<std::string> snr, fading_text, t_db, deployment, allocation, source, method,
      out_path, config;
  std::optional<int> delta, tiers;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool show_config = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"coverage", "analytic coverage over the T grid (plus simulation when --trials > 0)"},
      {"rate", "mean rate in nats/s/Hz; the T_dB column holds the gap G"},
      {"reuse", "coverage and rate for reuse factors 1..delta"},
      {"compare", "analytic against simulated coverage (default 1e5 trials)"},
      {"min-delta", "smallest reuse factor reaching coverage 1 - epsilon without noise"},
      {"generate", "write a grid, lattice or PPP deployment CSV"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--lambda", lambda, "base-station density per km^2");
    sub->add_option("--alpha", alpha, "path-loss exponent (> 2)");
    sub->add_option("--mu", mu, "serving-link fading rate");
    sub->add_option("--snr", snr, "SNR in dB, or inf for no noise");
    sub->add_option("--fading", fading_text,
                    "exp | lognormal:xi,kappa | lognormal:kappa (unit mean) | table:path");
    sub->add_option("--t-db", t_db, "threshold grid start:stop:step or a single value, dB");
    sub->add_option("--delta", delta, "frequency reuse factor");
    sub->add_option("--gap-db", gap_db, "SINR gap G in dB");
    sub->add_option("--trials", trials, "Monte-Carlo trials (e.g. 1e5)");
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--deployment", deployment, "imported deployment CSV (x,y[,band])");
    sub->add_option("--allocation", allocation, "random | greedy");
    sub->add_option("--source", source, "ppp | grid | lattice");
    sub->add_option("--cell-radius", cell_radius, "lattice half-pitch R, km");
    sub->add_option("--tiers", tiers, "lattice tiers around the home site");
    sub->add_option("--jitter", jitter, "lattice jitter standard deviation, km");
    sub->add_option("--epsilon", epsilon, "outage target for min-delta");
    sub->add_option("--method", method, "auto or an analytic method name");
    sub->add_option("--window-radius", window_radius, "fixed PPP window radius, km (0: auto)");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--config", config, "JSON config file; flags override it");
    sub->add_flag("--show-config", show_config, "print the effective settings and exit");
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Settings s;
    if (config) {
      auto in = open_input(*config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config '" + *config + "': " + e.what());
      }
      try {
        apply_json(s, j);
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config '" + *config + "': " + e.what());
      }
    }
    if (lambda) s.lambda = *lambda;
    if (alpha) s.alpha = *alpha;
    if (mu) s.mu = *mu;
    if (snr) s.snr = *snr;
    if (fading_text) s.fading = *fading_text;
    if (t_db) s.t_db = *t_db;
    if (delta) s.delta = *delta;
    if (gap_db) s.gap_db = *gap_db;
    if (trials) s.trials = *trials;
    if (seed) s.seed = *seed;
    if (deployment) s.deployment = *deployment;
    if (allocation) s.allocation = *allocation;
    if (source) s.source = *source;
    if (cell_radius) s.cell_radius = *cell_radius;
    if (tiers) s.tiers = *tiers;
    if (jitter) s.jitter = *jitter;
    if (epsilon) s.epsilon = *epsilon;
    if (method) s.method = *method;
    if (window_radius) s.window_radius = *window_radius;
    if (threads) s.threads = *threads;
    if (out_path) s.out = *out_path;

    if (show_config) {
      out << to_json(s).dump(2) << '\n';
      return kExitOk;
    }

    std::string text;
    if (command == "coverage") text = cmd_coverage(s);
    else if (command == "rate") text = cmd_rate(s);
    else if (command == "reuse") text = cmd_reuse(s);
    else if (command == "compare") text = cmd_compare(s);
    else if (command == "min-delta") text = cmd_min_delta(s);
    else text = cmd_generate(s);
    emit(text, s.out, out);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace cellcov::cli
