#pragma once

// Concrete base-station layouts: Poisson draws, square grids, jittered
// lattices and imported coordinate files, plus frequency-band assignment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cellcov/csv.hpp"
#include "cellcov/rng.hpp"

namespace cellcov::sim {

struct Site {
  double x = 0.0;
  double y = 0.0;
};

struct DiscWindow {
  double radius = 0.0;  // centred on the origin
};

struct RectWindow {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  bool contains(const Site& s, double slack = 0.0) const {
    return s.x >= xmin - slack && s.x <= xmax + slack && s.y >= ymin - slack &&
           s.y <= ymax + slack;
  }
};

using Window = std::variant<DiscWindow, RectWindow>;

enum class SourceKind { ppp, grid, imported, perturbed_lattice };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::ppp: return "ppp";
    case SourceKind::grid: return "grid";
    case SourceKind::imported: return "imported";
    case SourceKind::perturbed_lattice: return "perturbed_lattice";
  }
  return "unknown";
}

struct Deployment {
  std::vector<Site> sites;
  Window window = DiscWindow{};
  SourceKind source = SourceKind::imported;
  double density = 0.0;      // sites per unit area (ppp intensity, 1/(4R^2) on lattices)
  double cell_radius = 0.0;  // half the lattice pitch
  int tiers = 0;
  double jitter = 0.0;
  std::vector<int> bands;  // empty, or one band in [1, band_count] per site
  int band_count = 1;
  /// Typical user is drawn uniformly here; when absent it sits at the origin.
  std::optional<RectWindow> user_region;
  /// Nonzero: the Poisson field continues outside the disc window with this
  /// intensity and its mean interference is added to every SINR.
  double far_field_density = 0.0;
  std::size_t resamples = 0;

  void validate() const {
    if (sites.empty()) throw std::invalid_argument("deployment has no sites");
    if (!bands.empty()) {
      if (bands.size() != sites.size()) {
        throw std::invalid_argument("deployment bands must match the site count");
      }
      for (int b : bands) {
        if (b < 1 || b > band_count) {
          throw std::invalid_argument("deployment band index outside [1, band_count]");
        }
      }
    }
    for (const auto& s : sites) {
      const bool inside = std::visit(
          [&](const auto& w) {
            using W = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<W, DiscWindow>) {
              return std::hypot(s.x, s.y) <= w.radius * (1.0 + 1e-12);
            } else {
              return w.contains(s, 1e-9);
            }
          },
          window);
      if (!inside) throw std::invalid_argument("deployment site lies outside its window");
    }
    if (source == SourceKind::grid) {
      const auto side = static_cast<std::size_t>(2 * tiers + 1);
      if (sites.size() != side * side) {
        throw std::invalid_argument("grid deployment must hold (2k+1)^2 sites");
      }
    }
  }
};

/// Homogeneous PPP of intensity lambda on a disc of radius window_radius.
/// Empty draws are redrawn from the same stream and counted in resamples.
inline Deployment sample_ppp_deployment(double lambda, double window_radius, Stream& stream) {
  if (!(lambda > 0.0)) throw std::invalid_argument("invariant violated: lambda > 0");
  if (!(window_radius > 0.0)) throw std::invalid_argument("window radius must be > 0");
  Deployment d;
  d.source = SourceKind::ppp;
  d.window = DiscWindow{window_radius};
  d.density = lambda;
  const double mean = lambda * std::numbers::pi * window_radius * window_radius;
  std::poisson_distribution<long long> count_dist(mean);
  long long n = count_dist(stream);
  while (n == 0) {
    ++d.resamples;
    n = count_dist(stream);
  }
  d.sites.resize(static_cast<std::size_t>(n));
  for (auto& s : d.sites) {
    const double r = window_radius * std::sqrt(stream.uniform());
    const double theta = 2.0 * std::numbers::pi * stream.uniform();
    s = {r * std::cos(theta), r * std::sin(theta)};
  }
  return d;
}

namespace detail {

// Lattice indices ordered with the home site (0,0) first, then row-major.
inline std::vector<std::pair<int, int>> lattice_indices(int tiers) {
  std::vector<std::pair<int, int>> idx{{0, 0}};
  for (int j = -tiers; j <= tiers; ++j) {
    for (int i = -tiers; i <= tiers; ++i) {
      if (i != 0 || j != 0) idx.emplace_back(i, j);
    }
  }
  return idx;
}

inline void require_lattice(double cell_radius, int tiers) {
  if (!(cell_radius > 0.0)) throw std::invalid_argument("cell radius R must be > 0");
  if (tiers < 0) throw std::invalid_argument("tier count must be >= 0");
}

}  // namespace detail

/// Square grid of pitch 2R with `tiers` rings around a home site at the
/// origin: (2k+1)^2 sites, home first. The user lands uniformly in the home cell.
inline Deployment make_grid(double cell_radius, int tiers) {
  detail::require_lattice(cell_radius, tiers);
  Deployment d;
  d.source = SourceKind::grid;
  d.cell_radius = cell_radius;
  d.tiers = tiers;
  d.density = 1.0 / (4.0 * cell_radius * cell_radius);
  const double half = (2 * tiers + 1) * cell_radius;
  d.window = RectWindow{-half, -half, half, half};
  d.user_region = RectWindow{-cell_radius, -cell_radius, cell_radius, cell_radius};
  for (auto [i, j] : detail::lattice_indices(tiers)) {
    d.sites.push_back({2.0 * cell_radius * i, 2.0 * cell_radius * j});
  }
  return d;
}

/// Grid positions with i.i.d. Normal(0, jitter^2) offsets on each coordinate.
/// jitter = 0 reproduces make_grid exactly and draws nothing from the stream.
inline Deployment generate_perturbed_lattice(double cell_radius, double jitter, int tiers,
                                             Stream& stream) {
  if (!(jitter >= 0.0)) throw std::invalid_argument("lattice jitter must be >= 0");
  Deployment d = make_grid(cell_radius, tiers);
  d.source = SourceKind::perturbed_lattice;
  d.jitter = jitter;
  if (jitter == 0.0) return d;
  std::normal_distribution<double> offset(0.0, jitter);
  auto& w = std::get<RectWindow>(d.window);
  for (auto& s : d.sites) {
    s.x += offset(stream);
    s.y += offset(stream);
    w.xmin = std::min(w.xmin, s.x);
    w.ymin = std::min(w.ymin, s.y);
    w.xmax = std::max(w.xmax, s.x);
    w.ymax = std::max(w.ymax, s.y);
  }
  return d;
}

/// Imported layout: `x,y[,band]` per line in km, '#' header/comment lines.
/// The window is the bounding box; users are drawn from its central 40%.
inline Deployment parse_deployment_csv(std::istream& in, const std::string& source) {
  const auto rows = read_numeric_csv(in, source, 2, 3);
  if (rows.empty()) throw ParseError(source, 0, "deployment file holds no sites");
  Deployment d;
  d.source = SourceKind::imported;
  const bool has_bands = rows.front().fields.size() == 3;
  RectWindow box{rows.front().fields[0], rows.front().fields[1], rows.front().fields[0],
                 rows.front().fields[1]};
  for (const auto& row : rows) {
    if ((row.fields.size() == 3) != has_bands) {
      throw ParseError(source, row.line, "band column must be present on every line or none");
    }
    const Site s{row.fields[0], row.fields[1]};
    d.sites.push_back(s);
    box.xmin = std::min(box.xmin, s.x);
    box.ymin = std::min(box.ymin, s.y);
    box.xmax = std::max(box.xmax, s.x);
    box.ymax = std::max(box.ymax, s.y);
    if (has_bands) {
      const double b = row.fields[2];
      if (b < 1.0 || b != std::floor(b) || b > 1e6) {
        throw ParseError(source, row.line, "band must be a positive integer");
      }
      d.bands.push_back(static_cast<int>(b));
      d.band_count = std::max(d.band_count, static_cast<int>(b));
    }
  }
  d.window = box;
  const double cx = 0.5 * (box.xmin + box.xmax);
  const double cy = 0.5 * (box.ymin + box.ymax);
  const double hx = 0.2 * (box.xmax - box.xmin);
  const double hy = 0.2 * (box.ymax - box.ymin);
  d.user_region = RectWindow{cx - hx, cy - hy, cx + hx, cy + hy};
  const double area = (box.xmax - box.xmin) * (box.ymax - box.ymin);
  d.density = area > 0.0 ? static_cast<double>(d.sites.size()) / area : 0.0;
  return d;
}

inline Deployment load_deployment_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_deployment_csv(in, path);
}

inline void write_deployment_csv(std::ostream& out, const Deployment& d) {
  out << (d.bands.empty() ? "# x,y\n" : "# x,y,band\n");
  char buf[96];
  for (std::size_t i = 0; i < d.sites.size(); ++i) {
    if (d.bands.empty()) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", d.sites[i].x, d.sites[i].y);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", d.sites[i].x, d.sites[i].y, d.bands[i]);
    }
    out << buf;
  }
}

inline void require_delta(int delta) {
  if (delta < 1) throw std::invalid_argument("reuse factor delta must be >= 1");
}

/// Each site independently picks one of delta bands uniformly.
inline Deployment assign_bands_random(Deployment d, int delta, Stream& stream) {
  require_delta(delta);
  d.band_count = delta;
  d.bands.assign(d.sites.size(), 1);
  if (delta == 1) return d;
  std::uniform_int_distribution<int> pick(1, delta);
  for (auto& b : d.bands) b = pick(stream);
  return d;
}

/// Greedy max-min-distance allocation. Sites are visited in ascending
/// (x, y, index) order; each takes the band whose closest already-assigned
/// user is farthest away (unused band = infinitely far), lowest band on ties.
inline Deployment assign_bands_greedy(Deployment d, int delta) {
  require_delta(delta);
  const std::size_t n = d.sites.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d.sites[a].x != d.sites[b].x) return d.sites[a].x < d.sites[b].x;
    if (d.sites[a].y != d.sites[b].y) return d.sites[a].y < d.sites[b].y;
    return a < b;
  });
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(delta));
  d.bands.assign(n, 1);
  d.band_count = delta;
  for (std::size_t i : order) {
    int best_band = 1;
    double best_dist = -1.0;
    for (int b = 1; b <= delta; ++b) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j : members[static_cast<std::size_t>(b - 1)]) {
        const double dx = d.sites[i].x - d.sites[j].x;
        const double dy = d.sites[i].y - d.sites[j].y;
        nearest = std::min(nearest, dx * dx + dy * dy);
      }
      if (nearest > best_dist) {
        best_dist = nearest;
        best_band = b;
      }
    }
    d.bands[i] = best_band;
    members[static_cast<std::size_t>(best_band - 1)].push_back(i);
  }
  return d;
}

/// Fixed grid patterns: delta = 2 checkerboard (same-band spacing 2 sqrt(2) R),
/// delta = 4 two-by-two tiling (spacing 4R). Other delta fall back to greedy.
inline Deployment assign_bands_grid_pattern(Deployment d, int delta) {
  require_delta(delta);
  if (d.source != SourceKind::grid || !(delta == 2 || delta == 4)) {
    return assign_bands_greedy(std::move(d), delta);
  }
  const double pitch = 2.0 * d.cell_radius;
  d.band_count = delta;
  d.bands.resize(d.sites.size());
  auto mod2 = [](long v) { return static_cast<int>(((v % 2) + 2) % 2); };
  for (std::size_t k = 0; k < d.sites.size(); ++k) {
    const long i = std::lround(d.sites[k].x / pitch);
    const long j = std::lround(d.sites[k].y / pitch);
    d.bands[k] = delta == 2 ? 1 + mod2(i + j) : 1 + mod2(i) + 2 * mod2(j);
  }
  return d;
}

}  // namespace cellcov::sim
