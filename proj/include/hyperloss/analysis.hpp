#ifndef HYPERLOSS_ANALYSIS_HPP_
#define HYPERLOSS_ANALYSIS_HPP_

// Phase and mismatch sweeps, hyperloss classification, chain threshold
// statistics, (φ, Ω) maps and recovery reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperloss/errors.hpp"
#include "hyperloss/gaussian.hpp"
#include "hyperloss/io.hpp"
#include "hyperloss/network.hpp"
#include "hyperloss/parallel.hpp"

namespace hyperloss {

/// Comparisons against thresholds use this guard band.
inline constexpr double kThresholdGuard = 1e-9;

inline constexpr double kSliceOmega = kTwoPi * 3.75e6;

struct SweepResult {
  std::string axis;  // "phi" (rad) or "eps"
  std::vector<double> grid;
  double omega = 0.0;  // rad/s
  std::vector<double> v_min;
  std::vector<double> v_max;
  std::vector<double> v_locked;
  std::optional<std::vector<double>> cold_loss;
  json metadata;

  std::size_t size() const { return grid.size(); }

  const std::vector<double>& variance(Readout r) const { return r == Readout::optimal ? v_min : v_locked; }
};

/// (φ, Ω) grid of minimal homodyne variance; rows are φ, columns Ω.
struct PhaseMap {
  std::vector<double> phi_grid;
  std::vector<double> omega_grid;
  RMatrix v_min;

  std::size_t column_nearest(double omega) const {
    if (omega_grid.empty()) throw InvalidArgument("PhaseMap: empty frequency grid");
    std::size_t best = 0;
    for (std::size_t k = 1; k < omega_grid.size(); ++k)
      if (std::abs(omega_grid[k] - omega) < std::abs(omega_grid[best] - omega)) best = k;
    return best;
  }

  /// Row with the largest variance in the column nearest `omega` (the hyperloss slice).
  std::size_t hyperloss_row(double omega = kSliceOmega) const {
    Eigen::Index row = 0;
    v_min.col(static_cast<Eigen::Index>(column_nearest(omega))).maxCoeff(&row);
    return static_cast<std::size_t>(row);
  }
};

/// n points evenly covering [0, 2π).
inline std::vector<double> uniform_phase_grid(std::size_t n = 720) {
  if (n == 0) throw InvalidArgument("uniform_phase_grid: need at least one point");
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  return g;
}

/// The component swept by phase_sweep / hyperloss_map: the network's single free phase.
inline std::size_t designated_phase(const NetworkSpec& net) {
  const auto free = net.free_phases();
  if (free.size() != 1)
    throw ConfigError("components", "exactly one phase must be marked free for a sweep (found " +
                                        std::to_string(free.size()) + ")");
  return free.front();
}

namespace detail {

inline SweepResult sweep_network(const NetworkSpec& base, std::span<const double> grid, const std::string& axis,
                                 double omega, const auto& configure) {
  if (grid.empty()) throw InvalidArgument("sweep: empty grid");
  SweepResult out;
  out.axis = axis;
  out.grid.assign(grid.begin(), grid.end());
  out.omega = omega;
  out.metadata = to_json(base);
  struct Point {
    HomodyneResult h;
    double cold = 0.0;
  };
  const auto points = parallel_map(grid.size(), [&](std::size_t k) {
    NetworkSpec net = base;
    configure(net, grid[k]);
    return Point{readout_at(net, omega), cold_throughput(net)};
  });
  std::vector<double> cold;
  for (const auto& p : points) {
    out.v_min.push_back(p.h.v_min);
    out.v_max.push_back(p.h.v_max);
    out.v_locked.push_back(p.h.v_locked);
    cold.push_back(p.cold);
  }
  out.cold_loss = std::move(cold);
  return out;
}

}  // namespace detail

/// Readout statistics with the designated free phase set to each grid value.
inline SweepResult phase_sweep(const NetworkSpec& net, std::span<const double> phi_grid, double omega = 0.0) {
  const std::size_t idx = designated_phase(net);
  return detail::sweep_network(net, phi_grid, "phi", omega,
                               [idx](NetworkSpec& n, double phi) { set_phase(n, idx, phi); });
}

/// Chain sweep of the common per-node phase.
inline SweepResult phase_sweep(const ChainSpec& chain, std::span<const double> phi_grid) {
  SweepResult out = detail::sweep_network(chain_network(chain), phi_grid, "phi", 0.0, [&](NetworkSpec& n, double phi) {
    ChainSpec c = chain;
    c.phi = {phi};
    n = chain_network(c);
  });
  out.metadata = to_json(chain);
  return out;
}

/// Readout statistics with every coupler set to each ε. `phi`, if given, sets the designated free phase.
inline SweepResult mismatch_sweep(const NetworkSpec& net, std::span<const double> eps_grid,
                                  std::optional<double> phi = std::nullopt, double omega = 0.0) {
  NetworkSpec base = net;
  if (phi) set_phase(base, designated_phase(base), *phi);
  return detail::sweep_network(base, eps_grid, "eps", omega, [](NetworkSpec& n, double eps) { set_all_couplers(n, eps); });
}

inline SweepResult mismatch_sweep(const ChainSpec& chain, std::span<const double> eps_grid, double phi) {
  ChainSpec base = chain;
  base.phi = {phi};
  SweepResult out = detail::sweep_network(chain_network(base), eps_grid, "eps", 0.0, [&](NetworkSpec& n, double eps) {
    ChainSpec c = base;
    c.eps = eps;
    n = chain_network(c);
  });
  out.metadata = to_json(base);
  return out;
}

/// Grid indices whose variance exceeds shot noise (1 + guard band).
inline std::vector<std::size_t> hyperloss_region(const SweepResult& sweep, Readout readout = Readout::optimal) {
  const auto& v = sweep.variance(readout);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] > 1.0 + kThresholdGuard) out.push_back(k);
  return out;
}

/// Fraction of common-phase values for which the chain output is strictly below `threshold_db`.
inline double fraction_below_threshold(const ChainSpec& chain, double threshold_db, std::span<const double> phi_grid) {
  if (phi_grid.empty()) throw InvalidArgument("fraction_below_threshold: empty grid");
  const auto db = parallel_map(phi_grid.size(), [&](std::size_t k) {
    ChainSpec c = chain;
    c.phi = {phi_grid[k]};
    return chain_evaluate(c);
  });
  const auto below = std::count_if(db.begin(), db.end(), [&](double x) { return x < threshold_db - kThresholdGuard; });
  return static_cast<double>(below) / static_cast<double>(phi_grid.size());
}

/// Threshold statistics of one chain convention.
struct ChainConvention {
  HomPolicy policy;
  PhaseOrder order;
  Readout readout;
  double fraction_below = 0.0;
  double best_db = 0.0;
  double worst_db = 0.0;
};

/// Evaluates every supported convention (policy x phase order x readout) on the same grid.
inline std::vector<ChainConvention> chain_conventions(const ChainSpec& chain, double threshold_db,
                                                      std::span<const double> phi_grid) {
  std::vector<ChainConvention> out;
  for (HomPolicy p : {HomPolicy::shared, HomPolicy::refreshed})
    for (PhaseOrder o : {PhaseOrder::after_coupler, PhaseOrder::before_coupler})
      for (Readout r : {Readout::locked, Readout::optimal}) {
        ChainSpec c = chain;
        c.policy = p;
        c.order = o;
        c.readout = r;
        const auto db = parallel_map(phi_grid.size(), [&](std::size_t k) {
          ChainSpec ck = c;
          ck.phi = {phi_grid[k]};
          return chain_evaluate(ck);
        });
        ChainConvention row{p, o, r};
        row.fraction_below = static_cast<double>(std::count_if(db.begin(), db.end(), [&](double x) {
                               return x < threshold_db - kThresholdGuard;
                             })) /
                             static_cast<double>(db.size());
        row.best_db = *std::max_element(db.begin(), db.end());
        row.worst_db = *std::min_element(db.begin(), db.end());
        out.push_back(row);
      }
  return out;
}

/// Optimal-readout variance over (designated phase, frequency grid).
inline PhaseMap hyperloss_map(const NetworkSpec& net, std::span<const double> phi_grid) {
  if (phi_grid.empty()) throw InvalidArgument("hyperloss_map: empty phase grid");
  if (net.frequency_grid.empty()) throw InvalidArgument("hyperloss_map: empty frequency grid");
  const std::size_t idx = designated_phase(net);
  PhaseMap map;
  map.phi_grid.assign(phi_grid.begin(), phi_grid.end());
  map.omega_grid = net.frequency_grid;
  const std::size_t rows = phi_grid.size();
  const std::size_t cols = net.frequency_grid.size();
  const auto cells = parallel_map(rows * cols, [&](std::size_t k) {
    NetworkSpec n = net;
    set_phase(n, idx, phi_grid[k / cols]);
    return readout_at(n, net.frequency_grid[k % cols]).v_min;
  });
  map.v_min.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < cells.size(); ++k)
    map.v_min(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) = cells[k];
  return map;
}

/// Readout at φ* expressed as an equivalent pure loss on the input squeezing.
struct RecoveryReport {
  double phi = 0.0;
  double omega = 0.0;
  double v_min = 1.0;
  double input_db = 0.0;      // e^{-2r}, dB below shot noise
  double recovered_db = 0.0;  // readout V_min, dB below shot noise
  /// λ with (1−λ) e^{-2r} + λ = V_min; includes the external loss.
  double effective_loss = 0.0;
  /// The part of effective_loss beyond the external loss: 1 − (1−λ)/(1−external).
  double mismatch_loss = 0.0;
  /// Cold-path mismatch of the couplers alone: 1 − Π(1 − ε).
  double geometric_mismatch = 0.0;
};

inline RecoveryReport recovery_report(const NetworkSpec& net, double phi_star, double omega = kSliceOmega) {
  NetworkSpec n = net;
  set_phase(n, designated_phase(n), phi_star);
  const HomodyneResult h = readout_at(n, omega);
  const double v_in = std::exp(-2.0 * net.input.r);
  RecoveryReport rep;
  rep.phi = phi_star;
  rep.omega = omega;
  rep.v_min = h.v_min;
  rep.input_db = variance_to_db(v_in);
  rep.recovered_db = variance_to_db(h.v_min);
  rep.effective_loss = v_in == 1.0 ? 0.0 : (h.v_min - v_in) / (1.0 - v_in);
  double kept = 1.0;
  for (const auto& c : net.components)
    if (const auto* k = std::get_if<Coupler>(&c)) kept *= 1.0 - k->eps;
  rep.geometric_mismatch = 1.0 - kept;
  rep.mismatch_loss =
      net.external_loss < 1.0 ? 1.0 - (1.0 - rep.effective_loss) / (1.0 - net.external_loss) : rep.effective_loss;
  return rep;
}

}  // namespace hyperloss

#endif  // HYPERLOSS_ANALYSIS_HPP_
