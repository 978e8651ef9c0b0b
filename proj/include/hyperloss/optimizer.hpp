#ifndef HYPERLOSS_OPTIMIZER_HPP_
#define HYPERLOSS_OPTIMIZER_HPP_

// Phase design: multi-start grid search on the phase torus followed by
// derivative-free coordinate descent, plus Monte-Carlo robustness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "hyperloss/errors.hpp"
#include "hyperloss/io.hpp"
#include "hyperloss/network.hpp"
#include "hyperloss/parallel.hpp"

namespace hyperloss {

enum class ObjectiveKind {
  max_squeezing_db,  // squeezing (dB below shot noise) at one Ω
  worst_case_band,   // worst squeezing over an Ω band
};

struct OptProblem {
  std::variant<NetworkSpec, ChainSpec> spec;
  /// Network: component indices of Phase/Gouy elements. Chain: node indices into
  /// ChainSpec::phi (a single-entry phi vector means one common phase, index 0).
  std::vector<std::size_t> free_phases;
  ObjectiveKind objective = ObjectiveKind::max_squeezing_db;
  Readout readout = Readout::optimal;
  double omega = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  int band_points = 11;

  void validate() const {
    if (free_phases.empty()) throw InvalidProblem("optimize: no free phases");
    if (const auto* net = std::get_if<NetworkSpec>(&spec)) {
      for (std::size_t k : free_phases) {
        if (k >= net->components.size())
          throw InvalidProblem("optimize: free phase index " + std::to_string(k) + " out of range");
        const auto& c = net->components[k];
        if (!std::holds_alternative<Phase>(c) && !std::holds_alternative<Gouy>(c))
          throw InvalidProblem("optimize: component " + std::to_string(k) + " is a " + kind_name(c) +
                               ", not a phase");
      }
    } else {
      const auto& chain = std::get<ChainSpec>(spec);
      for (std::size_t k : free_phases)
        if (k >= chain.phi.size()) throw InvalidProblem("optimize: chain phase index out of range");
    }
    if (objective == ObjectiveKind::worst_case_band && (band_points < 1 || band_hi < band_lo))
      throw InvalidProblem("optimize: invalid frequency band");
  }
};

/// Network problem over its free-flagged phases.
inline OptProblem make_problem(const NetworkSpec& net, Readout readout = Readout::optimal, double omega = 0.0) {
  OptProblem p{net, net.free_phases()};
  p.readout = readout;
  p.omega = omega;
  return p;
}

/// Chain problem over its phase vector (one common phase when phi has one entry).
inline OptProblem make_problem(const ChainSpec& chain) {
  OptProblem p{chain, {}};
  for (std::size_t k = 0; k < chain.phi.size(); ++k) p.free_phases.push_back(k);
  p.readout = chain.readout;
  return p;
}

/// Objective (higher is better, dB below shot noise) as a function of the free phase vector.
inline std::function<double(const std::vector<double>&)> make_objective(const OptProblem& problem) {
  problem.validate();
  auto squeezing_of = [problem](const NetworkSpec& net) {
    if (problem.objective == ObjectiveKind::max_squeezing_db)
      return variance_to_db(readout_variance(readout_at(net, problem.omega), problem.readout));
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < problem.band_points; ++k) {
      const double w = problem.band_points == 1 ? problem.band_lo
                                                : problem.band_lo + (problem.band_hi - problem.band_lo) * k /
                                                                        (problem.band_points - 1);
      worst = std::min(worst, variance_to_db(readout_variance(readout_at(net, w), problem.readout)));
    }
    return worst;
  };
  if (const auto* net = std::get_if<NetworkSpec>(&problem.spec)) {
    return [base = *net, idx = problem.free_phases, squeezing_of](const std::vector<double>& phi) {
      NetworkSpec n = base;
      for (std::size_t k = 0; k < idx.size(); ++k) set_phase(n, idx[k], phi[k]);
      return squeezing_of(n);
    };
  }
  return [base = std::get<ChainSpec>(problem.spec), idx = problem.free_phases, squeezing_of](const std::vector<double>& phi) {
    ChainSpec c = base;
    for (std::size_t k = 0; k < idx.size(); ++k) c.phi[idx[k]] = phi[k];
    return squeezing_of(chain_network(c));
  };
}

struct OptOptions {
  int grid_density = 32;
  int seed_count = 4;
  std::uint64_t rng_seed = 0;
  std::size_t max_evals = 5'000'000;
};

struct TraceEntry {
  std::string stage;
  std::vector<double> phi;
  double value = 0.0;
  std::size_t evals = 0;
};

struct OptResult {
  std::vector<double> phi_star;
  double value = 0.0;
  double best_seed_value = 0.0;
  std::vector<TraceEntry> trace;
  std::size_t n_evals = 0;
};

namespace detail {

/// Uniform [0, 1) from the top 53 bits; identical on every standard library.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Better value wins; ties go to the lexicographically smaller phase vector.
inline bool better(double va, const std::vector<double>& a, double vb, const std::vector<double>& b) {
  if (va != vb) return va > vb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Descent {
  std::vector<double> x;
  double fx = 0.0;
  std::size_t evals = 0;
};

template <class F>
Descent coordinate_descent(const F& f, std::vector<double> x, double fx, double step, std::size_t cap) {
  Descent d{std::move(x), fx, 0};
  while (step >= 1e-6) {
    bool moved = false;
    for (std::size_t k = 0; k < d.x.size(); ++k) {
      for (const double dir : {1.0, -1.0}) {
        std::vector<double> y = d.x;
        y[k] = wrap_phase(y[k] + dir * step);
        const double fy = f(y);
        if (++d.evals > cap) throw BudgetExceeded("optimize: evaluation budget exhausted during refinement");
        if (fy > d.fx + 1e-12) {
          d.x = std::move(y);
          d.fx = fy;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return d;
}

}  // namespace detail

/// Maximizes f over the phase torus [0, 2π)^dim.
///
/// Stage 1 evaluates a coarse grid (grid_density points per axis, full tensor
/// grid up to 3 dimensions; beyond that the diagonal plus seed_count + 8 random
/// points). Stage 2 refines the seed_count best seeds by coordinate descent with
/// a halving step until the step drops below 1e-6 rad.
template <class F>
OptResult optimize_phases(const F& f, std::size_t dim, const OptOptions& opt = {}) {
  if (dim == 0) throw InvalidProblem("optimize: no free phases");
  if (opt.grid_density < 1 || opt.seed_count < 1) throw InvalidProblem("optimize: grid_density and seed_count must be >= 1");
  const std::size_t density = static_cast<std::size_t>(opt.grid_density);
  const double step0 = kTwoPi / static_cast<double>(density);

  std::vector<std::vector<double>> seeds;
  if (dim <= 3) {
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) {
      total *= density;
      if (total > opt.max_evals) throw BudgetExceeded("optimize: coarse grid exceeds the evaluation budget");
    }
    seeds.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<double> x(dim);
      std::size_t rem = idx;
      for (std::size_t d = dim; d-- > 0;) {
        x[d] = step0 * static_cast<double>(rem % density);
        rem /= density;
      }
      seeds.push_back(std::move(x));
    }
  } else {
    for (std::size_t k = 0; k < density; ++k) seeds.emplace_back(dim, step0 * static_cast<double>(k));
    std::mt19937_64 rng(opt.rng_seed);
    for (int k = 0; k < opt.seed_count + 8; ++k) {
      std::vector<double> x(dim);
      for (auto& v : x) v = kTwoPi * detail::unit_uniform(rng);
      seeds.push_back(std::move(x));
    }
    if (seeds.size() > opt.max_evals) throw BudgetExceeded("optimize: coarse grid exceeds the evaluation budget");
  }

  const auto values = parallel_map(seeds.size(), [&](std::size_t k) { return f(seeds[k]); });
  std::vector<std::size_t> order(seeds.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::better(values[a], seeds[a], values[b], seeds[b]);
  });

  OptResult res;
  res.n_evals = seeds.size();
  res.best_seed_value = values[order.front()];
  res.trace.push_back({"coarse", seeds[order.front()], values[order.front()], seeds.size()});

  const std::size_t n_refine = std::min<std::size_t>(static_cast<std::size_t>(opt.seed_count), seeds.size());
  const std::size_t cap = (opt.max_evals - res.n_evals) / n_refine;
  const auto refined = parallel_map(n_refine, [&](std::size_t k) {
    const std::size_t s = order[k];
    return detail::coordinate_descent(f, seeds[s], values[s], step0 / 2.0, cap);
  });

  res.phi_star = seeds[order.front()];
  res.value = values[order.front()];
  for (std::size_t k = 0; k < refined.size(); ++k) {
    res.n_evals += refined[k].evals;
    res.trace.push_back({"refine " + std::to_string(k), refined[k].x, refined[k].fx, refined[k].evals});
    if (detail::better(refined[k].fx, refined[k].x, res.value, res.phi_star)) {
      res.phi_star = refined[k].x;
      res.value = refined[k].fx;
    }
  }
  return res;
}

inline OptResult optimize_phases(const OptProblem& problem, int grid_density = 32, int seed_count = 4,
                                 std::uint64_t rng_seed = 0) {
  const auto f = make_objective(problem);
  return optimize_phases(f, problem.free_phases.size(), OptOptions{grid_density, seed_count, rng_seed});
}

struct Robustness {
  double mean_db = 0.0;
  double p05_db = 0.0;
};

/// Objective statistics under independent uniform phase errors in [−σ, σ].
inline Robustness robustness(const OptProblem& problem, const std::vector<double>& phi_star, double sigma,
                             std::size_t n_samples, std::uint64_t rng_seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("robustness: sigma must be >= 0");
  if (n_samples == 0) throw InvalidArgument("robustness: need at least one sample");
  if (phi_star.size() != problem.free_phases.size()) throw InvalidArgument("robustness: phase vector size mismatch");
  const auto f = make_objective(problem);
  std::mt19937_64 rng(rng_seed);
  std::vector<std::vector<double>> samples(n_samples, phi_star);
  for (auto& s : samples)
    for (auto& v : s) v = wrap_phase(v + sigma * (2.0 * detail::unit_uniform(rng) - 1.0));
  auto values = parallel_map(n_samples, [&](std::size_t k) { return f(samples[k]); });
  Robustness out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean_db = sum / static_cast<double>(n_samples);
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n_samples)));
  out.p05_db = values[rank == 0 ? 0 : rank - 1];
  return out;
}

}  // namespace hyperloss

#endif  // HYPERLOSS_OPTIMIZER_HPP_
