#ifndef HYPERLOSS_NETWORK_HPP_
#define HYPERLOSS_NETWORK_HPP_

// Optical networks over named spatial modes, and the N-node mode-mixing chain.

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hyperloss/components.hpp"
#include "hyperloss/errors.hpp"
#include "hyperloss/gaussian.hpp"
#include "hyperloss/parallel.hpp"

namespace hyperloss {

/// Which homodyne variance a figure of merit reads.
///   optimal: the minimum over the homodyne angle (state tomography).
///   locked:  the homodyne angle stays at the input squeezing angle.
enum class Readout { optimal, locked };

inline double readout_variance(const HomodyneResult& h, Readout readout) {
  return readout == Readout::optimal ? h.v_min : h.v_locked;
}

inline const char* readout_name(Readout r) { return r == Readout::optimal ? "optimal" : "locked"; }

struct ModeSpec {
  std::string label;
  int order = 0;  // transverse mode order, 0 for the fundamental mode
};

struct InputSpec {
  std::size_t mode = 0;
  double r = 0.0;
  double angle = 0.0;
};

struct NetworkSpec {
  std::string name;
  std::vector<ModeSpec> modes;
  std::vector<Component> components;
  std::size_t readout = 0;
  InputSpec input;
  double external_loss = 0.0;
  std::vector<double> frequency_grid{0.0};  // rad/s

  std::size_t n_modes() const { return modes.size(); }

  std::size_t mode_index(std::string_view label) const {
    for (std::size_t k = 0; k < modes.size(); ++k)
      if (modes[k].label == label) return k;
    throw ConfigError("modes", "unknown mode label '" + std::string(label) + "'");
  }

  /// Component indices of Phase/Gouy elements flagged free.
  std::vector<std::size_t> free_phases() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < components.size(); ++k) {
      if (const auto* p = std::get_if<Phase>(&components[k]); p && p->free) out.push_back(k);
      if (const auto* g = std::get_if<Gouy>(&components[k]); g && g->free) out.push_back(k);
    }
    return out;
  }

  void validate() const {
    if (modes.empty()) throw ConfigError("modes", "at least one mode is required");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!seen.insert(modes[k].label).second)
        throw ConfigError("modes[" + std::to_string(k) + "]", "duplicate label '" + modes[k].label + "'");
      if (modes[k].order < 0) throw ConfigError("modes[" + std::to_string(k) + "].order", "must be >= 0");
    }
    const std::size_t m = modes.size();
    if (readout >= m) throw ConfigError("readout", "mode index out of range");
    if (input.mode >= m) throw ConfigError("input.mode", "mode index out of range");
    if (!std::isfinite(input.r)) throw ConfigError("input.r", "must be finite");
    if (!(external_loss >= 0.0 && external_loss <= 1.0)) throw ConfigError("external_loss", "must lie in [0, 1]");
    for (std::size_t k = 0; k < components.size(); ++k) {
      const std::string where = "components[" + std::to_string(k) + "]";
      std::visit(
          [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Coupler>) {
              if (c.i >= m || c.j >= m || c.i == c.j) throw ConfigError(where + ".modes", "need two distinct modes");
              if (!(c.eps >= 0.0 && c.eps < 1.0)) throw ConfigError(where + ".eps", "must lie in [0, 1)");
            } else {
              if (c.mode >= m) throw ConfigError(where + ".mode", "mode index out of range");
              if constexpr (std::is_same_v<T, Cavity>) {
                if (!(c.gamma > 0.0)) throw ConfigError(where + ".gamma", "must be > 0");
              } else if constexpr (std::is_same_v<T, Loss>) {
                if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError(where + ".lambda", "must lie in [0, 1]");
              }
            }
          },
          components[k]);
    }
  }
};

/// Sets the value of a Phase (phi) or Gouy (psi) component.
inline void set_phase(NetworkSpec& net, std::size_t component, double value) {
  if (component >= net.components.size()) throw InvalidArgument("set_phase: component index out of range");
  auto& c = net.components[component];
  if (auto* p = std::get_if<Phase>(&c)) {
    p->phi = value;
  } else if (auto* g = std::get_if<Gouy>(&c)) {
    g->psi = value;
  } else {
    throw InvalidArgument(std::string("set_phase: component is a ") + kind_name(c) + ", not a phase");
  }
}

/// Sets the mismatch of every coupler.
inline void set_all_couplers(NetworkSpec& net, double eps) {
  for (auto& c : net.components)
    if (auto* k = std::get_if<Coupler>(&c)) k->eps = eps;
}

/// State at the readout after input squeezing, all components, and the external loss.
inline SpectralState evaluate(const NetworkSpec& net, double omega) {
  SpectralState s = vacuum_state(net.n_modes(), omega);
  s = squeeze(s, net.input.mode, net.input.r, net.input.angle);
  for (const auto& c : net.components) s = apply_component(s, c);
  if (net.external_loss > 0.0) s = add_loss(s, net.readout, net.external_loss);
  return s;
}

/// Homodyne statistics of the readout mode at one Ω. The locked angle is the input squeezing angle.
inline HomodyneResult readout_at(const NetworkSpec& net, double omega) {
  return min_max_variance(evaluate(net, omega), net.readout, net.input.angle);
}

/// Readout statistics over the spec's frequency grid, in grid order.
inline std::vector<HomodyneResult> homodyne_spectrum(const NetworkSpec& net) {
  if (net.frequency_grid.empty()) throw InvalidArgument("homodyne_spectrum: empty frequency grid");
  return parallel_map(net.frequency_grid.size(), [&](std::size_t k) { return readout_at(net, net.frequency_grid[k]); });
}

/// 1 − P_readout/P_in for a unit coherent probe in the input mode, propagated at DC.
///
/// The probe skips Squeezer components (sources, not part of the passive path)
/// and the lumped external loss.
inline double cold_throughput(const NetworkSpec& net) {
  const std::size_t m = net.n_modes();
  RVector mean = RVector::Zero(2 * static_cast<Eigen::Index>(m));
  mean(2 * static_cast<Eigen::Index>(net.input.mode)) = 1.0;
  SpectralState s(m, 0.0, CMatrix::Identity(mean.size(), mean.size()), mean);
  for (const auto& c : net.components) {
    if (std::holds_alternative<Squeezer>(c)) continue;
    s = apply_component(s, c);
  }
  const auto k = 2 * static_cast<Eigen::Index>(net.readout);
  const double p_out = s.mean()(k) * s.mean()(k) + s.mean()(k + 1) * s.mean()(k + 1);
  return 1.0 - p_out;
}

/// Two-mode Mach-Zehnder: coupler(ε1), free phase φ on the HOM, coupler(ε2); FM squeezed at angle 0.
inline NetworkSpec mz_network(double eps1, double eps2, double phi, double r, double external_loss = 0.0) {
  NetworkSpec net;
  net.name = "mach-zehnder";
  net.modes = {{"FM", 0}, {"HOM", 1}};
  net.components = {Coupler{eps1, 0, 1}, Phase{phi, 1, true}, Coupler{eps2, 0, 1}};
  net.readout = 0;
  net.input = {0, r, 0.0};
  net.external_loss = external_loss;
  net.validate();
  return net;
}

// ---------------------------------------------------------------------------
// N-node chain

enum class HomPolicy { shared, refreshed };
enum class PhaseOrder { after_coupler, before_coupler };

inline const char* policy_name(HomPolicy p) { return p == HomPolicy::shared ? "shared" : "refreshed"; }
inline const char* order_name(PhaseOrder o) { return o == PhaseOrder::after_coupler ? "after" : "before"; }

/// Chain of identical mixing cells on one FM-HOM pair.
///
/// `phi` holds either one common differential phase or one per node. With the
/// refreshed policy the HOM is reset to vacuum in front of every coupler.
struct ChainSpec {
  int n_nodes = 1;
  double eps = 0.0;
  std::vector<double> phi{0.0};
  double r_in = 0.0;
  HomPolicy policy = HomPolicy::shared;
  PhaseOrder order = PhaseOrder::after_coupler;
  Readout readout = Readout::locked;

  double node_phi(int node) const { return phi.size() == 1 ? phi[0] : phi.at(static_cast<std::size_t>(node)); }

  void validate() const {
    if (n_nodes < 0) throw ConfigError("chain.nodes", "must be >= 0");
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("chain.eps", "must lie in [0, 1)");
    if (phi.empty() || (phi.size() != 1 && phi.size() != static_cast<std::size_t>(n_nodes)))
      throw ConfigError("chain.phi", "must hold 1 or n_nodes values");
    if (!std::isfinite(r_in)) throw ConfigError("chain.r_in", "must be finite");
  }
};

/// Equivalent network: per node [reset HOM], coupler, phase (order per spec). Every phase is free.
inline NetworkSpec chain_network(const ChainSpec& c) {
  c.validate();
  NetworkSpec net;
  net.name = "chain";
  net.modes = {{"FM", 0}, {"HOM", 1}};
  net.readout = 0;
  net.input = {0, c.r_in, 0.0};
  for (int k = 0; k < c.n_nodes; ++k) {
    if (c.policy == HomPolicy::refreshed) net.components.emplace_back(Loss{1.0, 1});
    const Phase ph{c.node_phi(k), 1, true};
    if (c.order == PhaseOrder::before_coupler) net.components.emplace_back(ph);
    net.components.emplace_back(Coupler{c.eps, 0, 1});
    if (c.order == PhaseOrder::after_coupler) net.components.emplace_back(ph);
  }
  return net;
}

inline HomodyneResult chain_readout(const ChainSpec& c) { return readout_at(chain_network(c), 0.0); }

/// Output squeezing of the FM in dB below shot noise, read per c.readout.
inline double chain_evaluate(const ChainSpec& c) { return variance_to_db(readout_variance(chain_readout(c), c.readout)); }

/// Every mismatch treated as independent loss: λ = 1 − (1−ε)^N applied to the input variance. dB below shot noise.
inline double incoherent_baseline(int n_nodes, double eps, double r_in) {
  if (n_nodes < 0) throw InvalidArgument("incoherent_baseline: n_nodes must be >= 0");
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("incoherent_baseline: eps must lie in [0, 1)");
  const double lambda = 1.0 - std::pow(1.0 - eps, n_nodes);
  return variance_to_db((1.0 - lambda) * std::exp(-2.0 * r_in) + lambda);
}

}  // namespace hyperloss

#endif  // HYPERLOSS_NETWORK_HPP_
