#ifndef HYPERLOSS_COMPONENTS_HPP_
#define HYPERLOSS_COMPONENTS_HPP_

// Transfer matrices for the network elements: two-mode couplers (spatial-mode
// mixers), phase and Gouy rotations, cavity reflections, loss and squeezers.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>

#include "hyperloss/gaussian.hpp"

namespace hyperloss {

/// Power mismatch ε transferred from mode i to mode j (mixing angle arcsin √ε).
struct Coupler {
  double eps = 0.0;
  std::size_t i = 0;
  std::size_t j = 1;
};

/// Rotation by `phi` in one mode's phase space. `free` marks it as a design/sweep variable.
struct Phase {
  double phi = 0.0;
  std::size_t mode = 0;
  bool free = false;
};

/// Propagation phase n·ψ for a mode of transverse order n.
struct Gouy {
  double psi = 0.0;
  int mode_order = 0;
  std::size_t mode = 0;
  bool free = false;
};

/// Reflection off a lossless overcoupled cavity. Detuning and full linewidth in rad/s.
struct Cavity {
  double delta = 0.0;
  double gamma = 1.0;
  std::size_t mode = 0;
  bool resonant = true;
};

struct Loss {
  double lambda = 0.0;
  std::size_t mode = 0;
};

struct Squeezer {
  double r = 0.0;
  double angle = 0.0;
  std::size_t mode = 0;
};

using Component = std::variant<Coupler, Phase, Gouy, Cavity, Loss, Squeezer>;

inline const char* kind_name(const Component& c) {
  static constexpr const char* kNames[] = {"coupler", "phase", "gouy", "cavity", "loss", "squeezer"};
  return kNames[c.index()];
}

inline double mixing_angle(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("coupler: eps must lie in [0, 1)");
  return std::asin(std::sqrt(eps));
}

/// Real orthogonal mixing (a_i, a_j) -> (c a_i + s a_j, -s a_i + c a_j), c = cos θ, s = sin θ.
inline TransferMatrix mixing_matrix(double theta, std::size_t n_modes, std::size_t i, std::size_t j) {
  if (i == j) throw InvalidArgument("coupler: modes must differ");
  if (i >= n_modes || j >= n_modes) throw InvalidArgument("coupler: mode index out of range");
  TransferMatrix t = TransferMatrix::identity(n_modes);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Eigen::Index q = 0; q < 2; ++q) {
    const auto ii = 2 * static_cast<Eigen::Index>(i) + q;
    const auto jj = 2 * static_cast<Eigen::Index>(j) + q;
    t.mat(ii, ii) = c;
    t.mat(ii, jj) = s;
    t.mat(jj, ii) = -s;
    t.mat(jj, jj) = c;
  }
  return t;
}

inline TransferMatrix coupler_matrix(double eps, std::size_t n_modes, std::size_t i, std::size_t j) {
  return mixing_matrix(mixing_angle(eps), n_modes, i, j);
}

inline TransferMatrix phase_matrix(double phi, std::size_t n_modes, std::size_t mode) {
  return embed_block(rotation2(phi).cast<Complex>(), n_modes, mode);
}

inline TransferMatrix gouy_matrix(double psi, int mode_order, std::size_t n_modes, std::size_t mode) {
  if (mode_order < 0) throw InvalidArgument("gouy: mode order must be >= 0");
  return phase_matrix(static_cast<double>(mode_order) * psi, n_modes, mode);
}

/// Sideband amplitude reflectivity r(Ω) = (γ/2 − i(Ω−δ)) / (γ/2 + i(Ω−δ)); +1 on resonance, → −1 far off.
inline Complex cavity_reflectivity(double omega, double delta, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("cavity: gamma must be > 0");
  const Complex num(gamma / 2.0, -(omega - delta));
  const Complex den(gamma / 2.0, omega - delta);
  return num / den;
}

/// Quadrature block of a cavity reflection at sideband Ω, built from r(+Ω) and r(−Ω).
/// A non-resonant mode picks up a flat π phase.
inline Eigen::Matrix2cd cavity_block(double omega, double delta, double gamma, bool resonant) {
  if (!(gamma > 0.0)) throw InvalidArgument("cavity: gamma must be > 0");
  if (!resonant) return -Eigen::Matrix2cd::Identity();
  const Complex rp = cavity_reflectivity(omega, delta, gamma);
  const Complex rm = cavity_reflectivity(-omega, delta, gamma);
  const Complex sum = rp + std::conj(rm);
  const Complex diff = rp - std::conj(rm);
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd b;
  b << sum, i * diff, -i * diff, sum;
  return 0.5 * b;
}

inline TransferMatrix cavity_reflection_matrix(double omega, double delta, double gamma, std::size_t n_modes,
                                               std::size_t mode, bool resonant) {
  return embed_block(cavity_block(omega, delta, gamma, resonant), n_modes, mode);
}

/// Applies one component to a state at the state's sideband frequency.
inline SpectralState apply_component(const SpectralState& state, const Component& component) {
  const std::size_t m = state.n_modes();
  return std::visit(
      [&](const auto& c) -> SpectralState {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Coupler>) {
          return apply_transfer(state, coupler_matrix(c.eps, m, c.i, c.j));
        } else if constexpr (std::is_same_v<T, Phase>) {
          return apply_transfer(state, phase_matrix(c.phi, m, c.mode));
        } else if constexpr (std::is_same_v<T, Gouy>) {
          return apply_transfer(state, gouy_matrix(c.psi, c.mode_order, m, c.mode));
        } else if constexpr (std::is_same_v<T, Cavity>) {
          return apply_transfer(state, cavity_reflection_matrix(state.omega(), c.delta, c.gamma, m, c.mode, c.resonant));
        } else if constexpr (std::is_same_v<T, Loss>) {
          return add_loss(state, c.mode, c.lambda);
        } else {
          return squeeze(state, c.mode, c.r, c.angle);
        }
      },
      component);
}

/// Transfer matrix of a lossless component at Ω; Loss has no matrix form.
inline TransferMatrix component_matrix(const Component& component, std::size_t n_modes, double omega) {
  return std::visit(
      [&](const auto& c) -> TransferMatrix {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Coupler>) {
          return coupler_matrix(c.eps, n_modes, c.i, c.j);
        } else if constexpr (std::is_same_v<T, Phase>) {
          return phase_matrix(c.phi, n_modes, c.mode);
        } else if constexpr (std::is_same_v<T, Gouy>) {
          return gouy_matrix(c.psi, c.mode_order, n_modes, c.mode);
        } else if constexpr (std::is_same_v<T, Cavity>) {
          return cavity_reflection_matrix(omega, c.delta, c.gamma, n_modes, c.mode, c.resonant);
        } else if constexpr (std::is_same_v<T, Squeezer>) {
          return squeezer_matrix(c.r, c.angle, n_modes, c.mode);
        } else {
          throw InvalidArgument("component_matrix: loss is not a unitary transfer");
        }
      },
      component);
}

}  // namespace hyperloss

#endif  // HYPERLOSS_COMPONENTS_HPP_
