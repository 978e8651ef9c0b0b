#ifndef HYPERLOSS_CLOSEDFORM_HPP_
#define HYPERLOSS_CLOSEDFORM_HPP_

// Analytic results for the two-coupler (Mach-Zehnder-like) mode-mixing cell:
// cold (coherent-probe) loss, the squeezed-quadrature variance, and the
// weak-coupling loss-plus-thermal-noise decomposition.
//
// Coupling strengths are power mismatches ε; the mixing angle is k = arcsin √ε.

#include <algorithm>
#include <cmath>

#include "hyperloss/components.hpp"
#include "hyperloss/errors.hpp"
#include "hyperloss/network.hpp"

namespace hyperloss {

struct MzParams {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double phi = 0.0;  // differential FM-HOM phase between the couplers
  double r = 0.0;    // e^{-2r} is the input squeezed variance

  void validate() const {
    if (!(eps1 >= 0.0 && eps1 < 1.0) || !(eps2 >= 0.0 && eps2 < 1.0))
      throw InvalidArgument("MzParams: eps1, eps2 must lie in [0, 1)");
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("MzParams: r must be finite and >= 0");
    if (!std::isfinite(phi)) throw InvalidArgument("MzParams: phi must be finite");
  }
};

/// Effective loss λ_smm and additive normalized noise temperature T.
struct EffectiveChannel {
  double lambda_smm = 0.0;
  double temperature = 0.0;
};

/// 1 − |cos k1 cos k2 − e^{iφ} sin k1 sin k2|².
///
/// Expanded as ε1(1−ε2) + ε2(1−ε1) + 2 cos k1 sin k1 cos k2 sin k2 cos φ, which
/// cancels to exactly 0 for ε1 = ε2, φ = π.
inline double cold_loss_exact(double eps1, double eps2, double phi) {
  mixing_angle(eps1);
  mixing_angle(eps2);
  const double a1 = eps1 * (1.0 - eps1);
  const double a2 = eps2 * (1.0 - eps2);
  const double lambda = eps1 * (1.0 - eps2) + eps2 * (1.0 - eps1) + 2.0 * std::sqrt(a1 * a2) * std::cos(phi);
  return std::clamp(lambda, 0.0, 1.0);
}

/// Small-coupling form ε1 + ε2 + 2√(ε1ε2) cos φ.
inline double cold_loss_smallk(double eps1, double eps2, double phi) {
  if (!(eps1 >= 0.0 && eps1 < 1.0) || !(eps2 >= 0.0 && eps2 < 1.0))
    throw InvalidArgument("cold_loss_smallk: eps must lie in [0, 1)");
  return eps1 + eps2 + 2.0 * std::sqrt(eps1 * eps2) * std::cos(phi);
}

/// Squeezed-quadrature variance after the second coupler (four-term closed form).
inline double hot_variance(const MzParams& p) {
  p.validate();
  const double k1 = mixing_angle(p.eps1);
  const double k2 = mixing_angle(p.eps2);
  const double c1 = std::cos(k1), s1 = std::sin(k1);
  const double c2 = std::cos(k2), s2 = std::sin(k2);
  const double cphi = std::cos(p.phi), sphi = std::sin(p.phi);
  const double vacuum_leak = c2 * s1 + c1 * cphi * s2;
  const double squeezed = c1 * c2 - cphi * s1 * s2;
  return vacuum_leak * vacuum_leak + std::exp(-2.0 * p.r) * squeezed * squeezed +
         c1 * c1 * s2 * s2 * sphi * sphi + std::exp(2.0 * p.r) * s1 * s1 * s2 * s2 * sphi * sphi;
}

inline EffectiveChannel effective_channel(const MzParams& p) {
  p.validate();
  const double s = std::sin(p.phi);
  return {cold_loss_smallk(p.eps1, p.eps2, p.phi), p.eps1 * p.eps2 * std::exp(2.0 * p.r) * s * s};
}

/// e^{-2r}(1 − λ) + λ + T with the weak-coupling λ and T.
inline double hot_variance_weak(const MzParams& p) {
  const EffectiveChannel ch = effective_channel(p);
  return std::exp(-2.0 * p.r) * (1.0 - ch.lambda_smm) + ch.lambda_smm + ch.temperature;
}

/// Readout variance of the simulated two-coupler network (no external loss).
inline HomodyneResult mz_readout(const MzParams& p, double external_loss = 0.0) {
  p.validate();
  return readout_at(mz_network(p.eps1, p.eps2, p.phi, p.r, external_loss), 0.0);
}

/// Measured variance above shot noise in the simulated two-coupler network.
///
/// With the default locked readout this is the squeezed-quadrature variance
/// (the closed form above). With Readout::optimal the answer is always false
/// for this frequency-flat cell: the FM output is a single-mode loss channel.
inline bool is_hyperloss(const MzParams& p, Readout readout = Readout::locked) {
  return readout_variance(mz_readout(p), readout) > 1.0;
}

}  // namespace hyperloss

#endif  // HYPERLOSS_CLOSEDFORM_HPP_
