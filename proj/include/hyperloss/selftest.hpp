#ifndef HYPERLOSS_SELFTEST_HPP_
#define HYPERLOSS_SELFTEST_HPP_

// Built-in consistency checks run by `hyperloss selftest`.

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hyperloss/closedform.hpp"
#include "hyperloss/components.hpp"
#include "hyperloss/gaussian.hpp"
#include "hyperloss/network.hpp"

namespace hyperloss {

struct SelfCheck {
  std::string name;
  double tolerance = 0.0;
  double worst = 0.0;  // largest observed deviation
  bool passed = false;
};

struct SelftestReport {
  std::vector<SelfCheck> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::string format() const {
    std::string out;
    char line[192];
    for (const auto& c : checks) {
      std::snprintf(line, sizeof line, "%-4s %-40s max dev %.3e  tol %.0e\n", c.passed ? "PASS" : "FAIL",
                    c.name.c_str(), c.worst, c.tolerance);
      out += line;
    }
    return out;
  }
};

inline const std::array<double, 5> kOracleEps{0.0, 0.01, 0.05, 0.08, 0.2};
inline const std::array<double, 4> kOracleR{0.0, 0.5, 1.0, 1.5};

/// Squeezed-quadrature variance of the MZ cell as a function of its parameters.
using HotVarianceFn = std::function<double(const MzParams&)>;

/// Runs every check. `hot` replaces the closed form under test (for mutation testing).
inline SelftestReport run_selftest(const HotVarianceFn& hot = [](const MzParams& p) { return hot_variance(p); }) {
  SelftestReport rep;
  auto record = [&](std::string name, double tol, double worst) {
    rep.checks.push_back({std::move(name), tol, worst, std::isfinite(worst) && worst <= tol});
  };

  {
    // The simulated network is the oracle; relative to the larger variance scale.
    double worst = 0.0;
    for (double e1 : kOracleEps)
      for (double e2 : kOracleEps)
        for (int k = 0; k <= 16; ++k)
          for (double r : kOracleR) {
            const MzParams p{e1, e2, k * kPi / 8.0, r};
            const double sim = mz_readout(p).v_locked;
            worst = std::max(worst, std::abs(hot(p) - sim) / std::max(1.0, std::abs(sim)));
          }
    record("oracle grid (closed form vs sim)", 1e-10, worst);
  }

  {
    double worst = 0.0;
    for (double eps : kOracleEps)
      for (double r : kOracleR) {
        const double k = mixing_angle(eps);
        const double c = std::cos(k), s = std::sin(k);
        const double em = std::exp(-2.0 * r), ep = std::exp(2.0 * r);
        const double at_pi = em;
        const double at_0 = std::pow(std::sin(2 * k), 2) + em * std::pow(std::cos(2 * k), 2);
        const double at_half = em * std::pow(c, 4) + 2 * c * c * s * s + ep * std::pow(s, 4);
        worst = std::max({worst, std::abs(hot({eps, eps, kPi, r}) - at_pi) / std::max(1.0, at_pi),
                          std::abs(hot({eps, eps, 0.0, r}) - at_0) / std::max(1.0, at_0),
                          std::abs(hot({eps, eps, kPi / 2, r}) - at_half) / std::max(1.0, at_half)});
      }
    record("special cases phi = 0, pi/2, pi", 1e-12, worst);
  }

  {
    double worst = 0.0;
    for (double eps : kOracleEps) {
      worst = std::max(worst, symplectic_defect(coupler_matrix(eps, 3, 0, 2)));
      worst = std::max(worst, symplectic_defect(phase_matrix(0.7 + eps, 3, 1)));
      worst = std::max(worst, symplectic_defect(squeezer_matrix(1.0 + eps, 0.3, 3, 2)));
    }
    record("symplectic defect", 1e-12, worst);
  }

  {
    const double worst = std::max(cold_loss_exact(0.08, 0.08, kPi), cold_loss_exact(0.2, 0.2, kPi));
    record("cold loss zero at equal eps, pi", 0.0, worst);
  }

  {
    const double gamma = kTwoPi * 1e6;
    double worst = 0.0;
    for (double w : {0.0, 1e6, 1e7, 3e8})
      for (double d : {-5e6, 0.0, 5e6}) worst = std::max(worst, std::abs(std::abs(cavity_reflectivity(w, d, gamma)) - 1.0));
    // Far off resonance the block tends to −I (a non-resonant reflection).
    const CMatrix far = cavity_block(kTwoPi * 1e13, 0.0, gamma, true);
    worst = std::max(worst, (far + CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-5 ? 1.0 : 0.0);
    record("cavity |r| = 1 and far-off limit", 1e-12, worst);
  }

  {
    // Equal mismatches with φ = π cancel pairwise: an even chain returns the input.
    double worst = 0.0;
    for (int n : {2, 4, 10}) {
      ChainSpec c;
      c.n_nodes = n;
      c.eps = 0.05;
      c.phi = {kPi};
      c.r_in = 1.0;
      c.order = PhaseOrder::before_coupler;
      worst = std::max(worst, std::abs(chain_readout(c).v_locked - std::exp(-2.0)));
    }
    record("even chain at phi = pi restores input", 1e-12, worst);
  }
  return rep;
}

}  // namespace hyperloss

#endif  // HYPERLOSS_SELFTEST_HPP_
