#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperloss/hyperloss.hpp"

using namespace hyperloss;

namespace {

/// Random component on an M-mode network; losses only when `allow_loss`.
Component random_component(std::mt19937_64& rng, std::size_t m, bool allow_loss) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> mode(0, m - 1);
  const int first = m > 1 ? 0 : 1;  // couplers need two modes
  switch (std::uniform_int_distribution<int>(first, allow_loss ? 5 : 4)(rng)) {
    case 0: {
      const std::size_t i = mode(rng);
      std::size_t j = mode(rng);
      while (j == i) j = mode(rng);
      return Coupler{0.999 * u(rng), i, j};
    }
    case 1:
      return Phase{kTwoPi * u(rng), mode(rng)};
    case 2:
      return Gouy{kTwoPi * u(rng), std::uniform_int_distribution<int>(0, 4)(rng), mode(rng)};
    case 3:
      return Cavity{kTwoPi * (2e7 * u(rng) - 1e7), kTwoPi * (1e5 + 3e7 * u(rng)), mode(rng), u(rng) < 0.7};
    case 4:
      return Squeezer{2.0 * u(rng) - 1.0, kPi * u(rng), mode(rng)};
    default:
      return Loss{u(rng), mode(rng)};
  }
}

}  // namespace

TEST(Properties, RandomNetworksStayPhysical) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + trial % 4;
    auto s = vacuum_state(m, kTwoPi * 1e7 * u(rng));
    const int len = 1 + static_cast<int>(12 * u(rng));
    for (int k = 0; k < len; ++k) {
      if (m == 1 && k == 0) s = squeeze(s, 0, 1.0, 0.3);
      s = apply_component(s, random_component(rng, m, true));
      ASSERT_LT(hermiticity_defect(s), 1e-12);
      ASSERT_TRUE(is_physical(s, 1e-9)) << "trial " << trial << " step " << k;
      ASSERT_LE(purity(s), 1.0 + 1e-9);
      for (std::size_t mm = 0; mm < m; ++mm) {
        const auto h = min_max_variance(s, mm);
        ASSERT_GE(h.v_min * h.v_max, 1.0 - 1e-9);
      }
    }
  }
}

TEST(Properties, LosslessSequencesAreSymplecticAndComposable) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const double omega = kTwoPi * 1e6 * (trial % 10);
    TransferMatrix total = TransferMatrix::identity(m);
    auto direct = squeeze(vacuum_state(m, omega), 0, 0.9, 0.1);
    const auto start = direct;
    for (int k = 0; k < 8; ++k) {
      const auto c = random_component(rng, m, false);
      const auto t = component_matrix(c, m, omega);
      ASSERT_LT(symplectic_defect(t), 1e-12);
      total = t * total;
      direct = apply_component(direct, c);
    }
    EXPECT_LT(symplectic_defect(total), 1e-10);
    EXPECT_LT((apply_transfer(start, total).cov() - direct.cov()).cwiseAbs().maxCoeff(),
              1e-9 * direct.cov().cwiseAbs().maxCoeff());
  }
}

TEST(Properties, LosslessFlatNetworkPreservesPurity) {
  // At Ω = 0 every lossless element is a real symplectic map. At Ω != 0 a cavity
  // with unequal sideband phases leaves the measured quadratures mixed.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = squeeze(vacuum_state(3, 0.0), 1, 1.5, 0.0);
    for (int k = 0; k < 10; ++k) s = apply_component(s, random_component(rng, 3, false));
    EXPECT_NEAR(purity(s), 1.0, 1e-8);
  }
}

TEST(Properties, LossNeverIncreasesPurityOfPureStates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = squeeze(vacuum_state(2, 0.0), 0, 2.0 * u(rng), kPi * u(rng));
    s = squeeze(s, 1, 2.0 * u(rng), kPi * u(rng));
    s = apply_component(s, Coupler{u(rng) * 0.99, 0, 1});
    const double before = purity(s);
    const auto after = add_loss(s, static_cast<std::size_t>(trial % 2), u(rng));
    EXPECT_LE(purity(after), before + 1e-12);
  }
}

TEST(Properties, LossOnMixedStateCanRaisePurity) {
  SpectralState thermal(1, 0.0, 2.0 * CMatrix::Identity(2, 2), RVector::Zero(2));
  EXPECT_GT(purity(add_loss(thermal, 0, 1.0)), purity(thermal));
}

TEST(Properties, ZeroMismatchIsIdentity) {
  auto net = mz_network(0.0, 0.0, 1.234, 1.0);
  net.components.push_back(Cavity{0.0, kTwoPi * 1e6, 0, true});
  EXPECT_NEAR(readout_at(net, 0.0).v_min, std::exp(-2.0), 1e-14);
}

TEST(Properties, HyperlossMapIsTwoPiPeriodic) {
  NetworkSpec net;
  net.modes = {{"FM", 0}, {"HOM", 1}};
  net.components = {Coupler{0.05, 0, 1}, Cavity{0.0, kTwoPi * 1e7, 0, true}, Gouy{0.0, 1, 1, true}, Coupler{0.05, 0, 1}};
  net.input = {0, 1.5, 0.0};
  net.frequency_grid = {0.0, kTwoPi * 2e6, kTwoPi * 5e6};
  const auto map = hyperloss_map(net, std::vector<double>{0.4, 0.4 + kTwoPi, 0.4 - kTwoPi});
  EXPECT_LT((map.v_min.row(0) - map.v_min.row(1)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((map.v_min.row(0) - map.v_min.row(2)).cwiseAbs().maxCoeff(), 1e-9);
}
