#ifndef HYPERLOSS_GAUSSIAN_HPP_
#define HYPERLOSS_GAUSSIAN_HPP_

// Gaussian quadrature statistics of M optical modes at one sideband frequency.
//
// Quadrature ordering is (X_0, Y_0, X_1, Y_1, ...); the vacuum spectral density
// is the identity. The spectral-density matrix is complex Hermitian so that
// frequency-dependent (cavity) transfer can be folded in with the same
// cov' = T cov T^H rule as real symplectic optics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>

#include "hyperloss/errors.hpp"

namespace hyperloss {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Complex 2M x 2M matrix acting on the quadrature vector at one sideband frequency.
struct TransferMatrix {
  CMatrix mat;

  std::size_t n_modes() const { return static_cast<std::size_t>(mat.rows()) / 2; }

  static TransferMatrix identity(std::size_t n_modes) {
    return {CMatrix::Identity(2 * static_cast<Eigen::Index>(n_modes), 2 * static_cast<Eigen::Index>(n_modes))};
  }

  /// Composition: `(*this) * rhs` means rhs acts first.
  TransferMatrix operator*(const TransferMatrix& rhs) const { return {mat * rhs.mat}; }
};

/// Hermitian quadrature spectral-density matrix plus coherent mean, tagged with Ω (rad/s).
class SpectralState {
 public:
  SpectralState(std::size_t n_modes, double omega, CMatrix cov, RVector mean)
      : n_modes_(n_modes), omega_(omega), cov_(std::move(cov)), mean_(std::move(mean)) {
    const auto dim = 2 * static_cast<Eigen::Index>(n_modes_);
    if (n_modes_ == 0) throw InvalidArgument("SpectralState: n_modes must be >= 1");
    if (cov_.rows() != dim || cov_.cols() != dim)
      throw InvalidArgument("SpectralState: covariance must be 2M x 2M");
    if (mean_.size() != dim) throw InvalidArgument("SpectralState: mean must have length 2M");
    symmetrize();
  }

  std::size_t n_modes() const { return n_modes_; }
  double omega() const { return omega_; }
  const CMatrix& cov() const { return cov_; }
  const RVector& mean() const { return mean_; }

  /// Real part of the 2x2 block of one mode (the measurable quadrature covariance).
  Eigen::Matrix2d block(std::size_t mode) const {
    check_mode(mode);
    const auto k = 2 * static_cast<Eigen::Index>(mode);
    return cov_.block(k, k, 2, 2).real();
  }

  void check_mode(std::size_t mode) const {
    if (mode >= n_modes_)
      throw InvalidArgument("mode index " + std::to_string(mode) + " out of range for " +
                            std::to_string(n_modes_) + " modes");
  }

 private:
  void symmetrize() { cov_ = (0.5 * (cov_ + cov_.adjoint())).eval(); }

  std::size_t n_modes_;
  double omega_;
  CMatrix cov_;
  RVector mean_;
};

/// Homodyne statistics of one mode. Angles are in [0, π).
struct HomodyneResult {
  double omega = 0.0;
  double v_min = 1.0;
  double v_max = 1.0;
  double theta_min = 0.0;
  double theta_max = kPi / 2;
  /// Variance at a fixed (locked) homodyne angle, see min_max_variance().
  double locked_angle = 0.0;
  double v_locked = 1.0;
};

/// Block-diagonal symplectic form J = ⊕ [[0, 1], [-1, 0]].
inline RMatrix symplectic_form(std::size_t n_modes) {
  const auto dim = 2 * static_cast<Eigen::Index>(n_modes);
  RMatrix j = RMatrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = -1.0;
  }
  return j;
}

/// max |T J T^H - J|; zero for lossless (complex-extended symplectic) transfer.
inline double symplectic_defect(const TransferMatrix& t) {
  const CMatrix j = symplectic_form(t.n_modes()).cast<Complex>();
  return (t.mat * j * t.mat.adjoint() - j).cwiseAbs().maxCoeff();
}

inline Eigen::Matrix2d rotation2(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

/// Embeds a 2x2 block acting on `mode` into an M-mode identity.
inline TransferMatrix embed_block(const Eigen::Matrix2cd& b, std::size_t n_modes, std::size_t mode) {
  if (mode >= n_modes) throw InvalidArgument("embed_block: mode index out of range");
  TransferMatrix t = TransferMatrix::identity(n_modes);
  const auto k = 2 * static_cast<Eigen::Index>(mode);
  t.mat.block(k, k, 2, 2) = b;
  return t;
}

inline SpectralState vacuum_state(std::size_t n_modes, double omega) {
  if (n_modes == 0) throw InvalidArgument("vacuum_state: n_modes must be >= 1");
  const auto dim = 2 * static_cast<Eigen::Index>(n_modes);
  return SpectralState(n_modes, omega, CMatrix::Identity(dim, dim), RVector::Zero(dim));
}

/// Applies cov' = T cov T^H and mean' = Re(T) mean.
///
/// The mean is a carrier (Ω = 0) amplitude; at Ω != 0 it is carried along but
/// only meaningful for frequency-flat components.
inline SpectralState apply_transfer(const SpectralState& state, const TransferMatrix& t) {
  if (t.n_modes() != state.n_modes() || t.mat.rows() != t.mat.cols())
    throw InvalidArgument("apply_transfer: dimension mismatch");
  CMatrix cov = t.mat * state.cov() * t.mat.adjoint();
  RVector mean = t.mat.real() * state.mean();
  return SpectralState(state.n_modes(), state.omega(), std::move(cov), std::move(mean));
}

/// Single-mode squeezer: variance along `angle` scaled by e^{-2r}, orthogonal by e^{+2r}.
inline TransferMatrix squeezer_matrix(double r, double angle, std::size_t n_modes, std::size_t mode) {
  if (!std::isfinite(r) || !std::isfinite(angle))
    throw InvalidArgument("squeeze: parameters must be finite");
  const Eigen::Matrix2d rot = rotation2(angle);
  const Eigen::Matrix2d s = rot * Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal() * rot.transpose();
  return embed_block(s.cast<Complex>(), n_modes, mode);
}

inline SpectralState squeeze(const SpectralState& state, std::size_t mode, double r, double angle) {
  state.check_mode(mode);
  return apply_transfer(state, squeezer_matrix(r, angle, state.n_modes(), mode));
}

/// Beam-splitter loss channel on one mode: block -> (1-λ) block + λ I,
/// cross blocks and mean scaled by sqrt(1-λ).
inline SpectralState add_loss(const SpectralState& state, std::size_t mode, double lambda) {
  state.check_mode(mode);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("add_loss: lambda must lie in [0, 1]");
  const double keep = std::sqrt(1.0 - lambda);
  const auto dim = 2 * static_cast<Eigen::Index>(state.n_modes());
  const auto k = 2 * static_cast<Eigen::Index>(mode);
  RVector scale = RVector::Ones(dim);
  scale(k) = keep;
  scale(k + 1) = keep;
  CMatrix cov = scale.cast<Complex>().asDiagonal() * state.cov() * scale.cast<Complex>().asDiagonal();
  cov(k, k) += lambda;
  cov(k + 1, k + 1) += lambda;
  RVector mean = scale.cwiseProduct(state.mean());
  return SpectralState(state.n_modes(), state.omega(), std::move(cov), std::move(mean));
}

/// Variance of X_θ = cos θ X + sin θ Y of one mode.
inline double quadrature_variance(const SpectralState& state, std::size_t mode, double theta) {
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  return u.dot(state.block(mode) * u);
}

/// Extremal homodyne variances of one mode, plus the variance at `locked_angle`.
inline HomodyneResult min_max_variance(const SpectralState& state, std::size_t mode, double locked_angle = 0.0) {
  const Eigen::Matrix2d b = state.block(mode);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(b);
  const Eigen::Vector2d& vals = eig.eigenvalues();
  const Eigen::Matrix2d& vecs = eig.eigenvectors();
  auto angle_of = [](const Eigen::Vector2d& v) {
    double a = std::atan2(v(1), v(0));
    a = std::fmod(a, kPi);
    if (a < 0) a += kPi;
    return a;
  };
  HomodyneResult out;
  out.omega = state.omega();
  out.v_min = vals(0);
  out.v_max = vals(1);
  out.theta_min = angle_of(vecs.col(0));
  out.theta_max = angle_of(vecs.col(1));
  out.locked_angle = locked_angle;
  out.v_locked = quadrature_variance(state, mode, locked_angle);
  return out;
}

/// 1/sqrt(det Re cov); equals 1 iff the state is pure.
inline double purity(const SpectralState& state) {
  const RMatrix re = state.cov().real();
  Eigen::LLT<RMatrix> llt(re);
  if (llt.info() != Eigen::Success) throw InvalidState("purity: covariance is not positive definite");
  // log-det via Cholesky stays finite for strongly squeezed multi-mode states.
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < re.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * log_det);
}

/// Smallest eigenvalue over cov + iJ and cov - iJ (both must be >= 0 for a physical spectral density).
inline double physicality_margin(const SpectralState& state) {
  const CMatrix ij = Complex(0.0, 1.0) * symplectic_form(state.n_modes()).cast<Complex>();
  auto smallest = [](const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
  };
  return std::min(smallest(state.cov() + ij), smallest(state.cov() - ij));
}

inline bool is_physical(const SpectralState& state, double tol = 1e-9) {
  return physicality_margin(state) >= -tol;
}

inline void require_physical(const SpectralState& state, double tol = 1e-9) {
  const double margin = physicality_margin(state);
  if (margin < -tol)
    throw InvalidState("non-physical state at omega=" + std::to_string(state.omega()) +
                       " (min eigenvalue of cov +- iJ = " + std::to_string(margin) + ")");
}

/// Largest |cov - cov^H| entry.
inline double hermiticity_defect(const SpectralState& state) {
  return (state.cov() - state.cov().adjoint()).cwiseAbs().maxCoeff();
}

// Squeezing bookkeeping helpers. Positive dB means below shot noise.

inline double variance_to_db(double variance) { return -10.0 * std::log10(variance); }

/// Squeeze parameter r for an input squeezed variance of `db` below shot noise (e^{-2r} = 10^{-db/10}).
inline double db_to_r(double db) { return db * std::log(10.0) / 20.0; }

inline double r_to_db(double r) { return 20.0 * r / std::log(10.0); }

}  // namespace hyperloss

#endif  // HYPERLOSS_GAUSSIAN_HPP_
