#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "heatlab/assembly.hpp"

namespace heatlab::spectral {

/// Quadrature parameters for the inverse Laplace transform on the parabola
/// z(u) = mu (1 + iu)^2, trapezoidal in u with 2N+1 nodes. Tuned so that one
/// factorization set covers t in [t0, ratio * t0].
struct ContourParameters {
  int nodes = 32;            ///< N
  double mu_t0 = 0.94472;    ///< mu * t0
  double step = 0.19038;     ///< h
  double ratio = 4.0;        ///< window length t_max / t0
};

/// Time derivatives of E_h(t) for systems beyond the dense eigensolver cap.
/// E_h(t) c = (1/2 pi i) int e^{zt} (zM + K)^{-1} M c dz, one sparse complex LU
/// per contour node; inputs are load vectors b = M c so the mass solve is implicit.
class ContourPropagator {
 public:
  explicit ContourPropagator(std::shared_ptr<const fem::FeSystem> sys, ContourParameters params = {});

  /// Called once per requested time with derivs[k] = d^k/dt^k E_h(t) M^{-1} loads (n x m).
  using Sink = std::function<void(std::size_t time_index, const std::vector<Eigen::MatrixXd>& derivs)>;

  /// Times must be positive; they are grouped into windows [t0, ratio*t0].
  void propagate(const Eigen::MatrixXd& loads, const std::vector<double>& times, int max_order,
                 const Sink& sink) const;

  /// Number of sparse factorizations the last propagate call performed.
  std::size_t factorizations() const noexcept { return factorizations_; }

 private:
  std::shared_ptr<const fem::FeSystem> sys_;
  ContourParameters params_;
  Eigen::SparseMatrix<std::complex<double>> mass_;
  Eigen::SparseMatrix<std::complex<double>> stiffness_;
  mutable std::size_t factorizations_ = 0;
};

}  // namespace heatlab::spectral
