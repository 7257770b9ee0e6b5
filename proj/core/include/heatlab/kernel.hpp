#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/contour.hpp"
#include "heatlab/fe_function.hpp"
#include "heatlab/parabolic.hpp"
#include "heatlab/spectral.hpp"
#include "heatlab/transfer.hpp"

namespace heatlab::kernel {

using mesh::Point;

/// Smooth unit-mass bump c (1 - r^2/rho^2)^4 supported in B_rho(center).
struct RegularizedBump {
  Point center = Point::Zero();
  double radius = 0.0;
  int triangle = -1;  ///< triangle of the generating mesh that contains the support
  static constexpr int kProfilePower = 4;

  double normalization() const;
  double operator()(const Point& x) const;

  /// Bump inside the triangle containing x0: rho = min(dist(x0, edges), h/4);
  /// x0 moves to the incenter when closer than h/8 to an edge.
  static RegularizedBump inside_element(const mesh::TriMesh& mesh, const Point& x0);
};

/// Integrals (bump, phi_i) over free dofs, by adaptive subdivision of the
/// elements cut by the support circle. `tol` bounds the per-element error.
Eigen::VectorXd bump_loads(const fem::FeSpace& space, const RegularizedBump& bump, double tol = 1e-14);
/// Integral of the bump itself with the same quadrature (unit up to quadrature error).
double bump_mass(const mesh::TriMesh& mesh, const RegularizedBump& bump, double tol = 1e-14);

struct KernelSlice {
  double t = 0.0;
  Point x0 = Point::Zero();
  int order = 0;  ///< time derivative order
  fem::FeFunction values;
};

/// Gamma_h(t, ., x0) = E_h(t) delta_{h,x0} and its time derivatives.
KernelSlice kernel_slice(const fem::FeSystem& sys, const spectral::SpectralDecomposition& spec, const Point& x0,
                         double t, int order = 0);
double kernel_l1_norm(const KernelSlice& slice);

/// Kernel columns for a fixed set of source points; column j is Gamma_h(t,.,x_j).
class KernelBank {
 public:
  KernelBank(std::shared_ptr<const fem::FeSystem> sys, std::shared_ptr<const spectral::SpectralDecomposition> spec,
             std::vector<Point> points);

  const std::vector<Point>& points() const noexcept { return points_; }
  /// d^order/dt^order Gamma_h(t, ., x_j) coefficients, one column per point.
  Eigen::MatrixXd slices(double t, int order = 0) const;
  /// L1 norms of the columns of slices(t, order).
  Eigen::VectorXd l1_norms(double t, int order = 0) const;

 private:
  std::shared_ptr<const fem::FeSystem> sys_;
  std::shared_ptr<const spectral::SpectralDecomposition> spec_;
  std::vector<Point> points_;
  Eigen::MatrixXd modal_;  ///< V^T Phi(x_j)
};

/// Fine-mesh surrogate E_fine(t) P_fine bump for the regularized Green's function.
/// Requires rho >= min_resolution * h_fine.
fem::FeFunction reference_kernel(const fem::FeSystem& fine, const spectral::SpectralDecomposition& fine_spec,
                                 const RegularizedBump& bump, double t, double min_resolution = 4.0);

/// One source point for a kernel-difference study: a coarse system with its
/// spectrum, the nested transfer to the shared fine system, and the initial loads
/// (M_fine times the fine initial coefficients, usually bump_loads).
struct KernelDifferenceCase {
  std::shared_ptr<const fem::NestedTransfer> transfer;
  std::shared_ptr<const spectral::SpectralDecomposition> coarse_spec;
  Point x0 = Point::Zero();
  Eigen::VectorXd fine_loads;
};

struct KernelDifferenceRecord {
  double dt_l1 = 0.0;        ///< ||d_t F||_{L1((0,1) x Omega)}
  double t_dtt_l1 = 0.0;     ///< ||t d_tt F||_{L1((0,1) x Omega)}
  double tail_fraction = 0.0;  ///< share of dt_l1 from panels below 2^-10
  double tail_estimate = 0.0;  ///< 2^-K ||d_t F(t_min)||_{L1}, the unresolved part below the grid
  std::vector<double> panel_dt_l1;  ///< per dyadic panel, finest first
};

/// F = Gamma_h - Gamma_ref on the fine mesh, all cases sharing one contour pass.
std::vector<KernelDifferenceRecord> kernel_difference_norms(const std::vector<KernelDifferenceCase>& cases,
                                                            const spectral::ContourPropagator& fine_propagator,
                                                            int panels, int per_panel);

/// Upper bound for the largest eigenvalue of (K, M) from element pencils.
double lambda_max_bound(const fem::FeSpace& space);

}  // namespace heatlab::kernel
