#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/fe_space.hpp"
#include "heatlab/parabolic.hpp"

namespace heatlab::dyadic {

using mesh::Point;

/// Parabolic annuli Q_j = {d_j <= max(|x - x0|, sqrt t) <= 2 d_j} around x0 with
/// d_j = 2^-j, the innermost set Q_* of radius d_{J*}, and the remainder Q_0.
class DyadicDecomposition {
 public:
  static constexpr int kInnermost = -1;

  /// Raises decomposition-unavailable unless h < 1/(4 C*) and C* >= 16.
  static DyadicDecomposition build(const Point& x0, double C_star, double h);

  const Point& x0() const noexcept { return x0_; }
  double C_star() const noexcept { return C_star_; }
  double h() const noexcept { return h_; }
  int J_star() const noexcept { return J_star_; }
  static double d(int j) { return std::ldexp(1.0, -j); }
  double d_star() const { return d(J_star_); }

  /// Region of (t, x): j in [0, J*] or kInnermost. Ties go to the smaller j.
  int classify(double t, const Point& x) const { return classify_radius(std::max((x - x0_).norm(), std::sqrt(t))); }
  /// Spatial region Omega_j of x.
  int classify_space(const Point& x) const { return classify_radius((x - x0_).norm()); }
  int classify_radius(double m) const;

  /// Whether region r belongs to Q_j' = Q_{j-1} u Q_j u Q_{j+1}.
  bool in_neighbourhood(int r, int j) const { return r != kInnermost && r >= j - 1 && r <= j + 1; }

 private:
  DyadicDecomposition(const Point& x0, double C_star, double h, int J_star)
      : x0_(x0), C_star_(C_star), h_(h), J_star_(J_star) {}

  Point x0_;
  double C_star_;
  double h_;
  int J_star_;
};

/// FE coefficient columns sampled on a time grid.
struct SpaceTimeField {
  std::shared_ptr<const fem::FeSpace> space;
  parabolic::TimeGrid grid;
  Eigen::MatrixXd values;  ///< free coefficients, one column per time node
};

/// Squared local norms sum over quadrature points of (|F|^2 + [order 1] |grad F|^2) w,
/// indexed by region 0..J* with the innermost set last (index J* + 1).
struct RegionSums {
  std::vector<double> squared;
  std::vector<std::size_t> points;  ///< quadrature points per region
};
RegionSums region_sums(const DyadicDecomposition& dec, const SpaceTimeField& f, int order);

/// |||F|||_{order, Q_j}; `empty` reports a region without quadrature points.
double local_space_time_norm(const DyadicDecomposition& dec, const SpaceTimeField& f, int region, int order,
                             bool* empty = nullptr);

/// ||v||_{order, Omega_j'} for a single FE function.
double local_space_norm_neighbourhood(const DyadicDecomposition& dec, const fem::FeSpace& space,
                                      const Eigen::VectorXd& coeffs, int j, int order);

struct LocalNormEntry {
  int j = 0;
  double F_0 = 0.0;     ///< |||F|||_{Q_j}
  double F_1 = 0.0;     ///< |||F|||_{1,Q_j}
  double dtF_0 = 0.0;   ///< |||d_t F|||_{Q_j}
  double dtF_1 = 0.0;   ///< |||d_t F|||_{1,Q_j}
  double dttF_0 = 0.0;  ///< |||d_tt F|||_{Q_j}
};

struct LocalNormReport {
  std::vector<LocalNormEntry> entries;  ///< ascending j, 0..J*
  double K = 0.0;
};

/// K = sum_j d_j^{1+N/2} (d_j^-1 |||F|||_{1,Q_j} + |||d_t F|||_{Q_j} + d_j |||d_t F|||_{1,Q_j}
///     + d_j^2 |||d_tt F|||_{Q_j}) with N = 2. Raises incomplete-report if a j is missing.
LocalNormReport weighted_sum_K(const DyadicDecomposition& dec, std::vector<LocalNormEntry> entries);
double recompute_K(const LocalNormReport& report);

/// Fields for the local energy inequality, all on one (fine) space and grid:
/// e = phi - phi_h, eta = I_h phi - phi, and the initial value phi_h(0).
struct LocalEnergyInputs {
  SpaceTimeField error;
  SpaceTimeField dt_error;
  SpaceTimeField interp_error;
  SpaceTimeField dt_interp_error;
  Eigen::VectorXd initial;
  double h = 0.0;  ///< mesh size of phi_h
};

struct LocalEnergyRecord {
  double lhs = 0.0;
  double I_j = 0.0;
  double X_j = 0.0;
  double coupling = 0.0;         ///< d_j^-2 |||e|||_{Q_j'}
  double window_factor = 0.0;    ///< h^1/2 d_j^-1/2 + h/(eps d_j) + eps
  double window_norm = 0.0;      ///< |||d_t e|||_{Q_j'} + d_j^-1 |||e|||_{1,Q_j'}
  double rhs = 0.0;              ///< eps^-3 (I_j + X_j + coupling) + window_factor * window_norm
  double ratio = 0.0;
};

LocalEnergyRecord local_energy_check(const DyadicDecomposition& dec, const LocalEnergyInputs& in, int j,
                                     double epsilon);

}  // namespace heatlab::dyadic
