#include "heatlab/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "heatlab/error.hpp"
#include "heatlab/projection.hpp"

namespace heatlab::kernel {

namespace {

Eigen::VectorXd point_values(const fem::FeSpace& space, const Point& x0) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_free()));
  for (const auto& [f, v] : space.basis_at(x0)) phi(f) = v;
  return phi;
}

Eigen::VectorXd time_factors(const Eigen::VectorXd& lambda, double t, int order) {
  Eigen::VectorXd d(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) d(i) = std::pow(-lambda(i), order) * std::exp(-lambda(i) * t);
  return d;
}

}  // namespace

KernelSlice kernel_slice(const fem::FeSystem& sys, const spectral::SpectralDecomposition& spec, const Point& x0,
                         double t, int order) {
  require(t >= 0.0, ErrorCode::invalid_argument, "kernel time must be non-negative");
  const fem::FeFunction delta = fem::discrete_delta(sys, x0);
  Eigen::VectorXd c = (t == 0.0 && order == 0) ? delta.coefficients() : spec.evolve(t, delta.coefficients(), order);
  return KernelSlice{t, x0, order, fem::FeFunction(sys.space_ptr(), std::move(c))};
}

double kernel_l1_norm(const KernelSlice& slice) { return fem::fe_lq_norm(slice.values, 1.0); }

KernelBank::KernelBank(std::shared_ptr<const fem::FeSystem> sys,
                       std::shared_ptr<const spectral::SpectralDecomposition> spec, std::vector<Point> points)
    : sys_(std::move(sys)), spec_(std::move(spec)), points_(std::move(points)) {
  require(!points_.empty(), ErrorCode::invalid_argument, "kernel bank needs at least one point");
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(sys_->size()), static_cast<Eigen::Index>(points_.size()));
  for (std::size_t j = 0; j < points_.size(); ++j) phi.col(static_cast<Eigen::Index>(j)) = point_values(sys_->space(), points_[j]);
  // V^T M (M^{-1} Phi) = V^T Phi
  modal_ = spec_->eigenvectors().transpose() * phi;
}

Eigen::MatrixXd KernelBank::slices(double t, int order) const {
  require(t >= 0.0, ErrorCode::invalid_argument, "kernel time must be non-negative");
  const Eigen::VectorXd d = time_factors(spec_->eigenvalues(), t, order);
  return spec_->eigenvectors() * (d.asDiagonal() * modal_);
}

Eigen::VectorXd KernelBank::l1_norms(double t, int order) const {
  const Eigen::MatrixXd s = slices(t, order);
  Eigen::VectorXd out(s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) out(j) = fem::lq_norm(sys_->space(), s.col(j), 1.0);
  return out;
}

fem::FeFunction reference_kernel(const fem::FeSystem& fine, const spectral::SpectralDecomposition& fine_spec,
                                 const RegularizedBump& bump, double t, double min_resolution) {
  const double hf = fine.space().mesh().h();
  require(bump.radius >= min_resolution * hf, ErrorCode::invalid_argument,
          "bump radius " + std::to_string(bump.radius) + " is not resolved by the fine mesh (h = " +
              std::to_string(hf) + ")");
  const Eigen::VectorXd c0 = fine.solve_mass(bump_loads(fine.space(), bump));
  return fem::FeFunction(fine.space_ptr(), fine_spec.apply_semigroup(t, c0));
}

std::vector<KernelDifferenceRecord> kernel_difference_norms(const std::vector<KernelDifferenceCase>& cases,
                                                            const spectral::ContourPropagator& fine_propagator,
                                                            int panels, int per_panel) {
  require(!cases.empty(), ErrorCode::invalid_argument, "no kernel-difference cases");
  const auto fine = cases.front().transfer->fine_ptr();
  const auto n_fine = static_cast<Eigen::Index>(fine->size());
  Eigen::MatrixXd loads(n_fine, static_cast<Eigen::Index>(cases.size()));
  std::vector<Eigen::MatrixXd> coarse_modal(cases.size());
  for (std::size_t j = 0; j < cases.size(); ++j) {
    const auto& c = cases[j];
    require(c.transfer->fine_ptr() == fine, ErrorCode::invalid_argument, "kernel-difference cases need one fine space");
    require(c.fine_loads.size() == n_fine, ErrorCode::invalid_argument, "fine loads have the wrong length");
    loads.col(static_cast<Eigen::Index>(j)) = c.fine_loads;
    coarse_modal[j] = c.coarse_spec->eigenvectors().transpose() * point_values(c.transfer->coarse().space(), c.x0);
  }

  const parabolic::TimeGrid grid = parabolic::dyadic_panels(panels, per_panel);
  std::vector<KernelDifferenceRecord> out(cases.size());
  for (auto& r : out) r.panel_dt_l1.assign(static_cast<std::size_t>(panels), 0.0);
  const double t_min = grid.nodes.front();

  fine_propagator.propagate(loads, grid.nodes, 2, [&](std::size_t k, const std::vector<Eigen::MatrixXd>& d) {
    const double t = grid.nodes[k];
    const double w = grid.weights[k];
    const auto panel = k / static_cast<std::size_t>(per_panel);
    for (std::size_t j = 0; j < cases.size(); ++j) {
      const auto& c = cases[j];
      const Eigen::VectorXd& lambda = c.coarse_spec->eigenvalues();
      const Eigen::MatrixXd& v = c.coarse_spec->eigenvectors();
      const auto col = static_cast<Eigen::Index>(j);
      const Eigen::VectorXd g1 = v * (time_factors(lambda, t, 1).asDiagonal() * coarse_modal[j]);
      const Eigen::VectorXd g2 = v * (time_factors(lambda, t, 2).asDiagonal() * coarse_modal[j]);
      const Eigen::VectorXd f1 = c.transfer->prolong(g1) - d[1].col(col);
      const Eigen::VectorXd f2 = c.transfer->prolong(g2) - d[2].col(col);
      const double n1 = fem::lq_norm(fine->space(), f1, 1.0);
      const double n2 = fem::lq_norm(fine->space(), f2, 1.0);
      out[j].dt_l1 += w * n1;
      out[j].t_dtt_l1 += w * t * n2;
      out[j].panel_dt_l1[panel] += w * n1;
      if (k == 0) out[j].tail_estimate = t_min * n1;
    }
  });

  for (auto& r : out) {
    double tail = 0.0;
    // panel p covers [2^{-(panels-p)}, 2^{-(panels-p)+1}]
    for (int p = 0; p < panels; ++p) {
      if (panels - p - 1 >= 10) tail += r.panel_dt_l1[static_cast<std::size_t>(p)];
    }
    r.tail_fraction = r.dt_l1 > 0.0 ? tail / r.dt_l1 : 0.0;
  }
  return out;
}

double lambda_max_bound(const fem::FeSpace& space) {
  double best = 0.0;
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const Eigen::MatrixXd k = fem::element_stiffness(space, static_cast<int>(t));
    const Eigen::MatrixXd m = fem::element_mass(space, static_cast<int>(t));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m, Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().maxCoeff());
  }
  return best;
}

}  // namespace heatlab::kernel
