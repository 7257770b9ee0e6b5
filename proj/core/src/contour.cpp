#include "heatlab/contour.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heatlab/error.hpp"

namespace heatlab::spectral {

using cplx = std::complex<double>;

ContourPropagator::ContourPropagator(std::shared_ptr<const fem::FeSystem> sys, ContourParameters params)
    : sys_(std::move(sys)), params_(params) {
  require(params_.nodes > 0 && params_.mu_t0 > 0.0 && params_.step > 0.0 && params_.ratio > 1.0,
          ErrorCode::invalid_argument, "invalid contour parameters");
  mass_ = sys_->mass().eigen().cast<cplx>();
  stiffness_ = sys_->stiffness().eigen().cast<cplx>();
}

void ContourPropagator::propagate(const Eigen::MatrixXd& loads, const std::vector<double>& times, int max_order,
                                  const Sink& sink) const {
  require(loads.rows() == static_cast<Eigen::Index>(sys_->size()), ErrorCode::invalid_argument,
          "load vectors do not match the system");
  require(max_order >= 0, ErrorCode::invalid_argument, "derivative order must be non-negative");
  factorizations_ = 0;
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    require(times[i] > 0.0 && std::isfinite(times[i]), ErrorCode::invalid_argument, "contour times must be positive");
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  const Eigen::MatrixXcd rhs = loads.cast<cplx>();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  const Eigen::Index n = loads.rows();
  const Eigen::Index m = loads.cols();

  std::size_t begin = 0;
  while (begin < order.size()) {
    const double t0 = times[order[begin]];
    std::size_t end = begin;
    while (end < order.size() && times[order[end]] <= params_.ratio * t0 * (1.0 + 1e-12)) ++end;
    const std::size_t count = end - begin;

    // acc[i][k] accumulates the k-th derivative at time order[begin + i]
    std::vector<std::vector<Eigen::MatrixXd>> acc(
        count, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(max_order) + 1, Eigen::MatrixXd::Zero(n, m)));
    const double mu = params_.mu_t0 / t0;
    for (int k = 0; k <= params_.nodes; ++k) {
      const double u = k * params_.step;
      const cplx s(1.0, u);
      const cplx z = mu * s * s;
      // weight h/(2 pi i) z'(u); conjugate nodes are folded in by doubling the real part
      const cplx w = params_.step * mu * s / std::numbers::pi * (k == 0 ? 1.0 : 2.0);
      const Eigen::SparseMatrix<cplx> a = z * mass_ + stiffness_;
      if (!analyzed) {
        lu.analyzePattern(a);
        analyzed = true;
      }
      lu.factorize(a);
      require(lu.info() == Eigen::Success, ErrorCode::internal_error, "complex factorization failed");
      ++factorizations_;
      const Eigen::MatrixXcd x = lu.solve(rhs);
      for (std::size_t i = 0; i < count; ++i) {
        cplx f = w * std::exp(z * times[order[begin + i]]);
        for (int d = 0; d <= max_order; ++d) {
          acc[i][static_cast<std::size_t>(d)] += (f * x).real();
          f *= z;
        }
      }
    }
    for (std::size_t i = 0; i < count; ++i) sink(order[begin + i], acc[i]);
    begin = end;
  }
}

}  // namespace heatlab::spectral
