#pragma once

#include <iosfwd>
#include <limits>
#include <memory>

#include <Eigen/Core>

#include "heatlab/fe_space.hpp"

namespace heatlab::fem {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Finite element function; coefficients live on the free dofs only.
class FeFunction {
 public:
  FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients);
  static FeFunction zero(std::shared_ptr<const FeSpace> space);

  const FeSpace& space() const noexcept { return *space_; }
  std::shared_ptr<const FeSpace> space_ptr() const noexcept { return space_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coeffs_; }
  Eigen::VectorXd& coefficients() noexcept { return coeffs_; }

  double operator()(const Point& x) const { return space_->evaluate(coeffs_, x); }

  FeFunction& operator+=(const FeFunction& other);
  FeFunction& operator-=(const FeFunction& other);
  FeFunction& operator*=(double s);

 private:
  std::shared_ptr<const FeSpace> space_;
  Eigen::VectorXd coeffs_;
};

FeFunction operator+(FeFunction a, const FeFunction& b);
FeFunction operator-(FeFunction a, const FeFunction& b);
FeFunction operator*(double s, FeFunction a);

/// ||f||_{L^q}; q = kInf takes the max over quadrature and dof points.
double fe_lq_norm(const FeFunction& f, double q);
double lq_norm(const FeSpace& space, const Eigen::VectorXd& coeffs, double q);
/// ||grad f||_{L^2} by quadrature.
double gradient_l2_norm(const FeSpace& space, const Eigen::VectorXd& coeffs);

/// "DOF n" header followed by n coefficient lines.
void write_fe_function(std::ostream& out, const FeFunction& f);
Eigen::VectorXd read_fe_coefficients(std::istream& in);

}  // namespace heatlab::fem
