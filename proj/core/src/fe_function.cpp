#include "heatlab/fe_function.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "heatlab/error.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::fem {

FeFunction::FeFunction(std::shared_ptr<const FeSpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  require(space_ != nullptr, ErrorCode::invalid_argument, "FeFunction needs a space");
  require(static_cast<std::size_t>(coeffs_.size()) == space_->num_free(), ErrorCode::invalid_argument,
          "coefficient length must equal the number of interior dofs");
}

FeFunction FeFunction::zero(std::shared_ptr<const FeSpace> space) {
  const auto n = static_cast<Eigen::Index>(space->num_free());
  return FeFunction(std::move(space), Eigen::VectorXd::Zero(n));
}

FeFunction& FeFunction::operator+=(const FeFunction& other) {
  require(space_ == other.space_, ErrorCode::invalid_argument, "functions live on different spaces");
  coeffs_ += other.coeffs_;
  return *this;
}

FeFunction& FeFunction::operator-=(const FeFunction& other) {
  require(space_ == other.space_, ErrorCode::invalid_argument, "functions live on different spaces");
  coeffs_ -= other.coeffs_;
  return *this;
}

FeFunction& FeFunction::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

FeFunction operator+(FeFunction a, const FeFunction& b) { return a += b; }
FeFunction operator-(FeFunction a, const FeFunction& b) { return a -= b; }
FeFunction operator*(double s, FeFunction a) { return a *= s; }

double lq_norm(const FeSpace& space, const Eigen::VectorXd& coeffs, double q) {
  require(q >= 1.0, ErrorCode::invalid_argument, "norm exponent q must be >= 1");
  const auto& mesh = space.mesh();
  const auto& rule = QuadratureRule::for_degree(space.degree());
  const Eigen::VectorXd full = space.expand(coeffs);
  const int nloc = space.dofs_per_triangle();
  std::vector<LocalValues> table(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k) table[k] = basis_values(space.degree(), rule.points[k]);
  if (std::isinf(q)) {
    double m = full.size() > 0 ? full.cwiseAbs().maxCoeff() : 0.0;
    if (space.degree() == 1) return m;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto dofs = space.element_dofs(static_cast<int>(t));
      for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto& phi = table[k];
        double v = 0.0;
        for (int a = 0; a < nloc; ++a) v += phi[static_cast<std::size_t>(a)] * full(dofs[static_cast<std::size_t>(a)]);
        m = std::max(m, std::abs(v));
      }
    }
    return m;
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto dofs = space.element_dofs(static_cast<int>(t));
    double local = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const auto& phi = table[k];
      double v = 0.0;
      for (int a = 0; a < nloc; ++a) v += phi[static_cast<std::size_t>(a)] * full(dofs[static_cast<std::size_t>(a)]);
      local += rule.weights[k] * (q == 2.0 ? v * v : std::pow(std::abs(v), q));
    }
    sum += mesh.area(static_cast<int>(t)) * local;
  }
  return q == 2.0 ? std::sqrt(sum) : std::pow(sum, 1.0 / q);
}

double fe_lq_norm(const FeFunction& f, double q) { return lq_norm(f.space(), f.coefficients(), q); }

double gradient_l2_norm(const FeSpace& space, const Eigen::VectorXd& coeffs) {
  const auto& mesh = space.mesh();
  const auto& rule = QuadratureRule::for_degree(space.degree());
  const Eigen::VectorXd full = space.expand(coeffs);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = element_geometry(mesh, static_cast<int>(t));
    const auto dofs = space.element_dofs(static_cast<int>(t));
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const auto g = basis_gradients(space.degree(), rule.points[k], geo);
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      for (std::size_t a = 0; a < dofs.size(); ++a) grad += full(dofs[a]) * g[a];
      sum += geo.area * rule.weights[k] * grad.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

void write_fe_function(std::ostream& out, const FeFunction& f) {
  out << "DOF " << f.coefficients().size() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < f.coefficients().size(); ++i) out << f.coefficients()(i) << '\n';
}

Eigen::VectorXd read_fe_coefficients(std::istream& in) {
  std::string tag;
  Eigen::Index n = 0;
  require(static_cast<bool>(in >> tag >> n) && tag == "DOF" && n >= 0, ErrorCode::invalid_input,
          "expected 'DOF n' header");
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(static_cast<bool>(in >> c(i)), ErrorCode::invalid_input, "truncated coefficient list");
  }
  return c;
}

}  // namespace heatlab::fem
