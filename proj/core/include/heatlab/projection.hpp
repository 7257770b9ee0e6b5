#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/assembly.hpp"
#include "heatlab/fe_function.hpp"

namespace heatlab::fem {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

struct FieldWithGradient {
  ScalarField value;
  VectorField gradient;
};

/// Per-element load vectors: column t holds the integrals of the field
/// against the local basis of triangle t (all local dofs, boundary included).
using ElementLoads = Eigen::MatrixXd;

/// Column t = int_T v phi_a, by the degree-matched rule (or a finer conical rule).
ElementLoads mass_loads(const FeSpace& space, const ScalarField& v, int conical_order = 0);
/// Column t = int_T grad u . grad phi_a.
ElementLoads stiffness_loads(const FeSpace& space, const VectorField& grad_u, int conical_order = 0);
/// Exact loads of a function already in the space.
ElementLoads mass_loads(const FeFunction& v);
ElementLoads stiffness_loads(const FeFunction& v);

/// Sum element loads into the free-dof right-hand side.
Eigen::VectorXd gather_free(const FeSpace& space, const ElementLoads& loads);

/// L2 projection P_h: solves M c = b, b_i = (f, phi_i).
FeFunction l2_project(const FeSystem& sys, const ElementLoads& loads);
FeFunction l2_project(const FeSystem& sys, const ScalarField& f);
/// Ritz projection R_h: solves K c = b, b_i = (grad u, grad phi_i).
FeFunction ritz_project(const FeSystem& sys, const ElementLoads& grad_loads);
FeFunction ritz_project(const FeSystem& sys, const FieldWithGradient& u);

/// Clement-type quasi-interpolant I_h v = sum_i (P^(i) v)(x_i) Phi_i with
/// P^(i) the L2 projection onto the unconstrained space on the patch of x_i.
/// Patch mass factorizations are computed once per space.
class ClementInterpolator {
 public:
  explicit ClementInterpolator(std::shared_ptr<const FeSpace> space);

  FeFunction apply(const ElementLoads& loads) const;
  FeFunction apply(const ScalarField& v) const;
  FeFunction apply(const FeFunction& v) const;

  const FeSpace& space() const noexcept { return *space_; }

 private:
  struct Patch {
    std::vector<int> triangles;
    std::vector<int> dofs;  ///< local -> global dof (unconstrained)
    std::vector<std::vector<int>> element_to_local;
    int center = -1;        ///< local position of the patch node
    Eigen::LLT<Eigen::MatrixXd> mass;
  };

  std::shared_ptr<const FeSpace> space_;
  std::vector<Patch> patches_;  ///< one per free dof
};

FeFunction clement_interpolate(std::shared_ptr<const FeSpace> space, const ScalarField& v);

/// Discrete delta: M c = Phi(x0), so (delta, chi) = chi(x0) for all chi in S_h.
FeFunction discrete_delta(const FeSystem& sys, const Point& x0);

}  // namespace heatlab::fem
