#include "heatlab/projection.hpp"

#include <algorithm>

#include "heatlab/error.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::fem {

namespace {

const QuadratureRule& pick_rule(const FeSpace& space, int conical_order, QuadratureRule& storage) {
  if (conical_order > 0) {
    storage = QuadratureRule::conical(conical_order);
    return storage;
  }
  return QuadratureRule::for_degree(space.degree());
}

Point map_to_element(const mesh::TriMesh& mesh, int t, const std::array<double, 3>& bary) {
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  return bary[0] * mesh.points()[static_cast<std::size_t>(tri[0])] +
         bary[1] * mesh.points()[static_cast<std::size_t>(tri[1])] +
         bary[2] * mesh.points()[static_cast<std::size_t>(tri[2])];
}

}  // namespace

ElementLoads mass_loads(const FeSpace& space, const ScalarField& v, int conical_order) {
  QuadratureRule storage;
  const auto& rule = pick_rule(space, conical_order, storage);
  const auto& mesh = space.mesh();
  const int n = space.dofs_per_triangle();
  ElementLoads loads = ElementLoads::Zero(n, static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(static_cast<int>(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double fv = v(map_to_element(mesh, static_cast<int>(t), rule.points[q]));
      const auto phi = basis_values(space.degree(), rule.points[q]);
      for (int a = 0; a < n; ++a) {
        loads(a, static_cast<Eigen::Index>(t)) += area * rule.weights[q] * fv * phi[static_cast<std::size_t>(a)];
      }
    }
  }
  return loads;
}

ElementLoads stiffness_loads(const FeSpace& space, const VectorField& grad_u, int conical_order) {
  QuadratureRule storage;
  const auto& rule = pick_rule(space, conical_order, storage);
  const auto& mesh = space.mesh();
  const int n = space.dofs_per_triangle();
  ElementLoads loads = ElementLoads::Zero(n, static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = element_geometry(mesh, static_cast<int>(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d gu = grad_u(map_to_element(mesh, static_cast<int>(t), rule.points[q]));
      const auto g = basis_gradients(space.degree(), rule.points[q], geo);
      for (int a = 0; a < n; ++a) {
        loads(a, static_cast<Eigen::Index>(t)) += geo.area * rule.weights[q] * gu.dot(g[static_cast<std::size_t>(a)]);
      }
    }
  }
  return loads;
}

namespace {

template <typename ElementMatrixFn>
ElementLoads exact_loads(const FeFunction& v, ElementMatrixFn element_matrix) {
  const FeSpace& space = v.space();
  const Eigen::VectorXd full = space.expand(v.coefficients());
  const int n = space.dofs_per_triangle();
  ElementLoads loads(n, static_cast<Eigen::Index>(space.mesh().num_triangles()));
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto dofs = space.element_dofs(static_cast<int>(t));
    Eigen::VectorXd local(n);
    for (int a = 0; a < n; ++a) local(a) = full(dofs[static_cast<std::size_t>(a)]);
    loads.col(static_cast<Eigen::Index>(t)) = element_matrix(space, static_cast<int>(t)) * local;
  }
  return loads;
}

}  // namespace

ElementLoads mass_loads(const FeFunction& v) { return exact_loads(v, element_mass); }
ElementLoads stiffness_loads(const FeFunction& v) { return exact_loads(v, element_stiffness); }

Eigen::VectorXd gather_free(const FeSpace& space, const ElementLoads& loads) {
  require(loads.cols() == static_cast<Eigen::Index>(space.mesh().num_triangles()) &&
              loads.rows() == space.dofs_per_triangle(),
          ErrorCode::invalid_argument, "element loads do not match the space");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_free()));
  for (Eigen::Index t = 0; t < loads.cols(); ++t) {
    const auto dofs = space.element_dofs(static_cast<int>(t));
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      const int f = space.free_index(dofs[a]);
      if (f >= 0) b(f) += loads(static_cast<Eigen::Index>(a), t);
    }
  }
  return b;
}

FeFunction l2_project(const FeSystem& sys, const ElementLoads& loads) {
  const Eigen::VectorXd b = gather_free(sys.space(), loads);
  Eigen::VectorXd c = sys.solve_mass(b);
  const double bmax = b.cwiseAbs().maxCoeff();
  const double res = (sys.mass() * c - b).cwiseAbs().maxCoeff();
  require(res <= 1e-10 * std::max(bmax, 1e-300), ErrorCode::internal_error, "L2 projection residual too large");
  return FeFunction(sys.space_ptr(), std::move(c));
}

FeFunction l2_project(const FeSystem& sys, const ScalarField& f) { return l2_project(sys, mass_loads(sys.space(), f)); }

FeFunction ritz_project(const FeSystem& sys, const ElementLoads& grad_loads) {
  const Eigen::VectorXd b = gather_free(sys.space(), grad_loads);
  return FeFunction(sys.space_ptr(), sys.solve_stiffness(b));
}

FeFunction ritz_project(const FeSystem& sys, const FieldWithGradient& u) {
  return ritz_project(sys, stiffness_loads(sys.space(), u.gradient));
}

ClementInterpolator::ClementInterpolator(std::shared_ptr<const FeSpace> space) : space_(std::move(space)) {
  const FeSpace& sp = *space_;
  const int n = sp.dofs_per_triangle();
  patches_.resize(sp.num_free());
  for (std::size_t k = 0; k < sp.num_free(); ++k) {
    const int dof = sp.free_dofs()[k];
    Patch& p = patches_[k];
    p.triangles = sp.dof_patch(dof);
    require(!p.triangles.empty(), ErrorCode::internal_error, "empty patch for dof " + std::to_string(dof));
    for (int t : p.triangles) {
      for (int d : sp.element_dofs(t)) p.dofs.push_back(d);
    }
    std::sort(p.dofs.begin(), p.dofs.end());
    p.dofs.erase(std::unique(p.dofs.begin(), p.dofs.end()), p.dofs.end());
    const auto local_of = [&](int d) {
      return static_cast<int>(std::lower_bound(p.dofs.begin(), p.dofs.end(), d) - p.dofs.begin());
    };
    p.center = local_of(dof);
    const auto m = static_cast<Eigen::Index>(p.dofs.size());
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(m, m);
    for (int t : p.triangles) {
      std::vector<int> map;
      for (int d : sp.element_dofs(t)) map.push_back(local_of(d));
      const Eigen::MatrixXd me = element_mass(sp, t);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) mass(map[static_cast<std::size_t>(a)], map[static_cast<std::size_t>(b)]) += me(a, b);
      }
      p.element_to_local.push_back(std::move(map));
    }
    p.mass.compute(mass);
    require(p.mass.info() == Eigen::Success, ErrorCode::internal_error, "patch mass matrix is singular");
  }
}

FeFunction ClementInterpolator::apply(const ElementLoads& loads) const {
  const FeSpace& sp = *space_;
  require(loads.cols() == static_cast<Eigen::Index>(sp.mesh().num_triangles()), ErrorCode::invalid_argument,
          "element loads do not match the space");
  Eigen::VectorXd c(static_cast<Eigen::Index>(sp.num_free()));
  for (std::size_t k = 0; k < patches_.size(); ++k) {
    const Patch& p = patches_[k];
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dofs.size()));
    for (std::size_t e = 0; e < p.triangles.size(); ++e) {
      const auto& map = p.element_to_local[e];
      for (std::size_t a = 0; a < map.size(); ++a) rhs(map[a]) += loads(static_cast<Eigen::Index>(a), p.triangles[e]);
    }
    const Eigen::VectorXd local = p.mass.solve(rhs);
    c(static_cast<Eigen::Index>(k)) = local(p.center);
  }
  return FeFunction(space_, std::move(c));
}

FeFunction ClementInterpolator::apply(const ScalarField& v) const { return apply(mass_loads(*space_, v)); }

FeFunction ClementInterpolator::apply(const FeFunction& v) const {
  require(v.space_ptr() == space_, ErrorCode::invalid_argument, "function lives on a different space");
  return apply(mass_loads(v));
}

FeFunction clement_interpolate(std::shared_ptr<const FeSpace> space, const ScalarField& v) {
  return ClementInterpolator(std::move(space)).apply(v);
}

FeFunction discrete_delta(const FeSystem& sys, const Point& x0) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.size()));
  for (const auto& [f, v] : sys.space().basis_at(x0)) phi(f) = v;
  return FeFunction(sys.space_ptr(), sys.solve_mass(phi));
}

}  // namespace heatlab::fem
