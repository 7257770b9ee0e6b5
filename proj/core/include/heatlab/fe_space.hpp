#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "heatlab/mesh.hpp"

namespace heatlab::fem {

using mesh::Point;

inline constexpr int kMaxLocalDofs = 6;

using LocalValues = std::array<double, kMaxLocalDofs>;
using LocalGradients = std::array<Eigen::Vector2d, kMaxLocalDofs>;

/// Affine map data of one triangle.
struct ElementGeometry {
  double area = 0.0;
  /// Gradients of the three barycentric coordinates (constant on the element).
  std::array<Eigen::Vector2d, 3> bary_grad;
};

ElementGeometry element_geometry(const mesh::TriMesh& mesh, int t);

/// Lagrange basis on one element. Local order: vertices 0,1,2 then (r = 2)
/// midpoints of edges (1,2), (2,0), (0,1).
LocalValues basis_values(int degree, const std::array<double, 3>& bary);
LocalGradients basis_gradients(int degree, const std::array<double, 3>& bary, const ElementGeometry& geo);

/// Continuous Lagrange space of degree 1 or 2 with homogeneous Dirichlet data.
/// Free dofs are the interior ones; boundary dofs are eliminated.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const mesh::TriMesh> mesh, int degree);

  const mesh::TriMesh& mesh() const noexcept { return *mesh_; }
  std::shared_ptr<const mesh::TriMesh> mesh_ptr() const noexcept { return mesh_; }
  int degree() const noexcept { return degree_; }
  int dofs_per_triangle() const noexcept { return degree_ == 1 ? 3 : 6; }

  std::size_t num_dofs() const noexcept { return dof_points_.size(); }
  std::size_t num_free() const noexcept { return free_dofs_.size(); }
  const std::vector<Point>& dof_points() const noexcept { return dof_points_; }
  std::span<const int> element_dofs(int t) const {
    return {element_dofs_[static_cast<std::size_t>(t)].data(), static_cast<std::size_t>(dofs_per_triangle())};
  }
  /// Free index of a global dof, or -1 for boundary dofs.
  int free_index(int dof) const { return free_index_[static_cast<std::size_t>(dof)]; }
  const std::vector<int>& free_dofs() const noexcept { return free_dofs_; }
  bool is_boundary_dof(int dof) const { return free_index(dof) < 0; }

  /// Triangles whose closure contains the dof (ascending).
  const std::vector<int>& dof_patch(int dof) const { return patches_[static_cast<std::size_t>(dof)]; }

  /// Expand free coefficients to all dofs (boundary dofs 0).
  Eigen::VectorXd expand(const Eigen::VectorXd& free_coeffs) const;
  /// Restrict a full dof vector to the free dofs.
  Eigen::VectorXd restrict_free(const Eigen::VectorXd& full) const;

  /// Values of all free basis functions at x0: entries (free index, value).
  std::vector<std::pair<int, double>> basis_at(const Point& x0) const;

  double evaluate(const Eigen::VectorXd& free_coeffs, const Point& x) const;
  Eigen::Vector2d evaluate_gradient(const Eigen::VectorXd& free_coeffs, int t, const std::array<double, 3>& bary) const;
  double evaluate_in(const Eigen::VectorXd& free_coeffs, int t, const std::array<double, 3>& bary) const;

 private:
  std::shared_ptr<const mesh::TriMesh> mesh_;
  int degree_;
  std::vector<Point> dof_points_;
  std::vector<std::array<int, kMaxLocalDofs>> element_dofs_;
  std::vector<int> free_index_;
  std::vector<int> free_dofs_;
  std::vector<std::vector<int>> patches_;
};

}  // namespace heatlab::fem
