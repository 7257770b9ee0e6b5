#pragma once

#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "heatlab/assembly.hpp"
#include "heatlab/projection.hpp"

namespace heatlab::fem {

/// Exact transfer between two nested Lagrange spaces of equal degree.
/// The coarse space is S_h; every operator below is exact because coarse basis
/// functions are themselves fine finite element functions.
class NestedTransfer {
 public:
  NestedTransfer(std::shared_ptr<const FeSystem> coarse, std::shared_ptr<const FeSystem> fine,
                 std::vector<int> fine_to_coarse);

  const FeSystem& coarse() const noexcept { return *coarse_; }
  const FeSystem& fine() const noexcept { return *fine_; }
  std::shared_ptr<const FeSystem> coarse_ptr() const noexcept { return coarse_; }
  std::shared_ptr<const FeSystem> fine_ptr() const noexcept { return fine_; }

  /// Free-to-free interpolation matrix (fine x coarse).
  const Eigen::SparseMatrix<double>& prolongation() const noexcept { return prolongation_; }
  Eigen::VectorXd prolong(const Eigen::VectorXd& coarse_coeffs) const { return prolongation_ * coarse_coeffs; }
  Eigen::MatrixXd prolong(const Eigen::MatrixXd& coarse_coeffs) const { return prolongation_ * coarse_coeffs; }

  /// (v, Phi_i) and (grad v, grad Phi_i) for coarse free basis functions Phi_i.
  Eigen::VectorXd coarse_mass_rhs(const Eigen::VectorXd& fine_coeffs) const;
  Eigen::VectorXd coarse_stiffness_rhs(const Eigen::VectorXd& fine_coeffs) const;

  Eigen::VectorXd l2_project(const Eigen::VectorXd& fine_coeffs) const;
  Eigen::VectorXd ritz_project(const Eigen::VectorXd& fine_coeffs) const;
  /// Coarse element loads int_{T} v phi_a of a fine function, for the Clement operator.
  ElementLoads coarse_element_loads(const Eigen::VectorXd& fine_coeffs) const;

 private:
  std::shared_ptr<const FeSystem> coarse_;
  std::shared_ptr<const FeSystem> fine_;
  std::vector<int> fine_to_coarse_;
  Eigen::SparseMatrix<double> prolongation_;
  /// Per fine triangle: coarse local basis values at the fine local dof points.
  std::vector<Eigen::MatrixXd> local_values_;
};

/// Builds the fine system two meshes apart and the transfer between them.
std::shared_ptr<const NestedTransfer> make_nested_transfer(std::shared_ptr<const FeSystem> coarse, int generations);

/// Transfer between two independently built meshes; ancestors are found by
/// locating fine centroids. Raises invalid-argument when the meshes are not nested.
std::shared_ptr<const NestedTransfer> make_geometric_transfer(std::shared_ptr<const FeSystem> coarse,
                                                              std::shared_ptr<const FeSystem> fine);

}  // namespace heatlab::fem
