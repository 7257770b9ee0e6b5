#pragma once

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "heatlab/fe_space.hpp"

namespace heatlab::fem {

/// Symmetric matrix kept in full (both triangles) compressed storage.
class SymmetricSparseMatrix {
 public:
  SymmetricSparseMatrix() = default;
  explicit SymmetricSparseMatrix(Eigen::SparseMatrix<double> m);

  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  const Eigen::SparseMatrix<double>& eigen() const noexcept { return matrix_; }
  double coeff(Eigen::Index i, Eigen::Index j) const { return matrix_.coeff(i, j); }
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(matrix_); }
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return matrix_ * x; }
  double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(matrix_ * x); }
  bool is_symmetric(double tol = 0.0) const;

 private:
  Eigen::SparseMatrix<double> matrix_;
};

enum class Constraint { dirichlet, none };

/// Reference element matrices for one triangle (area and gradients applied).
Eigen::MatrixXd element_mass(const FeSpace& space, int t);
Eigen::MatrixXd element_stiffness(const FeSpace& space, int t);

SymmetricSparseMatrix assemble_mass(const FeSpace& space, Constraint c = Constraint::dirichlet);
SymmetricSparseMatrix assemble_stiffness(const FeSpace& space, Constraint c = Constraint::dirichlet);

/// A space with its assembled Dirichlet mass/stiffness matrices and their
/// sparse Cholesky factors. Shared read-only by every downstream module.
class FeSystem {
 public:
  explicit FeSystem(std::shared_ptr<const FeSpace> space);
  FeSystem(const FeSystem&) = delete;
  FeSystem& operator=(const FeSystem&) = delete;

  static std::shared_ptr<const FeSystem> create(std::shared_ptr<const mesh::TriMesh> mesh, int degree);

  const FeSpace& space() const noexcept { return *space_; }
  std::shared_ptr<const FeSpace> space_ptr() const noexcept { return space_; }
  const SymmetricSparseMatrix& mass() const noexcept { return mass_; }
  const SymmetricSparseMatrix& stiffness() const noexcept { return stiffness_; }
  std::size_t size() const noexcept { return space_->num_free(); }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& b) const;
  /// Coefficients of Delta_h v, i.e. -M^{-1} K v.
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& v) const;

 private:
  std::shared_ptr<const FeSpace> space_;
  SymmetricSparseMatrix mass_;
  SymmetricSparseMatrix stiffness_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass_solver_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> stiffness_solver_;
};

}  // namespace heatlab::fem
