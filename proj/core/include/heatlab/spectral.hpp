#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "heatlab/assembly.hpp"
#include "heatlab/fe_function.hpp"

namespace heatlab::spectral {

using fem::SymmetricSparseMatrix;

inline constexpr std::size_t kDefaultDofCap = 5000;

/// Generalized eigenpairs of K v = lambda M v, eigenvalues ascending, eigenvectors
/// M-orthonormal. Coefficient vectors are over free dofs throughout.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors, Eigen::SparseMatrix<double> mass);

  static SpectralDecomposition decompose(const SymmetricSparseMatrix& M, const SymmetricSparseMatrix& K,
                                         std::size_t cap = kDefaultDofCap);

  Eigen::Index size() const noexcept { return lambda_.size(); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }
  const Eigen::SparseMatrix<double>& mass() const noexcept { return mass_; }
  double lambda_min() const { return lambda_(0); }
  double lambda_max() const { return lambda_(lambda_.size() - 1); }

  /// a_i = (v, v_i)_M.
  Eigen::VectorXd modal(const Eigen::VectorXd& c) const;
  Eigen::MatrixXd modal(const Eigen::MatrixXd& c) const;
  /// sum_i a_i v_i.
  Eigen::VectorXd synthesize(const Eigen::VectorXd& a) const { return vectors_ * a; }

  /// sum_i (-lambda_i)^order e^{-lambda_i t} a_i v_i; order 0 is E_h(t), order 1 is d/dt E_h(t).
  Eigen::VectorXd evolve(double t, const Eigen::VectorXd& c, int order = 0) const;
  Eigen::VectorXd apply_semigroup(double t, const Eigen::VectorXd& c) const;
  Eigen::VectorXd apply_time_derivative(double t, const Eigen::VectorXd& c) const;
  /// z (z - Delta_h)^{-1} v, i.e. z / (z + lambda_i) per mode.
  Eigen::VectorXcd apply_resolvent(std::complex<double> z, const Eigen::VectorXd& c) const;
  /// ||(-Delta_h)^{s/2} v||_{L2}, s in [0, 2].
  double fractional_seminorm(double s, const Eigen::VectorXd& c) const;

  /// max_i ||K v_i - lambda_i M v_i||_inf / (lambda_i ||v_i||_inf).
  double max_relative_residual(const SymmetricSparseMatrix& K) const;
  /// max |V^T M V - I|.
  double orthonormality_error() const;

  void save(std::ostream& out, std::uint64_t key) const;
  /// Returns nullptr when the stream is not a cache entry for this key.
  static std::unique_ptr<SpectralDecomposition> load(std::istream& in, std::uint64_t key,
                                                     Eigen::SparseMatrix<double> mass);

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vectors_;
  Eigen::SparseMatrix<double> mass_;
};

/// Stable 64-bit key for the (domain, level, degree) cache entry.
std::uint64_t cache_key(const std::string& domain, int level, int degree);

/// Decomposes, consulting a cache directory when non-empty.
std::shared_ptr<const SpectralDecomposition> decompose_cached(const fem::FeSystem& sys, const std::string& cache_dir,
                                                              const std::string& domain, int level,
                                                              std::size_t cap = kDefaultDofCap);

/// E_h(t) acting on FE functions; the decomposition is shared read-only.
class SemigroupOperator {
 public:
  SemigroupOperator(std::shared_ptr<const fem::FeSystem> sys, std::shared_ptr<const SpectralDecomposition> spec)
      : sys_(std::move(sys)), spec_(std::move(spec)) {}

  const SpectralDecomposition& decomposition() const noexcept { return *spec_; }
  const fem::FeSystem& system() const noexcept { return *sys_; }

  fem::FeFunction apply(double t, const fem::FeFunction& v) const;
  fem::FeFunction time_derivative(double t, const fem::FeFunction& v) const;
  Eigen::VectorXcd resolvent(std::complex<double> z, const fem::FeFunction& v) const;
  double fractional_seminorm(double s, const fem::FeFunction& v) const;

 private:
  std::shared_ptr<const fem::FeSystem> sys_;
  std::shared_ptr<const SpectralDecomposition> spec_;
};

}  // namespace heatlab::spectral
