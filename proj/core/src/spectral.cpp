#include "heatlab/spectral.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "heatlab/error.hpp"

namespace heatlab::spectral {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'E', 'C', 'D', 'E', 'C', '1'};

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_le(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

SpectralDecomposition::SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                                             Eigen::SparseMatrix<double> mass)
    : lambda_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)), mass_(std::move(mass)) {
  require(vectors_.rows() == lambda_.size() && vectors_.cols() == lambda_.size() && mass_.rows() == lambda_.size(),
          ErrorCode::invalid_input, "eigenpair dimensions disagree");
}

SpectralDecomposition SpectralDecomposition::decompose(const SymmetricSparseMatrix& M, const SymmetricSparseMatrix& K,
                                                       std::size_t cap) {
  const Eigen::Index n = M.dimension();
  require(K.dimension() == n, ErrorCode::invalid_input, "mass and stiffness dimensions differ");
  require(n > 0, ErrorCode::invalid_input, "empty system");
  if (static_cast<std::size_t>(n) > cap) {
    raise(ErrorCode::problem_too_large,
          "system has " + std::to_string(n) + " dofs, above the eigensolver cap of " + std::to_string(cap));
  }
  // LAPACK dsygvd would be ~3x faster, but OpenBLAS's runtime kernel selection
  // returns wrong factorizations on some AVX-512 hosts.
  if (Eigen::LLT<Eigen::MatrixXd>(M.to_dense()).info() != Eigen::Success) {
    raise(ErrorCode::invalid_input, "mass matrix is not positive definite");
  }
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K.to_dense(), M.to_dense(),
                                                                      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  require(es.info() == Eigen::Success, ErrorCode::internal_error, "generalized eigensolver did not converge");
  Eigen::VectorXd w = es.eigenvalues();
  Eigen::MatrixXd a = es.eigenvectors();
  require(w(0) > 0.0, ErrorCode::invalid_input, "stiffness matrix is not positive definite");
  return SpectralDecomposition(std::move(w), std::move(a), M.eigen());
}

Eigen::VectorXd SpectralDecomposition::modal(const Eigen::VectorXd& c) const {
  require(c.size() == size(), ErrorCode::invalid_argument, "coefficient length mismatch");
  return vectors_.transpose() * (mass_ * c);
}

Eigen::MatrixXd SpectralDecomposition::modal(const Eigen::MatrixXd& c) const {
  require(c.rows() == size(), ErrorCode::invalid_argument, "coefficient length mismatch");
  const Eigen::MatrixXd mc = mass_ * c;
  return vectors_.transpose() * mc;
}

Eigen::VectorXd SpectralDecomposition::evolve(double t, const Eigen::VectorXd& c, int order) const {
  require(t >= 0.0, ErrorCode::invalid_argument, "time must be non-negative");
  require(order >= 0, ErrorCode::invalid_argument, "derivative order must be non-negative");
  Eigen::VectorXd a = modal(c);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) *= std::pow(-lambda_(i), order) * std::exp(-lambda_(i) * t);
  }
  return vectors_ * a;
}

Eigen::VectorXd SpectralDecomposition::apply_semigroup(double t, const Eigen::VectorXd& c) const {
  require(t >= 0.0, ErrorCode::invalid_argument, "semigroup time must be >= 0");
  if (t == 0.0) return c;
  return evolve(t, c, 0);
}

Eigen::VectorXd SpectralDecomposition::apply_time_derivative(double t, const Eigen::VectorXd& c) const {
  require(t > 0.0, ErrorCode::invalid_argument, "time derivative needs t > 0");
  return evolve(t, c, 1);
}

Eigen::VectorXcd SpectralDecomposition::apply_resolvent(std::complex<double> z, const Eigen::VectorXd& c) const {
  require(z != 0.0, ErrorCode::invalid_argument, "resolvent needs z != 0");
  const Eigen::VectorXd a = modal(c);
  Eigen::VectorXcd b(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const std::complex<double> den = z + lambda_(i);
    require(den != 0.0, ErrorCode::invalid_argument, "z is in the spectrum of Delta_h");
    b(i) = z / den * a(i);
  }
  return vectors_.cast<std::complex<double>>() * b;
}

double SpectralDecomposition::fractional_seminorm(double s, const Eigen::VectorXd& c) const {
  require(s >= 0.0 && s <= 2.0, ErrorCode::invalid_argument, "fractional exponent must lie in [0,2]");
  const Eigen::VectorXd a = modal(c);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) sum += std::pow(lambda_(i), s) * a(i) * a(i);
  return std::sqrt(sum);
}

double SpectralDecomposition::max_relative_residual(const SymmetricSparseMatrix& K) const {
  const Eigen::MatrixXd kv = K.eigen() * vectors_;
  const Eigen::MatrixXd mv = mass_ * vectors_;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double r = (kv.col(i) - lambda_(i) * mv.col(i)).cwiseAbs().maxCoeff();
    worst = std::max(worst, r / (lambda_(i) * vectors_.col(i).cwiseAbs().maxCoeff()));
  }
  return worst;
}

double SpectralDecomposition::orthonormality_error() const {
  const Eigen::MatrixXd mv = mass_ * vectors_;
  const Eigen::MatrixXd g = vectors_.transpose() * mv;
  return (g - Eigen::MatrixXd::Identity(size(), size())).cwiseAbs().maxCoeff();
}

void SpectralDecomposition::save(std::ostream& out, std::uint64_t key) const {
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(size()));
  write_le<std::uint64_t>(out, key);
  for (Eigen::Index i = 0; i < size(); ++i) write_le<double>(out, lambda_(i));
  out.write(reinterpret_cast<const char*>(vectors_.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(vectors_.size())));
  require(static_cast<bool>(out), ErrorCode::internal_error, "failed to write spectral cache");
}

std::unique_ptr<SpectralDecomposition> SpectralDecomposition::load(std::istream& in, std::uint64_t key,
                                                                   Eigen::SparseMatrix<double> mass) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return nullptr;
  std::uint64_t n = 0;
  std::uint64_t stored = 0;
  if (!read_le(in, n) || !read_le(in, stored) || stored != key) return nullptr;
  if (static_cast<Eigen::Index>(n) != mass.rows()) return nullptr;
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::VectorXd lambda(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!read_le(in, lambda(i))) return nullptr;
  }
  Eigen::MatrixXd v(m, m);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n * n))) {
    return nullptr;
  }
  return std::make_unique<SpectralDecomposition>(std::move(lambda), std::move(v), std::move(mass));
}

std::uint64_t cache_key(const std::string& domain, int level, int degree) {
  // FNV-1a; stable across platforms, unlike std::hash
  const std::string s = domain + "|" + std::to_string(level) + "|" + std::to_string(degree);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::shared_ptr<const SpectralDecomposition> decompose_cached(const fem::FeSystem& sys, const std::string& cache_dir,
                                                              const std::string& domain, int level,
                                                              std::size_t cap) {
  if (static_cast<std::size_t>(sys.size()) > cap) {
    raise(ErrorCode::problem_too_large, "system has " + std::to_string(sys.size()) +
                                            " dofs, above the eigensolver cap of " + std::to_string(cap));
  }
  const std::uint64_t key = cache_key(domain, level, sys.space().degree());
  std::filesystem::path file;
  if (!cache_dir.empty()) {
    std::ostringstream name;
    name << "specdec_" << std::hex << key << ".bin";
    file = std::filesystem::path(cache_dir) / name.str();
    std::ifstream in(file, std::ios::binary);
    if (in) {
      if (auto hit = SpectralDecomposition::load(in, key, sys.mass().eigen())) return hit;
    }
  }
  auto dec = std::make_shared<const SpectralDecomposition>(
      SpectralDecomposition::decompose(sys.mass(), sys.stiffness(), cap));
  if (!file.empty()) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (out) dec->save(out, key);
  }
  return dec;
}

fem::FeFunction SemigroupOperator::apply(double t, const fem::FeFunction& v) const {
  return fem::FeFunction(sys_->space_ptr(), spec_->apply_semigroup(t, v.coefficients()));
}

fem::FeFunction SemigroupOperator::time_derivative(double t, const fem::FeFunction& v) const {
  return fem::FeFunction(sys_->space_ptr(), spec_->apply_time_derivative(t, v.coefficients()));
}

Eigen::VectorXcd SemigroupOperator::resolvent(std::complex<double> z, const fem::FeFunction& v) const {
  return spec_->apply_resolvent(z, v.coefficients());
}

double SemigroupOperator::fractional_seminorm(double s, const fem::FeFunction& v) const {
  return spec_->fractional_seminorm(s, v.coefficients());
}

}  // namespace heatlab::spectral
