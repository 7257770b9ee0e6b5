#include "heatlab/assembly.hpp"

#include <vector>

#include "heatlab/error.hpp"
#include "heatlab/parallel.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::fem {

SymmetricSparseMatrix::SymmetricSparseMatrix(Eigen::SparseMatrix<double> m) : matrix_(std::move(m)) {
  require(matrix_.rows() == matrix_.cols(), ErrorCode::invalid_input, "matrix must be square");
  matrix_.makeCompressed();
}

bool SymmetricSparseMatrix::is_symmetric(double tol) const {
  const Eigen::SparseMatrix<double> t = matrix_.transpose();
  const Eigen::SparseMatrix<double> d = matrix_ - t;
  for (Eigen::Index k = 0; k < d.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

Eigen::MatrixXd element_mass(const FeSpace& space, int t) {
  const int n = space.dofs_per_triangle();
  const auto& rule = QuadratureRule::for_degree(space.degree());
  const double area = space.mesh().area(t);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto phi = basis_values(space.degree(), rule.points[q]);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) m(a, b) += rule.weights[q] * phi[static_cast<std::size_t>(a)] * phi[static_cast<std::size_t>(b)];
    }
  }
  return area * m;
}

Eigen::MatrixXd element_stiffness(const FeSpace& space, int t) {
  const int n = space.dofs_per_triangle();
  const auto& rule = QuadratureRule::for_degree(space.degree());
  const auto geo = element_geometry(space.mesh(), t);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto g = basis_gradients(space.degree(), rule.points[q], geo);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) k(a, b) += rule.weights[q] * g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]);
    }
  }
  return geo.area * k;
}

namespace {

template <typename ElementFn>
SymmetricSparseMatrix assemble(const FeSpace& space, Constraint c, ElementFn element) {
  constexpr std::size_t kChunk = 2048;
  const std::size_t nt = space.mesh().num_triangles();
  const std::size_t chunks = (nt + kChunk - 1) / kChunk;
  std::vector<std::vector<Eigen::Triplet<double>>> buffers(chunks);
  const bool dirichlet = c == Constraint::dirichlet;
  parallel_for(chunks, [&](std::size_t chunk) {
    auto& buf = buffers[chunk];
    const std::size_t end = std::min(nt, (chunk + 1) * kChunk);
    for (std::size_t t = chunk * kChunk; t < end; ++t) {
      const Eigen::MatrixXd local = element(space, static_cast<int>(t));
      const auto dofs = space.element_dofs(static_cast<int>(t));
      for (std::size_t a = 0; a < dofs.size(); ++a) {
        const int ra = dirichlet ? space.free_index(dofs[a]) : dofs[a];
        if (ra < 0) continue;
        for (std::size_t b = 0; b < dofs.size(); ++b) {
          const int cb = dirichlet ? space.free_index(dofs[b]) : dofs[b];
          if (cb < 0) continue;
          buf.emplace_back(ra, cb, local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        }
      }
    }
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& b : buffers) all.insert(all.end(), b.begin(), b.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.row() != y.row() ? x.row() < y.row() : x.col() < y.col();
  });
  const auto n = static_cast<Eigen::Index>(dirichlet ? space.num_free() : space.num_dofs());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(all.begin(), all.end());
  // symmetrize exactly; element matrices are symmetric up to rounding in the quadrature sums
  Eigen::SparseMatrix<double> mt = m.transpose();
  m = 0.5 * (m + mt);
  return SymmetricSparseMatrix(std::move(m));
}

}  // namespace

SymmetricSparseMatrix assemble_mass(const FeSpace& space, Constraint c) { return assemble(space, c, element_mass); }

SymmetricSparseMatrix assemble_stiffness(const FeSpace& space, Constraint c) {
  return assemble(space, c, element_stiffness);
}

FeSystem::FeSystem(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), mass_(assemble_mass(*space_)), stiffness_(assemble_stiffness(*space_)) {
  require(space_->num_free() > 0, ErrorCode::invalid_input, "space has no interior dofs");
  mass_solver_.compute(mass_.eigen());
  require(mass_solver_.info() == Eigen::Success, ErrorCode::internal_error, "mass matrix factorization failed");
  stiffness_solver_.compute(stiffness_.eigen());
  require(stiffness_solver_.info() == Eigen::Success, ErrorCode::internal_error,
          "stiffness matrix factorization failed");
}

std::shared_ptr<const FeSystem> FeSystem::create(std::shared_ptr<const mesh::TriMesh> mesh, int degree) {
  return std::make_shared<const FeSystem>(std::make_shared<const FeSpace>(std::move(mesh), degree));
}

Eigen::VectorXd FeSystem::solve_mass(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = mass_solver_.solve(b);
  require(mass_solver_.info() == Eigen::Success, ErrorCode::internal_error, "mass solve failed");
  return x;
}

Eigen::VectorXd FeSystem::solve_stiffness(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = stiffness_solver_.solve(b);
  require(stiffness_solver_.info() == Eigen::Success, ErrorCode::internal_error, "stiffness solve failed");
  return x;
}

Eigen::VectorXd FeSystem::apply_laplacian(const Eigen::VectorXd& v) const { return -solve_mass(stiffness_ * v); }

}  // namespace heatlab::fem
