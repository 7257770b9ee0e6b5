#include "heatlab/fe_space.hpp"

#include <algorithm>
#include <map>

#include "heatlab/error.hpp"

namespace heatlab::fem {

ElementGeometry element_geometry(const mesh::TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const Point& a = mesh.points()[static_cast<std::size_t>(tri[0])];
  const Point& b = mesh.points()[static_cast<std::size_t>(tri[1])];
  const Point& c = mesh.points()[static_cast<std::size_t>(tri[2])];
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  ElementGeometry g;
  g.area = 0.5 * det;
  // grad(lambda_i) = rot90(opposite edge) / (2 area)
  g.bary_grad[0] = Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / det;
  g.bary_grad[1] = Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / det;
  g.bary_grad[2] = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / det;
  return g;
}

LocalValues basis_values(int degree, const std::array<double, 3>& l) {
  LocalValues v{};
  if (degree == 1) {
    v[0] = l[0];
    v[1] = l[1];
    v[2] = l[2];
  } else {
    v[0] = l[0] * (2.0 * l[0] - 1.0);
    v[1] = l[1] * (2.0 * l[1] - 1.0);
    v[2] = l[2] * (2.0 * l[2] - 1.0);
    v[3] = 4.0 * l[1] * l[2];
    v[4] = 4.0 * l[2] * l[0];
    v[5] = 4.0 * l[0] * l[1];
  }
  return v;
}

LocalGradients basis_gradients(int degree, const std::array<double, 3>& l, const ElementGeometry& geo) {
  LocalGradients g;
  const auto& d = geo.bary_grad;
  if (degree == 1) {
    g[0] = d[0];
    g[1] = d[1];
    g[2] = d[2];
  } else {
    g[0] = (4.0 * l[0] - 1.0) * d[0];
    g[1] = (4.0 * l[1] - 1.0) * d[1];
    g[2] = (4.0 * l[2] - 1.0) * d[2];
    g[3] = 4.0 * (l[1] * d[2] + l[2] * d[1]);
    g[4] = 4.0 * (l[2] * d[0] + l[0] * d[2]);
    g[5] = 4.0 * (l[0] * d[1] + l[1] * d[0]);
  }
  return g;
}

FeSpace::FeSpace(std::shared_ptr<const mesh::TriMesh> mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  require(mesh_ != nullptr, ErrorCode::invalid_argument, "FeSpace needs a mesh");
  require(degree_ == 1 || degree_ == 2, ErrorCode::invalid_argument, "element degree must be 1 or 2");
  const auto& m = *mesh_;
  dof_points_ = m.points();
  std::vector<char> boundary(m.num_points(), 0);
  for (int b : m.boundary_nodes()) boundary[static_cast<std::size_t>(b)] = 1;
  element_dofs_.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    element_dofs_[t].fill(-1);
    for (int k = 0; k < 3; ++k) element_dofs_[t][static_cast<std::size_t>(k)] = m.triangles()[t][static_cast<std::size_t>(k)];
  }
  if (degree_ == 2) {
    std::map<std::array<int, 2>, std::pair<int, int>> edge_info;  // edge -> (dof, count)
    for (const auto& e : m.edges()) {
      edge_info[e] = {static_cast<int>(dof_points_.size()), 0};
      dof_points_.push_back(0.5 * (m.points()[static_cast<std::size_t>(e[0])] + m.points()[static_cast<std::size_t>(e[1])]));
    }
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangles()[t];
      const std::array<std::array<int, 2>, 3> local_edges{{{tri[1], tri[2]}, {tri[2], tri[0]}, {tri[0], tri[1]}}};
      for (int k = 0; k < 3; ++k) {
        auto e = local_edges[static_cast<std::size_t>(k)];
        if (e[0] > e[1]) std::swap(e[0], e[1]);
        auto& info = edge_info.at(e);
        ++info.second;
        element_dofs_[t][static_cast<std::size_t>(3 + k)] = info.first;
      }
    }
    boundary.resize(dof_points_.size(), 0);
    for (const auto& [e, info] : edge_info) {
      if (info.second == 1) boundary[static_cast<std::size_t>(info.first)] = 1;
    }
  }
  free_index_.assign(dof_points_.size(), -1);
  for (std::size_t i = 0; i < dof_points_.size(); ++i) {
    if (!boundary[i]) {
      free_index_[i] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(static_cast<int>(i));
    }
  }
  patches_.assign(dof_points_.size(), {});
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < dofs_per_triangle(); ++k) {
      patches_[static_cast<std::size_t>(element_dofs_[t][static_cast<std::size_t>(k)])].push_back(static_cast<int>(t));
    }
  }
}

Eigen::VectorXd FeSpace::expand(const Eigen::VectorXd& free_coeffs) const {
  require(static_cast<std::size_t>(free_coeffs.size()) == num_free(), ErrorCode::invalid_argument,
          "coefficient vector length does not match the free dofs");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_dofs()));
  for (std::size_t k = 0; k < free_dofs_.size(); ++k) full(free_dofs_[k]) = free_coeffs(static_cast<Eigen::Index>(k));
  return full;
}

Eigen::VectorXd FeSpace::restrict_free(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(num_free()));
  for (std::size_t k = 0; k < free_dofs_.size(); ++k) out(static_cast<Eigen::Index>(k)) = full(free_dofs_[k]);
  return out;
}

std::vector<std::pair<int, double>> FeSpace::basis_at(const Point& x0) const {
  const auto loc = mesh_->locate(x0);
  const auto phi = basis_values(degree_, loc.barycentric);
  std::vector<std::pair<int, double>> out;
  const auto dofs = element_dofs(loc.triangle);
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const int f = free_index(dofs[a]);
    if (f >= 0 && phi[a] != 0.0) out.emplace_back(f, phi[a]);
  }
  return out;
}

double FeSpace::evaluate_in(const Eigen::VectorXd& c, int t, const std::array<double, 3>& bary) const {
  const auto phi = basis_values(degree_, bary);
  const auto dofs = element_dofs(t);
  double v = 0.0;
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const int f = free_index(dofs[a]);
    if (f >= 0) v += phi[a] * c(f);
  }
  return v;
}

double FeSpace::evaluate(const Eigen::VectorXd& c, const Point& x) const {
  const auto loc = mesh_->locate(x);
  return evaluate_in(c, loc.triangle, loc.barycentric);
}

Eigen::Vector2d FeSpace::evaluate_gradient(const Eigen::VectorXd& c, int t, const std::array<double, 3>& bary) const {
  const auto geo = element_geometry(*mesh_, t);
  const auto grads = basis_gradients(degree_, bary, geo);
  const auto dofs = element_dofs(t);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const int f = free_index(dofs[a]);
    if (f >= 0) g += c(f) * grads[a];
  }
  return g;
}

}  // namespace heatlab::fem
