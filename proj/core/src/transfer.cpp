#include "heatlab/transfer.hpp"

#include "heatlab/error.hpp"

namespace heatlab::fem {

namespace {

std::array<double, 3> barycentric_in(const mesh::TriMesh& m, int t, const Point& x) {
  const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
  const Point& a = m.points()[static_cast<std::size_t>(tri[0])];
  const Point& b = m.points()[static_cast<std::size_t>(tri[1])];
  const Point& c = m.points()[static_cast<std::size_t>(tri[2])];
  const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  const double l1 = ((x - a).x() * (c - a).y() - (x - a).y() * (c - a).x()) / det;
  const double l2 = ((b - a).x() * (x - a).y() - (b - a).y() * (x - a).x()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

NestedTransfer::NestedTransfer(std::shared_ptr<const FeSystem> coarse, std::shared_ptr<const FeSystem> fine,
                               std::vector<int> fine_to_coarse)
    : coarse_(std::move(coarse)), fine_(std::move(fine)), fine_to_coarse_(std::move(fine_to_coarse)) {
  const FeSpace& cs = coarse_->space();
  const FeSpace& fs = fine_->space();
  require(cs.degree() == fs.degree(), ErrorCode::invalid_argument, "nested spaces must share the degree");
  require(fine_to_coarse_.size() == fs.mesh().num_triangles(), ErrorCode::invalid_argument,
          "ancestor map does not match the fine mesh");
  const int nloc = fs.dofs_per_triangle();
  local_values_.resize(fs.mesh().num_triangles());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<char> done(fs.num_dofs(), 0);
  for (std::size_t t = 0; t < fs.mesh().num_triangles(); ++t) {
    const int tc = fine_to_coarse_[t];
    require(tc >= 0 && static_cast<std::size_t>(tc) < cs.mesh().num_triangles(), ErrorCode::invalid_argument,
            "ancestor index out of range");
    const auto fdofs = fs.element_dofs(static_cast<int>(t));
    const auto cdofs = cs.element_dofs(tc);
    Eigen::MatrixXd& vals = local_values_[t];
    vals.resize(nloc, nloc);  // rows: coarse local basis, cols: fine local dofs
    for (int a = 0; a < nloc; ++a) {
      const Point& x = fs.dof_points()[static_cast<std::size_t>(fdofs[static_cast<std::size_t>(a)])];
      const auto bary = barycentric_in(cs.mesh(), tc, x);
      for (double l : bary) {
        require(l > -1e-9, ErrorCode::invalid_argument, "meshes are not nested");
      }
      const auto phi = basis_values(cs.degree(), bary);
      for (int b = 0; b < nloc; ++b) vals(b, a) = phi[static_cast<std::size_t>(b)];
      const int fd = fdofs[static_cast<std::size_t>(a)];
      const int ff = fs.free_index(fd);
      if (done[static_cast<std::size_t>(fd)] || ff < 0) continue;
      done[static_cast<std::size_t>(fd)] = 1;
      for (int b = 0; b < nloc; ++b) {
        const int cf = cs.free_index(cdofs[static_cast<std::size_t>(b)]);
        const double v = phi[static_cast<std::size_t>(b)];
        if (cf >= 0 && std::abs(v) > 1e-14) trip.emplace_back(ff, cf, v);
      }
    }
  }
  prolongation_.resize(static_cast<Eigen::Index>(fs.num_free()), static_cast<Eigen::Index>(cs.num_free()));
  prolongation_.setFromTriplets(trip.begin(), trip.end());
  prolongation_.makeCompressed();
}

Eigen::VectorXd NestedTransfer::coarse_mass_rhs(const Eigen::VectorXd& fine_coeffs) const {
  return prolongation_.transpose() * (fine_->mass() * fine_coeffs);
}

Eigen::VectorXd NestedTransfer::coarse_stiffness_rhs(const Eigen::VectorXd& fine_coeffs) const {
  return prolongation_.transpose() * (fine_->stiffness() * fine_coeffs);
}

Eigen::VectorXd NestedTransfer::l2_project(const Eigen::VectorXd& fine_coeffs) const {
  return coarse_->solve_mass(coarse_mass_rhs(fine_coeffs));
}

Eigen::VectorXd NestedTransfer::ritz_project(const Eigen::VectorXd& fine_coeffs) const {
  return coarse_->solve_stiffness(coarse_stiffness_rhs(fine_coeffs));
}

ElementLoads NestedTransfer::coarse_element_loads(const Eigen::VectorXd& fine_coeffs) const {
  const FeSpace& cs = coarse_->space();
  const FeSpace& fs = fine_->space();
  const Eigen::VectorXd full = fs.expand(fine_coeffs);
  const int nloc = fs.dofs_per_triangle();
  ElementLoads loads = ElementLoads::Zero(nloc, static_cast<Eigen::Index>(cs.mesh().num_triangles()));
  Eigen::VectorXd local(nloc);
  for (std::size_t t = 0; t < fs.mesh().num_triangles(); ++t) {
    const auto fdofs = fs.element_dofs(static_cast<int>(t));
    for (int a = 0; a < nloc; ++a) local(a) = full(fdofs[static_cast<std::size_t>(a)]);
    loads.col(fine_to_coarse_[t]) += local_values_[t] * (element_mass(fs, static_cast<int>(t)) * local);
  }
  return loads;
}

std::shared_ptr<const NestedTransfer> make_nested_transfer(std::shared_ptr<const FeSystem> coarse, int generations) {
  auto pair = mesh::refine_nested(coarse->space().mesh_ptr(), generations);
  auto fine = FeSystem::create(pair.fine, coarse->space().degree());
  return std::make_shared<const NestedTransfer>(std::move(coarse), std::move(fine), std::move(pair.fine_to_coarse));
}

std::shared_ptr<const NestedTransfer> make_geometric_transfer(std::shared_ptr<const FeSystem> coarse,
                                                              std::shared_ptr<const FeSystem> fine) {
  require(coarse->space().degree() == fine->space().degree(), ErrorCode::invalid_argument,
          "transfer needs equal polynomial degrees");
  const auto& cm = coarse->space().mesh();
  const auto& fm = fine->space().mesh();
  std::vector<int> ancestor(fm.num_triangles());
  for (std::size_t t = 0; t < ancestor.size(); ++t) {
    const auto loc = cm.try_locate(fm.centroid(static_cast<int>(t)));
    require(loc.triangle >= 0, ErrorCode::invalid_argument, "meshes are not nested");
    ancestor[t] = loc.triangle;
  }
  return std::make_shared<const NestedTransfer>(std::move(coarse), std::move(fine), std::move(ancestor));
}

}  // namespace heatlab::fem
