#include "heatlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "heatlab/error.hpp"

namespace heatlab::estimators {

std::string to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::eigenmodes:
      return "mode";
    case ProbeKind::random:
      return "random";
    case ProbeKind::nodal_spikes:
      return "spike";
    case ProbeKind::corner_bumps:
      return "corner-bump";
    case ProbeKind::checkerboard:
      return "checker";
  }
  return "unknown";
}

std::shared_ptr<const mesh::TriMesh> make_mesh(const std::string& domain, int level) {
  require(level >= 0 && level <= 12, ErrorCode::validation_error, "level must lie in 0..12");
  const int n = 1 << level;
  if (domain == "square") return std::make_shared<const mesh::TriMesh>(mesh::build_structured_square_mesh(n));
  if (domain == "lshape") return std::make_shared<const mesh::TriMesh>(mesh::build_lshape_mesh(n));
  raise(ErrorCode::validation_error, "unknown domain '" + domain + "' (allowed: square, lshape)");
}

Point critical_corner(const mesh::PolygonalDomain& domain) {
  const auto& v = domain.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (domain.interior_angle(i) > std::numbers::pi + 1e-12) return v[i];
  }
  return v.front();
}

namespace {

int nearest_free(const fem::FeSpace& space, const Point& x) {
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < space.num_free(); ++f) {
    const double d = (space.dof_points()[static_cast<std::size_t>(space.free_dofs()[f])] - x).squaredNorm();
    if (d < dist) {
      dist = d;
      best = static_cast<int>(f);
    }
  }
  return best;
}

Eigen::VectorXd nodal(const fem::FeSpace& space, const std::function<double(const Point&)>& v) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(space.num_free()));
  for (std::size_t f = 0; f < space.num_free(); ++f) {
    c(static_cast<Eigen::Index>(f)) = v(space.dof_points()[static_cast<std::size_t>(space.free_dofs()[f])]);
  }
  return c;
}

}  // namespace

ProbeFamily make_probe_family(ProbeKind kind, const fem::FeSystem& sys, const spectral::SpectralDecomposition* spec,
                              int count, std::uint64_t seed) {
  require(count > 0, ErrorCode::invalid_argument, "probe family needs count > 0");
  const auto& space = sys.space();
  const auto n = static_cast<Eigen::Index>(space.num_free());
  require(n > 0, ErrorCode::invalid_argument, "space has no free dofs");
  ProbeFamily fam{kind, count, seed, {}};
  std::mt19937_64 rng(seed);
  const Point corner = critical_corner(space.mesh().domain());
  const double h = space.mesh().h();

  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd c;
    switch (kind) {
      case ProbeKind::eigenmodes:
        require(spec != nullptr, ErrorCode::invalid_argument, "eigenmode probes need a decomposition");
        require(k < spec->size(), ErrorCode::invalid_argument, "more eigenmode probes than modes");
        c = spec->eigenvectors().col(k);
        break;
      case ProbeKind::random: {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        c.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) c(i) = u(rng);
        break;
      }
      case ProbeKind::nodal_spikes: {
        c = Eigen::VectorXd::Zero(n);
        // first spike next to the critical corner, the rest at seeded nodes
        if (k == 0) {
          c(nearest_free(space, corner)) = 1.0;
        } else {
          std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
          c(pick(rng)) = 1.0;
        }
        break;
      }
      case ProbeKind::corner_bumps: {
        const double rho = std::max(0.5 * std::ldexp(1.0, -k), 3.0 * h);
        c = nodal(space, [&](const Point& x) {
          const double s = 1.0 - (x - corner).squaredNorm() / (rho * rho);
          return s > 0.0 ? s * s : 0.0;
        });
        break;
      }
      case ProbeKind::checkerboard: {
        const double cell = std::max(0.5 * std::ldexp(1.0, -k), h);
        c = nodal(space, [&](const Point& x) {
          const auto parity = static_cast<long>(std::floor(x.x() / cell) + std::floor(x.y() / cell));
          return parity % 2 == 0 ? 1.0 : -1.0;
        });
        break;
      }
    }
    require(c.lpNorm<Eigen::Infinity>() > 0.0, ErrorCode::internal_error, "generated a zero probe");
    fam.probes.push_back(Probe{to_string(kind) + "-" + std::to_string(k), std::move(c)});
  }
  return fam;
}

std::vector<Point> kernel_probe_points(const mesh::TriMesh& mesh) {
  const auto coarse = make_mesh(mesh.domain().name(), 2);
  std::vector<Point> pts;
  for (std::size_t t = 0; t < coarse->num_triangles(); ++t) pts.push_back(coarse->incenter(static_cast<int>(t)));
  const Point corner = critical_corner(mesh.domain());
  std::vector<int> order(mesh.num_triangles());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 3, order.end(), [&](int a, int b) {
    const double da = (mesh.incenter(a) - corner).squaredNorm();
    const double db = (mesh.incenter(b) - corner).squaredNorm();
    return da < db || (da == db && a < b);
  });
  for (int i = 0; i < 3; ++i) pts.push_back(mesh.incenter(order[static_cast<std::size_t>(i)]));
  return pts;
}

WeightedPoints maximal_function_grid(const std::string& domain) {
  const auto grid_mesh = make_mesh(domain, 3);
  const fem::FeSpace space(grid_mesh, 1);
  const auto mass = fem::assemble_mass(space, fem::Constraint::none);
  const Eigen::VectorXd lumped = mass.eigen() * Eigen::VectorXd::Ones(mass.dimension());
  WeightedPoints out;
  for (const int dof : space.free_dofs()) {
    out.points.push_back(space.dof_points()[static_cast<std::size_t>(dof)]);
    out.weights.push_back(lumped(dof));
  }
  return out;
}

}  // namespace heatlab::estimators
