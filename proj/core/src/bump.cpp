#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "heatlab/error.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::kernel {

double RegularizedBump::normalization() const { return 5.0 / (std::numbers::pi * radius * radius); }

double RegularizedBump::operator()(const Point& x) const {
  const double s = (x - center).squaredNorm() / (radius * radius);
  if (s >= 1.0) return 0.0;
  const double b = 1.0 - s;
  return normalization() * (b * b) * (b * b);
}

RegularizedBump RegularizedBump::inside_element(const mesh::TriMesh& mesh, const Point& x0) {
  const auto loc = mesh.locate(x0);
  const int t = loc.triangle;
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const double area2 = 2.0 * mesh.area(t);
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Point& a = mesh.points()[static_cast<std::size_t>(tri[static_cast<std::size_t>((i + 1) % 3)])];
    const Point& b = mesh.points()[static_cast<std::size_t>(tri[static_cast<std::size_t>((i + 2) % 3)])];
    dist = std::min(dist, loc.barycentric[static_cast<std::size_t>(i)] * area2 / (b - a).norm());
  }
  RegularizedBump bump;
  bump.triangle = t;
  bump.center = x0;
  const double h = mesh.h();
  if (dist < h / 8.0) {
    bump.center = mesh.incenter(t);
    dist = mesh.inradius(t);
  }
  bump.radius = std::min(dist, h / 4.0);
  return bump;
}

namespace {

using Bary = std::array<double, 3>;
using SubTriangle = std::array<Bary, 3>;  // vertices as barycentrics of the element

enum class Cut { inside, outside, crossing };

Cut classify(const std::array<Point, 3>& v, const RegularizedBump& bump) {
  const double r2 = bump.radius * bump.radius;
  bool all_inside = true;
  for (const auto& p : v) all_inside = all_inside && (p - bump.center).squaredNorm() <= r2;
  if (all_inside) return Cut::inside;
  // distance from the centre to the triangle
  const Point& c = bump.center;
  const double d0 = (v[1] - v[0]).x() * (c - v[0]).y() - (v[1] - v[0]).y() * (c - v[0]).x();
  const double d1 = (v[2] - v[1]).x() * (c - v[1]).y() - (v[2] - v[1]).y() * (c - v[1]).x();
  const double d2 = (v[0] - v[2]).x() * (c - v[2]).y() - (v[0] - v[2]).y() * (c - v[2]).x();
  const bool has_neg = d0 < 0 || d1 < 0 || d2 < 0;
  const bool has_pos = d0 > 0 || d1 > 0 || d2 > 0;
  if (!(has_neg && has_pos)) return Cut::crossing;  // centre inside
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Point& a = v[static_cast<std::size_t>(i)];
    const Point& b = v[static_cast<std::size_t>((i + 1) % 3)];
    const double s = std::clamp((c - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    best = std::min(best, (a + s * (b - a) - c).squaredNorm());
  }
  return best < r2 ? Cut::crossing : Cut::outside;
}

class ElementIntegrator {
 public:
  ElementIntegrator(const mesh::TriMesh& mesh, int t, const RegularizedBump& bump, int degree, double tol)
      : bump_(bump), degree_(degree), tol_(tol), rule_(fem::QuadratureRule::conical(6)) {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      verts_[static_cast<std::size_t>(i)] = mesh.points()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
    }
    area_ = mesh.area(t);
  }

  /// Integrals of bump * phi_a for the element's local basis (phi = 1 when degree is 0).
  fem::LocalValues integrate() {
    const SubTriangle whole{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}};
    return recurse(whole, 1.0, 0);
  }

 private:
  Point physical(const Bary& b) const { return b[0] * verts_[0] + b[1] * verts_[1] + b[2] * verts_[2]; }

  fem::LocalValues apply_rule(const SubTriangle& s, double fraction) const {
    fem::LocalValues out{};
    for (std::size_t q = 0; q < rule_.size(); ++q) {
      Bary b{};
      for (int k = 0; k < 3; ++k) {
        b[static_cast<std::size_t>(k)] = rule_.points[q][0] * s[0][static_cast<std::size_t>(k)] +
                                         rule_.points[q][1] * s[1][static_cast<std::size_t>(k)] +
                                         rule_.points[q][2] * s[2][static_cast<std::size_t>(k)];
      }
      const double f = bump_(physical(b)) * rule_.weights[q] * fraction * area_;
      if (f == 0.0) continue;
      if (degree_ == 0) {
        out[0] += f;
      } else {
        const auto phi = fem::basis_values(degree_, b);
        for (std::size_t a = 0; a < out.size(); ++a) out[a] += f * phi[a];
      }
    }
    return out;
  }

  fem::LocalValues recurse(const SubTriangle& s, double fraction, int depth) {
    const std::array<Point, 3> v{physical(s[0]), physical(s[1]), physical(s[2])};
    switch (classify(v, bump_)) {
      case Cut::outside:
        return {};
      case Cut::inside:
        return apply_rule(s, fraction);
      case Cut::crossing:
        break;
    }
    const auto mid = [](const Bary& a, const Bary& b) {
      return Bary{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    };
    const Bary m01 = mid(s[0], s[1]);
    const Bary m12 = mid(s[1], s[2]);
    const Bary m20 = mid(s[2], s[0]);
    const std::array<SubTriangle, 4> kids{SubTriangle{s[0], m01, m20}, SubTriangle{m01, s[1], m12},
                                          SubTriangle{m20, m12, s[2]}, SubTriangle{m01, m12, m20}};
    const double kf = 0.25 * fraction;
    if (depth >= kMaxDepth) {
      fem::LocalValues sum{};
      for (const auto& k : kids) {
        const auto part = apply_rule(k, kf);
        for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += part[a];
      }
      return sum;
    }
    if (depth >= kMinDepth) {
      const auto coarse = apply_rule(s, fraction);
      fem::LocalValues fine{};
      for (const auto& k : kids) {
        const auto part = apply_rule(k, kf);
        for (std::size_t a = 0; a < fine.size(); ++a) fine[a] += part[a];
      }
      double diff = 0.0;
      for (std::size_t a = 0; a < fine.size(); ++a) diff = std::max(diff, std::abs(fine[a] - coarse[a]));
      if (diff <= tol_ * fraction) return fine;
    }
    fem::LocalValues sum{};
    for (const auto& k : kids) {
      const auto part = recurse(k, kf, depth + 1);
      for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += part[a];
    }
    return sum;
  }

  static constexpr int kMinDepth = 2;
  static constexpr int kMaxDepth = 14;

  const RegularizedBump& bump_;
  int degree_;
  double tol_;
  fem::QuadratureRule rule_;
  std::array<Point, 3> verts_;
  double area_ = 0.0;
};

template <typename Fn>
void for_each_touched(const mesh::TriMesh& mesh, const RegularizedBump& bump, Fn fn) {
  require(bump.radius > 0.0, ErrorCode::invalid_argument, "bump radius must be positive");
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const std::array<Point, 3> v{mesh.points()[static_cast<std::size_t>(tri[0])],
                                 mesh.points()[static_cast<std::size_t>(tri[1])],
                                 mesh.points()[static_cast<std::size_t>(tri[2])]};
    if (classify(v, bump) != Cut::outside) fn(static_cast<int>(t));
  }
}

}  // namespace

Eigen::VectorXd bump_loads(const fem::FeSpace& space, const RegularizedBump& bump, double tol) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_free()));
  for_each_touched(space.mesh(), bump, [&](int t) {
    ElementIntegrator integ(space.mesh(), t, bump, space.degree(), tol);
    const auto vals = integ.integrate();
    const auto dofs = space.element_dofs(t);
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      const int f = space.free_index(dofs[a]);
      if (f >= 0) b(f) += vals[a];
    }
  });
  return b;
}

double bump_mass(const mesh::TriMesh& mesh, const RegularizedBump& bump, double tol) {
  double total = 0.0;
  for_each_touched(mesh, bump, [&](int t) {
    ElementIntegrator integ(mesh, t, bump, 0, tol);
    total += integ.integrate()[0];
  });
  return total;
}

}  // namespace heatlab::kernel
