#include "heatlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "heatlab/error.hpp"

namespace heatlab::mesh {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * cross(b - a, c - a);
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

PolygonalDomain::PolygonalDomain(std::string name, std::vector<Point> vertices)
    : name_(std::move(name)), vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  require(n >= 3, ErrorCode::invalid_input, "polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    require((vertices_[i] - vertices_[(i + 1) % n]).norm() > 0.0, ErrorCode::invalid_input,
            "consecutive polygon vertices coincide");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      require(!segments_cross(vertices_[i], vertices_[(i + 1) % n], vertices_[j], vertices_[(j + 1) % n]),
              ErrorCode::invalid_input, "polygon is not simple");
    }
  }
  require(area() > 0.0, ErrorCode::invalid_input, "polygon vertices must be counterclockwise");
  convex_ = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % n];
    const Point& c = vertices_[(i + 2) % n];
    if (cross(b - a, c - b) < 0.0) convex_ = false;
  }
}

double PolygonalDomain::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    a += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * a;
}

double PolygonalDomain::distance_to_boundary(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    d = std::min(d, segment_distance(p, vertices_[i], vertices_[(i + 1) % vertices_.size()]));
  }
  return d;
}

double PolygonalDomain::interior_angle(std::size_t i) const {
  const std::size_t n = vertices_.size();
  const Point& prev = vertices_[(i + n - 1) % n];
  const Point& cur = vertices_[i];
  const Point& next = vertices_[(i + 1) % n];
  const Point a = prev - cur;
  const Point b = next - cur;
  // angle swept counterclockwise from b to a, measured inside the polygon
  double ang = std::atan2(cross(b, a), b.dot(a));
  if (ang < 0.0) ang += 2.0 * M_PI;
  return ang;
}

PolygonalDomain PolygonalDomain::unit_square() {
  return PolygonalDomain("square", {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)});
}

PolygonalDomain PolygonalDomain::lshape() {
  return PolygonalDomain("lshape", {Point(-1, -1), Point(0, -1), Point(0, 0), Point(1, 0), Point(1, 1),
                                    Point(-1, 1)});
}

TriMesh::TriMesh(std::shared_ptr<const PolygonalDomain> domain, std::vector<Point> points,
                 std::vector<Triangle> triangles, std::vector<int> boundary_nodes, int level)
    : domain_(std::move(domain)),
      points_(std::move(points)),
      triangles_(std::move(triangles)),
      boundary_nodes_(std::move(boundary_nodes)),
      level_(level) {
  require(domain_ != nullptr, ErrorCode::invalid_input, "mesh needs a domain");
  require(!triangles_.empty(), ErrorCode::invalid_input, "mesh has no triangles");
  std::sort(boundary_nodes_.begin(), boundary_nodes_.end());
  boundary_nodes_.erase(std::unique(boundary_nodes_.begin(), boundary_nodes_.end()), boundary_nodes_.end());
  on_boundary_.assign(points_.size(), 0);
  for (int b : boundary_nodes_) {
    require(b >= 0 && static_cast<std::size_t>(b) < points_.size(), ErrorCode::invalid_input,
            "boundary node index out of range");
    on_boundary_[static_cast<std::size_t>(b)] = 1;
  }
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      require(v >= 0 && static_cast<std::size_t>(v) < points_.size(), ErrorCode::invalid_input,
              "triangle vertex index out of range");
    }
  }
  for (std::size_t t = 0; t < triangles_.size(); ++t) h_ = std::max(h_, diameter(static_cast<int>(t)));
  build_locator();
}

double TriMesh::area(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return signed_area(points_[tri[0]], points_[tri[1]], points_[tri[2]]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += area(static_cast<int>(t));
  return a;
}

double TriMesh::diameter(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  const Point& a = points_[tri[0]];
  const Point& b = points_[tri[1]];
  const Point& c = points_[tri[2]];
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double TriMesh::inradius(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  const Point& a = points_[tri[0]];
  const Point& b = points_[tri[1]];
  const Point& c = points_[tri[2]];
  const double perimeter = (a - b).norm() + (b - c).norm() + (c - a).norm();
  return 2.0 * area(t) / perimeter;
}

Point TriMesh::centroid(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return (points_[tri[0]] + points_[tri[1]] + points_[tri[2]]) / 3.0;
}

Point TriMesh::incenter(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  const Point& a = points_[tri[0]];
  const Point& b = points_[tri[1]];
  const Point& c = points_[tri[2]];
  const double la = (b - c).norm();
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  return (la * a + lb * b + lc * c) / (la + lb + lc);
}

std::vector<std::array<int, 2>> TriMesh::edges() const {
  std::vector<std::array<int, 2>> out;
  out.reserve(3 * triangles_.size());
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k];
      int b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      out.push_back({a, b});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void TriMesh::build_locator() {
  Point lo = points_.front();
  Point hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  cell_ = std::max(h_, span / 512.0);
  box_min_ = lo;
  nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell_)) + 1);
  buckets_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
  const double pad = 1e-9 * cell_;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    Point tlo = points_[tri[0]];
    Point thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(points_[tri[k]]);
      thi = thi.cwiseMax(points_[tri[k]]);
    }
    const int i0 = std::clamp(static_cast<int>(std::floor((tlo.x() - pad - box_min_.x()) / cell_)), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((thi.x() + pad - box_min_.x()) / cell_)), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((tlo.y() - pad - box_min_.y()) / cell_)), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((thi.y() + pad - box_min_.y()) / cell_)), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)]
            .push_back(static_cast<int>(t));
      }
    }
  }
}

PointLocation TriMesh::try_locate(const Point& x0) const {
  PointLocation loc;
  const double fx = (x0.x() - box_min_.x()) / cell_;
  const double fy = (x0.y() - box_min_.y()) / cell_;
  if (!(fx > -1e-9 && fy > -1e-9 && fx < nx_ && fy < ny_)) return loc;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  const auto& bucket = buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)];
  constexpr double tol = 1e-12;
  for (int t : bucket) {
    const auto& tri = triangles_[static_cast<std::size_t>(t)];
    const Point& a = points_[tri[0]];
    const Point& b = points_[tri[1]];
    const Point& c = points_[tri[2]];
    const double det = cross(b - a, c - a);
    const double l1 = cross(x0 - a, c - a) / det;
    const double l2 = cross(b - a, x0 - a) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
      std::array<double, 3> lam{std::max(l0, 0.0), std::max(l1, 0.0), std::max(l2, 0.0)};
      const double s = lam[0] + lam[1] + lam[2];
      for (double& v : lam) v /= s;
      loc.triangle = t;
      loc.barycentric = lam;
      return loc;
    }
  }
  return loc;
}

PointLocation TriMesh::locate(const Point& x0) const {
  PointLocation loc = try_locate(x0);
  if (loc.triangle < 0) {
    std::ostringstream os;
    os << "point (" << x0.x() << ", " << x0.y() << ") is outside the domain";
    raise(ErrorCode::point_outside_domain, os.str());
  }
  return loc;
}

TriMesh build_structured_square_mesh(int n) {
  require(n >= 1, ErrorCode::invalid_argument, "square mesh needs n >= 1");
  auto domain = std::make_shared<const PolygonalDomain>(PolygonalDomain::unit_square());
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  std::vector<int> boundary;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      pts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      if (i == 0 || j == 0 || i == n || j == n) boundary.push_back(j * (n + 1) + i);
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int p00 = j * (n + 1) + i;
      const int p10 = p00 + 1;
      const int p01 = p00 + (n + 1);
      const int p11 = p01 + 1;
      tris.push_back({p00, p10, p11});
      tris.push_back({p00, p11, p01});
    }
  }
  return TriMesh(std::move(domain), std::move(pts), std::move(tris), std::move(boundary), 0);
}

TriMesh build_lshape_mesh(int n) {
  require(n >= 1, ErrorCode::invalid_argument, "L-shape mesh needs n >= 1");
  auto domain = std::make_shared<const PolygonalDomain>(PolygonalDomain::lshape());
  const int m = 2 * n;
  // grid indices I, J in [0, 2n]; x = -1 + I/n, y = -1 + J/n
  auto inside = [&](int I, int J) { return !(I > n && J < n); };
  std::vector<int> index(static_cast<std::size_t>((m + 1) * (m + 1)), -1);
  std::vector<Point> pts;
  std::vector<int> boundary;
  for (int J = 0; J <= m; ++J) {
    for (int I = 0; I <= m; ++I) {
      if (!inside(I, J)) continue;
      const int id = static_cast<int>(pts.size());
      index[static_cast<std::size_t>(J * (m + 1) + I)] = id;
      pts.emplace_back(-1.0 + static_cast<double>(I) / n, -1.0 + static_cast<double>(J) / n);
      const bool on_boundary = I == 0 || J == m || (J == 0 && I <= n) || (I == m && J >= n) ||
                               (I == n && J <= n) || (J == n && I >= n);
      if (on_boundary) boundary.push_back(id);
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(6 * n * n));
  for (int J = 0; J < m; ++J) {
    for (int I = 0; I < m; ++I) {
      if (I >= n && J < n) continue;
      const int p00 = index[static_cast<std::size_t>(J * (m + 1) + I)];
      const int p10 = index[static_cast<std::size_t>(J * (m + 1) + I + 1)];
      const int p01 = index[static_cast<std::size_t>((J + 1) * (m + 1) + I)];
      const int p11 = index[static_cast<std::size_t>((J + 1) * (m + 1) + I + 1)];
      tris.push_back({p00, p10, p11});
      tris.push_back({p00, p11, p01});
    }
  }
  return TriMesh(std::move(domain), std::move(pts), std::move(tris), std::move(boundary), 0);
}

namespace {

struct RefineResult {
  TriMesh mesh;
  std::vector<int> parent;
};

RefineResult refine_once(const TriMesh& mesh) {
  std::vector<Point> pts = mesh.points();
  std::map<std::array<int, 2>, int> edge_mid;
  std::map<std::array<int, 2>, int> edge_count;
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      std::array<int, 2> e{tri[k], tri[(k + 1) % 3]};
      if (e[0] > e[1]) std::swap(e[0], e[1]);
      ++edge_count[e];
    }
  }
  for (const auto& [e, count] : edge_count) {
    edge_mid[e] = static_cast<int>(pts.size());
    pts.push_back(0.5 * (mesh.points()[e[0]] + mesh.points()[e[1]]));
  }
  std::vector<int> boundary = mesh.boundary_nodes();
  for (const auto& [e, count] : edge_count) {
    if (count == 1) boundary.push_back(edge_mid[e]);
  }
  auto mid = [&](int a, int b) {
    std::array<int, 2> e{a, b};
    if (e[0] > e[1]) std::swap(e[0], e[1]);
    return edge_mid.at(e);
  };
  std::vector<Triangle> tris;
  std::vector<int> parent;
  tris.reserve(4 * mesh.num_triangles());
  parent.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const int a = tri[0];
    const int b = tri[1];
    const int c = tri[2];
    const int mab = mid(a, b);
    const int mbc = mid(b, c);
    const int mca = mid(c, a);
    tris.push_back({a, mab, mca});
    tris.push_back({mab, b, mbc});
    tris.push_back({mca, mbc, c});
    tris.push_back({mab, mbc, mca});
    for (int k = 0; k < 4; ++k) parent.push_back(static_cast<int>(t));
  }
  return {TriMesh(mesh.domain_ptr(), std::move(pts), std::move(tris), std::move(boundary), mesh.level() + 1),
          std::move(parent)};
}

}  // namespace

TriMesh uniform_refine(const TriMesh& mesh) { return refine_once(mesh).mesh; }

NestedPair refine_nested(std::shared_ptr<const TriMesh> coarse, int generations) {
  require(coarse != nullptr, ErrorCode::invalid_argument, "refine_nested needs a mesh");
  require(generations >= 0, ErrorCode::invalid_argument, "generations must be >= 0");
  NestedPair pair;
  pair.coarse = coarse;
  pair.generations = generations;
  std::vector<int> ancestor(coarse->num_triangles());
  std::iota(ancestor.begin(), ancestor.end(), 0);
  std::shared_ptr<const TriMesh> current = coarse;
  for (int g = 0; g < generations; ++g) {
    RefineResult r = refine_once(*current);
    std::vector<int> next(r.parent.size());
    for (std::size_t t = 0; t < next.size(); ++t) next[t] = ancestor[static_cast<std::size_t>(r.parent[t])];
    ancestor = std::move(next);
    current = std::make_shared<const TriMesh>(std::move(r.mesh));
  }
  pair.fine = current;
  pair.fine_to_coarse = std::move(ancestor);
  return pair;
}

PointLocation locate_point(const TriMesh& mesh, const Point& x0) { return mesh.locate(x0); }

MeshQuality mesh_quality(const TriMesh& mesh) {
  MeshQuality q;
  q.h_min = std::numeric_limits<double>::infinity();
  q.rho_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double d = mesh.diameter(static_cast<int>(t));
    q.h_max = std::max(q.h_max, d);
    q.h_min = std::min(q.h_min, d);
    q.rho_min = std::min(q.rho_min, mesh.inradius(static_cast<int>(t)));
  }
  q.K_quasi = std::max(q.h_max / q.h_min, q.h_max / q.rho_min);
  return q;
}

void validate(const TriMesh& mesh) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    require(mesh.area(static_cast<int>(t)) > 0.0, ErrorCode::invalid_input,
            "triangle " + std::to_string(t) + " has non-positive signed area");
  }
  // conformity: each directed edge at most once, each undirected edge in at most two triangles
  std::map<std::array<int, 2>, int> directed;
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const std::array<int, 2> e{tri[k], tri[(k + 1) % 3]};
      require(++directed[e] == 1, ErrorCode::invalid_input, "edge orientation repeated: mesh not conforming");
    }
  }
  // boundary edges (no twin) must lie on the polygon boundary; no hanging vertices inside edges
  const double tol = 1e-12 * mesh.h();
  for (const auto& [e, count] : directed) {
    if (directed.count({e[1], e[0]}) == 0) {
      const Point mid = 0.5 * (mesh.points()[e[0]] + mesh.points()[e[1]]);
      require(mesh.domain().distance_to_boundary(mid) <= tol, ErrorCode::invalid_input,
              "interior edge without neighbour: mesh not conforming");
    }
  }
  for (std::size_t i = 0; i < mesh.num_points(); ++i) {
    const bool geometric = mesh.domain().distance_to_boundary(mesh.points()[i]) <= tol;
    require(geometric == mesh.is_boundary_node(static_cast<int>(i)), ErrorCode::invalid_input,
            "boundary node set does not match the polygon boundary at node " + std::to_string(i));
  }
  const double a = mesh.domain().area();
  require(std::abs(mesh.total_area() - a) <= 1e-10 * a, ErrorCode::invalid_input,
          "triangle areas do not cover the polygon");
}

}  // namespace heatlab::mesh
