#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace heatlab::mesh {

using Point = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

/// Simple polygon with counterclockwise vertices.
class PolygonalDomain {
 public:
  PolygonalDomain(std::string name, std::vector<Point> vertices);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  bool is_convex() const noexcept { return convex_; }
  double area() const;
  double distance_to_boundary(const Point& p) const;
  /// Interior angle at vertex i, in radians.
  double interior_angle(std::size_t i) const;

  static PolygonalDomain unit_square();
  static PolygonalDomain lshape();

 private:
  std::string name_;
  std::vector<Point> vertices_;
  bool convex_ = true;
};

struct PointLocation {
  int triangle = -1;
  std::array<double, 3> barycentric{};
};

/// Conforming triangulation of a polygon. Immutable once built.
class TriMesh {
 public:
  TriMesh(std::shared_ptr<const PolygonalDomain> domain, std::vector<Point> points,
          std::vector<Triangle> triangles, std::vector<int> boundary_nodes, int level = 0);

  const PolygonalDomain& domain() const noexcept { return *domain_; }
  std::shared_ptr<const PolygonalDomain> domain_ptr() const noexcept { return domain_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::vector<int>& boundary_nodes() const noexcept { return boundary_nodes_; }
  bool is_boundary_node(int i) const { return on_boundary_[static_cast<std::size_t>(i)] != 0; }
  std::size_t num_points() const noexcept { return points_.size(); }
  std::size_t num_triangles() const noexcept { return triangles_.size(); }
  double h() const noexcept { return h_; }
  int level() const noexcept { return level_; }

  double area(int t) const;
  double total_area() const;
  double diameter(int t) const;
  double inradius(int t) const;
  Point centroid(int t) const;
  Point incenter(int t) const;

  /// Unique undirected edges (i < j), sorted.
  std::vector<std::array<int, 2>> edges() const;

  /// Containing triangle with lowest index; throws point-outside-domain.
  PointLocation locate(const Point& x0) const;
  /// Same as locate but returns triangle = -1 instead of throwing.
  PointLocation try_locate(const Point& x0) const;

 private:
  void build_locator();

  std::shared_ptr<const PolygonalDomain> domain_;
  std::vector<Point> points_;
  std::vector<Triangle> triangles_;
  std::vector<int> boundary_nodes_;
  std::vector<char> on_boundary_;
  double h_ = 0.0;
  int level_ = 0;

  // uniform bucket grid over the bounding box
  Point box_min_ = Point::Zero();
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

struct MeshQuality {
  double h_max = 0.0;
  double h_min = 0.0;
  double rho_min = 0.0;
  double K_quasi = 0.0;
};

TriMesh build_structured_square_mesh(int n);
TriMesh build_lshape_mesh(int n);
TriMesh uniform_refine(const TriMesh& mesh);
PointLocation locate_point(const TriMesh& mesh, const Point& x0);
MeshQuality mesh_quality(const TriMesh& mesh);

/// A coarse mesh together with a uniformly refined descendant.
struct NestedPair {
  std::shared_ptr<const TriMesh> coarse;
  std::shared_ptr<const TriMesh> fine;
  std::vector<int> fine_to_coarse;  ///< ancestor triangle of each fine triangle
  int generations = 0;
};

NestedPair refine_nested(std::shared_ptr<const TriMesh> coarse, int generations);

/// Throws invalid-input if the mesh violates positivity, conformity or area coverage.
void validate(const TriMesh& mesh);

void write_mesh(std::ostream& out, const TriMesh& mesh);
/// Reads the text format; the domain is attached by the caller.
TriMesh read_mesh(std::istream& in, std::shared_ptr<const PolygonalDomain> domain);

}  // namespace heatlab::mesh
