#include <iomanip>
#include <istream>
#include <ostream>

#include "heatlab/error.hpp"
#include "heatlab/mesh.hpp"

namespace heatlab::mesh {

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << mesh.num_points() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.points()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << mesh.boundary_nodes().size();
  for (int b : mesh.boundary_nodes()) out << ' ' << b;
  out << '\n';
}

TriMesh read_mesh(std::istream& in, std::shared_ptr<const PolygonalDomain> domain) {
  std::size_t nv = 0;
  std::size_t nt = 0;
  require(static_cast<bool>(in >> nv >> nt), ErrorCode::invalid_input, "mesh header must be 'NV NT'");
  std::vector<Point> pts(nv);
  for (auto& p : pts) {
    double x = 0.0;
    double y = 0.0;
    require(static_cast<bool>(in >> x >> y), ErrorCode::invalid_input, "truncated vertex list");
    p = Point(x, y);
  }
  std::vector<Triangle> tris(nt);
  for (auto& t : tris) {
    require(static_cast<bool>(in >> t[0] >> t[1] >> t[2]), ErrorCode::invalid_input, "truncated triangle list");
  }
  std::size_t nb = 0;
  require(static_cast<bool>(in >> nb), ErrorCode::invalid_input, "missing boundary node count");
  std::vector<int> boundary(nb);
  for (auto& b : boundary) {
    require(static_cast<bool>(in >> b), ErrorCode::invalid_input, "truncated boundary node list");
  }
  return TriMesh(std::move(domain), std::move(pts), std::move(tris), std::move(boundary), 0);
}

}  // namespace heatlab::mesh
