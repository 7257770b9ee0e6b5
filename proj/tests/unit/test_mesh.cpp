#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "heatlab/error.hpp"
#include "heatlab/mesh.hpp"
#include "support.hpp"

using namespace heatlab;
using mesh::Point;

namespace {

// Triangles as sorted vertex coordinate triples, so two meshes compare independently of numbering.
std::set<std::array<std::pair<double, double>, 3>> geometric_triangles(const mesh::TriMesh& m) {
  std::set<std::array<std::pair<double, double>, 3>> out;
  for (const auto& t : m.triangles()) {
    std::array<std::pair<double, double>, 3> v;
    for (int k = 0; k < 3; ++k) {
      const auto& p = m.points()[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
      v[static_cast<std::size_t>(k)] = {p.x(), p.y()};
    }
    std::sort(v.begin(), v.end());
    out.insert(v);
  }
  return out;
}

std::size_t interior_count(const mesh::TriMesh& m) { return m.num_points() - m.boundary_nodes().size(); }

}  // namespace

TEST(SquareMesh, SmallestCase) {
  const auto m = mesh::build_structured_square_mesh(1);
  EXPECT_EQ(m.num_triangles(), 2u);
  EXPECT_EQ(m.num_points(), 4u);
  EXPECT_EQ(m.boundary_nodes().size(), 4u);
}

TEST(SquareMesh, TwoByTwoHasOneInteriorNode) {
  const auto m = mesh::build_structured_square_mesh(2);
  EXPECT_EQ(m.num_triangles(), 8u);
  EXPECT_EQ(m.num_points(), 9u);
  EXPECT_EQ(interior_count(m), 1u);
}

TEST(SquareMesh, MeshSizeIsCellDiagonal) {
  const auto m = mesh::build_structured_square_mesh(4);
  EXPECT_EQ(m.num_triangles(), 32u);
  EXPECT_NEAR(m.h(), std::sqrt(2.0) / 4.0, 1e-15);
}

TEST(LShapeMesh, SmallestCaseContainsReentrantCorner) {
  const auto m = mesh::build_lshape_mesh(1);
  EXPECT_EQ(m.num_triangles(), 6u);
  const bool has_origin = std::any_of(m.points().begin(), m.points().end(), [](const Point& p) { return p.norm() == 0.0; });
  EXPECT_TRUE(has_origin);
}

TEST(LShapeMesh, ReentrantAngle) {
  const auto m = mesh::build_lshape_mesh(2);
  EXPECT_EQ(m.num_triangles(), 24u);
  const auto& v = m.domain().vertices();
  const auto it = std::find_if(v.begin(), v.end(), [](const Point& p) { return p.norm() == 0.0; });
  ASSERT_NE(it, v.end());
  EXPECT_NEAR(m.domain().interior_angle(static_cast<std::size_t>(it - v.begin())), 1.5 * std::numbers::pi, 1e-14);
}

TEST(LShapeMesh, DomainIsNotConvex) {
  for (const int n : {1, 2, 4, 8}) EXPECT_FALSE(mesh::build_lshape_mesh(n).domain().is_convex());
  EXPECT_TRUE(mesh::build_structured_square_mesh(2).domain().is_convex());
}

TEST(Refine, SplitsEachTriangleIntoFour) {
  const auto coarse = mesh::build_structured_square_mesh(1);
  const auto fine = mesh::uniform_refine(coarse);
  EXPECT_EQ(fine.num_triangles(), 8u);
  EXPECT_NEAR(fine.h(), coarse.h() / 2.0, 1e-15);
}

TEST(Refine, TwiceMatchesStructuredMesh) {
  const auto twice = mesh::uniform_refine(mesh::uniform_refine(mesh::build_structured_square_mesh(1)));
  const auto direct = mesh::build_structured_square_mesh(4);
  EXPECT_EQ(geometric_triangles(twice), geometric_triangles(direct));
  EXPECT_EQ(twice.boundary_nodes().size(), direct.boundary_nodes().size());
}

TEST(Refine, QualityDoesNotDegrade) {
  for (auto m : {mesh::build_structured_square_mesh(2), mesh::build_lshape_mesh(2)}) {
    double prev = mesh::mesh_quality(m).K_quasi;
    for (int g = 0; g < 3; ++g) {
      m = mesh::uniform_refine(m);
      const double k = mesh::mesh_quality(m).K_quasi;
      EXPECT_LE(k, prev + 1e-9);
      prev = k;
    }
  }
}

TEST(Refine, BoundaryNodesStayOnBoundary) {
  const auto coarse = mesh::build_lshape_mesh(2);
  const auto fine = mesh::uniform_refine(coarse);
  std::set<std::pair<double, double>> fine_boundary;
  for (const int i : fine.boundary_nodes()) {
    fine_boundary.insert({fine.points()[static_cast<std::size_t>(i)].x(), fine.points()[static_cast<std::size_t>(i)].y()});
  }
  for (const int i : coarse.boundary_nodes()) {
    const auto& p = coarse.points()[static_cast<std::size_t>(i)];
    EXPECT_TRUE(fine_boundary.contains({p.x(), p.y()}));
  }
}

TEST(Locate, CentroidGivesEqualBarycentrics) {
  const auto m = mesh::build_structured_square_mesh(4);
  for (int t = 0; t < static_cast<int>(m.num_triangles()); t += 5) {
    const auto loc = mesh::locate_point(m, m.centroid(t));
    EXPECT_EQ(loc.triangle, t);
    for (const double b : loc.barycentric) EXPECT_NEAR(b, 1.0 / 3.0, 1e-12);
  }
}

TEST(Locate, SharedEdgeGoesToLowerIndex) {
  const auto m = mesh::build_structured_square_mesh(2);
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[static_cast<std::size_t>(e)];
      const int b = tri[static_cast<std::size_t>((e + 1) % 3)];
      const Point mid = 0.5 * (m.points()[static_cast<std::size_t>(a)] + m.points()[static_cast<std::size_t>(b)]);
      // lowest-indexed triangle owning this edge
      int owner = -1;
      for (int s = 0; s < static_cast<int>(m.num_triangles()) && owner < 0; ++s) {
        const auto& o = m.triangles()[static_cast<std::size_t>(s)];
        if (std::count(o.begin(), o.end(), a) == 1 && std::count(o.begin(), o.end(), b) == 1) owner = s;
      }
      EXPECT_EQ(mesh::locate_point(m, mid).triangle, owner);
    }
  }
}

TEST(Locate, OutsidePointRaises) {
  const auto m = mesh::build_structured_square_mesh(2);
  try {
    mesh::locate_point(m, Point(2.0, 2.0));
    FAIL() << "expected point-outside-domain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::point_outside_domain);
  }
  const auto l = mesh::build_lshape_mesh(2);
  EXPECT_EQ(l.try_locate(Point(0.5, -0.5)).triangle, -1);
}

TEST(Locate, BarycentricReconstruction) {
  const auto m = mesh::build_lshape_mesh(8);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  int tested = 0;
  while (tested < 200) {
    const Point x(d(gen), d(gen));
    if (x.x() > 0.0 && x.y() < 0.0) continue;
    const auto loc = m.locate(x);
    const auto& tri = m.triangles()[static_cast<std::size_t>(loc.triangle)];
    Point y = Point::Zero();
    for (int k = 0; k < 3; ++k) {
      y += loc.barycentric[static_cast<std::size_t>(k)] * m.points()[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
    }
    EXPECT_LT((y - x).norm(), 1e-12);
    ++tested;
  }
}

TEST(Quality, ReferenceRightTriangle) {
  const auto m = test::reference_triangle_mesh();
  EXPECT_NEAR(m->diameter(0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m->inradius(0), (2.0 - std::sqrt(2.0)) / 2.0, 1e-15);
}

TEST(Quality, StructuredMeshIsUniform) {
  const auto q = mesh::mesh_quality(mesh::build_structured_square_mesh(8));
  EXPECT_DOUBLE_EQ(q.h_max / q.h_min, 1.0);
  const auto r = mesh::mesh_quality(mesh::uniform_refine(mesh::build_structured_square_mesh(8)));
  EXPECT_DOUBLE_EQ(r.h_max, q.h_max / 2.0);
}

TEST(Invariants, EulerRelationAndArea) {
  for (const auto& m : {mesh::build_structured_square_mesh(8), mesh::build_lshape_mesh(8), mesh::build_lshape_mesh(3)}) {
    const long v = static_cast<long>(m.num_points());
    const long e = static_cast<long>(m.edges().size());
    const long t = static_cast<long>(m.num_triangles());
    EXPECT_EQ(v - e + t, 1);
    EXPECT_NEAR(m.total_area(), m.domain().area(), 1e-10 * m.domain().area());
    for (int k = 0; k < t; ++k) EXPECT_GT(m.area(k), 0.0);
    EXPECT_NO_THROW(mesh::validate(m));
  }
  EXPECT_NEAR(mesh::build_lshape_mesh(4).total_area(), 3.0, 1e-12);
}

TEST(Invariants, BoundaryNodesAreExactlyThoseOnTheBoundary) {
  const auto m = mesh::build_lshape_mesh(4);
  for (int i = 0; i < static_cast<int>(m.num_points()); ++i) {
    const bool on = m.domain().distance_to_boundary(m.points()[static_cast<std::size_t>(i)]) < 1e-12 * m.h();
    EXPECT_EQ(on, m.is_boundary_node(i)) << "node " << i;
  }
}

TEST(MeshIo, RoundTrip) {
  const auto m = mesh::build_lshape_mesh(2);
  std::stringstream ss;
  mesh::write_mesh(ss, m);
  const auto back = mesh::read_mesh(ss, m.domain_ptr());
  EXPECT_EQ(back.points(), m.points());
  EXPECT_EQ(back.triangles(), m.triangles());
  EXPECT_EQ(back.boundary_nodes(), m.boundary_nodes());
}
