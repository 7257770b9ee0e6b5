#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "heatlab/assembly.hpp"
#include "heatlab/mesh.hpp"
#include "heatlab/probes.hpp"
#include "heatlab/projection.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::test {

inline std::shared_ptr<const mesh::TriMesh> reference_triangle_mesh() {
  auto domain = std::make_shared<const mesh::PolygonalDomain>(
      "triangle", std::vector<mesh::Point>{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  return std::make_shared<const mesh::TriMesh>(domain, std::vector<mesh::Point>{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}},
                                               std::vector<mesh::Triangle>{{0, 1, 2}}, std::vector<int>{0, 1, 2});
}

inline std::shared_ptr<const fem::FeSystem> make_system(const std::string& domain, int level, int degree = 1) {
  return fem::FeSystem::create(estimators::make_mesh(domain, level), degree);
}

inline Eigen::VectorXd random_coeffs(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

/// ||f - u_h||_{L2} by the twelve-point rule, independent of the library's norm code.
template <typename F>
double l2_error(const fem::FeSpace& space, const Eigen::VectorXd& coeffs, F&& f) {
  const auto& rule = fem::QuadratureRule::twelve_point();
  const auto& m = space.mesh();
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      const mesh::Point x = b[0] * m.points()[static_cast<std::size_t>(tri[0])] +
                            b[1] * m.points()[static_cast<std::size_t>(tri[1])] +
                            b[2] * m.points()[static_cast<std::size_t>(tri[2])];
      const double e = f(x) - space.evaluate_in(coeffs, t, b);
      sum += rule.weights[q] * m.area(t) * e * e;
    }
  }
  return std::sqrt(sum);
}

inline double sinsin(const mesh::Point& x) { return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y()); }

}  // namespace heatlab::test
