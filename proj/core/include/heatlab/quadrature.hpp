#pragma once

#include <array>
#include <vector>

namespace heatlab::fem {

/// Rule on the reference triangle in barycentric coordinates; weights sum to 1
/// (multiply by the element area to integrate).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const noexcept { return weights.size(); }

  static const QuadratureRule& centroid();      ///< degree 1
  static const QuadratureRule& seven_point();   ///< degree 5
  static const QuadratureRule& twelve_point();  ///< degree 6
  /// Collapsed Gauss product rule, exact for total degree <= 2n - 1.
  static QuadratureRule conical(int n);
  /// Rule used for assembly and norms for elements of the given degree.
  static const QuadratureRule& for_degree(int r);
};

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  GaussLegendre(int n, double a, double b);
};

}  // namespace heatlab::fem
