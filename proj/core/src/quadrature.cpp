#include "heatlab/quadrature.hpp"

#include <cmath>
#include <numeric>

#include "heatlab/error.hpp"

namespace heatlab::fem {

namespace {

void add_orbit_111(QuadratureRule& q, double w) {
  q.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  q.weights.push_back(w);
}

void add_orbit_21(QuadratureRule& q, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  q.points.push_back({a, a, b});
  q.points.push_back({a, b, a});
  q.points.push_back({b, a, a});
  for (int k = 0; k < 3; ++k) q.weights.push_back(w);
}

void add_orbit_3(QuadratureRule& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& p : perms) {
    q.points.push_back(p);
    q.weights.push_back(w);
  }
}

void normalize(QuadratureRule& q) {
  const double s = std::accumulate(q.weights.begin(), q.weights.end(), 0.0);
  for (double& w : q.weights) w /= s;
}

}  // namespace

const QuadratureRule& QuadratureRule::centroid() {
  static const QuadratureRule rule = [] {
    QuadratureRule q;
    add_orbit_111(q, 1.0);
    q.degree = 1;
    return q;
  }();
  return rule;
}

const QuadratureRule& QuadratureRule::seven_point() {
  static const QuadratureRule rule = [] {
    QuadratureRule q;
    const double s15 = std::sqrt(15.0);
    add_orbit_111(q, 9.0 / 40.0);
    add_orbit_21(q, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
    add_orbit_21(q, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
    q.degree = 5;
    return q;
  }();
  return rule;
}

const QuadratureRule& QuadratureRule::twelve_point() {
  static const QuadratureRule rule = [] {
    // Dunavant degree 6
    QuadratureRule q;
    add_orbit_21(q, 0.249286745170910, 0.116786275726379);
    add_orbit_21(q, 0.063089014491502, 0.050844906370207);
    add_orbit_3(q, 0.053145049844817, 0.310352451033784, 0.082851075618374);
    normalize(q);
    q.degree = 6;
    return q;
  }();
  return rule;
}

QuadratureRule QuadratureRule::conical(int n) {
  require(n >= 1, ErrorCode::invalid_argument, "conical rule needs n >= 1");
  // x = u, y = v (1 - u), Jacobian (1 - u); n + 1 points in u absorb the extra factor
  const GaussLegendre gu(n + 1, 0.0, 1.0);
  const GaussLegendre gv(n, 0.0, 1.0);
  QuadratureRule q;
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double x = gu.nodes[i];
      const double y = gv.nodes[j] * (1.0 - x);
      q.points.push_back({1.0 - x - y, x, y});
      q.weights.push_back(2.0 * gu.weights[i] * gv.weights[j] * (1.0 - x));
    }
  }
  q.degree = 2 * n - 1;
  return q;
}

const QuadratureRule& QuadratureRule::for_degree(int r) {
  require(r == 1 || r == 2, ErrorCode::invalid_argument, "element degree must be 1 or 2");
  return r == 1 ? seven_point() : twelve_point();
}

GaussLegendre::GaussLegendre(int n, double a, double b) {
  require(n >= 1, ErrorCode::invalid_argument, "Gauss-Legendre needs n >= 1");
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = mid - half * x;
    nodes[hi] = mid + half * x;
    weights[lo] = half * w;
    weights[hi] = half * w;
  }
}

}  // namespace heatlab::fem
