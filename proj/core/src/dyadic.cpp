#include "heatlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatlab/error.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::dyadic {

DyadicDecomposition DyadicDecomposition::build(const Point& x0, double C_star, double h) {
  if (!(C_star >= 16.0)) raise(ErrorCode::decomposition_unavailable, "C_star must be at least 16");
  if (!(h > 0.0 && h < 1.0 / (4.0 * C_star))) {
    raise(ErrorCode::decomposition_unavailable, "mesh too coarse: h = " + std::to_string(h) +
                                                    " is not below 1/(4 C_star) = " +
                                                    std::to_string(1.0 / (4.0 * C_star)));
  }
  // largest J with 2^-J >= C_star h
  int J = 0;
  while (d(J + 1) >= C_star * h) ++J;
  return DyadicDecomposition(x0, C_star, h, J);
}

int DyadicDecomposition::classify_radius(double m) const {
  if (m < d(J_star_)) return kInnermost;
  if (m >= 1.0) return 0;
  int j = 1;
  while (j < J_star_ && d(j) > m) ++j;
  return j;
}

namespace {

std::size_t slot(const DyadicDecomposition& dec, int region) {
  return region == DyadicDecomposition::kInnermost ? static_cast<std::size_t>(dec.J_star() + 1)
                                                   : static_cast<std::size_t>(region);
}

/// Quadrature data of a space: physical points, weights, basis values and gradients.
struct PointTable {
  std::vector<Point> x;
  std::vector<double> w;
  std::vector<int> tri;
  std::vector<fem::LocalValues> phi;
  std::vector<fem::LocalGradients> grad;
};

PointTable point_table(const fem::FeSpace& space) {
  const auto& mesh = space.mesh();
  const auto& rule = fem::QuadratureRule::for_degree(space.degree());
  PointTable pt;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto geo = fem::element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles()[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      pt.x.push_back(b[0] * mesh.points()[static_cast<std::size_t>(tri[0])] +
                     b[1] * mesh.points()[static_cast<std::size_t>(tri[1])] +
                     b[2] * mesh.points()[static_cast<std::size_t>(tri[2])]);
      pt.w.push_back(geo.area * rule.weights[q]);
      pt.tri.push_back(static_cast<int>(t));
      pt.phi.push_back(fem::basis_values(space.degree(), b));
      pt.grad.push_back(fem::basis_gradients(space.degree(), b, geo));
    }
  }
  return pt;
}

/// Value and gradient at quadrature point k of a function with full coefficients.
std::pair<double, Eigen::Vector2d> sample(const fem::FeSpace& space, const PointTable& pt, std::size_t k,
                                          const Eigen::VectorXd& full) {
  const auto dofs = space.element_dofs(pt.tri[k]);
  double v = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const double c = full(dofs[a]);
    v += c * pt.phi[k][a];
    g += c * pt.grad[k][a];
  }
  return {v, g};
}

}  // namespace

RegionSums region_sums(const DyadicDecomposition& dec, const SpaceTimeField& f, int order) {
  require(order == 0 || order == 1, ErrorCode::invalid_argument, "local norms support order 0 or 1");
  require(f.space != nullptr && f.values.cols() == static_cast<Eigen::Index>(f.grid.size()),
          ErrorCode::invalid_argument, "field needs one column per time node");
  const auto regions = static_cast<std::size_t>(dec.J_star() + 2);
  RegionSums out{std::vector<double>(regions, 0.0), std::vector<std::size_t>(regions, 0)};
  const PointTable pt = point_table(*f.space);
  std::vector<double> dist(pt.x.size());
  for (std::size_t k = 0; k < pt.x.size(); ++k) dist[k] = (pt.x[k] - dec.x0()).norm();
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    const double st = std::sqrt(f.grid.nodes[n]);
    const Eigen::VectorXd full = f.space->expand(f.values.col(static_cast<Eigen::Index>(n)));
    for (std::size_t k = 0; k < pt.x.size(); ++k) {
      const std::size_t s = slot(dec, dec.classify_radius(std::max(dist[k], st)));
      const auto [v, g] = sample(*f.space, pt, k, full);
      const double integrand = v * v + (order == 1 ? g.squaredNorm() : 0.0);
      out.squared[s] += f.grid.weights[n] * pt.w[k] * integrand;
      ++out.points[s];
    }
  }
  return out;
}

double local_space_time_norm(const DyadicDecomposition& dec, const SpaceTimeField& f, int region, int order,
                             bool* empty) {
  require(region == DyadicDecomposition::kInnermost || (region >= 0 && region <= dec.J_star()),
          ErrorCode::invalid_argument, "region index out of range");
  const RegionSums sums = region_sums(dec, f, order);
  const std::size_t s = slot(dec, region);
  if (empty != nullptr) *empty = sums.points[s] == 0;
  return std::sqrt(sums.squared[s]);
}

double local_space_norm_neighbourhood(const DyadicDecomposition& dec, const fem::FeSpace& space,
                                      const Eigen::VectorXd& coeffs, int j, int order) {
  const PointTable pt = point_table(space);
  const Eigen::VectorXd full = space.expand(coeffs);
  double sum = 0.0;
  for (std::size_t k = 0; k < pt.x.size(); ++k) {
    if (!dec.in_neighbourhood(dec.classify_space(pt.x[k]), j)) continue;
    const auto [v, g] = sample(space, pt, k, full);
    sum += pt.w[k] * (v * v + (order == 1 ? g.squaredNorm() : 0.0));
  }
  return std::sqrt(sum);
}

LocalNormReport weighted_sum_K(const DyadicDecomposition& dec, std::vector<LocalNormEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.j < b.j; });
  require(static_cast<int>(entries.size()) == dec.J_star() + 1, ErrorCode::incomplete_report,
          "expected entries for j = 0.." + std::to_string(dec.J_star()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    require(entries[i].j == static_cast<int>(i), ErrorCode::incomplete_report,
            "missing local norms for j = " + std::to_string(i));
  }
  LocalNormReport report{std::move(entries), 0.0};
  report.K = recompute_K(report);
  return report;
}

double recompute_K(const LocalNormReport& report) {
  constexpr int N = 2;
  double K = 0.0;
  for (const auto& e : report.entries) {
    const double dj = DyadicDecomposition::d(e.j);
    K += std::pow(dj, 1.0 + N / 2.0) * (e.F_1 / dj + e.dtF_0 + dj * e.dtF_1 + dj * dj * e.dttF_0);
  }
  return K;
}

LocalEnergyRecord local_energy_check(const DyadicDecomposition& dec, const LocalEnergyInputs& in, int j,
                                     double epsilon) {
  require(j >= 0 && j <= dec.J_star(), ErrorCode::invalid_argument, "j outside the decomposition range");
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::invalid_argument, "epsilon must lie in (0,1)");
  const double dj = DyadicDecomposition::d(j);
  const auto sums = [&](const SpaceTimeField& f, int order) { return region_sums(dec, f, order).squared; };
  const auto on_j = [&](const std::vector<double>& s) { return std::sqrt(s[static_cast<std::size_t>(j)]); };
  const auto on_nbhd = [&](const std::vector<double>& s) {
    double acc = 0.0;
    for (int r = std::max(0, j - 1); r <= std::min(dec.J_star(), j + 1); ++r) acc += s[static_cast<std::size_t>(r)];
    return std::sqrt(acc);
  };
  const auto e0 = sums(in.error, 0);
  const auto e1 = sums(in.error, 1);
  const auto de0 = sums(in.dt_error, 0);
  const auto eta0 = sums(in.interp_error, 0);
  const auto eta1 = sums(in.interp_error, 1);
  const auto deta0 = sums(in.dt_interp_error, 0);
  const auto deta1 = sums(in.dt_interp_error, 1);

  LocalEnergyRecord r;
  r.lhs = on_j(de0) + on_j(e1) / dj;
  const auto& space = *in.error.space;
  r.I_j = local_space_norm_neighbourhood(dec, space, in.initial, j, 1) +
          local_space_norm_neighbourhood(dec, space, in.initial, j, 0) / dj;
  r.X_j = dj * on_nbhd(deta1) + on_nbhd(deta0) + on_nbhd(eta1) / dj + on_nbhd(eta0) / (dj * dj);
  r.coupling = on_nbhd(e0) / (dj * dj);
  r.window_factor = std::sqrt(in.h / dj) + in.h / (epsilon * dj) + epsilon;
  r.window_norm = on_nbhd(de0) + on_nbhd(e1) / dj;
  r.rhs = (r.I_j + r.X_j + r.coupling) / std::pow(epsilon, 3) + r.window_factor * r.window_norm;
  if (r.lhs == 0.0) {
    r.ratio = 0.0;
  } else {
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace heatlab::dyadic
