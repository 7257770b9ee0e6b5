#include <algorithm>
#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "heatlab/error.hpp"
#include "heatlab/fe_function.hpp"
#include "heatlab/parabolic.hpp"
#include "heatlab/quadrature.hpp"
#include "heatlab/spectral.hpp"
#include "support.hpp"

using namespace heatlab;
using fem::kInf;
using parabolic::Profile;
using parabolic::SourceTerm;
using parabolic::TimeProfile;

namespace {

struct Fixture {
  std::shared_ptr<const fem::FeSystem> sys;
  spectral::SpectralDecomposition spec;
};

const Fixture& square3() {
  static const Fixture f = [] {
    auto sys = test::make_system("square", 3);
    return Fixture{sys, spectral::SpectralDecomposition::decompose(sys->mass(), sys->stiffness())};
  }();
  return f;
}

// Classical RK4 for a' = -lambda a + g(t), a(0) = 0.
double rk4(double lambda, const std::function<double(double)>& g, double t, int steps) {
  const double dt = t / steps;
  double a = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double s = i * dt;
    const auto f = [&](double tt, double y) { return -lambda * y + g(tt); };
    const double k1 = f(s, a);
    const double k2 = f(s + dt / 2, a + dt / 2 * k1);
    const double k3 = f(s + dt / 2, a + dt / 2 * k2);
    const double k4 = f(s + dt, a + dt * k3);
    a += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return a;
}

// int_lo^hi e^{-lambda (t - s)} g(s) ds by composite Gauss-Legendre.
double duhamel_quadrature(double lambda, const Profile& g, double lo, double hi, double t) {
  const int panels = 400;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const fem::GaussLegendre gl(10, lo + (hi - lo) * p / panels, lo + (hi - lo) * (p + 1) / panels);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) sum += gl.weights[i] * std::exp(-lambda * (t - gl.nodes[i])) * g(gl.nodes[i]);
  }
  return sum;
}

double mass_norm(const fem::FeSystem& sys, const Eigen::VectorXd& c) { return std::sqrt(sys.mass().quadratic_form(c)); }

}  // namespace

TEST(TimeGrids, GaussLegendrePanels) {
  const auto g = parabolic::gauss_legendre_panels(2.0, 16, 4);
  EXPECT_EQ(g.size(), 64u);
  double w = 0.0;
  for (const double x : g.weights) w += x;
  EXPECT_NEAR(w, 2.0, 1e-14);
  EXPECT_GT(g.nodes.front(), 0.0);
  EXPECT_LT(g.nodes.back(), 2.0);
}

TEST(TimeGrids, DyadicPanels) {
  const auto g = parabolic::dyadic_panels(10, 8);
  double w = 0.0;
  for (const double x : g.weights) w += x;
  EXPECT_NEAR(w, 1.0 - std::ldexp(1.0, -10), 1e-14);
  EXPECT_GT(*std::min_element(g.nodes.begin(), g.nodes.end()), std::ldexp(1.0, -10));
}

TEST(Profiles, SquareWaveStartsPositive) {
  const Profile g{TimeProfile::square_wave, 0.25};
  EXPECT_EQ(g(0.0), 1.0);
  EXPECT_EQ(g(0.24), 1.0);
  EXPECT_EQ(g(0.26), -1.0);
  EXPECT_EQ(g(0.51), 1.0);
}

TEST(Duhamel, MatchesQuadrature) {
  for (const double lambda : {0.3, 1.0, 19.7, 800.0}) {
    for (const Profile g : {Profile{TimeProfile::constant, 0.0}, Profile{TimeProfile::exponential, 0.0},
                            Profile{TimeProfile::cosine, 20.0}, Profile{TimeProfile::square_wave, 1.0 / 16.0}}) {
      const double t = 0.7;
      double expected = 0.0;
      if (g.kind == TimeProfile::square_wave) {
        // integrate piece by piece so no panel straddles a jump
        for (double lo = 0.0; lo < t; lo += g.parameter) expected += duhamel_quadrature(lambda, g, lo, std::min(t, lo + g.parameter), t);
      } else {
        expected = duhamel_quadrature(lambda, g, 0.0, t, t);
      }
      EXPECT_NEAR(parabolic::duhamel(g, lambda, t), expected, 1e-12 * std::max(1.0, std::abs(expected)))
          << "lambda " << lambda << " profile " << static_cast<int>(g.kind);
    }
  }
}

TEST(Solve, ConstantFirstMode) {
  const auto& [sys, spec] = square3();
  const Eigen::VectorXd v1 = spec.eigenvectors().col(0);
  const double l1 = spec.lambda_min();
  const std::vector<double> times{0.0, 0.01, 0.3, 1.0};
  const auto a = parabolic::modal_solution(spec, SourceTerm::separable({TimeProfile::constant, 0.0}, v1), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto col = a.col(static_cast<Eigen::Index>(k));
    EXPECT_NEAR(col(0), -std::expm1(-l1 * times[k]) / l1, 1e-12);
    EXPECT_LT(col.tail(col.size() - 1).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Solve, ZeroSource) {
  const auto& [sys, spec] = square3();
  const auto traj = parabolic::solve_semidiscrete(
      spec, SourceTerm::separable({TimeProfile::cosine, 3.0}, Eigen::VectorXd::Zero(spec.size())), {0.1, 0.5, 1.0});
  EXPECT_EQ(traj.u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, ExponentialFirstModeAgainstRungeKutta) {
  const auto& [sys, spec] = square3();
  const double l1 = spec.lambda_min();
  ASSERT_NE(l1, 1.0);
  const auto a = parabolic::modal_solution(
      spec, SourceTerm::separable({TimeProfile::exponential, 0.0}, spec.eigenvectors().col(0)), {0.5});
  const double oracle = rk4(l1, [](double t) { return std::exp(-t); }, 0.5, 20000);
  EXPECT_NEAR(a(0, 0), oracle, 1e-9);
  EXPECT_NEAR(a(0, 0), (std::exp(-0.5) - std::exp(-l1 * 0.5)) / (l1 - 1.0), 1e-12);
}

TEST(Solve, ResidualOfSemidiscreteEquation) {
  const auto& [sys, spec] = square3();
  const Eigen::VectorXd w = test::random_coeffs(spec.size(), 4);
  const auto grid = parabolic::gauss_legendre_panels(1.0, 8, 4);
  for (const Profile g : {Profile{TimeProfile::cosine, 20.0}, Profile{TimeProfile::square_wave, 1.0 / 16.0}}) {
    const auto traj = parabolic::solve_semidiscrete(spec, SourceTerm::separable(g, w), grid.nodes);
    for (Eigen::Index k = 0; k < traj.u.cols(); ++k) {
      const Eigen::VectorXd r = traj.dt_u.col(k) - traj.laplacian_u.col(k) - traj.source.col(k);
      EXPECT_LE(mass_norm(*sys, r), 1e-8 * mass_norm(*sys, traj.source.col(k)));
      // Delta_h u = -M^{-1} K u
      EXPECT_LT((traj.laplacian_u.col(k) - sys->apply_laplacian(traj.u.col(k))).cwiseAbs().maxCoeff(),
                1e-8 * traj.laplacian_u.col(k).cwiseAbs().maxCoeff());
    }
  }
}

TEST(Solve, PiecewiseConstantMatchesSeparableConstant) {
  const auto& [sys, spec] = square3();
  const Eigen::VectorXd w = test::random_coeffs(spec.size(), 6);
  const Eigen::MatrixXd steps = w.replicate(1, 8);
  const std::vector<double> times{0.05, 0.5, 1.0};
  const auto a = parabolic::solve_semidiscrete(spec, SourceTerm::piecewise_constant(steps), times);
  const auto b = parabolic::solve_semidiscrete(spec, SourceTerm::separable({TimeProfile::constant, 0.0}, w), times);
  EXPECT_LT((a.u - b.u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solve, PiecewiseConstantGridCoversInterval) {
  const auto& [sys, spec] = square3();
  EXPECT_THROW(parabolic::solve_semidiscrete(spec, SourceTerm::piecewise_constant(Eigen::MatrixXd(spec.size(), 0)), {0.5}),
               Error);
}

TEST(Solve, EnergyIdentity) {
  const auto& [sys, spec] = square3();
  const double T = 1.0;
  // graded toward t = 0, where the fast modes switch on; [0, 2^-40] contributes nothing measurable
  const auto grid = parabolic::dyadic_panels(40, 16);
  for (unsigned s = 0; s < 3; ++s) {
    const Eigen::VectorXd w = test::random_coeffs(spec.size(), 80 + s);
    const auto f = SourceTerm::separable({TimeProfile::cosine, 20.0}, w, T);
    const auto traj = parabolic::solve_semidiscrete(spec, f, grid.nodes);
    double dissipation = 0.0;
    double work = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Eigen::VectorXd u = traj.u.col(static_cast<Eigen::Index>(k));
      dissipation += grid.weights[k] * sys->stiffness().quadratic_form(u);
      work += grid.weights[k] * u.dot(sys->mass() * traj.source.col(static_cast<Eigen::Index>(k)));
    }
    const auto end = parabolic::solve_semidiscrete(spec, f, {T});
    const double lhs = 0.5 * sys->mass().quadratic_form(end.u.col(0)) + dissipation;
    EXPECT_NEAR(lhs, work, 1e-7 * std::abs(work));
  }
}

TEST(Solve, MaximalL2RegularityWithConstantOne) {
  const auto& [sys, spec] = square3();
  const auto grid = parabolic::gauss_legendre_panels(1.0, 64, 4);
  for (unsigned s = 0; s < 4; ++s) {
    const Eigen::VectorXd w = test::random_coeffs(spec.size(), 90 + s);
    for (const Profile g : {Profile{TimeProfile::constant, 0.0}, Profile{TimeProfile::square_wave, 1.0 / 64.0}}) {
      const auto traj = parabolic::solve_semidiscrete(spec, SourceTerm::separable(g, w), grid.nodes);
      const double dt = parabolic::bochner_norm(sys->space(), grid, traj.dt_u, 2.0, 2.0);
      const double lap = parabolic::bochner_norm(sys->space(), grid, traj.laplacian_u, 2.0, 2.0);
      const double src = parabolic::bochner_norm(sys->space(), grid, traj.source, 2.0, 2.0);
      EXPECT_LE(dt * dt + lap * lap, src * src * (1.0 + 1e-7));
    }
  }
}

TEST(Bochner, ConstantInTime) {
  const auto& [sys, spec] = square3();
  const Eigen::VectorXd c = test::random_coeffs(spec.size(), 12);
  const double T = 0.5;
  const auto grid = parabolic::gauss_legendre_panels(T, 4, 4);
  const Eigen::MatrixXd cols = c.replicate(1, static_cast<Eigen::Index>(grid.size()));
  for (const double q : {1.0, 2.0, 4.0, kInf}) {
    const double nq = fem::lq_norm(sys->space(), c, q);
    for (const double p : {1.0, 2.0, 4.0}) {
      EXPECT_NEAR(parabolic::bochner_norm(sys->space(), grid, cols, p, q), nq * std::pow(T, 1.0 / p), 1e-12 * nq);
    }
    EXPECT_NEAR(parabolic::bochner_norm(sys->space(), grid, cols, kInf, q), nq, 1e-12 * nq);
  }
}

TEST(Bochner, ParsevalForSingleMode) {
  const auto& [sys, spec] = square3();
  const double l1 = spec.lambda_min();
  const auto grid = parabolic::gauss_legendre_panels(1.0, 64, 4);
  const auto traj = parabolic::solve_semidiscrete(
      spec, SourceTerm::separable({TimeProfile::constant, 0.0}, spec.eigenvectors().col(0)), grid.nodes);
  // int_0^1 ((1 - e^{-l t}) / l)^2 dt
  const double exact = (1.0 - 2.0 * (1.0 - std::exp(-l1)) / l1 + (1.0 - std::exp(-2.0 * l1)) / (2.0 * l1)) / (l1 * l1);
  const double norm = parabolic::bochner_norm(sys->space(), grid, traj.u, 2.0, 2.0);
  EXPECT_NEAR(norm * norm, exact, 1e-8 * exact);
}

TEST(Bochner, PanelRefinementConverges) {
  const auto& [sys, spec] = square3();
  const Eigen::VectorXd w = spec.eigenvectors().leftCols(3) * Eigen::Vector3d(1.0, -0.5, 0.25);
  const auto f = SourceTerm::separable({TimeProfile::cosine, 20.0}, w);
  std::vector<double> norms;
  for (const int panels : {64, 128}) {
    const auto grid = parabolic::gauss_legendre_panels(1.0, panels, 4);
    const auto traj = parabolic::solve_semidiscrete(spec, f, grid.nodes);
    norms.push_back(parabolic::bochner_norm(sys->space(), grid, traj.laplacian_u, 4.0, 4.0));
  }
  EXPECT_LT(std::abs(norms[0] - norms[1]) / norms[1], 1e-6);
}
