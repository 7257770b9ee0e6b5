#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "heatlab/contour.hpp"
#include "heatlab/error.hpp"
#include "heatlab/estimators.hpp"
#include "heatlab/fe_function.hpp"
#include "heatlab/spectral.hpp"
#include "support.hpp"

using namespace heatlab;
using spectral::SpectralDecomposition;

namespace {

constexpr double kTwoPiSquared = 2.0 * std::numbers::pi * std::numbers::pi;

struct Fixture {
  std::shared_ptr<const fem::FeSystem> sys;
  std::shared_ptr<const SpectralDecomposition> spec;
};

const Fixture& lshape3() {
  static const Fixture f = [] {
    auto sys = test::make_system("lshape", 3);
    auto spec = std::make_shared<const SpectralDecomposition>(
        SpectralDecomposition::decompose(sys->mass(), sys->stiffness()));
    return Fixture{sys, spec};
  }();
  return f;
}

double mass_norm(const fem::FeSystem& sys, const Eigen::VectorXd& c) { return std::sqrt(sys.mass().quadratic_form(c)); }

}  // namespace

TEST(Decompose, SquareFirstEigenvalue) {
  double prev = std::numeric_limits<double>::infinity();
  for (const int level : {2, 3, 4}) {
    const auto sys = test::make_system("square", level);
    const auto spec = SpectralDecomposition::decompose(sys->mass(), sys->stiffness());
    EXPECT_GT(spec.lambda_min(), kTwoPiSquared);  // conforming Galerkin eigenvalues lie above
    EXPECT_LT(spec.lambda_min(), prev);
    prev = spec.lambda_min();
    if (level == 4) EXPECT_LT((spec.lambda_min() - kTwoPiSquared) / kTwoPiSquared, 0.02);
  }
}

TEST(Decompose, SingleDofSystem) {
  const auto sys = test::make_system("square", 1);
  const auto spec = SpectralDecomposition::decompose(sys->mass(), sys->stiffness());
  ASSERT_EQ(spec.size(), 1);
  EXPECT_DOUBLE_EQ(spec.lambda_min(), sys->stiffness().coeff(0, 0) / sys->mass().coeff(0, 0));
}

TEST(Decompose, Invariants) {
  const auto& [sys, spec] = lshape3();
  EXPECT_GT(spec->eigenvalues().minCoeff(), 0.0);
  for (Eigen::Index i = 1; i < spec->size(); ++i) EXPECT_LE(spec->eigenvalues()(i - 1), spec->eigenvalues()(i));
  EXPECT_LT(spec->max_relative_residual(sys->stiffness()), 1e-8);
  EXPECT_LT(spec->orthonormality_error(), 1e-9);
}

TEST(Decompose, CapExceeded) {
  const auto sys = test::make_system("square", 3);
  try {
    SpectralDecomposition::decompose(sys->mass(), sys->stiffness(), 10);
    FAIL() << "expected problem-too-large";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::problem_too_large);
  }
}

TEST(Decompose, RejectsIndefiniteMass) {
  const auto sys = test::make_system("square", 2);
  const fem::SymmetricSparseMatrix negative(Eigen::SparseMatrix<double>(-sys->mass().eigen()));
  try {
    SpectralDecomposition::decompose(negative, sys->stiffness());
    FAIL() << "expected invalid-input";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
}

TEST(Decompose, CacheRoundTrip) {
  const auto& [sys, spec] = lshape3();
  std::stringstream ss;
  spec->save(ss, 1234);
  EXPECT_EQ(ss.str().substr(0, 8), "SPECDEC1");
  auto back = SpectralDecomposition::load(ss, 1234, sys->mass().eigen());
  ASSERT_NE(back, nullptr);
  EXPECT_EQ(back->eigenvalues(), spec->eigenvalues());
  EXPECT_EQ(back->eigenvectors(), spec->eigenvectors());
  std::stringstream again(ss.str());
  EXPECT_EQ(SpectralDecomposition::load(again, 99, sys->mass().eigen()), nullptr);

  const auto dir = std::filesystem::temp_directory_path() / "heatlab_spectral_cache_test";
  std::filesystem::remove_all(dir);
  const auto first = spectral::decompose_cached(*sys, dir.string(), "lshape", 3);
  const auto second = spectral::decompose_cached(*sys, dir.string(), "lshape", 3);
  EXPECT_EQ(first->eigenvalues(), second->eigenvalues());
  std::filesystem::remove_all(dir);
}

TEST(Semigroup, IdentityAtZero) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v = test::random_coeffs(spec->size(), 1);
  EXPECT_LT((spec->apply_semigroup(0.0, v) - v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Semigroup, EigenvectorDecaysExponentially) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v1 = spec->eigenvectors().col(0);
  const double l1 = spec->lambda_min();
  for (const double t : {1e-3, 0.05, 0.7}) {
    EXPECT_LT((spec->apply_semigroup(t, v1) - std::exp(-l1 * t) * v1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((spec->apply_time_derivative(t, v1) + l1 * std::exp(-l1 * t) * v1).cwiseAbs().maxCoeff(),
              1e-10 * l1);
  }
}

TEST(Semigroup, ContractionAndSmoothing) {
  const auto& [sys, spec] = lshape3();
  for (unsigned s = 0; s < 5; ++s) {
    const Eigen::VectorXd v = test::random_coeffs(spec->size(), 10 + s);
    const double nv = mass_norm(*sys, v);
    double smoothing = 0.0;
    for (const double t : estimators::log_time_grid(1e-6, 10.0, 60)) {
      EXPECT_LE(mass_norm(*sys, spec->apply_semigroup(t, v)), nv * (1.0 + 1e-12));
      smoothing = std::max(smoothing, t * mass_norm(*sys, spec->apply_time_derivative(t, v)) / nv);
    }
    EXPECT_LE(smoothing, std::exp(-1.0) + 1e-6);
  }
}

TEST(Semigroup, CentralDifference) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v = test::random_coeffs(spec->size(), 3);
  const double t = 0.05;
  const Eigen::VectorXd exact = spec->apply_time_derivative(t, v);
  std::vector<double> err;
  for (const double d : {1e-3, 1e-4}) {
    const Eigen::VectorXd fd = (spec->apply_semigroup(t + d, v) - spec->apply_semigroup(t - d, v)) / (2.0 * d);
    err.push_back(mass_norm(*sys, fd - exact));
  }
  // O(d^2): a tenfold smaller step shrinks the error about a hundredfold
  EXPECT_GT(err[0] / err[1], 80.0);
  EXPECT_LT(err[0] / err[1], 120.0);
}

TEST(Semigroup, SemigroupLawAndSelfAdjointness) {
  const auto& [sys, spec] = lshape3();
  const std::vector<std::pair<double, double>> pairs{{0.01, 0.02}, {0.1, 0.3}, {1e-4, 0.5}};
  for (unsigned s = 0; s < 5; ++s) {
    const Eigen::VectorXd u = test::random_coeffs(spec->size(), 40 + s);
    const Eigen::VectorXd w = test::random_coeffs(spec->size(), 50 + s);
    for (const auto& [a, b] : pairs) {
      const Eigen::VectorXd lhs = spec->apply_semigroup(a, spec->apply_semigroup(b, u));
      EXPECT_LT((lhs - spec->apply_semigroup(a + b, u)).cwiseAbs().maxCoeff(), 1e-9);
      const double left = spec->apply_semigroup(a, u).dot(sys->mass() * w);
      const double right = u.dot(sys->mass() * spec->apply_semigroup(a, w));
      EXPECT_NEAR(left, right, 1e-10);
    }
  }
}

TEST(Semigroup, OperatorNormIsSpectralFactor) {
  const auto& [sys, spec] = lshape3();
  // M-norm operator norm: largest singular value of L^T E L^{-T} with M = L L^T
  const Eigen::LLT<Eigen::MatrixXd> llt(sys->mass().to_dense());
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::Index n = spec->size();
  for (const double t : {0.01, 0.1}) {
    Eigen::MatrixXd E(n, n);
    for (Eigen::Index j = 0; j < n; ++j) E.col(j) = spec->apply_semigroup(t, Eigen::VectorXd::Unit(n, j));
    const Eigen::MatrixXd A = L.transpose() * E * L.transpose().inverse();
    const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
    EXPECT_NEAR(norm, std::exp(-spec->lambda_min() * t), 1e-9);
  }
}

TEST(Semigroup, RejectsNegativeTime) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(spec->size());
  EXPECT_THROW(spec->apply_semigroup(-1e-3, v), Error);
  EXPECT_THROW(spec->apply_time_derivative(0.0, v), Error);
}

TEST(Resolvent, RealAxisNormBelowOne) {
  const auto& [sys, spec] = lshape3();
  for (const double z : {0.5, 10.0, 1e3}) {
    const double expected = z / (z + spec->lambda_min());
    EXPECT_LT(expected, 1.0);
    const auto r = spec->apply_resolvent(z, spec->eigenvectors().col(0));
    EXPECT_NEAR(r.cwiseAbs().maxCoeff() / spec->eigenvectors().col(0).cwiseAbs().maxCoeff(), expected, 1e-10);
    for (unsigned s = 0; s < 3; ++s) {
      const Eigen::VectorXd v = test::random_coeffs(spec->size(), 60 + s);
      const Eigen::VectorXd re = spec->apply_resolvent(z, v).real();
      EXPECT_LE(mass_norm(*sys, re), expected * mass_norm(*sys, v) * (1.0 + 1e-12));
    }
  }
}

TEST(Resolvent, LargeArgumentApproachesIdentity) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v = test::random_coeffs(spec->size(), 7);
  const auto r = spec->apply_resolvent(1e6 * spec->lambda_max(), v);
  EXPECT_LT((r.real() - v).norm() / v.norm(), 1e-3);
  EXPECT_LT(r.imag().norm(), 1e-12);
}

TEST(Resolvent, ImaginaryAxisModulus) {
  const auto& [sys, spec] = lshape3();
  const double l1 = spec->lambda_min();
  const Eigen::VectorXd v1 = spec->eigenvectors().col(0);
  const auto r = spec->apply_resolvent({0.0, l1}, v1);
  const Eigen::Index i = 0;
  EXPECT_NEAR(std::abs(r(i)) / std::abs(v1(i)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_THROW(spec->apply_resolvent(0.0, v1), Error);
}

TEST(FractionalSeminorm, EndpointIdentities) {
  const auto& [sys, spec] = lshape3();
  const Eigen::VectorXd v = test::random_coeffs(spec->size(), 8);
  EXPECT_NEAR(spec->fractional_seminorm(0.0, v), mass_norm(*sys, v), 1e-12);
  EXPECT_NEAR(spec->fractional_seminorm(1.0, v), std::sqrt(sys->stiffness().quadratic_form(v)), 1e-10);
  EXPECT_THROW(spec->fractional_seminorm(2.5, v), Error);
  EXPECT_THROW(spec->fractional_seminorm(-0.1, v), Error);
}

TEST(FractionalSeminorm, InterpolationInequality) {
  const auto& [sys, spec] = lshape3();
  for (const double alpha : {0.55, 0.75, 1.0}) {
    for (unsigned s = 0; s < 20; ++s) {
      const Eigen::VectorXd v = test::random_coeffs(spec->size(), 200 + s);
      const double lhs = spec->fractional_seminorm(1.0 + alpha, v);
      const double rhs =
          std::pow(spec->fractional_seminorm(1.0, v), 1.0 - alpha) * std::pow(spec->fractional_seminorm(2.0, v), alpha);
      EXPECT_LE(lhs, rhs * (1.0 + 1e-9));
    }
  }
}

TEST(SemigroupOperator, WrapsFeFunctions) {
  const auto& [sys, spec] = lshape3();
  const spectral::SemigroupOperator E(sys, spec);
  const fem::FeFunction v(sys->space_ptr(), test::random_coeffs(spec->size(), 9));
  EXPECT_EQ(E.apply(0.2, v).coefficients(), spec->apply_semigroup(0.2, v.coefficients()));
  EXPECT_EQ(E.time_derivative(0.2, v).coefficients(), spec->apply_time_derivative(0.2, v.coefficients()));
}

// Two independent routes to E_h(t): dense eigenbasis and contour quadrature with sparse solves.
TEST(Contour, MatchesDenseEvolution) {
  const auto& [sys, spec] = lshape3();
  const spectral::ContourPropagator prop(sys);
  Eigen::MatrixXd c(spec->size(), 2);
  c.col(0) = test::random_coeffs(spec->size(), 70);
  c.col(1) = spec->eigenvectors().col(3);
  const Eigen::MatrixXd loads = sys->mass().eigen() * c;
  const std::vector<double> times{1e-4, 3e-3, 0.02, 0.1, 0.5, 1.0};
  std::size_t calls = 0;
  prop.propagate(loads, times, 2, [&](std::size_t k, const std::vector<Eigen::MatrixXd>& d) {
    ++calls;
    for (int order = 0; order <= 2; ++order) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        const Eigen::VectorXd exact = spec->evolve(times[k], c.col(j), order);
        // t^k d^k/dt^k E_h(t) is uniformly bounded, so errors are measured on that scale
        const double scale = std::pow(times[k], -order) * c.col(j).cwiseAbs().maxCoeff();
        EXPECT_LT((d[static_cast<std::size_t>(order)].col(j) - exact).cwiseAbs().maxCoeff(), 1e-9 * scale)
            << "t=" << times[k] << " order " << order;
      }
    }
  });
  EXPECT_EQ(calls, times.size());
  EXPECT_GT(prop.factorizations(), 0u);
}
