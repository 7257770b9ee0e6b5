#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "heatlab/assembly.hpp"
#include "heatlab/estimators.hpp"
#include "heatlab/fe_function.hpp"
#include "heatlab/projection.hpp"
#include "heatlab/quadrature.hpp"
#include "support.hpp"

using namespace heatlab;
using fem::kInf;
using mesh::Point;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::Vector2d grad_sinsin(const Point& x) {
  return {pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
}

// ||grad u - grad u_h||_{L2} with the twelve-point rule.
double energy_error(const fem::FeSpace& space, const Eigen::VectorXd& c) {
  const auto& rule = fem::QuadratureRule::twelve_point();
  const auto& m = space.mesh();
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      Point x = Point::Zero();
      for (int k = 0; k < 3; ++k) x += b[static_cast<std::size_t>(k)] * m.points()[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
      const Eigen::Vector2d e = grad_sinsin(x) - space.evaluate_gradient(c, t, b);
      sum += rule.weights[q] * m.area(t) * e.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

fem::ScalarField as_field(const fem::FeSpace& space, const Eigen::VectorXd& c) {
  return [&space, c](const Point& x) { return space.evaluate(c, x); };
}

fem::FieldWithGradient as_field_with_gradient(const fem::FeSpace& space, const Eigen::VectorXd& c) {
  return {as_field(space, c), [&space, c](const Point& x) {
            const auto loc = space.mesh().locate(x);
            return space.evaluate_gradient(c, loc.triangle, loc.barycentric);
          }};
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST(ReferenceElement, MassMatrix) {
  const auto space = std::make_shared<const fem::FeSpace>(test::reference_triangle_mesh(), 1);
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  EXPECT_LT((fem::element_mass(*space, 0) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((fem::assemble_mass(*space, fem::Constraint::none).to_dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ReferenceElement, StiffnessMatrix) {
  const auto space = std::make_shared<const fem::FeSpace>(test::reference_triangle_mesh(), 1);
  Eigen::Matrix3d expected;
  expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  EXPECT_LT((fem::element_stiffness(*space, 0) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((fem::assemble_stiffness(*space, fem::Constraint::none).to_dense() - expected).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(Assembly, RowSumsWithoutBoundaryConditions) {
  for (const int degree : {1, 2}) {
    for (const std::string domain : {"square", "lshape"}) {
      const fem::FeSpace space(estimators::make_mesh(domain, 3), degree);
      const auto M = fem::assemble_mass(space, fem::Constraint::none);
      const auto K = fem::assemble_stiffness(space, fem::Constraint::none);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.dimension());
      EXPECT_NEAR(ones.dot(M * ones), space.mesh().domain().area(), 1e-12) << domain << " r=" << degree;
      EXPECT_LT((K * ones).cwiseAbs().maxCoeff(), 1e-12) << domain << " r=" << degree;
    }
  }
}

TEST(Assembly, DirichletMatricesAreSymmetricPositiveDefinite) {
  for (const int degree : {1, 2}) {
    const auto sys = test::make_system("lshape", 2, degree);
    EXPECT_TRUE(sys->mass().is_symmetric());
    EXPECT_TRUE(sys->stiffness().is_symmetric());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> m(sys->mass().to_dense());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> k(sys->stiffness().to_dense());
    EXPECT_GT(m.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(k.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Assembly, FreeDimension) {
  const fem::FeSpace p1(estimators::make_mesh("square", 2), 1);
  EXPECT_EQ(p1.num_free(), 9u);
  const fem::FeSpace p2(estimators::make_mesh("square", 2), 2);
  EXPECT_EQ(p2.num_dofs(), 81u);
  EXPECT_EQ(p2.num_free(), 49u);
  const fem::FeSpace l1(estimators::make_mesh("lshape", 3), 1);
  EXPECT_EQ(l1.num_free(), 3u * 64u - 4u * 8u + 1u);
}

TEST(FeSpace, ContinuousAcrossSharedEdges) {
  for (const int degree : {1, 2}) {
    const fem::FeSpace space(estimators::make_mesh("lshape", 2), degree);
    const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(space.num_free()), 7);
    const auto& m = space.mesh();
    // value at the point 1/4 of the way from the lower to the higher node index
    std::map<std::pair<int, int>, double> seen;
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
      const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
      for (std::size_t e = 0; e < 3; ++e) {
        const std::size_t f = (e + 1) % 3;
        const bool low_first = tri[e] < tri[f];
        std::array<double, 3> bary{};
        bary[e] = low_first ? 0.75 : 0.25;
        bary[f] = low_first ? 0.25 : 0.75;
        const double v = space.evaluate_in(c, t, bary);
        const auto key = std::minmax(tri[e], tri[f]);
        auto [it, fresh] = seen.emplace(key, v);
        if (!fresh) EXPECT_NEAR(it->second, v, 1e-12);
      }
    }
  }
}

TEST(FeSpace, VanishesOnBoundary) {
  const fem::FeSpace space(estimators::make_mesh("lshape", 3), 2);
  const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(space.num_free()), 11);
  for (const auto& p : {Point(-1.0, 0.3), Point(0.5, 0.0), Point(0.0, -0.4), Point(0.2, 1.0)}) {
    EXPECT_NEAR(space.evaluate(c, p), 0.0, 1e-12);
  }
}

TEST(Quadrature, WeightsAndMonomialExactness) {
  std::vector<fem::QuadratureRule> rules{fem::QuadratureRule::centroid(), fem::QuadratureRule::seven_point(),
                                         fem::QuadratureRule::twelve_point(), fem::QuadratureRule::conical(6)};
  for (const auto& rule : rules) {
    double wsum = 0.0;
    for (const double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          s += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
        }
        // int_T x^a y^b = a! b! / (a+b+2)! over the unit right triangle of area 1/2
        EXPECT_NEAR(0.5 * s, factorial(a) * factorial(b) / factorial(a + b + 2), 1e-13)
            << "degree " << rule.degree << " monomial " << a << "," << b;
      }
    }
  }
}

TEST(L2Projection, ReproducesFiniteElementFunctions) {
  for (const int degree : {1, 2}) {
    const auto sys = test::make_system("lshape", 2, degree);
    const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 5);
    const auto p = fem::l2_project(*sys, as_field(sys->space(), c));
    EXPECT_LT((p.coefficients() - c).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(L2Projection, SecondOrderConvergence) {
  std::vector<double> err;
  for (const int level : {3, 4, 5}) {
    const auto sys = test::make_system("square", level);
    const auto p = fem::l2_project(*sys, test::sinsin);
    err.push_back(test::l2_error(sys->space(), p.coefficients(), test::sinsin));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    EXPECT_GT(err[i - 1] / err[i], 3.6);
    EXPECT_LT(err[i - 1] / err[i], 4.4);
  }
}

TEST(L2Projection, MaxNormBoundedOnLShape) {
  // smooth sign-like field: tanh across the diagonal
  const auto f = [](const Point& x) { return std::tanh(8.0 * (x.x() + x.y())) * (1 - x.x() * x.x()) * (1 - x.y() * x.y()); };
  for (const int level : {3, 4, 5}) {
    const auto sys = test::make_system("lshape", level);
    const auto p = fem::l2_project(*sys, f);
    EXPECT_LT(fem::fe_lq_norm(p, kInf), 10.0);
  }
}

TEST(RitzProjection, ReproducesFiniteElementFunctions) {
  const auto sys = test::make_system("square", 3);
  const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 9);
  const auto r = fem::ritz_project(*sys, as_field_with_gradient(sys->space(), c));
  EXPECT_LT((r.coefficients() - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RitzProjection, FirstOrderEnergyConvergence) {
  std::vector<double> err;
  for (const int level : {3, 4, 5}) {
    const auto sys = test::make_system("square", level);
    const auto r = fem::ritz_project(*sys, fem::FieldWithGradient{test::sinsin, grad_sinsin});
    err.push_back(energy_error(sys->space(), r.coefficients()));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    EXPECT_GT(err[i - 1] / err[i], 1.85);
    EXPECT_LT(err[i - 1] / err[i], 2.15);
  }
}

TEST(RitzProjection, GalerkinOrthogonality) {
  const auto sys = test::make_system("lshape", 3);
  const auto loads = fem::stiffness_loads(sys->space(), grad_sinsin, 8);
  const Eigen::VectorXd b = fem::gather_free(sys->space(), loads);
  const Eigen::VectorXd r = fem::ritz_project(*sys, loads).coefficients();
  const double grad_u = std::sqrt(r.dot(sys->stiffness() * r));
  for (unsigned s = 0; s < 5; ++s) {
    const Eigen::VectorXd chi = test::random_coeffs(r.size(), 100 + s);
    const double grad_chi = std::sqrt(sys->stiffness().quadratic_form(chi));
    EXPECT_LE(std::abs(b.dot(chi) - r.dot(sys->stiffness() * chi)), 1e-9 * grad_u * grad_chi);
  }
}

TEST(Clement, ReproducesFiniteElementFunctions) {
  const auto sys = test::make_system("lshape", 3);
  const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 13);
  const fem::ClementInterpolator clement(sys->space_ptr());
  const auto v = clement.apply(fem::FeFunction(sys->space_ptr(), c));
  EXPECT_LT((v.coefficients() - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Clement, SecondOrderL2Rate) {
  std::vector<double> h;
  std::vector<double> err;
  for (const int level : {3, 4, 5}) {
    const auto sys = test::make_system("square", level);
    const auto v = fem::clement_interpolate(sys->space_ptr(), test::sinsin);
    h.push_back(sys->space().mesh().h());
    err.push_back(test::l2_error(sys->space(), v.coefficients(), test::sinsin));
  }
  EXPECT_NEAR(estimators::loglog_slope(h, err), 2.0, 0.25);
}

TEST(Clement, Locality) {
  const auto sys = test::make_system("square", 3);
  const auto& space = sys->space();
  const fem::ClementInterpolator clement(sys->space_ptr());
  const auto full = clement.apply(fem::ScalarField(test::sinsin));
  const double h = space.mesh().h();
  for (const int f : {0, 17, 40}) {
    const Point xi = space.dof_points()[static_cast<std::size_t>(space.free_dofs()[static_cast<std::size_t>(f)])];
    const auto cut = clement.apply(fem::ScalarField([&](const Point& x) {
      return (x - xi).norm() <= 2.0 * h ? test::sinsin(x) : 0.0;
    }));
    EXPECT_EQ(cut.coefficients()(f), full.coefficients()(f));
  }
}

TEST(Clement, Linear) {
  const auto sys = test::make_system("lshape", 2);
  const fem::ClementInterpolator clement(sys->space_ptr());
  const auto v = [](const Point& x) { return std::exp(x.x()) * std::cos(2.0 * x.y()); };
  const auto w = [](const Point& x) { return x.x() * x.y() * x.y(); };
  const auto combined = clement.apply(fem::ScalarField([&](const Point& x) { return 2.5 * v(x) - 0.75 * w(x); }));
  const Eigen::VectorXd expected =
      2.5 * clement.apply(fem::ScalarField(v)).coefficients() - 0.75 * clement.apply(fem::ScalarField(w)).coefficients();
  EXPECT_LT((combined.coefficients() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Norms, SingleHatFunction) {
  const auto sys = test::make_system("square", 1);
  ASSERT_EQ(sys->size(), 1u);
  const fem::FeFunction hat(sys->space_ptr(), Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(fem::fe_lq_norm(hat, kInf), 1.0, 1e-15);
  const double l2 = fem::fe_lq_norm(hat, 2.0);
  EXPECT_NEAR(l2 * l2, sys->mass().coeff(0, 0), 1e-12);
  EXPECT_LE(l2, fem::fe_lq_norm(hat, kInf) * std::sqrt(sys->space().mesh().domain().area()));
}

TEST(Norms, MassQuadraticFormMatchesQuadrature) {
  for (const int degree : {1, 2}) {
    const auto sys = test::make_system("lshape", 3, degree);
    const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 21);
    const double l2 = fem::lq_norm(sys->space(), c, 2.0);
    EXPECT_NEAR(l2 * l2, sys->mass().quadratic_form(c), 1e-12 * l2 * l2);
    EXPECT_NEAR(fem::gradient_l2_norm(sys->space(), c), std::sqrt(sys->stiffness().quadratic_form(c)), 1e-10);
  }
}

TEST(Norms, Homogeneity) {
  const auto sys = test::make_system("square", 3);
  const Eigen::VectorXd c = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 23);
  for (const double q : {1.0, 2.0, 4.0, kInf}) {
    EXPECT_NEAR(fem::lq_norm(sys->space(), 3.0 * c, q), 3.0 * fem::lq_norm(sys->space(), c, q), 1e-12);
  }
}

TEST(DiscreteDelta, ReproducesPointValues) {
  for (const int degree : {1, 2}) {
    const auto sys = test::make_system("lshape", 3, degree);
    const Point x0(-0.37, 0.21);
    const auto delta = fem::discrete_delta(*sys, x0);
    for (unsigned s = 0; s < 5; ++s) {
      const Eigen::VectorXd chi = test::random_coeffs(static_cast<Eigen::Index>(sys->size()), 30 + s);
      const double inner = delta.coefficients().dot(sys->mass() * chi);
      const double value = sys->space().evaluate(chi, x0);
      EXPECT_LE(std::abs(inner - value), 1e-9 * std::max(1.0, std::abs(value)));
    }
  }
}

TEST(DiscreteDelta, MagnitudeScalesLikeInverseArea) {
  std::vector<double> k;
  for (const int level : {3, 4, 5}) {
    const auto sys = test::make_system("square", level);
    const auto delta = fem::discrete_delta(*sys, Point(0.3, 0.4));
    const double h = sys->space().mesh().h();
    k.push_back(fem::fe_lq_norm(delta, kInf) * h * h);
  }
  const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(InverseInequality, LevelIndependentConstant) {
  std::vector<double> k;
  for (const int level : {2, 3, 4}) {
    const auto sys = test::make_system("lshape", level);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(sys->size()); ++i) {
      worst = std::max(worst, std::sqrt(sys->stiffness().coeff(i, i) / sys->mass().coeff(i, i)));
    }
    k.push_back(worst * sys->space().mesh().h());
  }
  for (const double v : k) EXPECT_NEAR(v, k.front(), 1e-9 * k.front());
}
