#include "heatlab/parabolic.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "heatlab/error.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::parabolic {

TimeGrid gauss_legendre_panels(double T, int panels, int per_panel) {
  require(T > 0.0 && panels > 0 && per_panel > 0, ErrorCode::invalid_argument, "invalid time grid");
  TimeGrid g;
  for (int k = 0; k < panels; ++k) {
    const fem::GaussLegendre gl(per_panel, T * k / panels, T * (k + 1) / panels);
    g.nodes.insert(g.nodes.end(), gl.nodes.begin(), gl.nodes.end());
    g.weights.insert(g.weights.end(), gl.weights.begin(), gl.weights.end());
  }
  return g;
}

TimeGrid dyadic_panels(int levels, int per_panel) {
  require(levels > 0 && per_panel > 0, ErrorCode::invalid_argument, "invalid time grid");
  TimeGrid g;
  for (int k = levels - 1; k >= 0; --k) {
    const fem::GaussLegendre gl(per_panel, std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k));
    g.nodes.insert(g.nodes.end(), gl.nodes.begin(), gl.nodes.end());
    g.weights.insert(g.weights.end(), gl.weights.begin(), gl.weights.end());
  }
  return g;
}

double Profile::operator()(double t) const {
  switch (kind) {
    case TimeProfile::constant:
      return 1.0;
    case TimeProfile::exponential:
      return std::exp(-t);
    case TimeProfile::cosine:
      return std::cos(parameter * t);
    case TimeProfile::square_wave:
      return static_cast<long long>(std::floor(t / parameter)) % 2 == 0 ? 1.0 : -1.0;
  }
  raise(ErrorCode::invalid_argument, "unsupported time profile");
}

SourceTerm SourceTerm::separable(Profile g, Eigen::VectorXd w, double T) {
  SourceTerm f;
  f.kind = Kind::separable;
  f.profile = g;
  f.spatial = std::move(w);
  f.T = T;
  return f;
}

SourceTerm SourceTerm::piecewise_constant(Eigen::MatrixXd steps, double T) {
  require(steps.cols() > 0, ErrorCode::invalid_argument, "piecewise-constant source needs at least one step");
  SourceTerm f;
  f.kind = Kind::piecewise_constant;
  f.steps = std::move(steps);
  f.T = T;
  return f;
}

SourceTerm SourceTerm::modal(Profile g, Eigen::VectorXd coefficients, double T) {
  SourceTerm f;
  f.kind = Kind::modal;
  f.profile = g;
  f.spatial = std::move(coefficients);
  f.T = T;
  return f;
}

namespace {

/// int_a^b e^{-lambda (t - s)} ds for a <= b <= t.
double box(double lambda, double a, double b, double t) {
  if (b <= a) return 0.0;
  if (lambda == 0.0) return b - a;
  return std::exp(-lambda * (t - b)) * -std::expm1(-lambda * (b - a)) / lambda;
}

}  // namespace

double duhamel(const Profile& g, double lambda, double t) {
  require(t >= 0.0, ErrorCode::invalid_argument, "time must be non-negative");
  switch (g.kind) {
    case TimeProfile::constant:
      return box(lambda, 0.0, t, t);
    case TimeProfile::exponential: {
      const double d = lambda - 1.0;
      if (d == 0.0) return t * std::exp(-t);
      return std::exp(-t) * -std::expm1(-d * t) / d;
    }
    case TimeProfile::cosine: {
      const double w = g.parameter;
      return (lambda * std::cos(w * t) + w * std::sin(w * t) - lambda * std::exp(-lambda * t)) /
             (lambda * lambda + w * w);
    }
    case TimeProfile::square_wave: {
      require(g.parameter > 0.0, ErrorCode::invalid_argument, "square wave needs a positive half period");
      double sum = 0.0;
      double sign = 1.0;
      for (double a = 0.0; a < t; a += g.parameter, sign = -sign) sum += sign * box(lambda, a, std::min(a + g.parameter, t), t);
      return sum;
    }
  }
  raise(ErrorCode::invalid_argument, "unsupported time profile");
}

namespace {

struct ModalData {
  Eigen::MatrixXd a;       ///< u_h modal coefficients
  Eigen::MatrixXd source;  ///< P_h f modal coefficients
};

ModalData modal_data(const spectral::SpectralDecomposition& spec, const SourceTerm& f,
                     const std::vector<double>& times) {
  const Eigen::Index n = spec.size();
  const auto nt = static_cast<Eigen::Index>(times.size());
  const Eigen::VectorXd& lambda = spec.eigenvalues();
  for (double t : times) {
    require(t >= 0.0 && t <= f.T * (1.0 + 1e-12), ErrorCode::invalid_argument, "sample time outside [0, T]");
  }
  ModalData out{Eigen::MatrixXd::Zero(n, nt), Eigen::MatrixXd::Zero(n, nt)};
  switch (f.kind) {
    case SourceTerm::Kind::separable:
    case SourceTerm::Kind::modal: {
      require(f.spatial.size() == n, ErrorCode::invalid_argument, "source length does not match the space");
      const Eigen::VectorXd b = f.kind == SourceTerm::Kind::separable ? spec.modal(f.spatial) : f.spatial;
      for (Eigen::Index k = 0; k < nt; ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        const double gt = f.profile(t);
        for (Eigen::Index i = 0; i < n; ++i) out.a(i, k) = b(i) * duhamel(f.profile, lambda(i), t);
        out.source.col(k) = gt * b;
      }
      return out;
    }
    case SourceTerm::Kind::piecewise_constant: {
      require(f.steps.rows() == n, ErrorCode::invalid_argument, "source length does not match the space");
      const Eigen::MatrixXd b = spec.modal(f.steps);
      const Eigen::Index m = b.cols();
      const double dt = f.T / static_cast<double>(m);
      for (Eigen::Index k = 0; k < nt; ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        const Eigen::Index current = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(std::floor(t / dt)));
        out.source.col(k) = b.col(current);
        for (Eigen::Index s = 0; s < m && s * dt < t; ++s) {
          const double lo = s * dt;
          const double hi = std::min((s + 1) * dt, t);
          for (Eigen::Index i = 0; i < n; ++i) out.a(i, k) += b(i, s) * box(lambda(i), lo, hi, t);
        }
      }
      return out;
    }
  }
  raise(ErrorCode::invalid_argument, "unsupported source kind");
}

}  // namespace

Eigen::MatrixXd modal_solution(const spectral::SpectralDecomposition& spec, const SourceTerm& f,
                               const std::vector<double>& times) {
  return modal_data(spec, f, times).a;
}

TrajectorySample solve_semidiscrete(const spectral::SpectralDecomposition& spec, const SourceTerm& f,
                                    const std::vector<double>& times) {
  const ModalData md = modal_data(spec, f, times);
  const Eigen::MatrixXd& v = spec.eigenvectors();
  TrajectorySample traj;
  traj.times = times;
  traj.u = v * md.a;
  traj.laplacian_u = -(v * (spec.eigenvalues().asDiagonal() * md.a));
  traj.source = v * md.source;
  traj.dt_u = traj.laplacian_u + traj.source;
  return traj;
}

double bochner_norm(const fem::FeSpace& space, const TimeGrid& grid, const Eigen::MatrixXd& columns, double p,
                    double q) {
  require(p >= 1.0 && q >= 1.0, ErrorCode::invalid_argument, "Bochner exponents must be >= 1");
  require(columns.cols() == static_cast<Eigen::Index>(grid.size()), ErrorCode::invalid_argument,
          "one column per time node is required");
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = fem::lq_norm(space, columns.col(static_cast<Eigen::Index>(k)), q);
    if (std::isinf(p)) {
      acc = std::max(acc, v);
    } else {
      acc += grid.weights[k] * std::pow(v, p);
    }
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

void write_trajectory(std::ostream& out, const TrajectorySample& traj) {
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << "TIME " << std::setprecision(17) << traj.times[k] << '\n';
    const auto col = traj.u.col(static_cast<Eigen::Index>(k));
    out << "DOF " << col.size() << '\n';
    for (Eigen::Index i = 0; i < col.size(); ++i) out << col(i) << '\n';
  }
}

}  // namespace heatlab::parabolic
