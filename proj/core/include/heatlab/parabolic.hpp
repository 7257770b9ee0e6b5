#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/fe_function.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab::parabolic {

/// Time nodes and weights of a composite quadrature.
struct TimeGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// `panels` uniform panels on [0, T] with `per_panel` Gauss-Legendre nodes each.
TimeGrid gauss_legendre_panels(double T, int panels, int per_panel);
/// Panels [2^{-k-1}, 2^{-k}] for k = 0..levels-1, graded toward t = 0.
TimeGrid dyadic_panels(int levels, int per_panel);

enum class TimeProfile { constant, exponential, cosine, square_wave };

/// g(t) for the separable and modal kinds. `parameter` is the angular frequency
/// for cosine and the half period for the square wave (which starts at +1).
struct Profile {
  TimeProfile kind = TimeProfile::constant;
  double parameter = 0.0;
  double operator()(double t) const;
};

/// Right-hand side P_h f(t) of the semi-discrete problem.
struct SourceTerm {
  enum class Kind { separable, piecewise_constant, modal };
  Kind kind = Kind::separable;
  double T = 1.0;
  Profile profile;              ///< separable and modal kinds
  Eigen::VectorXd spatial;      ///< separable: coefficients of w_h; modal: eigenbasis coefficients
  Eigen::MatrixXd steps;        ///< piecewise constant: column k is P_h f on [kT/m, (k+1)T/m)

  static SourceTerm separable(Profile g, Eigen::VectorXd w, double T = 1.0);
  static SourceTerm piecewise_constant(Eigen::MatrixXd steps, double T = 1.0);
  static SourceTerm modal(Profile g, Eigen::VectorXd coefficients, double T = 1.0);
};

/// u_h, d_t u_h and Delta_h u_h at the sample times, one column per time.
struct TrajectorySample {
  std::vector<double> times;
  Eigen::MatrixXd u;
  Eigen::MatrixXd dt_u;
  Eigen::MatrixXd laplacian_u;
  Eigen::MatrixXd source;  ///< P_h f at the sample times
};

/// Modal Duhamel coefficient a(t) = int_0^t e^{-lambda (t-s)} g(s) ds in closed form.
double duhamel(const Profile& g, double lambda, double t);

/// Solves with u_h(0) = 0 exactly in time, mode by mode.
TrajectorySample solve_semidiscrete(const spectral::SpectralDecomposition& spec, const SourceTerm& f,
                                    const std::vector<double>& times);

/// Modal coefficients of u_h(t) (one column per time); the exact solution in the eigenbasis.
Eigen::MatrixXd modal_solution(const spectral::SpectralDecomposition& spec, const SourceTerm& f,
                               const std::vector<double>& times);

/// L^p(0,T; L^q) norm of columns sampled on a time grid; p = kInf takes the max over nodes.
double bochner_norm(const fem::FeSpace& space, const TimeGrid& grid, const Eigen::MatrixXd& columns, double p,
                    double q);

/// "TIME t" header followed by the FE function block, per sample.
void write_trajectory(std::ostream& out, const TrajectorySample& traj);

}  // namespace heatlab::parabolic
