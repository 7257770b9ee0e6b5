#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/assembly.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/parabolic.hpp"
#include "heatlab/probes.hpp"
#include "heatlab/spectral.hpp"
#include "heatlab/transfer.hpp"

namespace heatlab::estimators {

/// One CSV row. `claim` names the measured quantity inside a scenario and is
/// written as the first field of the aux column.
struct EstimateRecord {
  std::string scenario;
  std::string domain;
  int level = 0;
  double h = 0.0;
  int r = 1;
  double p = 0.0;  ///< NaN when not applicable, kInf for infinity
  double q = 0.0;
  double value = 0.0;
  std::string claim;
  std::string aux;
  double K_quasi = 0.0;
  bool skipped = false;
};

/// 9 significant digits, "inf" for infinity; locale independent.
std::string format_number(double x);

inline double ell_h(double h) { return std::log(2.0 + 1.0 / h); }

/// Mesh, system and (when below the cap) spectral decomposition of one level.
struct LevelContext {
  std::string domain;
  int level = 0;
  std::shared_ptr<const mesh::TriMesh> mesh;
  std::shared_ptr<const fem::FeSystem> sys;
  std::shared_ptr<const spectral::SpectralDecomposition> spec;
  double h = 0.0;
  double K_quasi = 0.0;

  int degree() const { return sys->space().degree(); }
  /// Record skeleton with the level metadata filled in.
  EstimateRecord record(const std::string& scenario, const std::string& claim, double p, double q) const;
};

/// Builds the level; `with_spectrum` decomposes (raises problem-too-large above cap).
LevelContext make_level(const std::string& domain, int level, int degree, bool with_spectrum,
                        std::size_t cap = spectral::kDefaultDofCap, const std::string& cache_dir = {});

/// n points log-spaced on [t0, t1].
std::vector<double> log_time_grid(double t0 = 1e-6, double t1 = 10.0, int n = 40);

/// max over probes and t of (||E(t)v||_q + t||E'(t)v||_q)/||v||_q. With kernel
/// points and q = inf, the kernel bound sup (||Gamma||_1 + t||d_t Gamma||_1) goes to aux.
EstimateRecord analyticity_constant(const LevelContext& ctx, double q, const std::vector<double>& t_grid,
                                    const std::vector<Probe>& probes,
                                    const std::vector<Point>* kernel_points = nullptr);

/// Ratio at the smallest grid time, max over probes of | ||E(t)v||_q/||v||_q - 1 |.
double small_time_deviation(const LevelContext& ctx, double q, double t, const std::vector<Probe>& probes);

/// sup over x0 and t of ||Gamma_h(t,.,x0)||_{L1}.
EstimateRecord kernel_l1_bound(const LevelContext& ctx, const std::vector<double>& t_grid,
                               const std::vector<Point>& points);

/// int_0^1 sup_x0 ||d_t Gamma_h(t)||_{L1} dt on dyadic panels; aux carries value/ell_h.
EstimateRecord kernel_dt_l1_time_integral(const LevelContext& ctx, const std::vector<Point>& points, int panels,
                                          int per_panel);

/// ||sup_t |E(t)||v| ||_q on the weighted point grid, divided by ||v||_q.
EstimateRecord maximal_function_ratio(const LevelContext& ctx, double q, const std::vector<double>& t_grid,
                                      const std::vector<Probe>& probes, const WeightedPoints& grid);
/// Same for several q from one pass over the kernel columns.
std::vector<EstimateRecord> maximal_function_ratios(const LevelContext& ctx, const std::vector<double>& qs,
                                                   const std::vector<double>& t_grid, const std::vector<Probe>& probes,
                                                   const WeightedPoints& grid);

struct SourceProbe {
  std::string id;
  parabolic::SourceTerm f;
};

/// Separable sources w(x) g(t) from the standard spatial and temporal families.
std::vector<SourceProbe> standard_sources(const LevelContext& ctx, std::uint64_t seed, double T = 1.0);

/// Supported (p, q): (2,2), (4,4), (4,2), (2,4), (inf,inf).
bool is_maxreg_pair(double p, double q);

/// One record per pair: max over sources of ||Delta_h u_h||_{LpLq}/||P_h f||_{LpLq}.
std::vector<EstimateRecord> maximal_regularity_constants(const LevelContext& ctx,
                                                         const std::vector<std::pair<double, double>>& pairs,
                                                         const std::vector<SourceProbe>& sources, double T = 1.0);
EstimateRecord maximal_regularity_constant(const LevelContext& ctx, double p, double q,
                                           const std::vector<SourceProbe>& sources, double T = 1.0);

/// ||Delta_h u_h||_{L2L2}/||f||_{L2L2} for f = v_1 constant in time, in closed form.
double single_mode_l2_ratio(double lambda, double T = 1.0);

/// First eigenpair of (K, M) by inverse iteration with the sparse Cholesky factor.
std::pair<double, Eigen::VectorXd> first_eigenpair(const fem::FeSystem& sys, double tol = 1e-13,
                                                   int max_iterations = 2000);

/// Fine reference u(t) = e^{-lambda t} phi for the error studies.
struct ModeReference {
  std::shared_ptr<const fem::FeSystem> fine;
  double lambda = 0.0;
  Eigen::VectorXd phi;
};
ModeReference make_mode_reference(std::shared_ptr<const fem::FeSystem> fine);

/// ||u - u_h||_{LinfLinf} / (ell_h^2 min_chi ||u - chi||_{LinfLinf}) with u_h(0) = P_h u(0).
EstimateRecord best_approximation_ratio(const LevelContext& ctx, const fem::NestedTransfer& transfer,
                                        const ModeReference& ref, const std::vector<double>& t_grid);

/// Corollary-type bound: ||u_h - u||_{LpLq} over ||u - R_h u||_{LpLq} + ||P_h u(0) - u_h(0)||_q
/// (times ell_h when p = q = inf).
EstimateRecord corollary_error_bound_check(const LevelContext& ctx, const fem::NestedTransfer& transfer,
                                           const ModeReference& ref, double p, double q);

/// A continuous field with its gradient, used as a projection probe.
struct FieldProbe {
  std::string id;
  fem::FieldWithGradient u;
};

/// sin(pi x) sin(pi y) and, on the L-shape, r^{2/3} sin(2 theta/3) times a cutoff.
std::vector<FieldProbe> projection_probes(const mesh::PolygonalDomain& domain);

/// Two records (claims "P_h" and "R_h"): max over probes of
/// ||u - Pi u||_inf / (ell_h ||u - I_h u||_inf), sampled on a twice-refined mesh.
std::vector<EstimateRecord> projection_linf_stability(const LevelContext& ctx, const std::vector<FieldProbe>& probes);

/// max ||w_h||_inf/||f_h||_inf with Delta_h w_h = f_h.
EstimateRecord deltah_inverse_linf_ratio(const LevelContext& ctx, const std::vector<Probe>& probes);

/// Exponential fit of the envelope of log|delta_{h,x0}| against |x - x0|/h.
struct DeltaDecayFit {
  double slope = 0.0;  ///< per unit |x - x0|/h
  double K = 0.0;      ///< 1/|slope|
  int bins = 0;
};
DeltaDecayFit delta_decay_fit(const fem::FeSystem& sys, const Point& x0, int max_bins = 10);

/// Least-squares rate of ||d_t Gamma_h(t,.,x0)||_{L1} ~ e^{-rate t} over the times.
double long_time_decay_rate(const LevelContext& ctx, const Point& x0, const std::vector<double>& times);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Local norms of F = Gamma_h - Gamma_ref and the weighted sum K around x0.
/// Raises decomposition-unavailable when the coarse mesh cannot host the decomposition.
struct WeightedKResult {
  double K = 0.0;
  int J_star = 0;
  double d_star = 0.0;
};
WeightedKResult weighted_K(const LevelContext& ctx, const fem::NestedTransfer& transfer, const Point& x0,
                           double C_star, int per_panel = 4);

/// Requested kernel source points for the difference studies.
std::vector<Point> kernel_difference_sources(const mesh::PolygonalDomain& domain);

}  // namespace heatlab::estimators
