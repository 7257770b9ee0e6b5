#include "heatlab/estimators.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <Eigen/Sparse>

#include "heatlab/dyadic.hpp"
#include "heatlab/error.hpp"
#include "heatlab/fe_function.hpp"
#include "heatlab/projection.hpp"
#include "heatlab/quadrature.hpp"

namespace heatlab::estimators {

using fem::kInf;

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

EstimateRecord LevelContext::record(const std::string& scenario, const std::string& claim, double p,
                                    double q) const {
  EstimateRecord r;
  r.scenario = scenario;
  r.domain = domain;
  r.level = level;
  r.h = h;
  r.r = degree();
  r.p = p;
  r.q = q;
  r.claim = claim;
  r.K_quasi = K_quasi;
  return r;
}

LevelContext make_level(const std::string& domain, int level, int degree, bool with_spectrum, std::size_t cap,
                        const std::string& cache_dir) {
  LevelContext ctx;
  ctx.domain = domain;
  ctx.level = level;
  ctx.mesh = make_mesh(domain, level);
  ctx.sys = fem::FeSystem::create(ctx.mesh, degree);
  ctx.h = ctx.mesh->h();
  ctx.K_quasi = mesh::mesh_quality(*ctx.mesh).K_quasi;
  if (with_spectrum) ctx.spec = spectral::decompose_cached(*ctx.sys, cache_dir, domain, level, cap);
  return ctx;
}

std::vector<double> log_time_grid(double t0, double t1, int n) {
  require(t0 > 0.0 && t1 > t0 && n >= 2, ErrorCode::invalid_argument, "log grid needs 0 < t0 < t1 and n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double a = std::log(t0);
  const double b = std::log(t1);
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  t.back() = t1;
  return t;
}

namespace {

const spectral::SpectralDecomposition& need_spec(const LevelContext& ctx) {
  require(ctx.spec != nullptr, ErrorCode::problem_too_large, "level has no spectral decomposition");
  return *ctx.spec;
}

Eigen::MatrixXd stack(const std::vector<Probe>& probes) {
  require(!probes.empty(), ErrorCode::invalid_argument, "empty probe family");
  Eigen::MatrixXd c(probes.front().coeffs.size(), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t k = 0; k < probes.size(); ++k) c.col(static_cast<Eigen::Index>(k)) = probes[k].coeffs;
  return c;
}

Eigen::VectorXd factors(const Eigen::VectorXd& lambda, double t, int order) {
  Eigen::VectorXd d(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) d(i) = std::pow(-lambda(i), order) * std::exp(-lambda(i) * t);
  return d;
}

std::string kv(const std::string& key, double v) { return key + "=" + format_number(v); }
std::string kv(const std::string& key, const std::string& v) { return key + "=" + v; }

std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += ';';
    out += p;
  }
  return out;
}

/// Values of FE functions at every quadrature point, with the point weights.
struct QuadratureSampler {
  Eigen::SparseMatrix<double> Q;  ///< quadrature point x free dof
  Eigen::VectorXd w;

  explicit QuadratureSampler(const fem::FeSpace& space) {
    const auto& mesh = space.mesh();
    const auto& rule = fem::QuadratureRule::for_degree(space.degree());
    const auto nq = static_cast<Eigen::Index>(mesh.num_triangles() * rule.size());
    std::vector<Eigen::Triplet<double>> trip;
    w.resize(nq);
    Eigen::Index row = 0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto dofs = space.element_dofs(static_cast<int>(t));
      const double area = mesh.area(static_cast<int>(t));
      for (std::size_t k = 0; k < rule.size(); ++k, ++row) {
        const auto phi = fem::basis_values(space.degree(), rule.points[k]);
        w(row) = area * rule.weights[k];
        for (std::size_t a = 0; a < dofs.size(); ++a) {
          const int f = space.free_index(dofs[a]);
          if (f >= 0) trip.emplace_back(row, f, phi[a]);
        }
      }
    }
    Q.resize(nq, static_cast<Eigen::Index>(space.num_free()));
    Q.setFromTriplets(trip.begin(), trip.end());
  }
};

double discrete_lq(const Eigen::VectorXd& values, const std::vector<double>& weights, double q) {
  if (std::isinf(q)) return values.cwiseAbs().maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) s += weights[static_cast<std::size_t>(i)] * std::pow(std::abs(values(i)), q);
  return std::pow(s, 1.0 / q);
}

/// L^p norm in time of per-node values on a grid; p = inf takes the max.
double time_norm(const parabolic::TimeGrid& grid, const std::vector<double>& v, double p) {
  if (std::isinf(p)) return *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) s += grid.weights[n] * std::pow(v[n], p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

double small_time_deviation(const LevelContext& ctx, double q, double t, const std::vector<Probe>& probes) {
  const auto& spec = need_spec(ctx);
  const auto& space = ctx.sys->space();
  const Eigen::MatrixXd a = spec.modal(stack(probes));
  const Eigen::MatrixXd u = spec.eigenvectors() * (factors(spec.eigenvalues(), t, 0).asDiagonal() * a);
  double dev = 0.0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const double r = fem::lq_norm(space, u.col(static_cast<Eigen::Index>(k)), q) / fem::lq_norm(space, probes[k].coeffs, q);
    dev = std::max(dev, std::abs(r - 1.0));
  }
  return dev;
}

EstimateRecord analyticity_constant(const LevelContext& ctx, double q, const std::vector<double>& t_grid,
                                    const std::vector<Probe>& probes, const std::vector<Point>* kernel_points) {
  require(q == 1.0 || q == 2.0 || q == 4.0 || std::isinf(q), ErrorCode::invalid_argument,
          "analyticity needs q in {1, 2, 4, inf}");
  require(!t_grid.empty(), ErrorCode::invalid_argument, "empty time grid");
  const auto& spec = need_spec(ctx);
  const auto& space = ctx.sys->space();
  const Eigen::MatrixXd a = spec.modal(stack(probes));
  std::vector<double> base(probes.size());
  for (std::size_t k = 0; k < probes.size(); ++k) base[k] = fem::lq_norm(space, probes[k].coeffs, q);

  double best = -1.0;
  std::size_t arg_probe = 0;
  double arg_t = 0.0;
  for (const double t : t_grid) {
    const Eigen::MatrixXd u = spec.eigenvectors() * (factors(spec.eigenvalues(), t, 0).asDiagonal() * a);
    const Eigen::MatrixXd du = spec.eigenvectors() * (factors(spec.eigenvalues(), t, 1).asDiagonal() * a);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      const double v = (fem::lq_norm(space, u.col(col), q) + t * fem::lq_norm(space, du.col(col), q)) / base[k];
      if (v > best) {
        best = v;
        arg_probe = k;
        arg_t = t;
      }
    }
  }

  auto rec = ctx.record("analyticity", "analyticity", kInf, q);
  rec.value = best;
  std::string kernel;
  if (kernel_points != nullptr && std::isinf(q)) {
    const kernel::KernelBank bank(ctx.sys, ctx.spec, *kernel_points);
    double kb = 0.0;
    for (const double t : t_grid) {
      const Eigen::VectorXd n0 = bank.l1_norms(t, 0);
      const Eigen::VectorXd n1 = bank.l1_norms(t, 1);
      kb = std::max(kb, (n0 + t * n1).maxCoeff());
    }
    kernel = kv("kernel_bound", kb);
  }
  rec.aux = join({kv("probe", probes[arg_probe].id), kv("t", arg_t), kernel,
                  kv("dev_tmin", small_time_deviation(ctx, q, t_grid.front(), probes))});
  return rec;
}

EstimateRecord kernel_l1_bound(const LevelContext& ctx, const std::vector<double>& t_grid,
                               const std::vector<Point>& points) {
  need_spec(ctx);
  const kernel::KernelBank bank(ctx.sys, ctx.spec, points);
  double best = 0.0;
  double arg_t = 0.0;
  Eigen::Index arg_x = 0;
  for (const double t : t_grid) {
    const Eigen::VectorXd n0 = bank.l1_norms(t, 0);
    Eigen::Index j = 0;
    const double m = n0.maxCoeff(&j);
    if (m > best) {
      best = m;
      arg_t = t;
      arg_x = j;
    }
  }
  auto rec = ctx.record("kernels", "gamma-l1", kInf, 1.0);
  rec.value = best;
  const Point& x = points[static_cast<std::size_t>(arg_x)];
  rec.aux = join({kv("t", arg_t), kv("x0", format_number(x.x()) + " " + format_number(x.y()))});
  return rec;
}

EstimateRecord kernel_dt_l1_time_integral(const LevelContext& ctx, const std::vector<Point>& points, int panels,
                                          int per_panel) {
  need_spec(ctx);
  const kernel::KernelBank bank(ctx.sys, ctx.spec, points);
  const auto grid = parabolic::dyadic_panels(panels, per_panel);
  double integral = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) integral += grid.weights[n] * bank.l1_norms(grid.nodes[n], 1).maxCoeff();
  auto rec = ctx.record("kernels", "dt-gamma-l1-time", 1.0, 1.0);
  rec.value = integral;
  rec.aux = join({kv("per_ell", integral / ell_h(ctx.h)), kv("t_min", grid.nodes.front())});
  return rec;
}

std::vector<EstimateRecord> maximal_function_ratios(const LevelContext& ctx, const std::vector<double>& qs,
                                                   const std::vector<double>& t_grid, const std::vector<Probe>& probes,
                                                   const WeightedPoints& grid) {
  for (const double q : qs) require(q > 1.0, ErrorCode::invalid_argument, "maximal function needs q > 1");
  require(!grid.points.empty(), ErrorCode::invalid_argument, "empty probe-point grid");
  need_spec(ctx);
  const auto& space = ctx.sys->space();
  const kernel::KernelBank bank(ctx.sys, ctx.spec, grid.points);
  const QuadratureSampler sampler(space);

  const Eigen::MatrixXd v = stack(probes);
  // |v| w at the quadrature points, one column per probe
  const Eigen::MatrixXd abs_v = ((sampler.Q * v).cwiseAbs().array().colwise() * sampler.w.array()).matrix();
  const auto npts = static_cast<Eigen::Index>(grid.points.size());
  Eigen::MatrixXd sup = Eigen::MatrixXd::Zero(npts, static_cast<Eigen::Index>(probes.size()));
  Eigen::MatrixXi arg_t = Eigen::MatrixXi::Zero(npts, static_cast<Eigen::Index>(probes.size()));

  std::vector<double> times{0.0};
  times.insert(times.end(), t_grid.begin(), t_grid.end());
  for (std::size_t n = 0; n < times.size(); ++n) {
    const Eigen::MatrixXd gamma = (sampler.Q * bank.slices(times[n], 0)).cwiseAbs();
    const Eigen::MatrixXd m = gamma.transpose() * abs_v;  // points x probes
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      for (Eigen::Index j = 0; j < npts; ++j) {
        if (m(j, k) > sup(j, k)) {
          sup(j, k) = m(j, k);
          arg_t(j, k) = static_cast<int>(n);
        }
      }
    }
  }

  std::vector<EstimateRecord> out;
  for (const double q : qs) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      const double r = discrete_lq(sup.col(col), grid.weights, q) / fem::lq_norm(space, probes[k].coeffs, q);
      if (r > best) {
        best = r;
        arg = k;
      }
    }
    Eigen::Index jmax = 0;
    sup.col(static_cast<Eigen::Index>(arg)).maxCoeff(&jmax);
    auto rec = ctx.record("maximal-function", "maximal-function", kInf, q);
    rec.value = best;
    rec.aux = join({kv("probe", probes[arg].id),
                    kv("t", times[static_cast<std::size_t>(arg_t(jmax, static_cast<Eigen::Index>(arg)))])});
    out.push_back(std::move(rec));
  }
  return out;
}

EstimateRecord maximal_function_ratio(const LevelContext& ctx, double q, const std::vector<double>& t_grid,
                                      const std::vector<Probe>& probes, const WeightedPoints& grid) {
  return maximal_function_ratios(ctx, {q}, t_grid, probes, grid).front();
}

std::vector<SourceProbe> standard_sources(const LevelContext& ctx, std::uint64_t seed, double T) {
  using parabolic::Profile;
  using parabolic::TimeProfile;
  std::vector<Probe> spatial;
  if (ctx.spec != nullptr) spatial.push_back(make_probe_family(ProbeKind::eigenmodes, *ctx.sys, ctx.spec.get(), 1, seed).probes[0]);
  for (const auto kind : {ProbeKind::random, ProbeKind::corner_bumps, ProbeKind::nodal_spikes, ProbeKind::checkerboard}) {
    spatial.push_back(make_probe_family(kind, *ctx.sys, nullptr, 2, seed).probes[1]);
  }
  const std::vector<std::pair<std::string, Profile>> profiles{
      {"const", Profile{TimeProfile::constant, 0.0}},
      {"exp", Profile{TimeProfile::exponential, 0.0}},
      {"cos20", Profile{TimeProfile::cosine, 20.0}},
      {"square16", Profile{TimeProfile::square_wave, 1.0 / 16.0}},
      {"square64", Profile{TimeProfile::square_wave, 1.0 / 64.0}},
  };
  std::vector<SourceProbe> out;
  for (const auto& w : spatial) {
    for (const auto& [name, g] : profiles) out.push_back({w.id + "*" + name, parabolic::SourceTerm::separable(g, w.coeffs, T)});
  }
  return out;
}

bool is_maxreg_pair(double p, double q) {
  if (std::isinf(p) || std::isinf(q)) return std::isinf(p) && std::isinf(q);
  return (p == 2.0 || p == 4.0) && (q == 2.0 || q == 4.0);
}

std::vector<EstimateRecord> maximal_regularity_constants(const LevelContext& ctx,
                                                         const std::vector<std::pair<double, double>>& pairs,
                                                         const std::vector<SourceProbe>& sources, double T) {
  for (const auto& [p, q] : pairs) {
    require(is_maxreg_pair(p, q), ErrorCode::invalid_argument,
            "unsupported (p,q) pair (" + format_number(p) + "," + format_number(q) + ")");
  }
  require(!sources.empty(), ErrorCode::invalid_argument, "empty source family");
  const auto& spec = need_spec(ctx);
  const auto& space = ctx.sys->space();
  // panel ends at multiples of 1/64 keep the square waves' jumps on panel boundaries
  const auto grid = parabolic::gauss_legendre_panels(T, 64, 4);
  std::set<double> qs;
  for (const auto& pq : pairs) qs.insert(pq.second);

  std::vector<double> best(pairs.size(), -1.0);
  std::vector<std::size_t> arg(pairs.size(), 0);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& f = sources[s].f;
    require(f.kind == parabolic::SourceTerm::Kind::separable, ErrorCode::invalid_argument,
            "maximal regularity probes must be separable");
    const Eigen::MatrixXd a = parabolic::modal_solution(spec, f, grid.nodes);
    const Eigen::MatrixXd lap = -(spec.eigenvectors() * (spec.eigenvalues().asDiagonal() * a));
    std::map<double, std::vector<double>> lap_q;
    std::map<double, std::vector<double>> src_q;
    for (const double q : qs) {
      const double wq = fem::lq_norm(space, f.spatial, q);
      auto& lv = lap_q[q];
      auto& sv = src_q[q];
      for (std::size_t n = 0; n < grid.size(); ++n) {
        lv.push_back(fem::lq_norm(space, lap.col(static_cast<Eigen::Index>(n)), q));
        sv.push_back(std::abs(f.profile(grid.nodes[n])) * wq);
      }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto [p, q] = pairs[i];
      const double r = time_norm(grid, lap_q[q], p) / time_norm(grid, src_q[q], p);
      if (r > best[i]) {
        best[i] = r;
        arg[i] = s;
      }
    }
  }
  std::vector<EstimateRecord> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [p, q] = pairs[i];
    auto rec = ctx.record("maxreg", "maxreg", p, q);
    rec.value = best[i];
    rec.aux = join({kv("source", sources[arg[i]].id),
                    std::isinf(p) ? kv("per_ell", best[i] / ell_h(ctx.h)) : std::string()});
    out.push_back(std::move(rec));
  }
  return out;
}

EstimateRecord maximal_regularity_constant(const LevelContext& ctx, double p, double q,
                                           const std::vector<SourceProbe>& sources, double T) {
  return maximal_regularity_constants(ctx, {{p, q}}, sources, T).front();
}

double single_mode_l2_ratio(double lambda, double T) {
  require(lambda > 0.0 && T > 0.0, ErrorCode::invalid_argument, "need lambda > 0 and T > 0");
  // int_0^T (1 - e^{-lambda t})^2 dt
  const double integral = T + 2.0 * std::expm1(-lambda * T) / lambda - std::expm1(-2.0 * lambda * T) / (2.0 * lambda);
  return std::sqrt(integral / T);
}

std::pair<double, Eigen::VectorXd> first_eigenpair(const fem::FeSystem& sys, double tol, int max_iterations) {
  const auto& M = sys.mass();
  const auto& K = sys.stiffness();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sys.size()));
  x /= std::sqrt(M.quadratic_form(x));
  double lambda = K.quadratic_form(x);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd y = sys.solve_stiffness(M * x);
    y /= std::sqrt(M.quadratic_form(y));
    const double next = K.quadratic_form(y);
    const double change = std::sqrt(M.quadratic_form(y - x));
    x = std::move(y);
    lambda = next;
    if (change < tol) break;
  }
  if (x.sum() < 0.0) x = -x;
  return {lambda, x};
}

ModeReference make_mode_reference(std::shared_ptr<const fem::FeSystem> fine) {
  auto [lambda, phi] = first_eigenpair(*fine);
  return ModeReference{std::move(fine), lambda, std::move(phi)};
}

namespace {

double fine_linf(const fem::NestedTransfer& tr, const Eigen::VectorXd& v) {
  return fem::lq_norm(tr.fine().space(), v, kInf);
}

}  // namespace

EstimateRecord best_approximation_ratio(const LevelContext& ctx, const fem::NestedTransfer& transfer,
                                        const ModeReference& ref, const std::vector<double>& t_grid) {
  const auto& spec = need_spec(ctx);
  require(&transfer.coarse() == ctx.sys.get() && &transfer.fine() == ref.fine.get(), ErrorCode::invalid_argument,
          "transfer does not connect this level to the reference");
  const Eigen::VectorXd uh0 = transfer.l2_project(ref.phi);
  const Eigen::VectorXd a0 = spec.modal(uh0);
  std::vector<double> times{0.0};
  for (const double t : t_grid) {
    if (t <= 1.0) times.push_back(t);
  }
  double num = 0.0;
  double arg_t = 0.0;
  for (const double t : times) {
    const Eigen::VectorXd uh = spec.eigenvectors() * (factors(spec.eigenvalues(), t, 0).asDiagonal() * a0);
    const double e = fine_linf(transfer, std::exp(-ref.lambda * t) * ref.phi - transfer.prolong(uh));
    if (e > num) {
      num = e;
      arg_t = t;
    }
  }
  // u(t) = e^{-lambda t} phi and each chi is linear, so the sup over t sits at t = 0
  const fem::ClementInterpolator clement(ctx.sys->space_ptr());
  const std::vector<std::pair<std::string, Eigen::VectorXd>> chis{
      {"I_h", clement.apply(transfer.coarse_element_loads(ref.phi)).coefficients()},
      {"P_h", uh0},
      {"R_h", transfer.ritz_project(ref.phi)},
  };
  double den = std::numeric_limits<double>::infinity();
  std::string which;
  for (const auto& [name, c] : chis) {
    const double d = fine_linf(transfer, ref.phi - transfer.prolong(c));
    if (d < den) {
      den = d;
      which = name;
    }
  }
  auto rec = ctx.record("best-approx", "best-approx", kInf, kInf);
  const double l = ell_h(ctx.h);
  if (den == 0.0) {
    rec.value = 0.0;
    rec.aux = join({"vacuous", kv("numerator", num)});
  } else {
    rec.value = num / (l * l * den);
    rec.aux = join({kv("surrogate", which), kv("t", arg_t), kv("numerator", num), kv("best", den)});
  }
  return rec;
}

EstimateRecord corollary_error_bound_check(const LevelContext& ctx, const fem::NestedTransfer& transfer,
                                           const ModeReference& ref, double p, double q) {
  require((p == 2.0 && q == 2.0) || (std::isinf(p) && std::isinf(q)), ErrorCode::invalid_argument,
          "corollary check needs (p,q) in {(2,2), (inf,inf)}");
  const auto& spec = need_spec(ctx);
  const auto& fine_space = transfer.fine().space();
  const Eigen::VectorXd uh0 = transfer.l2_project(ref.phi);
  const Eigen::VectorXd a0 = spec.modal(uh0);
  auto grid = parabolic::gauss_legendre_panels(1.0, 64, 4);
  if (std::isinf(p)) {
    grid.nodes.insert(grid.nodes.begin(), 0.0);
    grid.weights.insert(grid.weights.begin(), 0.0);
  }
  std::vector<double> err(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double t = grid.nodes[n];
    const Eigen::VectorXd uh = spec.eigenvectors() * (factors(spec.eigenvalues(), t, 0).asDiagonal() * a0);
    err[n] = fem::lq_norm(fine_space, std::exp(-ref.lambda * t) * ref.phi - transfer.prolong(uh), q);
  }
  const double lhs = time_norm(grid, err, p);
  const double ritz = fem::lq_norm(fine_space, ref.phi - transfer.prolong(transfer.ritz_project(ref.phi)), q);
  const double lam = ref.lambda;
  const double time_factor = std::isinf(p) ? 1.0 : std::sqrt(-std::expm1(-2.0 * lam) / (2.0 * lam));
  // u_h(0) is P_h u(0) by construction; the term is evaluated rather than assumed
  const double init = fem::lq_norm(fine_space, transfer.prolong(uh0) - transfer.prolong(transfer.l2_project(ref.phi)), q);
  double rhs = ritz * time_factor + init;
  if (std::isinf(p)) rhs *= ell_h(ctx.h);
  auto rec = ctx.record("corollary23", "corollary23", p, q);
  if (rhs == 0.0 && lhs == 0.0) {
    rec.value = 0.0;
    rec.aux = "vacuous";
  } else {
    rec.value = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    rec.aux = join({kv("lhs", lhs), kv("ritz_term", ritz * time_factor), kv("init_term", init)});
  }
  return rec;
}

std::vector<FieldProbe> projection_probes(const mesh::PolygonalDomain& domain) {
  constexpr double pi = std::numbers::pi;
  std::vector<FieldProbe> out;
  out.push_back({"sinsin",
                 {[](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); },
                  [](const Point& x) {
                    return Eigen::Vector2d(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                                           pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
                  }}});
  if (domain.name() == "square") {
    out.push_back({"bubble-exp",
                   {[](const Point& x) { return x.x() * (1 - x.x()) * x.y() * (1 - x.y()) * std::exp(x.x() + x.y()); },
                    [](const Point& x) {
                      const double e = std::exp(x.x() + x.y());
                      const double bx = x.x() * (1 - x.x());
                      const double by = x.y() * (1 - x.y());
                      return Eigen::Vector2d(((1 - 2 * x.x()) + bx) * by * e, bx * ((1 - 2 * x.y()) + by) * e);
                    }}});
  }
  if (!domain.is_convex()) {
    const Point c = critical_corner(domain);
    // smoothstep cutoff: 1 on r <= 1/4, 0 on r >= 3/4
    const auto cutoff = [](double r) -> std::pair<double, double> {
      if (r <= 0.25) return {1.0, 0.0};
      if (r >= 0.75) return {0.0, 0.0};
      const double s = (r - 0.25) / 0.5;
      const double w = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
      const double dw = -30.0 * s * s * (1.0 - s) * (1.0 - s) / 0.5;
      return {w, dw};
    };
    const auto polar = [c](const Point& x) {
      const Point d = x - c;
      double th = std::atan2(d.y(), d.x());
      if (th < 0.0) th += 2.0 * pi;
      return std::pair<double, double>{d.norm(), th};
    };
    out.push_back({"corner-singular",
                   {[=](const Point& x) {
                      const auto [r, th] = polar(x);
                      return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * th / 3.0) * cutoff(r).first;
                    },
                    [=](const Point& x) {
                      const auto [r, th] = polar(x);
                      if (r == 0.0) return Eigen::Vector2d(0.0, 0.0);
                      const auto [w, dw] = cutoff(r);
                      const double rho = std::pow(r, 2.0 / 3.0) * w;
                      const double drho = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * w + std::pow(r, 2.0 / 3.0) * dw;
                      const double s = std::sin(2.0 * th / 3.0);
                      const double ds = (2.0 / 3.0) * std::cos(2.0 * th / 3.0);
                      const Eigen::Vector2d er(std::cos(th), std::sin(th));
                      const Eigen::Vector2d et(-std::sin(th), std::cos(th));
                      return Eigen::Vector2d(drho * s * er + rho / r * ds * et);
                    }}});
  }
  return out;
}

std::vector<EstimateRecord> projection_linf_stability(const LevelContext& ctx, const std::vector<FieldProbe>& probes) {
  require(!probes.empty(), ErrorCode::invalid_argument, "empty field probe family");
  const auto& space = ctx.sys->space();
  const auto sample_mesh = make_mesh(ctx.domain, ctx.level + 2);
  const auto& pts = sample_mesh->points();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (const auto& [f, v] : space.basis_at(pts[i])) trip.emplace_back(static_cast<int>(i), f, v);
  }
  Eigen::SparseMatrix<double> S(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(space.num_free()));
  S.setFromTriplets(trip.begin(), trip.end());

  const fem::ClementInterpolator clement(ctx.sys->space_ptr());
  constexpr int kConicalOrder = 6;
  const double l = ell_h(ctx.h);
  std::array<double, 2> best{-1.0, -1.0};
  std::array<std::size_t, 2> arg{0, 0};
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const auto& u = probes[k].u;
    Eigen::VectorXd exact(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) exact(static_cast<Eigen::Index>(i)) = u.value(pts[i]);
    const auto loads = fem::mass_loads(space, u.value, kConicalOrder);
    const auto grad_loads = fem::stiffness_loads(space, u.gradient, kConicalOrder);
    const auto err = [&](const Eigen::VectorXd& c) { return (exact - S * c).lpNorm<Eigen::Infinity>(); };
    const double interp = err(clement.apply(loads).coefficients());
    const std::array<double, 2> e{err(fem::l2_project(*ctx.sys, loads).coefficients()),
                                  err(fem::ritz_project(*ctx.sys, grad_loads).coefficients())};
    for (std::size_t i = 0; i < 2; ++i) {
      const double r = interp > 0.0 ? e[i] / (l * interp) : 0.0;
      if (r > best[i]) {
        best[i] = r;
        arg[i] = k;
      }
    }
  }
  std::vector<EstimateRecord> out;
  const std::array<std::string, 2> names{"P_h", "R_h"};
  for (std::size_t i = 0; i < 2; ++i) {
    auto rec = ctx.record("projections", names[i], std::numeric_limits<double>::quiet_NaN(), kInf);
    rec.value = best[i];
    rec.aux = kv("probe", probes[arg[i]].id);
    out.push_back(std::move(rec));
  }
  return out;
}

EstimateRecord deltah_inverse_linf_ratio(const LevelContext& ctx, const std::vector<Probe>& probes) {
  require(!probes.empty(), ErrorCode::invalid_argument, "empty probe family");
  const auto& space = ctx.sys->space();
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const Eigen::VectorXd& f = probes[k].coeffs;
    const Eigen::VectorXd w = -ctx.sys->solve_stiffness(ctx.sys->mass() * f);
    const double r = fem::lq_norm(space, w, kInf) / fem::lq_norm(space, f, kInf);
    if (r > best) {
      best = r;
      arg = k;
    }
  }
  auto rec = ctx.record("deltainv", "deltainv", std::numeric_limits<double>::quiet_NaN(), kInf);
  rec.value = best;
  rec.aux = kv("probe", probes[arg].id);
  return rec;
}

DeltaDecayFit delta_decay_fit(const fem::FeSystem& sys, const Point& x0, int max_bins) {
  const auto& space = sys.space();
  const double h = space.mesh().h();
  const Eigen::VectorXd delta = fem::discrete_delta(sys, x0).coefficients();
  std::vector<double> envelope(static_cast<std::size_t>(max_bins) + 1, 0.0);
  for (std::size_t f = 0; f < space.num_free(); ++f) {
    const double d = (space.dof_points()[static_cast<std::size_t>(space.free_dofs()[f])] - x0).norm() / h;
    const auto b = static_cast<std::size_t>(std::floor(d));
    if (b < 1 || b > static_cast<std::size_t>(max_bins)) continue;
    envelope[b] = std::max(envelope[b], std::abs(delta(static_cast<Eigen::Index>(f))));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t b = 1; b < envelope.size(); ++b) {
    if (envelope[b] > 0.0) {
      xs.push_back(static_cast<double>(b));
      ys.push_back(std::log(envelope[b]));
    }
  }
  require(xs.size() >= 3, ErrorCode::invalid_argument, "too few distance bins for a decay fit");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  DeltaDecayFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.K = fit.slope != 0.0 ? 1.0 / std::abs(fit.slope) : std::numeric_limits<double>::infinity();
  fit.bins = static_cast<int>(xs.size());
  return fit;
}

double long_time_decay_rate(const LevelContext& ctx, const Point& x0, const std::vector<double>& times) {
  need_spec(ctx);
  require(times.size() >= 2, ErrorCode::invalid_argument, "decay fit needs two times");
  const kernel::KernelBank bank(ctx.sys, ctx.spec, {x0});
  std::vector<double> logs;
  for (const double t : times) logs.push_back(std::log(bank.l1_norms(t, 1)(0)));
  const double n = static_cast<double>(times.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    sx += times[i];
    sy += logs[i];
    sxx += times[i] * times[i];
    sxy += times[i] * logs[i];
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "slope needs two matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

WeightedKResult weighted_K(const LevelContext& ctx, const fem::NestedTransfer& transfer, const Point& x0,
                           double C_star, int per_panel) {
  const auto dec = dyadic::DyadicDecomposition::build(x0, C_star, ctx.h);
  const auto& spec = need_spec(ctx);
  const auto& fine = transfer.fine();
  const auto bump = kernel::RegularizedBump::inside_element(*ctx.mesh, x0);
  Eigen::MatrixXd loads = kernel::bump_loads(fine.space(), bump);

  const double lmax = kernel::lambda_max_bound(fine.space());
  const int panels = std::max(1, static_cast<int>(std::ceil(std::log2(16.0 * lmax))));
  const auto grid = parabolic::dyadic_panels(panels, per_panel);
  const auto nf = static_cast<Eigen::Index>(fine.size());
  const auto nt = static_cast<Eigen::Index>(grid.size());
  std::array<Eigen::MatrixXd, 3> F{Eigen::MatrixXd(nf, nt), Eigen::MatrixXd(nf, nt), Eigen::MatrixXd(nf, nt)};

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ctx.sys->size()));
  for (const auto& [f, v] : ctx.sys->space().basis_at(bump.center)) phi(f) = v;
  const Eigen::VectorXd modal = spec.eigenvectors().transpose() * phi;

  const spectral::ContourPropagator prop(transfer.fine_ptr());
  prop.propagate(loads, grid.nodes, 2, [&](std::size_t k, const std::vector<Eigen::MatrixXd>& d) {
    const double t = grid.nodes[k];
    for (int order = 0; order <= 2; ++order) {
      const Eigen::VectorXd g = spec.eigenvectors() * (factors(spec.eigenvalues(), t, order).asDiagonal() * modal);
      F[static_cast<std::size_t>(order)].col(static_cast<Eigen::Index>(k)) =
          transfer.prolong(g) - d[static_cast<std::size_t>(order)].col(0);
    }
  });

  const auto field = [&](int order) {
    return dyadic::SpaceTimeField{fine.space_ptr(), grid, F[static_cast<std::size_t>(order)]};
  };
  const auto s00 = dyadic::region_sums(dec, field(0), 0).squared;
  const auto s01 = dyadic::region_sums(dec, field(0), 1).squared;
  const auto s10 = dyadic::region_sums(dec, field(1), 0).squared;
  const auto s11 = dyadic::region_sums(dec, field(1), 1).squared;
  const auto s20 = dyadic::region_sums(dec, field(2), 0).squared;
  std::vector<dyadic::LocalNormEntry> entries;
  for (int j = 0; j <= dec.J_star(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    entries.push_back({j, std::sqrt(s00[i]), std::sqrt(s01[i]), std::sqrt(s10[i]), std::sqrt(s11[i]), std::sqrt(s20[i])});
  }
  const auto report = dyadic::weighted_sum_K(dec, std::move(entries));
  return WeightedKResult{report.K, dec.J_star(), dec.d_star()};
}

std::vector<Point> kernel_difference_sources(const mesh::PolygonalDomain& domain) {
  if (domain.is_convex()) return {Point(0.3, 0.4), Point(0.1, 0.1)};
  return {Point(-0.5, 0.5), Point(0.05, 0.05)};
}

}  // namespace heatlab::estimators
