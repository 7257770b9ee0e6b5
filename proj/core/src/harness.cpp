#include "heatlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

#include "heatlab/dyadic.hpp"
#include "heatlab/error.hpp"
#include "heatlab/kernel.hpp"

namespace heatlab::harness {

using estimators::EstimateRecord;
using estimators::LevelContext;
using estimators::Probe;
using estimators::ProbeKind;
using fem::kInf;
using mesh::Point;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Scenarios that need the dense eigendecomposition.
bool needs_spectrum(const std::string& scenario) {
  static const std::set<std::string> s{"spectrum", "analyticity", "maximal-function", "maxreg",
                                       "kernels",  "dyadic",      "best-approx",      "corollary23"};
  return s.contains(scenario);
}

std::vector<Probe> concat(std::initializer_list<estimators::ProbeFamily> families) {
  std::vector<Probe> out;
  for (const auto& f : families) out.insert(out.end(), f.probes.begin(), f.probes.end());
  return out;
}

/// Lazily built per-domain state shared across scenarios.
class DomainStudy {
 public:
  DomainStudy(const RunConfig& cfg, std::string domain, std::ostream* log)
      : cfg_(cfg), domain_(std::move(domain)), log_(log) {}

  const std::string& domain() const { return domain_; }

  /// The level's system; the spectrum is decomposed on first request when it fits the cap.
  const LevelContext& level(int l, bool with_spectrum = true) {
    auto it = levels_.find(l);
    if (it == levels_.end()) it = levels_.emplace(l, estimators::make_level(domain_, l, cfg_.r, false)).first;
    auto& ctx = it->second;
    if (with_spectrum && ctx.spec == nullptr && fits_cap(ctx)) {
      note("decomposing " + domain_ + " level " + std::to_string(l) + " (" + std::to_string(ctx.sys->size()) +
           " dofs)");
      ctx.spec = spectral::decompose_cached(*ctx.sys, cfg_.cache_dir, domain_, l, cfg_.eigen_cap);
    }
    return ctx;
  }

  bool fits_cap(const LevelContext& ctx) const { return ctx.sys->size() <= cfg_.eigen_cap; }

  /// Largest configured level whose system fits the eigensolver cap.
  int top_spectral_level() {
    int top = -1;
    for (const int l : cfg_.levels()) {
      if (fits_cap(level(l, false))) top = l;
    }
    return top;
  }

  /// Shared fine system two levels above the finest decomposed level.
  std::shared_ptr<const fem::FeSystem> fine() {
    if (!fine_) {
      const int top = std::max(top_spectral_level(), cfg_.level_min);
      fine_level_ = top + 2;
      note("building fine reference " + domain_ + " level " + std::to_string(fine_level_));
      fine_ = fem::FeSystem::create(estimators::make_mesh(domain_, fine_level_), cfg_.r);
    }
    return fine_;
  }
  int fine_level() {
    fine();
    return fine_level_;
  }

  const estimators::ModeReference& mode_reference() {
    if (!mode_) mode_ = std::make_unique<estimators::ModeReference>(estimators::make_mode_reference(fine()));
    return *mode_;
  }

  const fem::NestedTransfer& transfer(int l) {
    auto it = transfers_.find(l);
    if (it == transfers_.end()) it = transfers_.emplace(l, fem::make_geometric_transfer(level(l).sys, fine())).first;
    return *it->second;
  }
  std::shared_ptr<const fem::NestedTransfer> transfer_ptr(int l) {
    transfer(l);
    return transfers_.at(l);
  }

  const estimators::WeightedPoints& maximal_grid() {
    if (!grid_) grid_ = std::make_unique<estimators::WeightedPoints>(estimators::maximal_function_grid(domain_));
    return *grid_;
  }

  void note(const std::string& msg) const {
    if (log_ != nullptr) *log_ << "  " << msg << std::endl;
  }

 private:
  const RunConfig& cfg_;
  std::string domain_;
  std::ostream* log_;
  std::map<int, LevelContext> levels_;
  std::shared_ptr<const fem::FeSystem> fine_;
  int fine_level_ = 0;
  std::unique_ptr<estimators::ModeReference> mode_;
  std::map<int, std::shared_ptr<const fem::NestedTransfer>> transfers_;
  std::unique_ptr<estimators::WeightedPoints> grid_;
};

EstimateRecord skip_row(const LevelContext& ctx, const std::string& scenario, const std::string& claim,
                        const std::string& reason) {
  auto r = ctx.record(scenario, claim, kNaN, kNaN);
  r.value = 0.0;
  r.aux = "skipped: " + reason;
  r.skipped = true;
  return r;
}

struct Sink {
  RunResult& result;
  void add(EstimateRecord r) { result.records.push_back(std::move(r)); }
  void fail(const std::string& msg) { result.hard_failures.push_back(msg); }
};

std::string where(const LevelContext& ctx) { return ctx.domain + " level " + std::to_string(ctx.level); }

// --- scenarios -------------------------------------------------------------

void assembly_check(const LevelContext& ctx, Sink& out) {
  const auto [mass_err, stiff_err] = reference_element_errors();
  auto r = ctx.record("assembly-check", "reference-mass", kNaN, kNaN);
  r.value = mass_err;
  out.add(r);
  r = ctx.record("assembly-check", "reference-stiffness", kNaN, kNaN);
  r.value = stiff_err;
  out.add(r);

  const auto& space = ctx.sys->space();
  const auto K = fem::assemble_stiffness(space, fem::Constraint::none);
  const auto M = fem::assemble_mass(space, fem::Constraint::none);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K.dimension());
  const double row_sum = (K * ones).lpNorm<Eigen::Infinity>();
  const double mass_total = std::abs(ones.dot(M * ones) - space.mesh().domain().area());
  r = ctx.record("assembly-check", "stiffness-row-sum", kNaN, kNaN);
  r.value = row_sum;
  out.add(r);
  r = ctx.record("assembly-check", "mass-total", kNaN, kNaN);
  r.value = mass_total;
  out.add(r);
  r = ctx.record("assembly-check", "symmetry", kNaN, kNaN);
  r.value = (ctx.sys->mass().is_symmetric() && ctx.sys->stiffness().is_symmetric()) ? 0.0 : 1.0;
  out.add(r);
  if (mass_err > 1e-12 || stiff_err > 1e-12) out.fail("reference element matrices differ from the oracle");
  if (row_sum > 1e-12) out.fail("stiffness row sums nonzero on " + where(ctx));
  if (mass_total > 1e-12) out.fail("mass matrix does not integrate 1 on " + where(ctx));
}

void spectrum(const LevelContext& ctx, Sink& out) {
  const auto& spec = *ctx.spec;
  auto r = ctx.record("spectrum", "lambda1", kNaN, kNaN);
  r.value = spec.lambda_min();
  if (ctx.domain == "square") {
    const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
    r.aux = "rel_err=" + estimators::format_number((spec.lambda_min() - exact) / exact);
  }
  out.add(r);
  r = ctx.record("spectrum", "eig-residual", kNaN, kNaN);
  r.value = spec.max_relative_residual(ctx.sys->stiffness());
  const double residual = r.value;
  out.add(r);
  r = ctx.record("spectrum", "orthonormality", kNaN, kNaN);
  r.value = spec.orthonormality_error();
  const double orth = r.value;
  out.add(r);
  if (residual > 1e-8) out.fail("eigen residual too large on " + where(ctx));
  if (orth > 1e-8) out.fail("eigenvectors not M-orthonormal on " + where(ctx));
}

void analyticity(const LevelContext& ctx, std::uint64_t seed, Sink& out) {
  const auto& sys = *ctx.sys;
  const auto probes = concat({estimators::make_probe_family(ProbeKind::eigenmodes, sys, ctx.spec.get(), 3, seed),
                              estimators::make_probe_family(ProbeKind::random, sys, nullptr, 3, seed),
                              estimators::make_probe_family(ProbeKind::nodal_spikes, sys, nullptr, 2, seed),
                              estimators::make_probe_family(ProbeKind::corner_bumps, sys, nullptr, 2, seed),
                              estimators::make_probe_family(ProbeKind::checkerboard, sys, nullptr, 2, seed)});
  const auto grid = estimators::log_time_grid();
  const auto points = estimators::kernel_probe_points(*ctx.mesh);
  for (const double q : {1.0, 2.0, 4.0, kInf}) {
    auto r = estimators::analyticity_constant(ctx, q, grid, probes, &points);
    if (q == 2.0 && r.value > 1.0 + std::exp(-1.0) + 1e-6) out.fail("L2 analyticity bound exceeded on " + where(ctx));
    out.add(std::move(r));
  }
}

void maximal_function(DomainStudy& study, const LevelContext& ctx, std::uint64_t seed, Sink& out) {
  const auto& sys = *ctx.sys;
  const auto probes = concat({estimators::make_probe_family(ProbeKind::eigenmodes, sys, ctx.spec.get(), 1, seed),
                              estimators::make_probe_family(ProbeKind::random, sys, nullptr, 2, seed),
                              estimators::make_probe_family(ProbeKind::checkerboard, sys, nullptr, 2, seed),
                              estimators::make_probe_family(ProbeKind::corner_bumps, sys, nullptr, 1, seed)});
  for (auto& r : estimators::maximal_function_ratios(ctx, {2.0, 4.0, kInf}, estimators::log_time_grid(), probes,
                                                     study.maximal_grid())) {
    out.add(std::move(r));
  }
}

void maxreg(const LevelContext& ctx, const RunConfig& cfg, Sink& out) {
  const auto sources = estimators::standard_sources(ctx, cfg.seed, cfg.T);
  const std::vector<std::pair<double, double>> pairs{{2, 2}, {4, 4}, {4, 2}, {2, 4}, {kInf, kInf}};
  for (auto& r : estimators::maximal_regularity_constants(ctx, pairs, sources, cfg.T)) {
    if (r.p == 2.0 && r.q == 2.0 && r.value > 1.0 + 1e-6) out.fail("maximal L2 regularity above 1 on " + where(ctx));
    out.add(std::move(r));
  }
}

void kernels_level(const LevelContext& ctx, Sink& out) {
  const auto points = estimators::kernel_probe_points(*ctx.mesh);
  out.add(estimators::kernel_l1_bound(ctx, estimators::log_time_grid(), points));
  out.add(estimators::kernel_dt_l1_time_integral(ctx, points, 20, 4));

  const Point x0 = estimators::kernel_difference_sources(ctx.mesh->domain()).front();
  const auto fit = estimators::delta_decay_fit(*ctx.sys, x0);
  auto r = ctx.record("kernels", "delta-decay", kNaN, kNaN);
  r.value = fit.K;
  r.aux = "slope=" + estimators::format_number(fit.slope) + ";bins=" + std::to_string(fit.bins);
  out.add(r);

  const double rate = estimators::long_time_decay_rate(ctx, x0, {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0});
  r = ctx.record("kernels", "long-time-decay", kNaN, kNaN);
  r.value = rate / ctx.spec->lambda_min();
  r.aux = "rate=" + estimators::format_number(rate) + ";lambda1=" + estimators::format_number(ctx.spec->lambda_min());
  out.add(r);
}

/// ||d_t F||_{L1} and ||t d_tt F||_{L1} for every decomposed level, one contour pass.
void kernel_differences(DomainStudy& study, const RunConfig& cfg, Sink& out) {
  std::vector<int> levels;
  for (const int l : cfg.levels()) {
    if (study.level(l).spec != nullptr) levels.push_back(l);
  }
  if (levels.empty()) return;
  const auto fine = study.fine();
  const auto sources = estimators::kernel_difference_sources(fine->space().mesh().domain());
  std::vector<kernel::KernelDifferenceCase> cases;
  for (const int l : levels) {
    const auto& ctx = study.level(l);
    for (const auto& x0 : sources) {
      const auto bump = kernel::RegularizedBump::inside_element(*ctx.mesh, x0);
      cases.push_back({study.transfer_ptr(l), ctx.spec, bump.center, kernel::bump_loads(fine->space(), bump)});
    }
  }
  const double lmax = kernel::lambda_max_bound(fine->space());
  const int panels = static_cast<int>(std::ceil(std::log2(16.0 * lmax)));
  study.note("kernel differences on fine level " + std::to_string(study.fine_level()) + ", " +
             std::to_string(panels) + " dyadic panels");
  const spectral::ContourPropagator prop(fine);
  const auto recs = kernel::kernel_difference_norms(cases, prop, panels, 8);

  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& ctx = study.level(levels[i]);
    std::size_t arg = 0;
    double dt = -1.0;
    double tdtt = 0.0;
    double tail = 0.0;
    double tail_est = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const auto& rec = recs[i * sources.size() + s];
      if (rec.dt_l1 > dt) {
        dt = rec.dt_l1;
        arg = s;
      }
      tdtt = std::max(tdtt, rec.t_dtt_l1);
      tail = std::max(tail, rec.tail_fraction);
      tail_est = std::max(tail_est, rec.tail_estimate);
    }
    const Point& x = cases[i * sources.size() + arg].x0;
    const std::string common = "fine_level=" + std::to_string(study.fine_level()) +
                               ";x0=" + estimators::format_number(x.x()) + " " + estimators::format_number(x.y());
    auto r = ctx.record("kernels", "dt-F-l1", 1.0, 1.0);
    r.value = dt;
    r.aux = common + ";tail_fraction=" + estimators::format_number(tail) +
            ";tail_estimate=" + estimators::format_number(tail_est);
    out.add(r);
    r = ctx.record("kernels", "t-dtt-F-l1", 1.0, 1.0);
    r.value = tdtt;
    r.aux = common;
    out.add(r);
  }
}

void dyadic(DomainStudy& study, const LevelContext& ctx, const RunConfig& cfg, Sink& out) {
  std::set<double> stars{16.0, 32.0, 64.0, cfg.C_star};
  const Point x0 = estimators::kernel_difference_sources(ctx.mesh->domain()).front();
  for (const double c : stars) {
    const std::string claim = "K(C_star=" + estimators::format_number(c) + ")";
    try {
      dyadic::DyadicDecomposition::build(x0, c, ctx.h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::decomposition_unavailable) throw;
      auto r = skip_row(ctx, "dyadic", claim, "decomposition-unavailable");
      r.aux += ";h=" + estimators::format_number(ctx.h);
      out.add(std::move(r));
      continue;
    }
    const auto res = estimators::weighted_K(ctx, study.transfer(ctx.level), x0, c);
    auto r = ctx.record("dyadic", claim, kNaN, kNaN);
    r.value = res.K;
    r.aux = "J_star=" + std::to_string(res.J_star) + ";d_star=" + estimators::format_number(res.d_star);
    out.add(std::move(r));
  }
}

void best_approx(DomainStudy& study, const LevelContext& ctx, Sink& out) {
  out.add(estimators::best_approximation_ratio(ctx, study.transfer(ctx.level), study.mode_reference(),
                                               estimators::log_time_grid(1e-6, 1.0, 40)));
}

void projections(const LevelContext& ctx, Sink& out) {
  for (auto& r : estimators::projection_linf_stability(ctx, estimators::projection_probes(ctx.mesh->domain()))) {
    out.add(std::move(r));
  }
}

void deltainv(const LevelContext& ctx, std::uint64_t seed, Sink& out) {
  const auto& sys = *ctx.sys;
  std::vector<Probe> probes;
  if (ctx.spec != nullptr) probes = estimators::make_probe_family(ProbeKind::eigenmodes, sys, ctx.spec.get(), 1, seed).probes;
  for (const auto& p : concat({estimators::make_probe_family(ProbeKind::nodal_spikes, sys, nullptr, 3, seed),
                               estimators::make_probe_family(ProbeKind::checkerboard, sys, nullptr, 3, seed),
                               estimators::make_probe_family(ProbeKind::random, sys, nullptr, 2, seed),
                               estimators::make_probe_family(ProbeKind::corner_bumps, sys, nullptr, 2, seed)})) {
    probes.push_back(p);
  }
  out.add(estimators::deltah_inverse_linf_ratio(ctx, probes));
}

void corollary23(DomainStudy& study, const LevelContext& ctx, Sink& out) {
  for (const double pq : {2.0, kInf}) {
    out.add(estimators::corollary_error_bound_check(ctx, study.transfer(ctx.level), study.mode_reference(), pq, pq));
  }
}

const std::set<std::string>& stability_claims() {
  static const std::set<std::string> s{"analyticity", "gamma-l1", "dt-gamma-l1-time", "maximal-function", "maxreg",
                                       "dt-F-l1",     "t-dtt-F-l1", "best-approx",  "P_h",
                                       "R_h",         "deltainv",   "corollary23"};
  return s;
}

}  // namespace

std::pair<double, double> reference_element_errors() {
  auto domain = std::make_shared<const mesh::PolygonalDomain>(
      "reference", std::vector<Point>{Point(0, 0), Point(1, 0), Point(0, 1)});
  auto tri = std::make_shared<const mesh::TriMesh>(domain, std::vector<Point>{Point(0, 0), Point(1, 0), Point(0, 1)},
                                                   std::vector<mesh::Triangle>{{0, 1, 2}}, std::vector<int>{0, 1, 2});
  const fem::FeSpace space(tri, 1);
  Eigen::Matrix3d mass_oracle;
  mass_oracle << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  mass_oracle /= 24.0;
  Eigen::Matrix3d stiff_oracle;
  stiff_oracle << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  return {(fem::element_mass(space, 0) - mass_oracle).cwiseAbs().maxCoeff(),
          (fem::element_stiffness(space, 0) - stiff_oracle).cwiseAbs().maxCoeff()};
}

double growth_limit(const ClaimSeries& s) {
  if (s.claim == "best-approx") return 0.5;
  if (s.domain == "lshape" && (s.claim == "P_h" || s.claim == "R_h")) return 0.5;
  return 0.3;
}

void check_stability(const std::vector<ClaimSeries>& series, std::vector<std::string>& warnings) {
  for (const auto& s : series) {
    if (!stability_claims().contains(s.claim) && !s.claim.starts_with("K(")) continue;
    const auto v = verdict(s);
    if (v.kind == VerdictKind::skipped) continue;
    const std::string name = s.scenario + "/" + s.domain + "/" + s.claim + " (p=" + estimators::format_number(s.p) +
                             ", q=" + estimators::format_number(s.q) + ")";
    if (v.kind == VerdictKind::growing) warnings.push_back(name + ": " + to_string(v));
    if (v.max_growth > growth_limit(s)) {
      warnings.push_back(name + ": per-level growth " + estimators::format_number(v.max_growth) + " above " +
                         estimators::format_number(growth_limit(s)));
    }
  }
}

RunResult run(const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  RunResult result;
  Sink out{result};
  std::vector<DomainStudy> studies;
  for (const auto& d : cfg.domains) studies.emplace_back(cfg, d, log);

  for (const auto& scenario : all_scenarios()) {
    if (!cfg.has_scenario(scenario)) continue;
    const auto start = std::chrono::steady_clock::now();
    if (log != nullptr) *log << "scenario " << scenario << std::endl;
    for (auto& study : studies) {
      for (const int l : cfg.levels()) {
        const auto& ctx = study.level(l, needs_spectrum(scenario));
        if (needs_spectrum(scenario) && ctx.spec == nullptr) {
          out.add(skip_row(ctx, scenario, scenario, "dof cap (" + std::to_string(ctx.sys->size()) + " > " +
                                                        std::to_string(cfg.eigen_cap) + ")"));
          continue;
        }
        if (scenario == "assembly-check") assembly_check(ctx, out);
        else if (scenario == "spectrum") spectrum(ctx, out);
        else if (scenario == "analyticity") analyticity(ctx, cfg.seed, out);
        else if (scenario == "maximal-function") maximal_function(study, ctx, cfg.seed, out);
        else if (scenario == "maxreg") maxreg(ctx, cfg, out);
        else if (scenario == "kernels") kernels_level(ctx, out);
        else if (scenario == "dyadic") dyadic(study, ctx, cfg, out);
        else if (scenario == "best-approx") best_approx(study, ctx, out);
        else if (scenario == "projections") projections(ctx, out);
        else if (scenario == "deltainv") deltainv(ctx, cfg.seed, out);
        else if (scenario == "corollary23") corollary23(study, ctx, out);
      }
      if (scenario == "kernels") kernel_differences(study, cfg, out);
    }
    if (log != nullptr) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      *log << "  done in " << estimators::format_number(dt.count()) << " s" << std::endl;
    }
  }

  // deterministic order: scenario, domain, level; insertion order otherwise
  const auto rank = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) - v.begin();
  };
  std::stable_sort(result.records.begin(), result.records.end(), [&](const auto& a, const auto& b) {
    const auto ka = std::make_tuple(rank(all_scenarios(), a.scenario), rank(cfg.domains, a.domain), a.level);
    const auto kb = std::make_tuple(rank(all_scenarios(), b.scenario), rank(cfg.domains, b.domain), b.level);
    return ka < kb;
  });
  check_stability(group_claims(result.records), result.warnings);
  return result;
}

}  // namespace heatlab::harness
