#include "ergodic/run.hpp"

#include "ergodic/geometry_control.hpp"
#include "ergodic/homogenization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

namespace ergodic {

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

std::string RunReport::render() const {
  std::ostringstream out;
  out << "command: " << command << "\n";
  out << "config:\n";
  std::istringstream cfg(config_echo);
  for (std::string line; std::getline(cfg, line);) out << "  " << line << "\n";
  out << "summary:\n";
  for (const auto& [k, v] : summary) out << "  " << k << ": " << v << "\n";
  out << "checks:\n";
  for (const InvariantCheck& c : checks)
    out << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name
        << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  out << "outputs:\n";
  for (const auto& p : outputs) out << "  " << p.string() << "\n";
  out << "wall_seconds: " << std::setprecision(4) << wall_seconds << "\n";
  out << "result: " << (all_passed() ? "all checks passed" : "some checks failed") << "\n";
  return out.str();
}

const std::vector<std::string>& run_commands() {
  static const std::vector<std::string> cmds{"critical", "weak-kam",  "discount",   "evolve",
                                             "reach",    "check-sbg", "homogenize", "report"};
  return cmds;
}

TorusGrid config_grid(const RunConfig& c) {
  const int dim = catalog_entry(c.scenario).dim;
  std::vector<int> sizes(dim, c.grid.front());
  if (static_cast<int>(c.grid.size()) == dim) sizes = c.grid;
  return TorusGrid(sizes);
}

BisectionResult bisect_lambda(const AffineSystem& sys, const ScalarField& w_start, double lower,
                              double upper, int steps, const WeakKamOptions& options) {
  if (!(upper > lower)) throw DomainError("bisection needs lower < upper");
  BisectionResult r{0.0, lower, upper, 0};
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (r.lower + r.upper);
    try {
      weak_kam_fixed_point(sys, mid, w_start, options);
      r.upper = mid;
    } catch (const ConvergenceError&) {
      r.lower = mid;
    }
    r.steps = k + 1;
  }
  r.lambda = 0.5 * (r.lower + r.upper);
  return r;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

class Runner {
 public:
  Runner(const RunConfig& c, RunReport& r) : cfg_(c), rep_(r) {
    std::filesystem::create_directories(cfg_.output_dir);
    oscillating_ = catalog_entry(cfg_.scenario).oscillating;
    if (!oscillating_) {
      sys_ = make_system(cfg_.scenario, cfg_.params);
      grid_ = config_grid(cfg_);
    }
  }

  template <class Fn>
  void stage(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  void critical();
  void weak_kam();
  void discount();
  void evolve();
  void reach();
  void check_sbg();
  void homogenize();
  void write_critical_summary();

  bool oscillating() const { return oscillating_; }

 private:
  void add(const std::string& k, const std::string& v) { rep_.summary.emplace_back(k, v); }
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    rep_.checks.push_back({name, ok, detail});
  }
  std::filesystem::path out(const std::string& file) {
    const auto p = cfg_.output_dir / file;
    rep_.outputs.push_back(p);
    return p;
  }
  DiscountedOptions discounted_options() const {
    DiscountedOptions o;
    o.dt = cfg_.solver.dt;
    o.tol = cfg_.solver.tol;
    o.max_iter = cfg_.solver.max_iter;
    o.mode = cfg_.solver.mode;
    o.accelerate = cfg_.solver.accelerate;
    return o;
  }
  SweepMode sweep_mode() const {
    return cfg_.solver.mode == SweepMode::gauss_seidel ? SweepMode::serial : cfg_.solver.mode;
  }
  const BracketReport& sbg();
  const CriticalEstimate& discount_estimate();

  const RunConfig& cfg_;
  RunReport& rep_;
  bool oscillating_ = false;
  AffineSystem sys_;
  TorusGrid grid_;
  std::optional<BracketReport> sbg_;
  std::optional<CriticalEstimate> discount_;
  std::optional<CriticalEstimate> longtime_;
  std::optional<double> fixedpoint_residual_;
};

const BracketReport& Runner::sbg() {
  if (!sbg_)
    sbg_ = ergodic::check_sbg(sys_, cfg_.sbg.order_max, sbg_sample_points(sys_.n, cfg_.sbg.samples_per_axis),
                              cfg_.sbg.tol, cfg_.sbg.h_fd);
  return *sbg_;
}

const CriticalEstimate& Runner::discount_estimate() {
  if (!discount_) discount_ = lambda_discount(sys_, grid_, cfg_.critical.delta_schedule, discounted_options());
  return *discount_;
}

void Runner::critical() {
  const PotentialRange lr = potential_range(sys_, grid_);
  const double slack = cfg_.critical.bracket_slack;
  const bool generated = sbg().generated;
  const std::string& method = cfg_.critical.method;

  if (method == "discount" || method == "both") {
    const CriticalEstimate& d = discount_estimate();
    add("lambda_discount", fmt(d.lambda_bar));
    add("osc_slope", fmt(d.osc_slope));
    std::ofstream f(out("discount_schedule.csv"));
    f << "delta,mean(delta*w),osc(delta*w),sup_residual,iterations\n" << std::setprecision(17);
    for (const ScheduleSample& s : d.diagnostics)
      f << s.parameter << ',' << s.mean << ',' << s.osc << ',' << s.sup_residual << ',' << s.iterations << '\n';
    write_field_csv(d.last_field, out("w_delta_min.csv"));
    if (sys_.is_quadratic())
      check("bracketing min l <= lambda_discount <= max l",
            d.lambda_bar >= lr.min - slack && d.lambda_bar <= lr.max + slack,
            "[" + fmt(lr.min) + ", " + fmt(lr.max) + "]");
    if (generated) {
      check("osc(delta w) decreases along the schedule", d.osc_decreasing);
      check("osc(delta w) log-log slope >= " + fmt(cfg_.critical.osc_slope_min),
            std::isfinite(d.osc_slope) ? d.osc_slope >= cfg_.critical.osc_slope_min
                                       : d.diagnostics.back().osc <= 1e-12,
            "slope " + fmt(d.osc_slope));
    }
  }
  if (method == "longtime" || method == "both") {
    longtime_ = lambda_longtime(sys_, ScalarField(grid_), cfg_.critical.t1, cfg_.critical.t2,
                                cfg_.solver.dt, sweep_mode());
    add("lambda_longtime", fmt(longtime_->lambda_bar));
    add("slope_spread", fmt(longtime_->slope_spread));
    if (sys_.is_quadratic())
      check("bracketing min l <= lambda_longtime <= max l",
            longtime_->lambda_bar >= lr.min - slack && longtime_->lambda_bar <= lr.max + slack);
  }
  if (discount_ && longtime_) {
    const double gap = std::fabs(discount_->lambda_bar - longtime_->lambda_bar);
    add("agreement_gap", fmt(gap));
    if (generated) {
      const double bound = std::max(cfg_.critical.agreement_tol, 3.0 * discount_->diagnostics.back().osc);
      check("estimator agreement |discount - longtime| <= " + fmt(bound), gap <= bound, "gap " + fmt(gap));
    }
  }
}

void Runner::weak_kam() {
  const CriticalEstimate& d = discount_estimate();
  const Corrector c = corrector_discount(d.last_field, d.last_parameter, d.lambda_bar);
  check("corrector vanishes at the origin node", c.v[c.origin] == 0.0);
  WeakKamOptions o;
  o.tol = cfg_.weak_kam.tol;
  o.t_max = cfg_.weak_kam.t_max;
  o.check_times = cfg_.weak_kam.check_times;
  o.dt = cfg_.solver.dt;
  o.mode = sweep_mode();
  const WeakKamSolution s = weak_kam_fixed_point(sys_, d.lambda_bar, *c.u, o);
  write_field_csv(s.chi, out("chi.csv"));
  add("lambda_bar", fmt(d.lambda_bar));
  add("weak_kam_sweeps", std::to_string(s.monotone_iterations));
  add("weak_kam_growth", fmt(s.growth));
  check("weak KAM iteration nondecreasing nodewise", s.nondecreasing);
  check("weak KAM iterates bounded", s.bounded,
        "growth " + fmt(s.growth) + " <= " + fmt(s.growth_bound));
  double worst = 0.0;
  for (const auto& [t, r] : s.fixed_point_residuals) {
    add("fixed_point_residual(t=" + fmt(t) + ")", fmt(r));
    worst = std::max(worst, r);
    check("||T_t chi - chi - lambda t|| <= " + fmt(cfg_.weak_kam.residual_tol) + " at t = " + fmt(t),
          r <= cfg_.weak_kam.residual_tol, fmt(r));
  }
  fixedpoint_residual_ = worst;

  const CriticalResidualReport res = check_critical_residual(
      sys_, s.chi, d.lambda_bar, expected_kinks(cfg_.scenario, cfg_.params), cfg_.weak_kam.kink_exclusion);
  add("subsolution_defect", fmt(res.sub_defect));
  add("supersolution_defect", fmt(res.super_defect));
  write_field_csv(res.r, out("critical_residual.csv"));

  if (cfg_.weak_kam.bisect) {
    WeakKamOptions bo = o;
    bo.check_times.clear();
    const BisectionResult b = bisect_lambda(sys_, *c.u, d.lambda_bar - cfg_.weak_kam.bisect_width,
                                            d.lambda_bar + cfg_.weak_kam.bisect_width,
                                            cfg_.weak_kam.bisect_steps, bo);
    add("lambda_bisection", fmt(b.lambda));
    add("lambda_bisection_bracket", "[" + fmt(b.lower) + ", " + fmt(b.upper) + "]");
  }
}

void Runner::discount() {
  const DiscountedOptions o = discounted_options();
  const double delta = cfg_.discount.delta;
  const DiscountedSolve s = solve_discounted(sys_, delta, grid_, o);
  write_field_csv(s.w, out("discount_w.csv"));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (double v : s.w.values) {
    lo = std::min(lo, delta * v);
    hi = std::max(hi, delta * v);
    sum += delta * v;
  }
  const double mean = sum / static_cast<double>(s.w.size());
  std::ofstream f(out("discount_summary.csv"));
  f << "delta,mean(delta*w),osc(delta*w),sup_residual,iterations\n" << std::setprecision(17);
  f << delta << ',' << mean << ',' << hi - lo << ',' << s.sup_residual << ',' << s.iterations << '\n';
  add("mean(delta*w)", fmt(mean));
  add("osc(delta*w)", fmt(hi - lo));
  add("iterations", std::to_string(s.iterations));
  add("clip_events", std::to_string(s.clip_events));
  const ResidualReport r = residual(sys_, delta, s.w);
  add("pde_residual_sup", fmt(r.sup));
  add("pde_residual_mean", fmt(r.mean));
  check("sup_residual below solver tolerance", s.sup_residual <= cfg_.solver.tol, fmt(s.sup_residual));
  if (sys_.is_quadratic() && !sys_.linear_cost) {
    const PotentialRange lr = potential_range(sys_, grid_);
    const double bound = std::max(std::fabs(lr.min), std::fabs(lr.max));
    const double slack = delta * cfg_.solver.tol + 1e-12 * bound;
    check("a-priori bound |delta w| <= max|l|", std::max(std::fabs(lo), std::fabs(hi)) <= bound + slack);
  }
}

void Runner::evolve() {
  ScalarField w0(grid_);
  if (cfg_.evolve.initial == "cos")
    w0 = sample_field(grid_, [](const Vec& x) { return std::cos(2.0 * std::numbers::pi * x[0]); });
  const Evolution ev = ergodic::evolve(sys_, w0, cfg_.evolve.t_end, cfg_.evolve.record_every,
                                       cfg_.solver.dt, sweep_mode());
  write_evolution(ev, cfg_.output_dir / "evolution");
  rep_.outputs.push_back(cfg_.output_dir / "evolution" / "index.csv");
  add("snapshots", std::to_string(ev.snapshots.size()));
  add("dt", fmt(ev.dt));
  check("snapshot at t = 0 equals the initial datum", ev.snapshots.front().values == w0.values);

  const PotentialRange lr = potential_range(sys_, grid_);
  const double lmax = std::max(std::fabs(lr.min), std::fabs(lr.max));
  const double w0max = std::max(std::fabs(w0.min()), std::fabs(w0.max()));
  bool bounded = true;
  for (std::size_t k = 0; k < ev.snapshots.size(); ++k) {
    const ScalarField& w = ev.snapshots[k];
    const double bound = ev.times[k] * lmax + w0max;
    if (std::max(std::fabs(w.min()), std::fabs(w.max())) > bound * (1.0 + 1e-12) + 1e-12) bounded = false;
  }
  if (sys_.is_quadratic() && !sys_.linear_cost)
    check("a-priori bound |w(t)| <= t sup|l| + sup|w0|", bounded);

  // Two initial data: the sup of their difference must not increase.
  const LaxOleinikSemigroup T(sys_, grid_, ev.dt, sweep_mode());
  ScalarField a = w0;
  ScalarField b = sample_field(grid_, [&](const Vec& x) {
    double s = 0.0;
    for (int j = 0; j < x.size(); ++j) s += std::sin(2.0 * std::numbers::pi * x[j]);
    return 0.5 * s;
  });
  auto sup_diff = [](const ScalarField& u, const ScalarField& v) {
    double d = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, u[i] - v[i]);
    return d;
  };
  double prev = sup_diff(a, b);
  bool nonincreasing = true;
  for (long k = 0; k < cfg_.evolve.comparison_steps; ++k) {
    a = T.step(a);
    b = T.step(b);
    const double d = sup_diff(a, b);
    if (d > prev) nonincreasing = false;
    prev = d;
  }
  check("sup (w - w') nonincreasing over " + std::to_string(cfg_.evolve.comparison_steps) + " steps",
        nonincreasing);
}

void Runner::reach() {
  const std::vector<std::size_t> sources = strided_nodes(grid_, cfg_.reach.sources);
  const std::vector<std::size_t> targets =
      cfg_.reach.targets > 0 ? strided_nodes(grid_, cfg_.reach.targets) : std::vector<std::size_t>{};
  std::vector<double> Ks = cfg_.reach.K;
  std::sort(Ks.begin(), Ks.end());

  ReachOptions o;
  o.horizon = cfg_.reach.horizon;
  o.control_spacing = cfg_.reach.control_spacing;
  o.mode = sweep_mode();
  o.dt = cfg_.reach.dt;
  std::vector<TimeTable> tables;
  for (double K : Ks) {
    o.K = K;
    tables.push_back(minimal_time_table(sys_, grid_, sources, targets, o));
    o.dt = tables.front().dt;  // same dt for every K
  }
  const TimeTable& last = tables.back();
  write_time_table_csv(last, out("time_table.csv"));
  for (const TimeTable& t : tables) {
    const BtcResult b = btc_bound(t);
    add("K=" + fmt(t.K_used), b.btc ? "BTC, S = " + fmt(b.S)
                                    : "not BTC at this resolution (" + std::to_string(b.unreachable.size()) +
                                          " unreachable pairs)");
    for (const std::string& w : t.warnings) add("warning(K=" + fmt(t.K_used) + ")", w);
  }
  add("dt", fmt(last.dt));

  bool diag = true, nonneg = true;
  for (std::size_t s = 0; s < last.sources.size(); ++s)
    for (std::size_t t = 0; t < last.targets.size(); ++t) {
      if (last.sources[s] == last.targets[t] && last.at(s, t) != 0.0) diag = false;
      if (last.at(s, t) < 0.0) nonneg = false;
    }
  check("t_sharp(x, x) = 0", diag);
  check("t_sharp >= 0", nonneg);

  bool monotone = true;
  for (std::size_t k = 1; k < tables.size(); ++k)
    for (std::size_t e = 0; e < last.t_sharp.size(); ++e)
      if (tables[k].t_sharp[e] > tables[k - 1].t_sharp[e]) monotone = false;
  if (tables.size() > 1) check("enlarging K never increases t_sharp", monotone);

  // Sources double as targets when every node is a target.
  std::vector<long> col(grid_.node_count(), -1);
  for (std::size_t t = 0; t < last.targets.size(); ++t) col[last.targets[t]] = static_cast<long>(t);
  const double h = grid_.min_spacing();
  bool triangle = true, symmetric = true;
  bool driftless = true;
  for (std::size_t i = 0; i < grid_.node_count() && driftless; ++i)
    if (sys_.drift(grid_.coordinates(i)).norm() != 0.0) driftless = false;
  std::size_t triples = 0;
  for (std::size_t s1 = 0; s1 < last.sources.size(); ++s1)
    for (std::size_t s2 = 0; s2 < last.sources.size(); ++s2) {
      const long c2 = col[last.sources[s2]];
      if (c2 < 0) continue;
      const double a = last.at(s1, c2);
      const long c1 = col[last.sources[s1]];
      if (c1 >= 0 && std::isfinite(a) && std::isfinite(last.at(s2, c1)) &&
          std::fabs(a - last.at(s2, c1)) > 2.0 * last.dt + h)
        symmetric = false;
      for (std::size_t t = 0; t < last.targets.size(); ++t) {
        const double direct = last.at(s1, t);
        const double via = a + last.at(s2, t);
        ++triples;
        if (std::isfinite(via) && direct > via + 2.0 * last.dt) triangle = false;
      }
    }
  if (triples > 0) check("triangle inequality up to 2 dt", triangle);
  if (driftless) check("t_sharp symmetric within 2 dt + h (b = 0)", symmetric);
}

void Runner::check_sbg() {
  const BracketReport& r = sbg();
  add("generated", r.generated ? "true" : "false");
  add("generated_order", std::to_string(r.generated_order));
  add("sample_points", std::to_string(r.sample_points.size()));
  const int min_rank = r.rank_at_point.empty() ? 0 : *std::min_element(r.rank_at_point.begin(), r.rank_at_point.end());
  add("min_rank", std::to_string(min_rank));
  check("generated iff rank = n at every sample point",
        r.generated == std::all_of(r.rank_at_point.begin(), r.rank_at_point.end(),
                                   [&](int k) { return k == sys_.n; }));

  AffineSystem reversed = sys_;
  const MatrixFieldFn F = sys_.fields;
  reversed.fields = [F](const Vec& x) -> Mat { return F(x).rowwise().reverse(); };
  const BracketReport rr = ergodic::check_sbg(reversed, cfg_.sbg.order_max, r.sample_points, cfg_.sbg.tol,
                                              cfg_.sbg.h_fd);
  check("bracket rank invariant under reordering the fields", rr.rank_at_point == r.rank_at_point);
}

void Runner::homogenize() {
  const OscillatingSystem osc = make_oscillating(cfg_.scenario, cfg_.params);
  const HomogenizeConfig& h = cfg_.homogenize;
  StudyOptions so;
  so.nodes_per_cell = h.nodes_per_cell;
  so.min_nodes_per_cell = h.min_nodes_per_cell;
  so.effective_nodes = h.effective_nodes;
  so.t_compare = h.t_compare;
  so.table.z_per_axis = h.z_samples;
  so.table.p_per_axis = h.p_samples;
  so.table.p_max = h.p_max;
  so.table.cell_tol = h.cell_tol;
  so.table.cell.nodes_per_axis = h.cell_nodes;
  so.table.cell.deltas = h.cell_deltas;
  so.table.cell.discount.tol = cfg_.solver.tol;
  so.table.cell.discount.max_iter = cfg_.solver.max_iter;
  so.table.mode = sweep_mode();
  so.fine.tol = cfg_.solver.tol;
  so.fine.max_iter = cfg_.solver.max_iter;
  so.fine.mode = cfg_.solver.mode;
  so.effective.mode = sweep_mode();
  const HomogenizationMode mode =
      h.mode == "stationary" ? HomogenizationMode::stationary : HomogenizationMode::evolutive;

  const HomogenizationStudy st = convergence_study(osc, h.epsilons, mode, so);
  write_effective_table_csv(st.table, out("effective_table.csv"));
  write_study_csv(st, out("study.csv"));
  write_field_csv(st.effective, out("effective_solution.csv"));
  add("mode", to_string(mode));
  add("range_extensions", std::to_string(st.range_extensions));
  add("p_max", fmt(st.table.p_max));
  for (std::size_t i = 0; i < st.epsilons.size(); ++i)
    add("error(eps=" + fmt(st.epsilons[i]) + ")", fmt(st.errors[i]));
  add("convexity_defect", fmt(st.table.convexity_defect));
  add("symmetry_defect", fmt(st.table.symmetry_defect));

  check("modulus bound |Hbar(z,P) - Hbar(z',P)| <= omega + 2 tol", st.table.modulus_violation() <= 0.0,
        "worst excess " + fmt(st.table.modulus_violation()));
  check("study errors finite", std::all_of(st.errors.begin(), st.errors.end(),
                                           [](double e) { return std::isfinite(e); }));
  bool resolved = true;
  for (std::size_t i = 0; i < st.epsilons.size(); ++i)
    if (st.fine_sizes[i] * st.epsilons[i] < h.min_nodes_per_cell - 1e-9) resolved = false;
  check("fine grids resolve every eps-cell", resolved);
  check("error at smallest eps <= error at largest eps", st.errors.back() <= st.errors.front());
  check("Hbar(z,P) = Hbar(z,-P) within 2 tol", st.table.symmetry_defect <= 2.0 * h.cell_tol,
        fmt(st.table.symmetry_defect));

  if (mode == HomogenizationMode::evolutive) {
    const TorusGrid fast(std::vector<int>(osc.n, 256));
    const StabilizationReport s =
        effective_initial_data(osc, Vec::Zero(osc.n), fast, h.stabilization_t, h.stabilization_tol);
    add("stabilization_deviation", fmt(s.deviation));
    check("stabilization run agrees with min_x h", s.agrees, fmt(s.deviation));
  }
}

void Runner::write_critical_summary() {
  std::ofstream f(out("critical_summary.csv"));
  f << "scenario,lambda_discount,lambda_longtime,gap,osc_min_delta,fixedpoint_residual\n"
    << std::setprecision(17);
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::optional<double> ld, ll, gap, osc;
  if (discount_) {
    ld = discount_->lambda_bar;
    osc = discount_->diagnostics.back().osc;
  }
  if (longtime_) ll = longtime_->lambda_bar;
  if (ld && ll) gap = std::fabs(*ld - *ll);
  f << cfg_.scenario << ',' << opt(ld) << ',' << opt(ll) << ',' << opt(gap) << ',' << opt(osc) << ','
    << opt(fixedpoint_residual_) << '\n';
}

}  // namespace

RunReport run_scenario(const RunConfig& config, const std::string& command) {
  if (std::find(run_commands().begin(), run_commands().end(), command) == run_commands().end())
    throw DomainError("unknown command '" + command + "'");
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.command = command;
  rep.config_echo = echo_config(config);
  Runner run(config, rep);

  const bool osc = run.oscillating();
  const bool wants_osc = command == "homogenize";
  if (command != "report" && osc != wants_osc)
    throw DomainError("command '" + command + "' does not apply to scenario '" + config.scenario + "'");

  if (command == "critical" || (command == "report" && !osc)) run.stage("critical", [&] { run.critical(); });
  if (command == "weak-kam" || (command == "report" && !osc)) run.stage("weak-kam", [&] { run.weak_kam(); });
  if (command == "discount" || (command == "report" && !osc)) run.stage("discount", [&] { run.discount(); });
  if (command == "evolve" || (command == "report" && !osc)) run.stage("evolve", [&] { run.evolve(); });
  if (command == "reach" || (command == "report" && !osc)) run.stage("reach", [&] { run.reach(); });
  if (command == "check-sbg" || (command == "report" && !osc)) run.stage("check-sbg", [&] { run.check_sbg(); });
  if (command == "homogenize" || (command == "report" && osc)) run.stage("homogenize", [&] { run.homogenize(); });
  if (command == "critical" || command == "weak-kam" || (command == "report" && !osc))
    run.write_critical_summary();

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream f(config.output_dir / ("report_" + command + ".txt"));
  f << rep.render();
  return rep;
}

}  // namespace ergodic
