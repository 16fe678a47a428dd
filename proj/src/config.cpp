#include "ergodic/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ergodic {

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::serial:
      return "serial";
    case SweepMode::parallel:
      return "parallel";
    case SweepMode::gauss_seidel:
      return "gauss_seidel";
  }
  return "parallel";
}

namespace {

std::string at_line(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

SweepMode parse_mode(const std::string& s, const std::string& key) {
  if (s == "serial") return SweepMode::serial;
  if (s == "parallel") return SweepMode::parallel;
  if (s == "gauss_seidel") return SweepMode::gauss_seidel;
  throw ConfigError(key + ": expected serial, parallel or gauss_seidel, got '" + s + "'");
}

class Section {
 public:
  Section(const YAML::Node& node, std::string prefix)
      : node_(node.IsDefined() && !node.IsNull() ? node : YAML::Node(YAML::NodeType::Undefined)),
        prefix_(std::move(prefix)) {
    if (node_ && !node_.IsMap())
      throw ConfigError((prefix_.empty() ? std::string("document") : prefix_) + ": expected a mapping" +
                        at_line(node_));
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const YAML::Node n = lookup(key);
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(name(key) + ": malformed value" + at_line(n));
    }
  }

  void get_mode(const std::string& key, SweepMode& out) {
    std::string s = to_string(out);
    get(key, s);
    out = parse_mode(s, name(key));
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(lookup(key), name(key));
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return lookup(key);
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name(key) + "'" + at_line(kv.first));
    }
  }

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  YAML::Node lookup(const std::string& key) const {
    if (!node_) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& n = node_;
    const YAML::Node v = n[key];
    return v.IsDefined() && !v.IsNull() ? v : YAML::Node(YAML::NodeType::Undefined);
  }

  YAML::Node node_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

void require_positive(double v, const std::string& key) {
  require(std::isfinite(v) && v > 0.0, key, "must be positive");
}

void require_decreasing(const std::vector<double>& v, const std::string& key, std::size_t min_size) {
  require(v.size() >= min_size, key, "needs at least " + std::to_string(min_size) + " values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    require_positive(v[i], key);
    if (i > 0) require(v[i] < v[i - 1], key, "must be strictly decreasing");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  RunConfig c;
  Section top(root, "");

  Section scen = top.child("scenario");
  scen.get("name", c.scenario);
  const YAML::Node params = scen.raw("params");
  if (params) {
    if (!params.IsMap()) throw ConfigError("scenario.params: expected a mapping" + at_line(params));
    for (const auto& kv : params) {
      const std::string k = kv.first.as<std::string>();
      try {
        c.params[k] = kv.second.as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigError("scenario.params." + k + ": expected a number" + at_line(kv.second));
      }
    }
  }
  scen.finish();

  top.get("grid", c.grid);

  Section sol = top.child("solver");
  sol.get("tol", c.solver.tol);
  sol.get("max_iter", c.solver.max_iter);
  sol.get("dt", c.solver.dt);
  sol.get_mode("mode", c.solver.mode);
  sol.get("accelerate", c.solver.accelerate);
  sol.finish();

  Section crit = top.child("critical");
  crit.get("method", c.critical.method);
  crit.get("delta_schedule", c.critical.delta_schedule);
  crit.get("t1", c.critical.t1);
  crit.get("t2", c.critical.t2);
  crit.get("agreement_tol", c.critical.agreement_tol);
  crit.get("bracket_slack", c.critical.bracket_slack);
  crit.get("osc_slope_min", c.critical.osc_slope_min);
  crit.finish();

  Section disc = top.child("discount");
  disc.get("delta", c.discount.delta);
  disc.finish();

  Section wk = top.child("weak_kam");
  wk.get("tol", c.weak_kam.tol);
  wk.get("t_max", c.weak_kam.t_max);
  wk.get("check_times", c.weak_kam.check_times);
  wk.get("residual_tol", c.weak_kam.residual_tol);
  wk.get("kink_exclusion", c.weak_kam.kink_exclusion);
  wk.get("bisect", c.weak_kam.bisect);
  wk.get("bisect_width", c.weak_kam.bisect_width);
  wk.get("bisect_steps", c.weak_kam.bisect_steps);
  wk.finish();

  Section ev = top.child("evolve");
  ev.get("t_end", c.evolve.t_end);
  ev.get("record_every", c.evolve.record_every);
  ev.get("initial", c.evolve.initial);
  ev.get("comparison_steps", c.evolve.comparison_steps);
  ev.finish();

  Section re = top.child("reach");
  re.get("K", c.reach.K);
  re.get("dt", c.reach.dt);
  re.get("horizon", c.reach.horizon);
  re.get("control_spacing", c.reach.control_spacing);
  re.get("sources", c.reach.sources);
  re.get("targets", c.reach.targets);
  re.finish();

  Section sb = top.child("sbg");
  sb.get("order_max", c.sbg.order_max);
  sb.get("tol", c.sbg.tol);
  sb.get("samples_per_axis", c.sbg.samples_per_axis);
  sb.get("h_fd", c.sbg.h_fd);
  sb.finish();

  Section ho = top.child("homogenize");
  ho.get("mode", c.homogenize.mode);
  ho.get("epsilons", c.homogenize.epsilons);
  ho.get("nodes_per_cell", c.homogenize.nodes_per_cell);
  ho.get("min_nodes_per_cell", c.homogenize.min_nodes_per_cell);
  ho.get("effective_nodes", c.homogenize.effective_nodes);
  ho.get("t_compare", c.homogenize.t_compare);
  ho.get("z_samples", c.homogenize.z_samples);
  ho.get("p_samples", c.homogenize.p_samples);
  ho.get("p_max", c.homogenize.p_max);
  ho.get("cell_nodes", c.homogenize.cell_nodes);
  ho.get("cell_deltas", c.homogenize.cell_deltas);
  ho.get("cell_tol", c.homogenize.cell_tol);
  ho.get("stabilization_t", c.homogenize.stabilization_t);
  ho.get("stabilization_tol", c.homogenize.stabilization_tol);
  ho.finish();

  Section out = top.child("output");
  std::string dir = c.output_dir.string();
  out.get("dir", dir);
  c.output_dir = dir;
  out.finish();

  top.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  const CatalogEntry* entry = nullptr;
  try {
    entry = &catalog_entry(c.scenario);
    resolve_params(c.scenario, c.params);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  require(c.grid.size() == 1 || static_cast<int>(c.grid.size()) == entry->dim, "grid",
          "needs one size or one size per axis (" + std::to_string(entry->dim) + ")");
  for (int s : c.grid) require(s >= 4, "grid", "sizes must be >= 4");

  require_positive(c.solver.tol, "solver.tol");
  require(c.solver.max_iter > 0, "solver.max_iter", "must be positive");
  require(c.solver.dt >= 0.0, "solver.dt", "must be >= 0 (0 selects the automatic step)");

  require(c.critical.method == "discount" || c.critical.method == "longtime" ||
              c.critical.method == "both",
          "critical.method", "expected discount, longtime or both");
  require_decreasing(c.critical.delta_schedule, "critical.delta_schedule", 3);
  require_positive(c.critical.t1, "critical.t1");
  require(c.critical.t2 > c.critical.t1, "critical.t2", "must exceed critical.t1");
  require_positive(c.critical.agreement_tol, "critical.agreement_tol");
  require(c.critical.bracket_slack >= 0.0, "critical.bracket_slack", "must be >= 0");

  require_positive(c.discount.delta, "discount.delta");

  require_positive(c.weak_kam.tol, "weak_kam.tol");
  require_positive(c.weak_kam.t_max, "weak_kam.t_max");
  for (double t : c.weak_kam.check_times) require_positive(t, "weak_kam.check_times");
  require_positive(c.weak_kam.residual_tol, "weak_kam.residual_tol");
  require(c.weak_kam.kink_exclusion >= 0.0, "weak_kam.kink_exclusion", "must be >= 0");
  require_positive(c.weak_kam.bisect_width, "weak_kam.bisect_width");
  require(c.weak_kam.bisect_steps >= 1, "weak_kam.bisect_steps", "must be >= 1");

  require_positive(c.evolve.t_end, "evolve.t_end");
  require(c.evolve.record_every >= 1, "evolve.record_every", "must be >= 1");
  require(c.evolve.initial == "zero" || c.evolve.initial == "cos", "evolve.initial",
          "expected zero or cos");
  require(c.evolve.comparison_steps >= 1, "evolve.comparison_steps", "must be >= 1");

  require(!c.reach.K.empty(), "reach.K", "needs at least one value");
  for (double k : c.reach.K) require_positive(k, "reach.K");
  require(c.reach.dt >= 0.0, "reach.dt", "must be >= 0 (0 selects the automatic step)");
  require_positive(c.reach.horizon, "reach.horizon");
  require_positive(c.reach.control_spacing, "reach.control_spacing");
  require(c.reach.sources >= 1, "reach.sources", "must be >= 1");
  require(c.reach.targets >= 0, "reach.targets", "must be >= 0");

  require(c.sbg.order_max >= 1, "sbg.order_max", "must be >= 1");
  require_positive(c.sbg.tol, "sbg.tol");
  require(c.sbg.samples_per_axis >= 1, "sbg.samples_per_axis", "must be >= 1");
  require_positive(c.sbg.h_fd, "sbg.h_fd");

  const HomogenizeConfig& h = c.homogenize;
  require(h.mode == "stationary" || h.mode == "evolutive", "homogenize.mode",
          "expected stationary or evolutive");
  require_decreasing(h.epsilons, "homogenize.epsilons", 1);
  require(h.min_nodes_per_cell >= 1, "homogenize.min_nodes_per_cell", "must be >= 1");
  require(h.nodes_per_cell >= h.min_nodes_per_cell, "homogenize.nodes_per_cell",
          "must be >= homogenize.min_nodes_per_cell");
  require(h.effective_nodes >= 4, "homogenize.effective_nodes", "must be >= 4");
  require(h.t_compare >= 0.25, "homogenize.t_compare", "must be >= 0.25");
  require(h.z_samples >= 4, "homogenize.z_samples", "must be >= 4");
  require(h.p_samples >= 2, "homogenize.p_samples", "must be >= 2");
  require_positive(h.p_max, "homogenize.p_max");
  require(h.cell_nodes >= 4, "homogenize.cell_nodes", "must be >= 4");
  require_decreasing(h.cell_deltas, "homogenize.cell_deltas", 3);
  require_positive(h.cell_tol, "homogenize.cell_tol");
  require_positive(h.stabilization_t, "homogenize.stabilization_t");
  require_positive(h.stabilization_tol, "homogenize.stabilization_tol");

  require(!c.output_dir.empty(), "output.dir", "must not be empty");
}

std::string echo_config(const RunConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(15);
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.scenario;
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : resolve_params(c.scenario, c.params)) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap << YAML::EndMap;
  e << YAML::Key << "grid" << YAML::Value << YAML::Flow << c.grid;

  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tol" << YAML::Value << c.solver.tol;
  e << YAML::Key << "max_iter" << YAML::Value << c.solver.max_iter;
  e << YAML::Key << "dt" << YAML::Value << c.solver.dt;
  e << YAML::Key << "mode" << YAML::Value << to_string(c.solver.mode);
  e << YAML::Key << "accelerate" << YAML::Value << c.solver.accelerate;
  e << YAML::EndMap;

  e << YAML::Key << "critical" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "method" << YAML::Value << c.critical.method;
  e << YAML::Key << "delta_schedule" << YAML::Value << YAML::Flow << c.critical.delta_schedule;
  e << YAML::Key << "t1" << YAML::Value << c.critical.t1;
  e << YAML::Key << "t2" << YAML::Value << c.critical.t2;
  e << YAML::Key << "agreement_tol" << YAML::Value << c.critical.agreement_tol;
  e << YAML::Key << "bracket_slack" << YAML::Value << c.critical.bracket_slack;
  e << YAML::Key << "osc_slope_min" << YAML::Value << c.critical.osc_slope_min;
  e << YAML::EndMap;

  e << YAML::Key << "discount" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "delta" << YAML::Value << c.discount.delta;
  e << YAML::EndMap;

  e << YAML::Key << "weak_kam" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tol" << YAML::Value << c.weak_kam.tol;
  e << YAML::Key << "t_max" << YAML::Value << c.weak_kam.t_max;
  e << YAML::Key << "check_times" << YAML::Value << YAML::Flow << c.weak_kam.check_times;
  e << YAML::Key << "residual_tol" << YAML::Value << c.weak_kam.residual_tol;
  e << YAML::Key << "kink_exclusion" << YAML::Value << c.weak_kam.kink_exclusion;
  e << YAML::Key << "bisect" << YAML::Value << c.weak_kam.bisect;
  e << YAML::Key << "bisect_width" << YAML::Value << c.weak_kam.bisect_width;
  e << YAML::Key << "bisect_steps" << YAML::Value << c.weak_kam.bisect_steps;
  e << YAML::EndMap;

  e << YAML::Key << "evolve" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t_end" << YAML::Value << c.evolve.t_end;
  e << YAML::Key << "record_every" << YAML::Value << c.evolve.record_every;
  e << YAML::Key << "initial" << YAML::Value << c.evolve.initial;
  e << YAML::Key << "comparison_steps" << YAML::Value << c.evolve.comparison_steps;
  e << YAML::EndMap;

  e << YAML::Key << "reach" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "K" << YAML::Value << YAML::Flow << c.reach.K;
  e << YAML::Key << "dt" << YAML::Value << c.reach.dt;
  e << YAML::Key << "horizon" << YAML::Value << c.reach.horizon;
  e << YAML::Key << "control_spacing" << YAML::Value << c.reach.control_spacing;
  e << YAML::Key << "sources" << YAML::Value << c.reach.sources;
  e << YAML::Key << "targets" << YAML::Value << c.reach.targets;
  e << YAML::EndMap;

  e << YAML::Key << "sbg" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "order_max" << YAML::Value << c.sbg.order_max;
  e << YAML::Key << "tol" << YAML::Value << c.sbg.tol;
  e << YAML::Key << "samples_per_axis" << YAML::Value << c.sbg.samples_per_axis;
  e << YAML::Key << "h_fd" << YAML::Value << c.sbg.h_fd;
  e << YAML::EndMap;

  const HomogenizeConfig& h = c.homogenize;
  e << YAML::Key << "homogenize" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << h.mode;
  e << YAML::Key << "epsilons" << YAML::Value << YAML::Flow << h.epsilons;
  e << YAML::Key << "nodes_per_cell" << YAML::Value << h.nodes_per_cell;
  e << YAML::Key << "min_nodes_per_cell" << YAML::Value << h.min_nodes_per_cell;
  e << YAML::Key << "effective_nodes" << YAML::Value << h.effective_nodes;
  e << YAML::Key << "t_compare" << YAML::Value << h.t_compare;
  e << YAML::Key << "z_samples" << YAML::Value << h.z_samples;
  e << YAML::Key << "p_samples" << YAML::Value << h.p_samples;
  e << YAML::Key << "p_max" << YAML::Value << h.p_max;
  e << YAML::Key << "cell_nodes" << YAML::Value << h.cell_nodes;
  e << YAML::Key << "cell_deltas" << YAML::Value << YAML::Flow << h.cell_deltas;
  e << YAML::Key << "cell_tol" << YAML::Value << h.cell_tol;
  e << YAML::Key << "stabilization_t" << YAML::Value << h.stabilization_t;
  e << YAML::Key << "stabilization_tol" << YAML::Value << h.stabilization_tol;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << c.output_dir.string();
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace ergodic
