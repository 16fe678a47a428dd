#include "ergodic/config.hpp"
#include "ergodic/errors.hpp"
#include "ergodic/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> scenario;
  std::optional<std::string> output;
  std::optional<std::string> mode;
  std::optional<std::string> method;
  std::optional<double> delta;
  std::optional<double> t_end;
  std::optional<long> record_every;
  std::optional<std::string> homogenize_mode;
  std::vector<double> epsilons;
  std::vector<double> K;
  bool bisect = false;
};

void apply(const Overrides& o, const std::string& command, ergodic::RunConfig& c) {
  if (o.scenario) {
    c.scenario = *o.scenario;
    c.params = ergodic::resolve_params(c.scenario, {});
  }
  if (o.output) c.output_dir = *o.output;
  if (o.mode) {
    if (*o.mode == "serial") c.solver.mode = ergodic::SweepMode::serial;
    else if (*o.mode == "parallel") c.solver.mode = ergodic::SweepMode::parallel;
    else if (*o.mode == "gauss_seidel") c.solver.mode = ergodic::SweepMode::gauss_seidel;
    else throw ergodic::ConfigError("--mode: expected serial, parallel or gauss_seidel");
  }
  if (o.method) c.critical.method = *o.method;
  if (o.delta) c.discount.delta = *o.delta;
  if (o.t_end) c.evolve.t_end = *o.t_end;
  if (o.record_every) c.evolve.record_every = *o.record_every;
  if (o.homogenize_mode) c.homogenize.mode = *o.homogenize_mode;
  if (!o.epsilons.empty()) c.homogenize.epsilons = o.epsilons;
  if (!o.K.empty()) c.reach.K = o.K;
  if (o.bisect && command == "weak-kam") c.weak_kam.bisect = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic constants, weak KAM solutions and homogenization of control-affine HJ equations"};
  app.require_subcommand(1);
  Overrides o;

  const std::map<std::string, std::string> help{
      {"critical", "estimate the critical value by vanishing discount and long-time averages"},
      {"weak-kam", "weak KAM fixed point of the Lax-Oleinik semigroup and its residuals"},
      {"discount", "solve the discounted equation for one discount factor"},
      {"evolve", "evolve the Cauchy problem and record snapshots"},
      {"reach", "minimal-time tables and bounded-time controllability"},
      {"check-sbg", "Lie bracket rank test of the control fields"},
      {"homogenize", "effective Hamiltonian table and epsilon convergence study"},
      {"report", "every stage that applies to the scenario"}};

  for (const std::string& name : ergodic::run_commands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", o.config, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--scenario", o.scenario, "catalog scenario (overrides the config)");
    sub->add_option("--output", o.output, "output directory");
    sub->add_option("--mode", o.mode, "sweep mode: serial, parallel, gauss_seidel");
    if (name == "critical") sub->add_option("--method", o.method, "discount, longtime or both");
    if (name == "discount") sub->add_option("--delta", o.delta, "discount factor");
    if (name == "evolve") {
      sub->add_option("--t-end", o.t_end, "final time");
      sub->add_option("--record-every", o.record_every, "steps between snapshots");
    }
    if (name == "weak-kam") sub->add_flag("--bisect", o.bisect, "also bracket lambda by bisection");
    if (name == "reach") sub->add_option("--K", o.K, "control bounds, ascending");
    if (name == "homogenize") {
      sub->add_option("--homogenize-mode", o.homogenize_mode, "stationary or evolutive");
      sub->add_option("--epsilons", o.epsilons, "epsilon ladder, decreasing");
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ergodic::RunConfig config = o.config.empty() ? ergodic::RunConfig{} : ergodic::load_config(o.config);
    apply(o, command, config);
    ergodic::validate(config);
    const ergodic::RunReport report = ergodic::run_scenario(config, command);
    std::cout << report.render();
    return report.all_passed() ? 0 : 1;
  } catch (const ergodic::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ergodic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
