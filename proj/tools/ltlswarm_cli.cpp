// Command-line front end: validate scenario files, synthesize and print
// service plans, run closed-loop missions into result bundles, and render
// static SVG plots from bundles.
//
// Exit codes: 0 success, 1 scenario/input validation, 2 plan synthesis,
// 3 runtime (protocol or integration) failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltlswarm/buchi.hpp"
#include "ltlswarm/plan.hpp"
#include "ltlswarm/plot.hpp"
#include "ltlswarm/sim.hpp"
#include "ltlswarm/world.hpp"

namespace ls = ltlswarm;
namespace fs = std::filesystem;

namespace {

int cmd_validate(const std::string& path) {
  ls::Scenario sc = ls::load_scenario(path);
  std::printf("scenario OK: %zu agents, r = %g m, eps = %g m, dt = %g s, duration = %g s\n",
              sc.agents.size(), sc.global.comm_radius, sc.global.hysteresis, sc.global.dt,
              sc.global.duration);
  return 0;
}

int cmd_plan(const std::string& path, const std::string& dot_dir) {
  ls::Scenario sc = ls::load_scenario(path);
  for (const ls::AgentSpec& a : sc.agents) {
    ls::ServicePlan plan = ls::synthesize_plan(a);
    if (!ls::verify_plan(plan, a.task))
      throw ls::SynthesisError("agent " + std::to_string(a.id) +
                               ": synthesized plan failed verification");
    std::printf("%s  task: %s\n", ls::describe(plan).c_str(), a.formula_text.c_str());
    if (!dot_dir.empty()) {
      fs::create_directories(dot_dir);
      fs::path dot_path = fs::path(dot_dir) / ("agent_" + std::to_string(a.id) + ".dot");
      std::ofstream out(dot_path, std::ios::binary);
      if (!out) throw ls::ValidationError("cannot write " + dot_path.string());
      out << ls::to_dot(ls::translate(a.task));
      std::printf("  automaton: %s\n", dot_path.string().c_str());
    }
  }
  return 0;
}

int cmd_run(const std::string& path, const std::string& out_dir, const ls::SimOptions& opt) {
  ls::Scenario sc = ls::load_scenario(path);
  ls::SimResult res = ls::run(sc, opt);
  ls::write_bundle(res, out_dir);

  std::printf("mission: %s\n", path.c_str());
  std::printf("duration %g s, dt %g s, tie-break %s, tau-reset %s, seed %lu\n",
              res.options.duration, res.options.dt,
              ls::tie_break_name(res.options.tie_break).c_str(),
              ls::tau_reset_name(res.options.tau_reset).c_str(), res.options.seed);
  std::printf("termination: %s\n\n", res.termination.c_str());

  std::printf("%5s %12s %11s  %s\n", "agent", "leaderships", "provisions", "progress");
  for (std::size_t i = 0; i < res.traces.size(); ++i) {
    const ls::Trace& tr = res.traces[i];
    int leaderships = 0;
    for (const ls::LeaderInterval& iv : res.leader_intervals)
      if (iv.leader == tr.agent_id) ++leaderships;
    ls::ProgressReport prog =
        ls::check_progress(tr, res.plans[i], res.scenario.agents[i].task);
    std::string progress;
    if (!prog.prefix_consistent)
      progress = "DEVIATED at step " + std::to_string(prog.first_mismatch);
    else if (prog.finite_task)
      progress = prog.finite_task_satisfied ? "task satisfied" : "task in progress";
    else {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.1f cycles", prog.cycles_completed);
      progress = buf;
    }
    std::printf("%5d %12d %11zu  %s\n", tr.agent_id, leaderships, tr.services.size(),
                progress.c_str());
  }

  std::printf("\nleader schedule:\n");
  std::printf("%10s %10s %7s  %s\n", "start", "end", "leader", "goal");
  for (const ls::LeaderInterval& iv : res.leader_intervals)
    std::printf("%10.3f %10.3f %7d  %s\n", iv.start, iv.end, iv.leader,
                iv.goal_region.c_str());
  std::printf("\ntotal provisions: %zu, leader changes: %zu\n", res.provisions.size(),
              res.leader_intervals.size());
  std::printf("bundle: %s\n", out_dir.c_str());
  return 0;
}

int cmd_plot(const std::string& bundle_dir, const std::string& out_dir) {
  ls::PlotFiles files = ls::render_plots(bundle_dir, out_dir);
  std::printf("wrote %s\n", files.trajectory.string().c_str());
  std::printf("wrote %s\n", files.edge_distance.string().c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTL service missions for connectivity-constrained robot teams"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string bundle_dir;
  std::string out_dir = "out";
  std::string plot_out;
  std::string dot_dir;
  std::string tie = "high-id";
  std::string tau = "provision-time";
  double dt = -1.0;
  double duration = -1.0;
  unsigned long seed = 0;

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  CLI::App* plan = app.add_subcommand("plan", "Synthesize and print every agent's plan");
  plan->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  plan->add_option("--dot-dir", dot_dir, "Also write each task automaton as Graphviz DOT here");

  CLI::App* run = app.add_subcommand("run", "Simulate a mission and write a result bundle");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Bundle output directory")->capture_default_str();
  run->add_option("--dt", dt, "Integration step override [s]")->check(CLI::PositiveNumber);
  run->add_option("--duration", duration, "Run length override [s]")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--tie-break", tie, "Urge tie direction")
      ->check(CLI::IsMember({"high-id", "low-id"}))
      ->capture_default_str();
  run->add_option("--tau-reset", tau, "Urge clock reset after providing")
      ->check(CLI::IsMember({"provision-time", "zero"}))
      ->capture_default_str();
  run->add_option("--seed", seed, "Run label recorded in the bundle")->capture_default_str();

  CLI::App* plot = app.add_subcommand("plot", "Render SVG plots from a result bundle");
  plot->add_option("bundle", bundle_dir, "Result bundle directory")->required();
  plot->add_option("--out", plot_out, "Directory for the SVGs (default: the bundle)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(scenario_path);
    if (*plan) return cmd_plan(scenario_path, dot_dir);
    if (*run) {
      ls::SimOptions opt;
      opt.dt = dt;
      opt.duration = duration;
      opt.tie_break = tie == "low-id" ? ls::TieBreak::LowId : ls::TieBreak::HighId;
      opt.tau_reset = tau == "zero" ? ls::TauReset::Zero : ls::TauReset::ProvisionTime;
      opt.seed = seed;
      return cmd_run(scenario_path, out_dir, opt);
    }
    if (*plot) return cmd_plot(bundle_dir, plot_out);
  } catch (const ls::SynthesisError& e) {
    std::cerr << "synthesis error: " << e.what() << "\n";
    return 2;
  } catch (const ls::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const ls::ParseError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
