// Acceptance runner: eight end-to-end checks, one [PASS]/[FAIL] line each,
// nonzero exit if any fails.  Every tolerance is pinned inline next to the
// check it guards.  All randomness is seeded; reruns are identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ltlswarm/buchi.hpp"
#include "ltlswarm/dynamics.hpp"
#include "ltlswarm/plan.hpp"
#include "ltlswarm/sim.hpp"
#include "ltlswarm/world.hpp"
#include "support/testgen.hpp"

using namespace ltlswarm;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string scenario_path() {
  return std::string(LTLSWARM_SCENARIO_DIR) + "/four_robots.json";
}

// ── 1. discrete layer: automaton vs direct word evaluation ─────────────────

Criterion oracle_equivalence() {
  Criterion c;
  const auto start = std::chrono::steady_clock::now();
  testgen::Rng rng(90001);
  const std::vector<std::string> atoms = {"a", "b", "c", "d"};
  const int kPairs = 1000;   // at least this many checked pairs
  int mismatches = 0;
  int checked = 0;
  for (int i = 0; i < kPairs * 2 && checked < kPairs; ++i) {
    Formula f = testgen::random_formula(rng, atoms, /*max_depth=*/6);
    LassoWord w = testgen::random_lasso(rng, atoms); // prefix <= 3, cycle <= 3
    BuchiAutomaton b;
    try {
      b = translate(f);
    } catch (const SynthesisError&) {
      continue; // state budget exceeded; draw a fresh formula
    }
    ++checked;
    if (accepts_lasso(b, w) != eval_lasso(f, w)) {
      ++mismatches;
      if (mismatches == 1) c.fail("first mismatch on formula " + f.str());
    }
  }
  const double elapsed = seconds_since(start);
  if (checked < kPairs) c.fail("only " + std::to_string(checked) + " pairs checked");
  if (mismatches > 0) c.fail(std::to_string(mismatches) + " mismatches");
  if (elapsed >= 60.0) c.fail("took too long"); // budget: 60 s
  if (c.ok)
    c.detail = std::to_string(checked) + " formula/word pairs, 0 mismatches";
  return c;
}

// ── 2. plan synthesis for the shipped mission ───────────────────────────────

Criterion plan_soundness() {
  Criterion c;
  Scenario sc = load_scenario(scenario_path());
  for (const AgentSpec& a : sc.agents) {
    ServicePlan plan = synthesize_plan(a);
    if (!verify_plan(plan, a.task))
      c.fail("agent " + std::to_string(a.id) + ": plan failed verification");
  }

  // the finite-horizon task must go through a doing phase (nonempty prefix)
  // and come out discharged
  const AgentSpec& courier = sc.agent(2);
  ServicePlan plan = synthesize_plan(courier);
  if (plan.prefix.empty()) c.fail("agent 2 plan has an empty prefix");
  BuchiAutomaton aut = translate(courier.task);
  std::set<int> done = universally_accepting(aut);
  if (done.empty()) {
    c.fail("agent 2 task automaton has no discharged region");
  } else {
    std::set<int> current{aut.initial};
    for (const PlanStep& step : plan.prefix) current = aut.step_states(current, step.letter);
    bool discharged = false;
    for (int q : current) discharged = discharged || done.count(q) != 0;
    if (!discharged) c.fail("agent 2 prefix does not discharge its task");
  }
  if (c.ok) c.detail = "4 plans synthesized and verified; finite task discharges after prefix";
  return c;
}

// ── 3 & 4. fixed-leader dynamics: link preservation and goal convergence ───

struct FixedLeaderOutcome {
  Criterion links;       // criterion 3
  Criterion convergence; // criterion 4
};

FixedLeaderOutcome fixed_leader_suite() {
  FixedLeaderOutcome out;
  constexpr double kR = 1.5, kEps = 0.1, kDt = 0.005;
  constexpr double kGoalRadius = 0.5;    // "inside the goal region" = within 0.5 m of its center
  constexpr double kDeadline = 60.0;     // seconds to get everyone inside
  constexpr double kDriftTol = 1e-6;     // relative V growth allowed between link additions
  constexpr double kJumpSlack = 1e-9;    // absolute slack on the addition jump bound
  // each link added at distance <= r - eps contributes at most
  // (r-eps)^2 / (eps (2r - eps)) of potential
  const double kJumpPerEdge = (kR - kEps) * (kR - kEps) / (kEps * (2.0 * kR - kEps));

  testgen::Rng rng(90002);
  const int kRuns = 20;
  const long kSteps = std::lround(kDeadline / kDt);
  double worst_entry = 0.0;

  for (int run_index = 0; run_index < kRuns; ++run_index) {
    // random connected start: a grown cluster whose proximity graph
    // (threshold 1.4 m) is connected
    SwarmState state;
    for (int attempt = 0;; ++attempt) {
      state.positions.clear();
      state.positions.push_back(Vec2{rng.range(1.2, 2.8), rng.range(1.2, 2.8)});
      for (int i = 1; i < 4; ++i) {
        const Vec2 anchor =
            state.positions[rng.below(static_cast<std::uint32_t>(state.positions.size()))];
        const double angle = rng.range(0.0, 6.283185307179586);
        const double dist = rng.range(0.6, 1.2);
        Vec2 p{anchor.x + dist * std::cos(angle), anchor.y + dist * std::sin(angle)};
        p.x = std::min(3.7, std::max(0.3, p.x));
        p.y = std::min(3.7, std::max(0.3, p.y));
        state.positions.push_back(p);
      }
      state.edges.clear();
      for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j)
          if (distance(state.position_of(i), state.position_of(j)) < 1.4)
            state.edges.insert(make_edge(i, j));
      if (is_connected({1, 2, 3, 4}, state.edges)) break;
      if (attempt > 1000) {
        out.links.fail("could not draw a connected start");
        return out;
      }
    }
    state.leader.assign(4, 0);
    state.leader[rng.below(4)] = 1;
    state.goal = Vec2{rng.range(0.5, 3.5), rng.range(0.5, 3.5)};

    double entered_at = -1.0;
    double v_prev = lyapunov(state, kR);
    for (long k = 0; k < kSteps; ++k) {
      const std::set<EdgePair> before = state.edges;
      try {
        state = step(state, kDt, kR, kEps, static_cast<double>(k) * kDt);
      } catch (const IntegrationError& e) {
        out.links.fail("run " + std::to_string(run_index) + ": " + e.what());
        break;
      }
      int added = 0;
      for (const EdgePair& e : state.edges)
        if (!before.count(e)) ++added;
      for (const EdgePair& e : before)
        if (!state.edges.count(e)) {
          out.links.fail("run " + std::to_string(run_index) + " lost a link");
          break;
        }
      if (!is_connected({1, 2, 3, 4}, state.edges))
        out.links.fail("run " + std::to_string(run_index) + " disconnected");
      const double v = lyapunov(state, kR);
      if (added == 0) {
        if (v > v_prev + kDriftTol * std::max(1.0, v_prev))
          out.links.fail("run " + std::to_string(run_index) + " energy grew without additions");
      } else if (v - v_prev > added * kJumpPerEdge + kJumpSlack) {
        out.links.fail("run " + std::to_string(run_index) + " addition jump exceeded bound");
      }
      v_prev = v;
      if (entered_at < 0.0) {
        bool all_in = true;
        for (const Vec2& p : state.positions)
          all_in = all_in && distance(p, state.goal) <= kGoalRadius;
        if (all_in) entered_at = static_cast<double>(k + 1) * kDt;
      }
      if (!out.links.ok) break;
    }
    if (!out.links.ok) break;
    if (entered_at < 0.0)
      out.convergence.fail("run " + std::to_string(run_index) + " never gathered at the goal");
    else
      worst_entry = std::max(worst_entry, entered_at);
  }

  // single-integrator closed form: one agent, goal at the origin, no links
  {
    SwarmState solo;
    solo.positions = {Vec2{1.0, 0.0}};
    solo.leader = {1};
    solo.goal = Vec2{0.0, 0.0};
    for (int k = 0; k < 200; ++k) // 1 s at dt = 0.005
      solo = step(solo, 0.005, kR, kEps, k * 0.005);
    const double expected = std::exp(-1.0);
    if (std::abs(solo.positions[0].x - expected) > 1e-4) // closed-form tolerance
      out.convergence.fail("single-agent decay missed exp(-1)");
  }

  if (out.links.ok)
    out.links.detail = "20 runs: links monotone, graph connected, energy bounded";
  if (out.convergence.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "all runs gathered by %.1f s; solo decay matches exp(-t)",
                  worst_entry);
    out.convergence.detail = buf;
  }
  return out;
}

// ── 5. weight-matrix structure ──────────────────────────────────────────────

Criterion weight_matrix_structure() {
  Criterion c;
  testgen::Rng rng(90003);
  for (int case_index = 0; case_index < 50; ++case_index) {
    const int n = 2 + static_cast<int>(rng.below(5)); // 2..6 agents
    SwarmState state;
    for (int i = 0; i < n; ++i)
      state.positions.push_back(Vec2{rng.range(0.0, 4.0), rng.range(0.0, 4.0)});
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (distance(state.position_of(i), state.position_of(j)) < 1.45)
          state.edges.insert(make_edge(i, j));
    state.leader.assign(static_cast<std::size_t>(n), 0);

    const std::vector<double> h = build_weight_matrix(state, 1.5);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += h[static_cast<std::size_t>(i * n + j)];
      if (std::abs(row) >= 1e-9) { // H * 1 must vanish
        c.fail("case " + std::to_string(case_index) + ": row sum " + std::to_string(row));
        return c;
      }
    }
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = h[static_cast<std::size_t>(i * n + j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.eigenvalues().minCoeff() < -1e-9) { // positive semidefinite
      c.fail("case " + std::to_string(case_index) + ": negative eigenvalue");
      return c;
    }
  }
  c.detail = "50 random states: rows sum to zero, spectrum nonnegative";
  return c;
}

// ── 6. the shipped four-robot mission, property level ───────────────────────

Criterion mission_reproduction() {
  Criterion c;
  const auto start = std::chrono::steady_clock::now();
  Scenario sc = load_scenario(scenario_path());
  SimResult res = run(sc); // scenario defaults: 35 s at dt = 0.005

  // (a) every agent leads at least twice
  std::map<int, int> leaderships;
  for (const LeaderInterval& iv : res.leader_intervals) ++leaderships[iv.leader];
  for (const AgentSpec& a : sc.agents)
    if (leaderships[a.id] < 2)
      c.fail("agent " + std::to_string(a.id) + " led " + std::to_string(leaderships[a.id]) +
             " time(s)");

  // (b) distances across the initial links stay below the communication radius
  const std::set<EdgePair> initial = initial_edges(sc);
  for (std::size_t p = 0; p < res.pair_order.size(); ++p) {
    if (!initial.count(res.pair_order[p])) continue;
    for (std::size_t k = 0; k < res.sample_times.size(); ++k)
      if (res.pair_distances[k][p] >= sc.global.comm_radius) { // must stay < 1.5 m
        c.fail("initial link stretched to the radius");
        p = res.pair_order.size() - 1;
        break;
      }
  }

  // (c) every agent provides, and the finite task finishes
  for (const Trace& tr : res.traces)
    if (tr.services.empty())
      c.fail("agent " + std::to_string(tr.agent_id) + " provided nothing");
  ProgressReport courier = check_progress(res.traces[1], res.plans[1], sc.agent(2).task);
  if (!courier.finite_task_satisfied) c.fail("agent 2 did not finish its finite task");

  // (d) every provision validates, including the two cooperative services
  for (const Trace& tr : res.traces) {
    TraceCheck check = validate_trace(tr, sc, res.traces);
    if (!check.ok) c.fail(check.violations.front());
  }
  bool heavy = false, assembly = false;
  for (const ProvisionRecord& rec : res.provisions) {
    heavy = heavy || rec.service_id == "load_heavy";       // needs agent 2 alongside
    assembly = assembly || rec.service_id == "assemble";   // needs agent 1 alongside
  }
  if (!heavy) c.fail("the cooperative loading service never happened");
  if (!assembly) c.fail("the cooperative assembly service never happened");

  const double elapsed = seconds_since(start);
  if (elapsed >= 120.0) c.fail("took too long"); // budget: 120 s
  if (c.ok) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "35 s mission: %zu provisions, every agent led >= 2 times, links held",
                  res.provisions.size());
    c.detail = buf;
  }
  return c;
}

// ── 7. leadership fairness on an all-liveness mission ───────────────────────

Scenario fairness_scenario() {
  Scenario sc;
  const double xs[] = {1.3, 1.9, 2.5, 3.1};
  for (int i = 1; i <= 4; ++i) {
    AgentSpec a;
    a.id = i;
    a.start = Vec2{xs[i - 1], 2.0};
    const std::string tag = std::to_string(i);
    a.formula_text = "G F (act_" + tag + " & r_" + tag + ")";
    a.task = parse(a.formula_text);
    a.regions = {Region{"r_" + tag, a.start, 0.45}};
    a.services = {ServiceSpec{"svc_" + tag, "act_" + tag, {}, {"r_" + tag}}};
    sc.agents.push_back(a);
  }
  return sc;
}

Criterion leadership_fairness() {
  Criterion c;
  Scenario sc = fairness_scenario();
  SimOptions opt;
  opt.duration = 200.0;
  opt.provision_cap = 16; // 4 provisions per agent on average
  SimResult res = run(sc, opt);
  if (res.provisions.size() < 16)
    c.fail("only " + std::to_string(res.provisions.size()) + " provisions before the horizon");

  std::vector<int> sequence;
  for (const LeaderInterval& iv : res.leader_intervals) sequence.push_back(iv.leader);
  for (int agent = 1; agent <= 4; ++agent) {
    int previous = -1;
    for (int at = 0; at < static_cast<int>(sequence.size()); ++at) {
      if (sequence[at] != agent) continue;
      if (previous >= 0 && at - previous - 1 > 3) // at most N-1 = 3 leaderships between
        c.fail("agent " + std::to_string(agent) + " waited " +
               std::to_string(at - previous - 1) + " turns");
      previous = at;
    }
    if (previous < 0) c.fail("agent " + std::to_string(agent) + " never led");
  }
  if (c.ok)
    c.detail = "16 provisions: every agent returns to the lead within 3 turns";
  return c;
}

// ── 8. reruns are bit-exact ─────────────────────────────────────────────────

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Criterion determinism() {
  Criterion c;
  Scenario sc = load_scenario(scenario_path());
  const fs::path dir_a = fs::temp_directory_path() / "ltlswarm_acceptance_a";
  const fs::path dir_b = fs::temp_directory_path() / "ltlswarm_acceptance_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  write_bundle(run(sc), dir_a);
  write_bundle(run(sc), dir_b);
  if (slurp(dir_a / "traces.csv") != slurp(dir_b / "traces.csv"))
    c.fail("traces.csv differs between reruns");
  if (slurp(dir_a / "leaders.csv") != slurp(dir_b / "leaders.csv"))
    c.fail("leaders.csv differs between reruns");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  if (c.ok) c.detail = "two full reruns, byte-identical traces and leader schedule";
  return c;
}

} // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const char* name, const Criterion& c, double elapsed) {
    std::printf("[%s] %d. %s: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", number, name,
                c.detail.c_str(), elapsed);
    if (!c.ok) ++failures;
  };
  auto timed = [](auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    Criterion c = fn();
    return std::make_pair(c, seconds_since(start));
  };

  auto [c1, t1] = timed(oracle_equivalence);
  report(1, "discrete-layer oracle equivalence", c1, t1);

  auto [c2, t2] = timed(plan_soundness);
  report(2, "plan synthesis for the shipped mission", c2, t2);

  const auto fixed_start = std::chrono::steady_clock::now();
  FixedLeaderOutcome fixed = fixed_leader_suite();
  const double fixed_elapsed = seconds_since(fixed_start);
  report(3, "link preservation under a fixed leader", fixed.links, fixed_elapsed);
  report(4, "goal convergence under a fixed leader", fixed.convergence, 0.0);

  auto [c5, t5] = timed(weight_matrix_structure);
  report(5, "weight-matrix structure", c5, t5);

  auto [c6, t6] = timed(mission_reproduction);
  report(6, "full-mission reproduction", c6, t6);

  auto [c7, t7] = timed(leadership_fairness);
  report(7, "leadership fairness", c7, t7);

  auto [c8, t8] = timed(determinism);
  report(8, "bit-exact reruns", c8, t8);

  if (failures == 0) {
    std::printf("all 8 acceptance criteria hold\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
