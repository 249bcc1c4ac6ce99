#pragma once
//
// Closed-loop engine: binds the coordination layer to the motion layer and
// records everything needed for analysis and plotting.
//
// One run = offline plan synthesis for every agent, a readiness barrier, the
// first election (opened by the highest id), then a fixed-step loop.  Each
// outer step at time t:
//   1. provisions scheduled for t are re-validated against the current
//      positions and either executed (actions recorded, the provider's plan
//      advances, the next election runs) or cancelled wholesale;
//   2. the leader, once it and all cooperators of its next plan step stand
//      inside the goal region, broadcasts an execution request scheduled one
//      step ahead;
//   3. positions integrate t -> t+dt under the connectivity-preserving
//      controller with the link set frozen, then the link set updates with
//      hysteresis;
//   4. the state at t+dt is sampled.
// Messages broadcast within a step are delivered to every agent (sender
// included) in ascending sender order and pumped to quiescence before the
// step continues, so elections are atomic at step boundaries.
//
// KEY DESIGN DECISIONS
//  - The engine is a pure function of (scenario, options): no randomness, no
//    wall clock, single-threaded.  Reruns are byte-identical.
//  - Trajectories are sampled at every outer step only; provisions happen on
//    the same grid, so trace validation can look positions up exactly.
//  - A provision's timestamp is its scheduled synchronized instant.
//  - Progress against a finite-horizon task is reported by simulating the
//    executed plan steps through the task automaton and testing for the
//    universally accepting region (see universally_accepting).
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ltlswarm/buchi.hpp"
#include "ltlswarm/dynamics.hpp"
#include "ltlswarm/errors.hpp"
#include "ltlswarm/plan.hpp"
#include "ltlswarm/protocol.hpp"
#include "ltlswarm/world.hpp"

namespace ltlswarm {

// ── Run configuration and recorded artifacts ────────────────────────────────

struct SimOptions {
  double duration = -1.0; // seconds; negative = scenario default
  double dt = -1.0;       // seconds; negative = scenario default
  TieBreak tie_break = TieBreak::HighId;
  TauReset tau_reset = TauReset::ProvisionTime;
  unsigned long seed = 0; // recorded in the bundle; the engine itself is deterministic
  long provision_cap = 0; // stop once this many provisions happened (0 = run to duration)
};

// Everything one agent did: where it was, when it acted, what it provided.
struct Trace {
  int agent_id = 0;
  std::vector<double> sample_times;
  std::vector<Vec2> positions;  // one per sample
  std::vector<int> leading;     // 0/1 per sample
  std::vector<double> action_times;   // instants this agent performed an action
  std::vector<std::string> actions;   // the action labels, parallel to action_times
  std::vector<double> service_times;  // instants this agent provided a service
  std::vector<std::string> services;  // the service ids, parallel to service_times
};

// A synchronized execution that passed validation at its scheduled instant.
struct ProvisionRecord {
  double time = 0.0;
  int provider = 0;
  std::string service_id;
  std::string region_id;
  std::vector<int> participants;               // ascending; includes the provider
  std::vector<std::string> participant_actions; // parallel to participants
};

struct LeaderInterval {
  double start = 0.0;
  double end = 0.0;
  int leader = 0;
  std::string goal_region;
};

struct MessageRecord {
  double t = 0.0;
  Message message;
};

struct SimResult {
  Scenario scenario;
  SimOptions options; // with duration/dt resolved to the values actually used
  std::vector<ServicePlan> plans; // by agent index (id - 1)
  std::vector<Trace> traces;      // by agent index

  std::vector<double> sample_times;
  std::vector<double> lyapunov_history;   // per sample
  std::vector<int> leader_at_sample;      // per sample; 0 = none yet
  std::vector<EdgePair> pair_order;       // all pairs i<j, row-major
  std::vector<std::vector<double>> pair_distances; // per sample, parallel to pair_order
  std::vector<std::vector<int>> pair_linked;       // per sample, 0/1

  std::vector<LeaderInterval> leader_intervals;
  std::vector<ProvisionRecord> provisions;
  std::vector<MessageRecord> message_log;
  std::string termination;
};

// ── The engine ──────────────────────────────────────────────────────────────

namespace detail {

inline std::string format_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", t);
  return buf;
}

} // namespace detail

inline SimResult run(const Scenario& sc, SimOptions opt = {}) {
  ensure_valid(sc);
  opt.dt = opt.dt > 0.0 ? opt.dt : sc.global.dt;
  opt.duration = opt.duration >= 0.0 ? opt.duration : sc.global.duration;
  const double dt = opt.dt;
  const double r = sc.global.comm_radius;
  const double eps = sc.global.hysteresis;
  const int n = static_cast<int>(sc.agents.size());

  SimResult res;
  res.scenario = sc;
  res.options = opt;
  for (const AgentSpec& a : sc.agents) res.plans.push_back(synthesize_plan(a));
  for (const AgentSpec& a : sc.agents) {
    Trace tr;
    tr.agent_id = a.id;
    res.traces.push_back(std::move(tr));
  }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) res.pair_order.push_back(make_edge(i, j));

  const long steps = std::lround(opt.duration / dt);
  if (steps <= 0) {
    res.termination = "duration reached";
    return res; // zero-length run: empty traces by design
  }

  std::vector<ProtocolAgent> agents;
  agents.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    agents.emplace_back(sc, i + 1, res.plans[static_cast<std::size_t>(i)], opt.tie_break,
                        opt.tau_reset);

  SwarmState state;
  for (const AgentSpec& a : sc.agents) state.positions.push_back(a.start);
  state.edges = initial_edges(sc);
  state.leader.assign(static_cast<std::size_t>(n), 0);

  int current_leader = 0;
  double interval_start = 0.0;
  std::string current_goal_id;

  auto install_leader = [&](int id, double t) {
    if (current_leader != 0)
      res.leader_intervals.push_back({interval_start, t, current_leader, current_goal_id});
    current_leader = id;
    interval_start = t;
    const ProtocolAgent& who = agents[static_cast<std::size_t>(id - 1)];
    current_goal_id = who.goal_region().id;
    state.goal = who.goal_region().center;
    state.leader.assign(static_cast<std::size_t>(n), 0);
    state.leader[static_cast<std::size_t>(id - 1)] = 1;
  };

  auto pump = [&](std::vector<Message> batch, double t) {
    while (!batch.empty()) {
      std::stable_sort(batch.begin(), batch.end(), [](const Message& a, const Message& b) {
        return sender_of(a) < sender_of(b);
      });
      std::vector<Message> next;
      for (const Message& m : batch) {
        res.message_log.push_back({t, m});
        for (int i = 0; i < n; ++i) {
          HandleResult hr;
          try {
            hr = agents[static_cast<std::size_t>(i)].handle_message(m, t);
          } catch (const ProtocolError& e) {
            throw ProtocolError(std::string(e.what()) + " (t = " + detail::format_time(t) + ")");
          }
          if (hr.became_leader) install_leader(i + 1, t);
          next.insert(next.end(), hr.outgoing.begin(), hr.outgoing.end());
        }
      }
      batch = std::move(next);
    }
  };

  auto record_sample = [&](double t) {
    res.sample_times.push_back(t);
    res.leader_at_sample.push_back(current_leader);
    res.lyapunov_history.push_back(lyapunov(state, r));
    for (int i = 0; i < n; ++i) {
      Trace& tr = res.traces[static_cast<std::size_t>(i)];
      tr.sample_times.push_back(t);
      tr.positions.push_back(state.positions[static_cast<std::size_t>(i)]);
      tr.leading.push_back(current_leader == i + 1 ? 1 : 0);
    }
    std::vector<double> dist;
    std::vector<int> linked;
    for (const EdgePair& p : res.pair_order) {
      dist.push_back(distance(state.position_of(p.first), state.position_of(p.second)));
      linked.push_back(state.edges.count(p) ? 1 : 0);
    }
    res.pair_distances.push_back(std::move(dist));
    res.pair_linked.push_back(std::move(linked));
  };

  // Readiness barrier and the first election, all at t = 0.
  {
    std::vector<Message> hello;
    for (const ProtocolAgent& a : agents) hello.push_back(a.start());
    pump(std::move(hello), 0.0);
  }
  record_sample(0.0);

  bool cap_hit = false;
  double t_end = static_cast<double>(steps) * dt;
  for (long k = 0; k < steps && !cap_hit; ++k) {
    const double t = static_cast<double>(k) * dt;

    // 1. execute or cancel provisions scheduled for this instant
    std::set<int> providers_due;
    for (const ProtocolAgent& a : agents)
      if (a.pending() && a.pending()->scheduled_time <= t + dt / 4.0)
        providers_due.insert(a.pending()->provider);
    for (int prov : providers_due) {
      std::vector<int> group;
      for (const ProtocolAgent& a : agents)
        if (a.pending() && a.pending()->provider == prov) group.push_back(a.id());
      const PendingExecution& head =
          *agents[static_cast<std::size_t>(prov - 1)].pending();
      const Region* region = sc.agent(prov).region_by_id(head.region_id);
      if (!region)
        throw ProtocolError("agent " + std::to_string(prov) + ": unknown region " +
                            head.region_id + " (t = " + detail::format_time(t) + ")");
      bool all_inside = true;
      for (int pid : group)
        all_inside = all_inside && region_contains(*region, state.position_of(pid));
      if (!all_inside) {
        for (int pid : group) agents[static_cast<std::size_t>(pid - 1)].cancel_execution();
        continue;
      }
      ProvisionRecord rec;
      rec.time = t;
      rec.provider = prov;
      rec.service_id = head.service_id;
      rec.region_id = head.region_id;
      std::vector<Message> follow_up;
      for (int pid : group) {
        ProtocolAgent& a = agents[static_cast<std::size_t>(pid - 1)];
        const std::string action = a.pending()->action;
        rec.participants.push_back(pid);
        rec.participant_actions.push_back(action);
        Trace& tr = res.traces[static_cast<std::size_t>(pid - 1)];
        tr.action_times.push_back(t);
        tr.actions.push_back(action);
        if (pid == prov) {
          tr.service_times.push_back(t);
          tr.services.push_back(rec.service_id);
        }
        std::vector<Message> out = a.complete_execution(t);
        follow_up.insert(follow_up.end(), out.begin(), out.end());
      }
      res.provisions.push_back(std::move(rec));
      pump(std::move(follow_up), t);
      if (opt.provision_cap > 0 &&
          static_cast<long>(res.provisions.size()) >= opt.provision_cap) {
        cap_hit = true;
        t_end = t;
        res.termination = "provision cap reached";
        break;
      }
    }
    if (cap_hit) break;

    // 2. the leader commits to an execution once everyone needed is in place
    if (current_leader != 0) {
      std::optional<Message> req =
          agents[static_cast<std::size_t>(current_leader - 1)].maybe_request_execution(
              state.positions, t, dt);
      if (req) pump({*req}, t);
    }

    // 3. motion: integrate with the link set frozen, then re-evaluate links
    state = step(state, dt, r, eps, t);

    // 4. sample the new state
    record_sample(static_cast<double>(k + 1) * dt);
  }

  if (current_leader != 0)
    res.leader_intervals.push_back({interval_start, t_end, current_leader, current_goal_id});
  if (res.termination.empty()) res.termination = "duration reached";
  return res;
}

// ── Trace validation ────────────────────────────────────────────────────────

struct TraceCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

namespace detail {

// Sample index whose time matches t (provisions happen on the sample grid).
inline std::optional<std::size_t> sample_index_at(const Trace& tr, double t) {
  auto it = std::lower_bound(tr.sample_times.begin(), tr.sample_times.end(), t - 1e-9);
  if (it == tr.sample_times.end() || std::abs(*it - t) > 1e-9) return std::nullopt;
  return static_cast<std::size_t>(it - tr.sample_times.begin());
}

inline std::optional<std::string> action_at(const Trace& tr, double t) {
  auto it = std::lower_bound(tr.action_times.begin(), tr.action_times.end(), t - 1e-9);
  if (it == tr.action_times.end() || std::abs(*it - t) > 1e-9) return std::nullopt;
  return tr.actions[static_cast<std::size_t>(it - tr.action_times.begin())];
}

} // namespace detail

// Check one agent's provisions against the record of the whole team: at each
// service time the provider must be inside a region designated for that
// service while performing its action, and every cooperator must perform its
// bound action inside the same region at the same instant.
inline TraceCheck validate_trace(const Trace& trace, const Scenario& world,
                                 const std::vector<Trace>& all_traces) {
  TraceCheck check;
  auto violation = [&](const std::string& what) {
    check.ok = false;
    check.violations.push_back("agent " + std::to_string(trace.agent_id) + ": " + what);
  };

  if (trace.action_times.size() != trace.actions.size())
    violation("action record lengths differ");
  if (trace.service_times.size() != trace.services.size())
    violation("service record lengths differ");
  for (std::size_t i = 1; i < trace.action_times.size(); ++i)
    if (trace.action_times[i] <= trace.action_times[i - 1]) {
      violation("action times are not strictly increasing");
      break;
    }
  for (std::size_t i = 1; i < trace.service_times.size(); ++i)
    if (trace.service_times[i] <= trace.service_times[i - 1]) {
      violation("service times are not strictly increasing");
      break;
    }
  if (!check.ok) return check;

  const AgentSpec& spec = world.agent(trace.agent_id);
  for (std::size_t l = 0; l < trace.service_times.size(); ++l) {
    const double tau = trace.service_times[l];
    const std::string& sid = trace.services[l];
    const std::string at = " at t = " + detail::format_time(tau);

    const ServiceSpec* service = spec.service_by_id(sid);
    if (!service) {
      violation("provided unknown service " + sid + at);
      continue;
    }
    std::optional<std::string> own_action = detail::action_at(trace, tau);
    if (!own_action) {
      violation("service " + sid + " has no matching action" + at);
      continue;
    }
    if (*own_action != service->action) {
      violation("service " + sid + " recorded with action " + *own_action + at);
      continue;
    }
    std::optional<std::size_t> si = detail::sample_index_at(trace, tau);
    if (!si) {
      violation("no trajectory sample" + at);
      continue;
    }
    const Vec2 own_pos = trace.positions[*si];

    // candidate regions: designated for the service and containing the provider
    std::vector<const Region*> candidates;
    for (const std::string& rid : service->regions) {
      const Region* reg = spec.region_by_id(rid);
      if (reg && region_contains(*reg, own_pos)) candidates.push_back(reg);
    }
    if (candidates.empty()) {
      violation("provider outside every region of service " + sid + at);
      continue;
    }

    for (const Cooperation& coop : service->cooperations) {
      if (coop.agent < 1 || coop.agent > static_cast<int>(all_traces.size())) {
        violation("cooperator " + std::to_string(coop.agent) + " has no trace" + at);
        continue;
      }
      const Trace& other = all_traces[static_cast<std::size_t>(coop.agent - 1)];
      std::optional<std::string> their_action = detail::action_at(other, tau);
      if (!their_action || *their_action != coop.action) {
        violation("cooperator " + std::to_string(coop.agent) + " did not perform " +
                  coop.action + at);
        continue;
      }
      std::optional<std::size_t> oi = detail::sample_index_at(other, tau);
      const bool co_located =
          oi && std::any_of(candidates.begin(), candidates.end(), [&](const Region* reg) {
            return region_contains(*reg, other.positions[*oi]);
          });
      if (!co_located)
        violation("cooperator " + std::to_string(coop.agent) +
                  " outside the provision region of " + sid + at);
    }
  }
  return check;
}

// ── Satisfaction progress ───────────────────────────────────────────────────

struct ProgressReport {
  int steps_completed = 0;
  bool prefix_consistent = true;
  int first_mismatch = -1;          // index of the first deviation, -1 if none
  bool finite_task = false;         // the task automaton has a discharged region
  bool finite_task_satisfied = false;
  double cycles_completed = 0.0;    // completed plan-suffix rounds
};

// Compare the provided-service record against the plan's unrolling and, for
// finite-horizon tasks, report outright satisfaction once the executed steps
// drive the task automaton into its universally accepting region.
inline ProgressReport check_progress(const Trace& trace, const ServicePlan& plan,
                                     const Formula& task) {
  ProgressReport rep;
  rep.steps_completed = static_cast<int>(trace.services.size());

  const std::size_t total = plan.prefix.size() + plan.suffix.size();
  std::vector<PlanStep> expected =
      total == 0 ? std::vector<PlanStep>{}
                 : plan.unrolled(static_cast<std::size_t>(rep.steps_completed));
  for (std::size_t l = 0; l < expected.size(); ++l)
    if (expected[l].service_id != trace.services[l]) {
      rep.prefix_consistent = false;
      rep.first_mismatch = static_cast<int>(l);
      break;
    }

  BuchiAutomaton aut = translate(task);
  std::set<int> done = universally_accepting(aut);
  rep.finite_task = !done.empty();
  if (rep.finite_task) {
    std::set<int> current{aut.initial};
    auto discharged = [&](const std::set<int>& states) {
      return std::any_of(states.begin(), states.end(),
                         [&](int q) { return done.count(q) != 0; });
    };
    rep.finite_task_satisfied = discharged(current);
    if (rep.prefix_consistent)
      for (const PlanStep& step : expected) {
        if (rep.finite_task_satisfied) break;
        current = aut.step_states(current, step.letter);
        rep.finite_task_satisfied = discharged(current);
      }
  }

  if (!plan.suffix.empty() &&
      static_cast<std::size_t>(rep.steps_completed) >= plan.prefix.size())
    rep.cycles_completed =
        static_cast<double>(static_cast<std::size_t>(rep.steps_completed) - plan.prefix.size()) /
        static_cast<double>(plan.suffix.size());
  return rep;
}

// ── Result bundle ───────────────────────────────────────────────────────────

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << body;
}

} // namespace detail

inline std::string tie_break_name(TieBreak t) {
  return t == TieBreak::HighId ? "high-id" : "low-id";
}
inline std::string tau_reset_name(TauReset t) {
  return t == TauReset::ProvisionTime ? "provision-time" : "zero";
}

inline nlohmann::json message_to_json(const MessageRecord& rec) {
  nlohmann::json j;
  j["t"] = rec.t;
  j["from"] = sender_of(rec.message);
  j["kind"] = kind_of(rec.message);
  if (const auto* ie = std::get_if<InitElect>(&rec.message)) {
    j["time"] = ie->time;
  } else if (const auto* me = std::get_if<Me>(&rec.message)) {
    j["elapsed"] = me->urge.elapsed;
    j["id"] = me->urge.id;
  } else if (const auto* fe = std::get_if<FinishElect>(&rec.message)) {
    j["leader"] = fe->leader;
  } else if (const auto* ex = std::get_if<ExecuteRequest>(&rec.message)) {
    j["service"] = ex->service_id;
    j["region"] = ex->region_id;
    j["scheduled_time"] = ex->scheduled_time;
  }
  return j;
}

inline nlohmann::json summary_json(const SimResult& res) {
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < res.traces.size(); ++i) {
    const Trace& tr = res.traces[i];
    const AgentSpec& spec = res.scenario.agents[i];
    ProgressReport prog = check_progress(tr, res.plans[i], spec.task);
    int leaderships = 0;
    for (const LeaderInterval& iv : res.leader_intervals)
      if (iv.leader == tr.agent_id) ++leaderships;
    nlohmann::json a;
    a["id"] = tr.agent_id;
    a["provisions"] = tr.services.size();
    a["services"] = tr.services;
    a["leaderships"] = leaderships;
    a["progress"] = {{"steps_completed", prog.steps_completed},
                     {"prefix_consistent", prog.prefix_consistent},
                     {"finite_task", prog.finite_task},
                     {"finite_task_satisfied", prog.finite_task_satisfied},
                     {"cycles_completed", prog.cycles_completed}};
    agents.push_back(a);
  }
  nlohmann::json j;
  j["agents"] = agents;
  j["dt"] = res.options.dt;
  j["duration"] = res.options.duration;
  j["leader_changes"] = res.leader_intervals.size();
  j["samples"] = res.sample_times.size();
  j["seed"] = res.options.seed;
  j["termination"] = res.termination;
  j["tie_break"] = tie_break_name(res.options.tie_break);
  j["tau_reset"] = tau_reset_name(res.options.tau_reset);
  j["total_provisions"] = res.provisions.size();
  return j;
}

// Write the whole result bundle into `dir` (created if needed): scenario
// copy, human-readable plans, CSV histories, message log, and summary.
inline void write_bundle(const SimResult& res, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  save_scenario(res.scenario, (dir / "scenario.json").string());

  std::string plans;
  for (const ServicePlan& p : res.plans) {
    plans += describe(p);
    plans += "\n";
  }
  detail::write_text(dir / "plans.txt", plans);

  auto num = [](double v) { return detail::format_time(v); };

  std::string traces = "t,agent,x,y,b\n";
  for (std::size_t k = 0; k < res.sample_times.size(); ++k)
    for (const Trace& tr : res.traces)
      traces += num(tr.sample_times[k]) + "," + std::to_string(tr.agent_id) + "," +
                num(tr.positions[k].x) + "," + num(tr.positions[k].y) + "," +
                std::to_string(tr.leading[k]) + "\n";
  detail::write_text(dir / "traces.csv", traces);

  std::string edges = "t,i,j,distance,linked\n";
  for (std::size_t k = 0; k < res.sample_times.size(); ++k)
    for (std::size_t p = 0; p < res.pair_order.size(); ++p)
      edges += num(res.sample_times[k]) + "," + std::to_string(res.pair_order[p].first) + "," +
               std::to_string(res.pair_order[p].second) + "," + num(res.pair_distances[k][p]) +
               "," + std::to_string(res.pair_linked[k][p]) + "\n";
  detail::write_text(dir / "edges.csv", edges);

  std::string lyap = "t,V\n";
  for (std::size_t k = 0; k < res.sample_times.size(); ++k)
    lyap += num(res.sample_times[k]) + "," + num(res.lyapunov_history[k]) + "\n";
  detail::write_text(dir / "lyapunov.csv", lyap);

  std::string leaders = "start,end,leader,goal_region\n";
  for (const LeaderInterval& iv : res.leader_intervals)
    leaders += num(iv.start) + "," + num(iv.end) + "," + std::to_string(iv.leader) + "," +
               iv.goal_region + "\n";
  detail::write_text(dir / "leaders.csv", leaders);

  std::string messages;
  for (const MessageRecord& m : res.message_log) messages += message_to_json(m).dump() + "\n";
  detail::write_text(dir / "messages.jsonl", messages);

  detail::write_text(dir / "summary.json", summary_json(res).dump(2) + "\n");
}

} // namespace ltlswarm
