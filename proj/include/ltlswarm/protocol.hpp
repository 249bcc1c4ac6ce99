#pragma once
//
// Coordination layer: urge-based leader election and the per-agent message
// state machine.
//
// Life of an agent: broadcast Ready and wait for the whole team; the
// highest-id agent then opens the first election.  On InitElect every agent
// broadcasts Me(urge) where urge = (time since its last provided service,
// its id), compared lexicographically; on collecting the full urge set
// everyone installs the unique maximizer — the winner announces FinishElect
// (a pure agreement check for the others).  The leader steers toward the
// region of its next plan step; once it and all cooperators of that step
// are inside, it broadcasts an ExecuteRequest scheduled one step ahead, the
// participants act simultaneously at that instant, the leader's plan cursor
// advances, and the ex-leader opens the next election.
//
// KEY DESIGN DECISIONS
//  - After providing a service the provider's urge clock restarts from the
//    provision time, making it the least urgent agent and realizing the
//    round-robin fairness argument.  A "zero" mode that literally clears
//    the clock to time zero is kept for study (it makes the most recent
//    provider maximally urgent instead) — selectable, never default.
//  - Ties break toward the higher id by definition; a low-id mode exists
//    because the worked example's narrative starts with agent 1.
//  - Transport is synchronous reliable broadcast: every message reaches
//    every agent (sender included) within the same engine step, delivered
//    in ascending sender order.  The engine owns delivery; this file owns
//    per-agent reactions.
//

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ltlswarm/errors.hpp"
#include "ltlswarm/geometry.hpp"
#include "ltlswarm/plan.hpp"
#include "ltlswarm/world.hpp"

namespace ltlswarm {

// ── Urges and election ──────────────────────────────────────────────────────

struct Urge {
  double elapsed = 0.0; // time since the agent's last provided service
  int id = 0;

  bool operator==(const Urge&) const = default;
};

enum class TieBreak { HighId, LowId };
enum class TauReset { ProvisionTime, Zero };

// Three-way lexicographic comparison; ties on elapsed go to the id favored
// by the tie-break mode.  Returns <0, 0, >0 like strcmp.
inline int compare_urge(const Urge& a, const Urge& b, TieBreak tie = TieBreak::HighId) {
  if (a.elapsed != b.elapsed) return a.elapsed < b.elapsed ? -1 : 1;
  if (a.id == b.id) return 0;
  bool a_wins = tie == TieBreak::HighId ? a.id > b.id : a.id < b.id;
  return a_wins ? 1 : -1;
}

// The unique maximizer of the urge ordering.
inline int elect(const std::vector<Urge>& urges, TieBreak tie = TieBreak::HighId) {
  if (urges.empty()) throw ProtocolError("election with no urges");
  std::set<int> ids;
  for (const Urge& u : urges)
    if (!ids.insert(u.id).second)
      throw ProtocolError("duplicate urge from agent " + std::to_string(u.id));
  const Urge* best = &urges.front();
  for (const Urge& u : urges)
    if (compare_urge(u, *best, tie) > 0) best = &u;
  return best->id;
}

// ── Messages ────────────────────────────────────────────────────────────────

struct Ready {
  int sender = 0;
};
struct InitElect {
  int sender = 0;
  double time = 0.0; // urges are stamped with this election time
};
struct Me {
  int sender = 0;
  Urge urge;
};
struct FinishElect {
  int sender = 0;
  int leader = 0;
};
struct ExecuteRequest {
  int sender = 0; // the providing leader
  std::string service_id;
  std::string region_id;
  double scheduled_time = 0.0; // all participants act at this instant
};

using Message = std::variant<Ready, InitElect, Me, FinishElect, ExecuteRequest>;

inline int sender_of(const Message& m) {
  return std::visit([](const auto& v) { return v.sender; }, m);
}

inline std::string kind_of(const Message& m) {
  struct Namer {
    std::string operator()(const Ready&) const { return "ready"; }
    std::string operator()(const InitElect&) const { return "init_elect"; }
    std::string operator()(const Me&) const { return "me"; }
    std::string operator()(const FinishElect&) const { return "finish_elect"; }
    std::string operator()(const ExecuteRequest&) const { return "execute_request"; }
  };
  return std::visit(Namer{}, m);
}

// ── Per-agent state machine ─────────────────────────────────────────────────

enum class Phase { WaitReady, Electing, Leading, Following };

inline std::string to_string(Phase p) {
  switch (p) {
    case Phase::WaitReady: return "wait_ready";
    case Phase::Electing: return "electing";
    case Phase::Leading: return "leading";
    default: return "following";
  }
}

// A provision this agent committed to: either its own plan step (it is the
// provider) or a cooperation requested by the current leader.
struct PendingExecution {
  int provider = 0;
  std::string service_id;
  std::string region_id;
  std::string action; // this agent's own contribution
  double scheduled_time = 0.0;
};

struct HandleResult {
  std::vector<Message> outgoing;
  bool became_leader = false;
  bool became_follower = false;
};

class ProtocolAgent {
 public:
  ProtocolAgent(const Scenario& world, int agent_id, ServicePlan plan,
                TieBreak tie = TieBreak::HighId, TauReset reset = TauReset::ProvisionTime)
      : world_(&world),
        spec_(&world.agent(agent_id)),
        plan_(std::move(plan)),
        team_size_(static_cast<int>(world.agents.size())),
        tie_(tie),
        reset_(reset) {}

  int id() const { return spec_->id; }
  Phase phase() const { return phase_; }
  int leader_id() const { return leader_; }
  double tau() const { return tau_; }
  const ServicePlan& plan() const { return plan_; }
  const std::optional<PendingExecution>& pending() const { return pending_; }

  Urge urge(double now) const { return Urge{now - tau_, spec_->id}; }

  // The region of this agent's next plan step (the goal while leading).
  const Region& goal_region() const {
    const Region* r = spec_->region_by_id(plan_.current().region_id);
    if (!r) throw ProtocolError("plan references unknown region " + plan_.current().region_id);
    return *r;
  }

  // Kick-off: broadcast readiness.
  Message start() const { return Ready{spec_->id}; }

  HandleResult handle_message(const Message& m, double now) {
    int from = sender_of(m);
    if (from < 1 || from > team_size_)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": message from unknown agent " +
                          std::to_string(from));
    return std::visit([&](const auto& v) { return handle(v, now); }, m);
  }

  // Leader-only: when this agent and every cooperator of its next step are
  // inside the goal region, commit to executing one step ahead.
  std::optional<Message> maybe_request_execution(const std::vector<Vec2>& positions_by_index,
                                                 double now, double dt) const {
    if (phase_ != Phase::Leading || pending_) return std::nullopt;
    const PlanStep& step = plan_.current();
    const Region& region = goal_region();
    const ServiceSpec* service = spec_->service_by_id(step.service_id);
    if (!service) throw ProtocolError("plan references unknown service " + step.service_id);
    std::vector<int> participants{spec_->id};
    for (int c : service->cooperators()) participants.push_back(c);
    for (int pid : participants)
      if (!region_contains(region, positions_by_index[static_cast<std::size_t>(pid - 1)]))
        return std::nullopt;
    return ExecuteRequest{spec_->id, step.service_id, step.region_id, now + dt};
  }

  // The engine validated the provision at its scheduled instant: record the
  // plan advance (provider only) and open the next election.
  std::vector<Message> complete_execution(double now) {
    if (!pending_) throw ProtocolError("agent " + std::to_string(spec_->id) +
                                       ": no pending execution to complete");
    bool provider = pending_->provider == spec_->id;
    pending_.reset();
    if (!provider) return {};
    tau_ = reset_ == TauReset::ProvisionTime ? now : 0.0;
    plan_.advance();
    phase_ = Phase::Following; // leadership ends with the provision
    leader_ = 0;
    return {InitElect{spec_->id, now}};
  }

  // The provision could not be validated at its scheduled instant (someone
  // drifted out); the leader stays in charge and will re-request.
  void cancel_execution() { pending_.reset(); }

 private:
  HandleResult handle(const Ready& r, double now) {
    if (phase_ != Phase::WaitReady)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": Ready after start-up");
    if (!ready_from_.insert(r.sender).second)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": duplicate Ready from " +
                          std::to_string(r.sender));
    HandleResult out;
    if (static_cast<int>(ready_from_.size()) == team_size_) {
      phase_ = Phase::Following; // barrier passed; no leader yet
      if (spec_->id == team_size_) out.outgoing.push_back(InitElect{spec_->id, now});
    }
    return out;
  }

  HandleResult handle(const InitElect& m, double /*now*/) {
    if (phase_ == Phase::WaitReady)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": InitElect before barrier");
    if (phase_ == Phase::Electing)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": InitElect during election");
    phase_ = Phase::Electing;
    leader_ = 0;
    urges_.clear();
    HandleResult out;
    out.outgoing.push_back(Me{spec_->id, urge(m.time)});
    return out;
  }

  HandleResult handle(const Me& m, double /*now*/) {
    if (phase_ != Phase::Electing)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": Me outside an election");
    if (urges_.count(m.sender))
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": duplicate urge from " +
                          std::to_string(m.sender));
    urges_[m.sender] = m.urge;
    HandleResult out;
    if (static_cast<int>(urges_.size()) == team_size_) {
      std::vector<Urge> all;
      for (const auto& [id, u] : urges_) all.push_back(u);
      leader_ = elect(all, tie_);
      urges_.clear();
      if (leader_ == spec_->id) {
        phase_ = Phase::Leading;
        out.became_leader = true;
        out.outgoing.push_back(FinishElect{spec_->id, spec_->id});
      } else {
        phase_ = Phase::Following;
        out.became_follower = true;
      }
    }
    return out;
  }

  HandleResult handle(const FinishElect& m, double /*now*/) {
    if (phase_ == Phase::WaitReady || phase_ == Phase::Electing)
      throw ProtocolError("agent " + std::to_string(spec_->id) +
                          ": FinishElect before local election finished");
    if (m.leader != leader_)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": election disagreement (got " +
                          std::to_string(m.leader) + ", expected " + std::to_string(leader_) + ")");
    return {};
  }

  HandleResult handle(const ExecuteRequest& m, double /*now*/) {
    if (pending_)
      throw ProtocolError("agent " + std::to_string(spec_->id) +
                          ": overlapping execution requests");
    if (m.sender == spec_->id) {
      // own broadcast: commit to providing with this service's action
      const ServiceSpec* s = spec_->service_by_id(m.service_id);
      if (!s) throw ProtocolError("agent " + std::to_string(spec_->id) + ": unknown service " +
                                  m.service_id);
      pending_ = PendingExecution{m.sender, m.service_id, m.region_id, s->action,
                                  m.scheduled_time};
      return {};
    }
    // a leader asked for cooperation: find this agent's contributing action
    // (non-participants simply ignore the broadcast)
    std::optional<std::string> action = cooperation_action(m.sender, m.service_id);
    if (action)
      pending_ = PendingExecution{m.sender, m.service_id, m.region_id, *action, m.scheduled_time};
    return {};
  }

  // This agent's cooperating-action label in the provider's service, if any.
  std::optional<std::string> cooperation_action(int provider, const std::string& service_id) const {
    const ServiceSpec* s = world_->agent(provider).service_by_id(service_id);
    if (!s)
      throw ProtocolError("agent " + std::to_string(spec_->id) + ": provider " +
                          std::to_string(provider) + " has no service " + service_id);
    for (const Cooperation& c : s->cooperations)
      if (c.agent == spec_->id) return c.action;
    return std::nullopt;
  }

  const Scenario* world_;
  const AgentSpec* spec_;
  ServicePlan plan_;
  int team_size_;
  TieBreak tie_;
  TauReset reset_;

  Phase phase_ = Phase::WaitReady;
  int leader_ = 0;
  double tau_ = 0.0;
  std::set<int> ready_from_;
  std::map<int, Urge> urges_;
  std::optional<PendingExecution> pending_;
};

} // namespace ltlswarm
