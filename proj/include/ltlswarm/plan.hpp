#pragma once
//
// Offline task planning: turn an agent's LTL task into a concrete
// prefix-suffix sequence of (service, region) steps.
//
// An agent's alphabet has one letter per feasible (region, service) pair:
// the service's labels plus the region id.  The task automaton is searched
// for a shortest-prefix accepting lasso over that alphabet, and each
// selected letter is mapped back to the unique pair that produced it
// (validation guarantees uniqueness).  Plans are executed suffix-cyclically:
// after the last step, the cursor wraps to the start of the suffix.
//

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ltlswarm/buchi.hpp"
#include "ltlswarm/errors.hpp"
#include "ltlswarm/formula.hpp"
#include "ltlswarm/world.hpp"

namespace ltlswarm {

struct PlanStep {
  std::string service_id;
  std::string region_id;
  Letter letter; // service labels + region id, as seen by the task formula

  bool operator==(const PlanStep&) const = default;
};

// Every feasible (region, service) pair of the agent, region-major in
// declaration order, with the letter it contributes to the alphabet.
inline std::vector<PlanStep> agent_letters(const AgentSpec& agent) {
  std::vector<PlanStep> out;
  for (const Region& r : agent.regions)
    for (const ServiceSpec& s : agent.services)
      for (const std::string& rid : s.regions)
        if (rid == r.id) {
          Letter letter = s.labels();
          letter.insert(r.id);
          out.push_back(PlanStep{s.id, r.id, std::move(letter)});
        }
  return out;
}

// A synthesized plan: execute prefix once, then cycle the suffix forever.
// `cursor` indexes the next step in that unrolled order.
struct ServicePlan {
  int agent_id = 0;
  std::vector<PlanStep> prefix;
  std::vector<PlanStep> suffix; // never empty for a valid plan
  std::size_t cursor = 0;

  std::size_t total() const { return prefix.size() + suffix.size(); }

  // Index of the step after `k` in the unrolled plan (suffix wraps).
  std::size_t next_index(std::size_t k) const {
    ++k;
    if (k >= total()) k = prefix.size();
    return k;
  }

  const PlanStep& step_at(std::size_t k) const {
    return k < prefix.size() ? prefix[k] : suffix[k - prefix.size()];
  }

  const PlanStep& current() const { return step_at(cursor); }

  void advance() { cursor = next_index(cursor); }

  // First `n` steps of the infinite unrolling (for progress checks).
  std::vector<PlanStep> unrolled(std::size_t n) const {
    std::vector<PlanStep> out;
    std::size_t k = 0;
    while (out.size() < n) {
      out.push_back(step_at(k));
      k = next_index(k);
    }
    return out;
  }

  LassoWord word() const {
    LassoWord w;
    for (const PlanStep& s : prefix) w.prefix.push_back(s.letter);
    for (const PlanStep& s : suffix) w.cycle.push_back(s.letter);
    return w;
  }
};

// Synthesize a plan for one agent: translate its task to an automaton and
// search for an accepting lasso over the agent's feasible letters.  Throws
// SynthesisError when the task cannot be met with the declared services.
inline ServicePlan synthesize_plan(const AgentSpec& agent) {
  const std::string who = "agent " + std::to_string(agent.id) + ": ";

  std::vector<PlanStep> feasible = agent_letters(agent);
  if (feasible.empty()) throw SynthesisError(who + "no feasible (region, service) pairs");

  std::map<Letter, PlanStep> by_letter;
  for (const PlanStep& s : feasible) {
    auto [it, fresh] = by_letter.emplace(s.letter, s);
    if (!fresh && !(it->second == s))
      throw SynthesisError(who + "ambiguous letter shared by services '" + it->second.service_id +
                           "' and '" + s.service_id + "'");
  }

  BuchiAutomaton aut;
  try {
    aut = translate(agent.task);
  } catch (const SynthesisError& e) {
    throw SynthesisError(who + e.what());
  }

  std::vector<Letter> pool;
  for (const auto& [letter, step] : by_letter) pool.push_back(letter);
  std::optional<Lasso> lasso = find_accepting_lasso(aut, pool);
  if (!lasso)
    throw SynthesisError(who + "task '" + agent.formula_text +
                         "' has no satisfying plan over the feasible service letters");

  ServicePlan plan;
  plan.agent_id = agent.id;
  for (const LassoStep& st : lasso->prefix) plan.prefix.push_back(by_letter.at(st.letter));
  for (const LassoStep& st : lasso->cycle) plan.suffix.push_back(by_letter.at(st.letter));
  return plan;
}

// Independent check that a plan satisfies a task: the plan's infinite word
// must both satisfy the formula directly and be accepted by the formula's
// automaton.
inline bool verify_plan(const ServicePlan& plan, const Formula& task) {
  if (plan.suffix.empty()) return false;
  LassoWord w = plan.word();
  return eval_lasso(task, w) && accepts_lasso(translate(task), w);
}

// Human-readable one-line-per-step rendering (used by the CLI and bundles).
inline std::string describe(const ServicePlan& plan) {
  std::string out = "agent " + std::to_string(plan.agent_id) + "\n";
  auto emit = [&](const char* tag, const std::vector<PlanStep>& steps) {
    out += std::string("  ") + tag + ":";
    if (steps.empty()) out += " (empty)";
    out += "\n";
    for (const PlanStep& s : steps)
      out += "    " + s.service_id + " @ " + s.region_id + "\n";
  };
  emit("prefix", plan.prefix);
  emit("suffix", plan.suffix);
  return out;
}

} // namespace ltlswarm
