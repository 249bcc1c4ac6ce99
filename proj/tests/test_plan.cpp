// Plan synthesis: alphabet construction, prefix-suffix search, cursor
// arithmetic, and independent plan verification.

#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "ltlswarm/plan.hpp"

using namespace ltlswarm;

namespace {

std::string scenario_path() { return std::string(LTLSWARM_SCENARIO_DIR) + "/four_robots.json"; }

AgentSpec surveyor() {
  AgentSpec a;
  a.id = 3;
  a.start = Vec2{0.0, 0.0};
  a.formula_text = "G F (s & r_31) & G F (s & r_32)";
  a.task = parse(a.formula_text);
  a.regions = {Region{"r_31", Vec2{1.4, 2.0}, 0.4}, Region{"r_32", Vec2{2.6, 2.0}, 0.4}};
  a.services = {ServiceSpec{"survey", "s", {}, {"r_31", "r_32"}}};
  return a;
}

std::set<std::string> suffix_regions(const ServicePlan& p) {
  std::set<std::string> out;
  for (const PlanStep& s : p.suffix) out.insert(s.region_id);
  return out;
}

} // namespace

TEST_CASE("agent alphabet lists feasible pairs region-major") {
  std::vector<PlanStep> letters = agent_letters(surveyor());
  REQUIRE(letters.size() == 2);
  CHECK(letters[0] == PlanStep{"survey", "r_31", Letter{"r_31", "s"}});
  CHECK(letters[1] == PlanStep{"survey", "r_32", Letter{"r_32", "s"}});
}

TEST_CASE("alternating-surveillance task plans a suffix visiting both regions") {
  ServicePlan plan = synthesize_plan(surveyor());
  CHECK(plan.agent_id == 3);
  REQUIRE_FALSE(plan.suffix.empty());
  CHECK(suffix_regions(plan) == std::set<std::string>{"r_31", "r_32"});
  CHECK(verify_plan(plan, surveyor().task));
  CHECK(eval_lasso(surveyor().task, plan.word()));
}

TEST_CASE("plan cursor walks prefix once then cycles the suffix") {
  ServicePlan p;
  p.agent_id = 1;
  PlanStep a{"sv", "r_p0", Letter{"r_p0"}};
  PlanStep b{"sv", "r_p1", Letter{"r_p1"}};
  PlanStep c{"sv", "r_s0", Letter{"r_s0"}};
  PlanStep d{"sv", "r_s1", Letter{"r_s1"}};
  p.prefix = {a, b};
  p.suffix = {c, d};

  CHECK(p.total() == 4);
  CHECK(p.next_index(0) == 1);
  CHECK(p.next_index(1) == 2);
  CHECK(p.next_index(3) == 2); // wraps to suffix start, not to the prefix

  std::vector<PlanStep> u = p.unrolled(7);
  std::vector<PlanStep> expect{a, b, c, d, c, d, c};
  CHECK(u == expect);

  CHECK(p.current() == a);
  p.advance();
  p.advance();
  CHECK(p.current() == c);
  p.advance();
  p.advance();
  CHECK(p.current() == c);
}

TEST_CASE("all four bundled tasks synthesize and verify") {
  Scenario sc = load_scenario(scenario_path());
  for (const AgentSpec& agent : sc.agents) {
    ServicePlan plan = synthesize_plan(agent);
    INFO("agent " << agent.id);
    CHECK(plan.agent_id == agent.id);
    REQUIRE_FALSE(plan.suffix.empty());
    CHECK(verify_plan(plan, agent.task));
  }
}

TEST_CASE("finite task reaches an always-accepting state of its automaton") {
  Scenario sc = load_scenario(scenario_path());
  const AgentSpec& a2 = sc.agent(2);
  ServicePlan plan = synthesize_plan(a2);

  BuchiAutomaton aut = translate(a2.task);
  std::set<int> done = universally_accepting(aut);
  REQUIRE_FALSE(done.empty());
  std::set<int> states{aut.initial};
  bool discharged = false;
  for (const PlanStep& step : plan.unrolled(plan.total() + plan.suffix.size())) {
    states = aut.step_states(states, step.letter);
    for (int q : states) discharged = discharged || done.count(q) != 0;
  }
  CHECK(discharged);
}

TEST_CASE("unsatisfiable service layout raises a synthesis error naming the agent") {
  AgentSpec a = surveyor();
  a.services = {ServiceSpec{"survey", "s", {}, {"r_32"}}}; // r_31 no longer serviceable
  CHECK_THROWS_WITH(synthesize_plan(a), Catch::Matchers::ContainsSubstring("agent 3") &&
                                            Catch::Matchers::ContainsSubstring("no satisfying plan"));
}

TEST_CASE("agent with no feasible pairs raises a synthesis error") {
  AgentSpec a = surveyor();
  a.services.clear();
  CHECK_THROWS_AS(synthesize_plan(a), SynthesisError);
}

TEST_CASE("verification rejects a misordered plan") {
  Scenario sc = load_scenario(scenario_path());
  const AgentSpec& a2 = sc.agent(2);
  std::vector<PlanStep> letters = agent_letters(a2);
  REQUIRE(letters.size() == 2);
  const PlanStep& first = letters[0];  // task_one @ r_21
  const PlanStep& second = letters[1]; // task_two @ r_22

  ServicePlan good;
  good.agent_id = 2;
  good.prefix = {first, second};
  good.suffix = {first};
  CHECK(verify_plan(good, a2.task));

  ServicePlan swapped;
  swapped.agent_id = 2;
  swapped.prefix = {second};
  swapped.suffix = {first};
  CHECK_FALSE(verify_plan(swapped, a2.task));

  ServicePlan no_suffix;
  no_suffix.agent_id = 2;
  no_suffix.prefix = {first, second};
  CHECK_FALSE(verify_plan(no_suffix, a2.task));
}

TEST_CASE("plan description lists prefix and suffix steps") {
  ServicePlan plan = synthesize_plan(surveyor());
  std::string text = describe(plan);
  CHECK(text.find("agent 3") != std::string::npos);
  CHECK(text.find("prefix") != std::string::npos);
  CHECK(text.find("suffix") != std::string::npos);
  CHECK(text.find("survey @ r_31") != std::string::npos);
  CHECK(text.find("survey @ r_32") != std::string::npos);
}
