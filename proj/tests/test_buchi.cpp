// Automaton layer: translation shapes for the tiny formulas, exhaustive and
// randomized agreement with the direct word-evaluation oracle, and the
// deterministic accepting-lasso search.

#include <catch2/catch_amalgamated.hpp>

#include "ltlswarm/buchi.hpp"
#include "support/testgen.hpp"

using namespace ltlswarm;

namespace {

LassoWord lasso(std::vector<Letter> prefix, std::vector<Letter> cycle) {
  return LassoWord{std::move(prefix), std::move(cycle)};
}

// Structural check of the documented lasso invariants: every consecutive
// pair follows a transition, the cycle re-enters its first state, and the
// cycle carries an accepting state.
bool is_valid_lasso(const BuchiAutomaton& b, const Lasso& l) {
  if (l.cycle.empty()) return false;
  auto has_edge = [&](int from, int to, const Letter& letter) {
    for (const Transition& t : b.out[from])
      if (t.to == to && t.guard.eval(letter)) return true;
    return false;
  };
  int cur = b.initial;
  for (const LassoStep& s : l.prefix) {
    if (!has_edge(cur, s.state, s.letter)) return false;
    cur = s.state;
  }
  for (const LassoStep& s : l.cycle) {
    if (!has_edge(cur, s.state, s.letter)) return false;
    cur = s.state;
  }
  if (!has_edge(cur, l.cycle.front().state, l.cycle.front().letter)) return false;
  for (const LassoStep& s : l.cycle)
    if (b.accepting[s.state]) return true;
  return false;
}

void check_exhaustive_agreement(const Formula& f, const std::vector<std::string>& atoms) {
  BuchiAutomaton b = translate(f);
  std::vector<Letter> letters = testgen::all_letters(atoms);
  std::vector<std::vector<Letter>> words_by_len = {{Letter{}}};

  // every letter sequence up to length 3, reused for prefixes and cycles
  std::vector<std::vector<std::vector<Letter>>> seqs(4);
  seqs[0].push_back({});
  for (int len = 1; len <= 3; ++len)
    for (const std::vector<Letter>& shorter : seqs[len - 1])
      for (const Letter& l : letters) {
        std::vector<Letter> next = shorter;
        next.push_back(l);
        seqs[len].push_back(std::move(next));
      }

  for (int p = 0; p <= 3; ++p)
    for (const std::vector<Letter>& prefix : seqs[p])
      for (int c = 1; c <= 3; ++c)
        for (const std::vector<Letter>& cycle : seqs[c]) {
          LassoWord w{prefix, cycle};
          bool direct = eval_lasso(f, w);
          bool automaton = accepts_lasso(b, w);
          if (direct != automaton) {
            CAPTURE(f.str(), p, c);
            REQUIRE(direct == automaton);
          }
        }
}

} // namespace

TEST_CASE("translate maps true to the one-state universal automaton") {
  BuchiAutomaton b = translate(parse("true"));
  REQUIRE(b.num_states == 1);
  CHECK(b.accepting[0]);
  REQUIRE(b.out[0].size() == 1);
  CHECK(b.out[0][0].to == 0);
  CHECK(b.out[0][0].guard.is_top());
  CHECK(b.is_accepting_sink(0));
}

TEST_CASE("translate maps false to an automaton with no accepting cycle") {
  BuchiAutomaton b = translate(parse("false"));
  CHECK_FALSE(accepts_lasso(b, lasso({}, {{}})));
  CHECK_FALSE(find_accepting_lasso(b, {Letter{}, Letter{"a"}}).has_value());
}

TEST_CASE("translate of a bare atom constrains only the first letter") {
  BuchiAutomaton b = translate(parse("a"));
  CHECK(accepts_lasso(b, lasso({{"a"}}, {{}})));
  CHECK(accepts_lasso(b, lasso({}, {{"a", "b"}})));
  CHECK_FALSE(accepts_lasso(b, lasso({{}}, {{"a"}})));

  auto found = find_accepting_lasso(b, {Letter{"a"}});
  REQUIRE(found.has_value());
  CHECK(is_valid_lasso(b, *found));
  LassoWord w = found->word();
  const Letter& first = w.prefix.empty() ? w.cycle.front() : w.prefix.front();
  CHECK(first == Letter{"a"});
}

TEST_CASE("accepting lasso for F a has an empty prefix and a short cycle") {
  BuchiAutomaton b = translate(parse("F a"));
  auto found = find_accepting_lasso(b, {Letter{"a"}, Letter{"b"}});
  REQUIRE(found.has_value());
  CHECK(is_valid_lasso(b, *found));
  CHECK(found->prefix.empty());
  CHECK(found->prefix.size() + found->cycle.size() <= 2);
  bool has_a_step = false;
  for (const LassoStep& s : found->cycle) has_a_step = has_a_step || s.letter.count("a") > 0;
  CHECK(has_a_step);
  CHECK(eval_lasso(parse("F a"), found->word()));
}

TEST_CASE("no lasso exists when the pool cannot realize the formula") {
  CHECK_FALSE(find_accepting_lasso(translate(parse("G b")), {Letter{"a"}}).has_value());
  CHECK_FALSE(find_accepting_lasso(translate(parse("F b")), {Letter{"a"}, Letter{}}).has_value());
}

TEST_CASE("accepts_lasso matches hand-evaluated recurrence cases") {
  BuchiAutomaton gfa = translate(parse("G F a"));
  CHECK(accepts_lasso(gfa, lasso({}, {{"a"}, {}})));
  CHECK(accepts_lasso(gfa, lasso({}, {{"a"}})));
  CHECK_FALSE(accepts_lasso(gfa, lasso({{"a"}}, {{}})));
  CHECK_FALSE(accepts_lasso(gfa, lasso({}, {{}})));

  BuchiAutomaton until = translate(parse("a U b"));
  CHECK(accepts_lasso(until, lasso({{"a"}}, {{"b"}})));
  CHECK(accepts_lasso(until, lasso({}, {{"b"}})));
  CHECK_FALSE(accepts_lasso(until, lasso({}, {{"a"}})));

  BuchiAutomaton next = translate(parse("X a"));
  CHECK(accepts_lasso(next, lasso({{}}, {{"a"}})));
  CHECK_FALSE(accepts_lasso(next, lasso({{"a"}}, {{}})));

  BuchiAutomaton safety = translate(parse("!(true U b)")); // never b
  CHECK(accepts_lasso(safety, lasso({}, {{"a"}})));
  CHECK_FALSE(accepts_lasso(safety, lasso({{"b"}}, {{"a"}})));
}

TEST_CASE("automaton agrees with direct evaluation on every short lasso") {
  const std::vector<std::string> ab = {"a", "b"};
  check_exhaustive_agreement(parse("F a"), ab);
  check_exhaustive_agreement(parse("a U b"), ab);
  check_exhaustive_agreement(parse("G F a"), ab);
  check_exhaustive_agreement(parse("F G a"), ab);
  check_exhaustive_agreement(parse("X (a U b)"), ab);
  check_exhaustive_agreement(parse("G (a | X b)"), ab);
  check_exhaustive_agreement(parse("!(a U b)"), ab);
}

TEST_CASE("automaton agrees with direct evaluation on random formulas") {
  testgen::Rng rng(3001);
  const std::vector<std::string> atoms = {"a", "b", "c"};
  for (int i = 0; i < 300; ++i) {
    Formula f = testgen::random_formula(rng, atoms);
    BuchiAutomaton b = translate(f);
    LassoWord w = testgen::random_lasso(rng, atoms);
    CHECK(accepts_lasso(b, w) == eval_lasso(f, w));
  }
}

TEST_CASE("found lassos are valid runs whose words satisfy the formula") {
  testgen::Rng rng(3002);
  const std::vector<std::string> atoms = {"a", "b"};
  std::vector<Letter> pool = testgen::all_letters(atoms);
  int found_count = 0;
  for (int i = 0; i < 200; ++i) {
    Formula f = testgen::random_formula(rng, atoms);
    BuchiAutomaton b = translate(f);
    auto found = find_accepting_lasso(b, pool);
    if (!found) {
      // nothing over this pool may satisfy the formula
      for (int j = 0; j < 20; ++j) {
        LassoWord w = testgen::random_lasso(rng, atoms);
        CHECK_FALSE(eval_lasso(f, w));
      }
      continue;
    }
    ++found_count;
    CHECK(is_valid_lasso(b, *found));
    CHECK(accepts_lasso(b, found->word()));
    CHECK(eval_lasso(f, found->word()));
  }
  CHECK(found_count > 100); // most random formulas are satisfiable
}

TEST_CASE("translation and search are deterministic") {
  Formula f = parse("G F (a & X b) & G F (c & X d)");
  BuchiAutomaton b1 = translate(f);
  BuchiAutomaton b2 = translate(f);
  CHECK(to_dot(b1) == to_dot(b2));

  std::vector<Letter> pool = {{"a"}, {"b"}, {"c"}, {"d"}};
  auto l1 = find_accepting_lasso(b1, pool);
  auto l2 = find_accepting_lasso(b2, pool);
  REQUIRE(l1.has_value());
  REQUIRE(l2.has_value());
  CHECK(l1->prefix == l2->prefix);
  CHECK(l1->cycle == l2->cycle);
  CHECK(eval_lasso(f, l1->word()));
}

TEST_CASE("formulas beyond the closure cap are rejected") {
  Formula f = Formula::atom("a0");
  for (int i = 1; i < 70; ++i) f = Formula::conj(f, Formula::atom("a" + std::to_string(i)));
  CHECK_THROWS_AS(translate(f), SynthesisError);
}

TEST_CASE("guards evaluate literal clauses over set letters") {
  GuardClause c{{"a"}, {"b"}};
  CHECK(c.sat({"a"}));
  CHECK(c.sat({"a", "c"}));
  CHECK_FALSE(c.sat({"a", "b"}));
  CHECK_FALSE(c.sat({}));
  CHECK(c.str() == "a & !b");

  Guard g{{GuardClause{{"a"}, {}}, GuardClause{{}, {"b"}}}};
  CHECK(g.eval({"a", "b"}));  // first clause
  CHECK(g.eval({}));          // second clause
  CHECK_FALSE(g.eval({"b"}));
  CHECK_FALSE(g.is_top());
  CHECK(Guard::top().is_top());
  CHECK(Guard::top().str() == "true");
}

TEST_CASE("state-set stepping tracks the nondeterministic frontier") {
  BuchiAutomaton b = translate(parse("F a"));
  std::set<int> cur = {b.initial};
  cur = b.step_states(cur, Letter{});
  CHECK(cur.size() == 1); // still waiting
  cur = b.step_states(cur, Letter{"a"});
  bool sink_reached = false;
  for (int q : cur) sink_reached = sink_reached || b.is_accepting_sink(q);
  CHECK(sink_reached);
}

TEST_CASE("universally accepting states mark discharged co-safety goals") {
  SECTION("single eventuality: the sink itself") {
    BuchiAutomaton b = translate(parse("F a"));
    std::set<int> done = universally_accepting(b);
    REQUIRE(done.size() == 1);
    CHECK(b.is_accepting_sink(*done.begin()));
  }

  SECTION("nested eventualities: discharged component spans the counter") {
    BuchiAutomaton b = translate(parse("F (a & F b)"));
    std::set<int> done = universally_accepting(b);
    REQUIRE_FALSE(done.empty());
    std::set<int> cur{b.initial};
    for (int q : cur) CHECK_FALSE(done.count(q));
    cur = b.step_states(cur, Letter{"a"});
    cur = b.step_states(cur, Letter{"b"});
    bool discharged = false;
    for (int q : cur) discharged = discharged || done.count(q) != 0;
    CHECK(discharged);
  }

  SECTION("recurrence and safety tasks are never discharged") {
    CHECK(universally_accepting(translate(parse("G F a"))).empty());
    CHECK(universally_accepting(translate(parse("G a"))).empty());
    CHECK(universally_accepting(translate(parse("false"))).empty());
  }

  SECTION("trivial task is discharged from the start") {
    BuchiAutomaton b = translate(parse("true"));
    CHECK(universally_accepting(b).count(b.initial) == 1);
  }
}
