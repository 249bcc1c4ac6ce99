#pragma once
//
// Büchi automata over set-valued letters: translation from LTL by the
// classic tableau construction, exact membership of lasso words, and a
// search for short accepting lassos over a concrete pool of letters.
//
// KEY DESIGN DECISIONS
//  - Transition guards stay symbolic — disjunctions of literal conjunctions
//    — so the automaton is independent of any concrete letter pool and the
//    same object serves both the membership oracle and the plan search.
//  - The tableau runs on negation normal form and yields a generalized
//    automaton with one accepting set per until subformula; a counter
//    construction flattens that to a plain Büchi condition.  States that
//    agree on acceptance and outgoing behaviour are then merged to a fixed
//    point, which keeps the common automata small and gives the search its
//    expected short lassos.
//  - Everything is deterministic: formula sets iterate in canonical text
//    order, tableau states are renumbered by canonical ordering of their
//    subformula sets, and search ties break by smallest state id, then
//    lexicographically smallest letter.  Identical inputs produce identical
//    automata and identical lassos.
//

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ltlswarm/errors.hpp"
#include "ltlswarm/formula.hpp"

namespace ltlswarm {

// ── Guards ──────────────────────────────────────────────────────────────────

// One conjunction of literals: every `pos` atom must be in the letter, no
// `neg` atom may be.  An empty clause is satisfied by every letter.
struct GuardClause {
  std::set<std::string> pos;
  std::set<std::string> neg;

  bool sat(const Letter& l) const {
    for (const std::string& a : pos)
      if (!l.count(a)) return false;
    for (const std::string& a : neg)
      if (l.count(a)) return false;
    return true;
  }

  std::string str() const {
    if (pos.empty() && neg.empty()) return "true";
    std::string out;
    for (const std::string& a : pos) {
      if (!out.empty()) out += " & ";
      out += a;
    }
    for (const std::string& a : neg) {
      if (!out.empty()) out += " & ";
      out += "!" + a;
    }
    return out;
  }

  friend bool operator<(const GuardClause& a, const GuardClause& b) {
    return std::tie(a.pos, a.neg) < std::tie(b.pos, b.neg);
  }
  friend bool operator==(const GuardClause& a, const GuardClause& b) = default;
};

// Disjunction of clauses.  Transitions built by the tableau carry a single
// clause; merging parallel edges between the same state pair unions them.
struct Guard {
  std::vector<GuardClause> clauses; // sorted, unique

  static Guard top() { return Guard{{GuardClause{}}}; }

  bool eval(const Letter& l) const {
    for (const GuardClause& c : clauses)
      if (c.sat(l)) return true;
    return false;
  }

  // Satisfied by every letter?  (Syntactic check: some clause is empty.)
  bool is_top() const {
    for (const GuardClause& c : clauses)
      if (c.pos.empty() && c.neg.empty()) return true;
    return false;
  }

  std::string str() const {
    if (clauses.empty()) return "false";
    std::string out;
    for (const GuardClause& c : clauses) {
      if (!out.empty()) out += " | ";
      out += clauses.size() > 1 && !(c.pos.empty() && c.neg.empty()) ? "(" + c.str() + ")" : c.str();
    }
    return out;
  }
};

// ── Automaton ───────────────────────────────────────────────────────────────

struct Transition {
  int to = 0;
  Guard guard;
};

struct BuchiAutomaton {
  int num_states = 0;
  int initial = 0;
  std::vector<char> accepting;              // indexed by state
  std::vector<std::vector<Transition>> out; // per source, sorted by (to, guard text)

  // Accepting state guaranteed to accept every continuation: it loops to
  // itself under any letter.  Reaching one settles a co-safety task.
  bool is_accepting_sink(int q) const {
    if (!accepting[q]) return false;
    for (const Transition& t : out[q])
      if (t.to == q && t.guard.is_top()) return true;
    return false;
  }

  // One synchronous step of the (nondeterministic) automaton on a letter.
  std::set<int> step_states(const std::set<int>& from, const Letter& l) const {
    std::set<int> next;
    for (int q : from)
      for (const Transition& t : out[q])
        if (t.guard.eval(l)) next.insert(t.to);
    return next;
  }
};

// States from which every continuation is accepted: the state can reach,
// along unconditionally enabled (guard-true) transitions, a guard-true
// cycle through an accepting state.  Acceptance is existential over runs,
// so one such witness run settles the word regardless of later letters.
// Reaching one of these states discharges a co-safety task for good; note
// the witness cycle may pass through several states (the round-robin
// acceptance counter can spread a "done" sink over one state per
// recurrence goal), which is why the single-state `is_accepting_sink`
// test is not enough here.
inline std::set<int> universally_accepting(const BuchiAutomaton& b) {
  std::vector<std::vector<int>> top_adj(b.num_states), top_radj(b.num_states);
  for (int u = 0; u < b.num_states; ++u)
    for (const Transition& t : b.out[u])
      if (t.guard.is_top()) {
        top_adj[u].push_back(t.to);
        top_radj[t.to].push_back(u);
      }

  auto bfs = [&](const std::vector<int>& seeds, const std::vector<std::vector<int>>& adj) {
    std::set<int> seen(seeds.begin(), seeds.end());
    std::deque<int> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop_front();
      for (int v : adj[u])
        if (seen.insert(v).second) frontier.push_back(v);
    }
    return seen;
  };

  // Accepting states lying on a nonempty guard-true cycle.
  std::vector<int> anchors;
  for (int q = 0; q < b.num_states; ++q) {
    if (!b.accepting[q]) continue;
    std::set<int> from_succ = bfs(top_adj[q], top_adj);
    if (from_succ.count(q)) anchors.push_back(q);
  }
  return bfs(anchors, top_radj);
}

// ── Translation ─────────────────────────────────────────────────────────────

namespace detail {

constexpr int kInitMarker = -1;

struct TableauNode {
  std::set<int> incoming; // node ids, or kInitMarker
  std::set<Formula> news;
  std::set<Formula> olds;
  std::set<Formula> nexts;
};

struct StoredNode {
  std::set<Formula> olds;
  std::set<Formula> nexts;
  std::set<int> incoming;
};

inline std::string node_key(const std::set<Formula>& olds, const std::set<Formula>& nexts) {
  std::string k = "O:";
  for (const Formula& f : olds) k += f.str() + ";";
  k += "|N:";
  for (const Formula& f : nexts) k += f.str() + ";";
  return k;
}

// Classic tableau expansion.  Each node splits on the first unprocessed
// formula (canonical text order) until only literals and next-obligations
// remain; completed nodes with equal (olds, nexts) are shared.
inline std::vector<StoredNode> expand_tableau(const Formula& nnf) {
  std::vector<StoredNode> states;
  std::map<std::string, int> by_key;
  std::vector<TableauNode> stack;
  stack.push_back(TableauNode{{kInitMarker}, {nnf}, {}, {}});

  auto contradicts = [](const Formula& lit, const std::set<Formula>& olds) {
    if (lit.op() == Op::Atom) return olds.count(Formula::negation(lit)) > 0;
    return olds.count(lit.left()) > 0; // lit is a negated atom
  };

  while (!stack.empty()) {
    TableauNode q = std::move(stack.back());
    stack.pop_back();

    if (q.news.empty()) {
      std::string key = node_key(q.olds, q.nexts);
      auto it = by_key.find(key);
      if (it != by_key.end()) {
        states[it->second].incoming.insert(q.incoming.begin(), q.incoming.end());
        continue;
      }
      int id = static_cast<int>(states.size());
      states.push_back(StoredNode{q.olds, q.nexts, q.incoming});
      by_key.emplace(std::move(key), id);
      stack.push_back(TableauNode{{id}, states[id].nexts, {}, {}});
      continue;
    }

    Formula eta = *q.news.begin();
    q.news.erase(q.news.begin());

    auto queue_branch = [&](TableauNode&& node) { stack.push_back(std::move(node)); };

    switch (eta.op()) {
      case Op::True:
        // recorded so an until discharged by a literal `true` right side is
        // visible to the acceptance-set predicate below
        q.olds.insert(eta);
        queue_branch(std::move(q));
        break;
      case Op::False:
        break; // inconsistent branch dies
      case Op::Atom:
        if (!contradicts(eta, q.olds)) {
          q.olds.insert(eta);
          queue_branch(std::move(q));
        }
        break;
      case Op::Not:
        if (!contradicts(eta, q.olds)) {
          q.olds.insert(eta);
          queue_branch(std::move(q));
        }
        break;
      case Op::And: {
        q.olds.insert(eta);
        if (!q.olds.count(eta.left())) q.news.insert(eta.left());
        if (!q.olds.count(eta.right())) q.news.insert(eta.right());
        queue_branch(std::move(q));
        break;
      }
      case Op::Next: {
        q.olds.insert(eta);
        q.nexts.insert(eta.left());
        queue_branch(std::move(q));
        break;
      }
      case Op::Or: {
        q.olds.insert(eta);
        TableauNode q2 = q;
        if (!q.olds.count(eta.left())) q.news.insert(eta.left());
        if (!q2.olds.count(eta.right())) q2.news.insert(eta.right());
        queue_branch(std::move(q2)); // popped after q: left branch explores first
        queue_branch(std::move(q));
        break;
      }
      case Op::Until: {
        // a U b  ==  b | (a & X(a U b))
        q.olds.insert(eta);
        TableauNode q2 = q;
        if (!q.olds.count(eta.left())) q.news.insert(eta.left());
        q.nexts.insert(eta);
        if (!q2.olds.count(eta.right())) q2.news.insert(eta.right());
        queue_branch(std::move(q2));
        queue_branch(std::move(q));
        break;
      }
      case Op::Release: {
        // a R b  ==  (b & X(a R b)) | (a & b)
        q.olds.insert(eta);
        TableauNode q2 = q;
        if (!q.olds.count(eta.right())) q.news.insert(eta.right());
        q.nexts.insert(eta);
        if (!q2.olds.count(eta.left())) q2.news.insert(eta.left());
        if (!q2.olds.count(eta.right())) q2.news.insert(eta.right());
        queue_branch(std::move(q2));
        queue_branch(std::move(q));
        break;
      }
      case Op::Eventually:
      case Op::Always:
        // to_nnf eliminated these before expansion
        throw SynthesisError("tableau expansion reached a non-normalized operator");
    }
  }
  return states;
}

inline Guard guard_of(const std::set<Formula>& olds) {
  GuardClause c;
  for (const Formula& f : olds) {
    if (f.op() == Op::Atom) c.pos.insert(f.name());
    if (f.op() == Op::Not) c.neg.insert(f.left().name());
  }
  return Guard{{c}};
}

// Union parallel edges between identical state pairs and sort everything.
inline void normalize_transitions(BuchiAutomaton& b) {
  for (auto& row : b.out) {
    std::map<int, std::set<GuardClause>> merged;
    for (const Transition& t : row)
      merged[t.to].insert(t.guard.clauses.begin(), t.guard.clauses.end());
    row.clear();
    for (auto& [to, clauses] : merged)
      row.push_back(Transition{to, Guard{{clauses.begin(), clauses.end()}}});
  }
}

// Merge states with identical (acceptance, outgoing behaviour) until stable.
inline void merge_equivalent_states(BuchiAutomaton& b) {
  for (;;) {
    normalize_transitions(b);
    std::map<std::string, int> repr_of_sig;
    std::vector<int> repr(b.num_states);
    bool changed = false;
    for (int q = 0; q < b.num_states; ++q) {
      std::string sig = b.accepting[q] ? "A|" : "-|";
      for (const Transition& t : b.out[q]) sig += std::to_string(t.to) + ":" + t.guard.str() + ";";
      auto [it, fresh] = repr_of_sig.emplace(sig, q);
      repr[q] = it->second;
      if (!fresh) changed = true;
    }
    if (!changed) return;

    std::vector<int> new_id(b.num_states, -1);
    int next_id = 0;
    for (int q = 0; q < b.num_states; ++q)
      if (repr[q] == q) new_id[q] = next_id++;

    BuchiAutomaton out;
    out.num_states = next_id;
    out.initial = new_id[repr[b.initial]];
    out.accepting.resize(next_id);
    out.out.resize(next_id);
    for (int q = 0; q < b.num_states; ++q) {
      if (repr[q] != q) continue;
      out.accepting[new_id[q]] = b.accepting[q];
      for (const Transition& t : b.out[q])
        out.out[new_id[q]].push_back(Transition{new_id[repr[t.to]], t.guard});
    }
    b = std::move(out);
  }
}

} // namespace detail

constexpr std::size_t kMaxClosureSize = 64;

// LTL -> Büchi.  The automaton accepts exactly the infinite words satisfying
// the formula; the construction fails only when the formula's closure is
// implausibly large for this problem domain.
inline BuchiAutomaton translate(const Formula& formula) {
  Formula nnf = to_nnf(formula);
  std::vector<Formula> closure = nnf.subformulas();
  if (closure.size() > kMaxClosureSize)
    throw SynthesisError("formula closure has " + std::to_string(closure.size()) +
                         " subformulas, exceeding the cap of " + std::to_string(kMaxClosureSize));

  std::vector<detail::StoredNode> nodes = detail::expand_tableau(nnf);

  // Canonical ids: tableau states sorted by their subformula sets; the
  // fresh initial state is 0.
  std::vector<int> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return detail::node_key(nodes[a].olds, nodes[a].nexts) <
           detail::node_key(nodes[b].olds, nodes[b].nexts);
  });
  std::vector<int> tid(nodes.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) tid[order[rank]] = static_cast<int>(rank) + 1;

  const int num_gba = static_cast<int>(nodes.size()) + 1;
  std::vector<std::vector<Transition>> gba_out(num_gba);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Guard g = detail::guard_of(nodes[i].olds);
    for (int src : nodes[i].incoming) {
      int s = src == detail::kInitMarker ? 0 : tid[src];
      gba_out[s].push_back(Transition{tid[i], g});
    }
  }
  for (auto& row : gba_out)
    std::sort(row.begin(), row.end(),
              [](const Transition& a, const Transition& b) { return a.to < b.to; });

  // One accepting set per until subformula: states where the obligation is
  // absent or already discharged.
  std::vector<Formula> untils;
  for (const Formula& g : closure)
    if (g.op() == Op::Until) untils.push_back(g);
  std::sort(untils.begin(), untils.end());

  const int n_sets = std::max<std::size_t>(untils.size(), 1);
  std::vector<std::vector<char>> in_set(n_sets, std::vector<char>(num_gba, 0));
  if (untils.empty()) {
    for (int q = 0; q < num_gba; ++q) in_set[0][q] = 1;
  } else {
    for (std::size_t u = 0; u < untils.size(); ++u)
      for (std::size_t i = 0; i < nodes.size(); ++i)
        in_set[u][tid[i]] =
            !nodes[i].olds.count(untils[u]) || nodes[i].olds.count(untils[u].right());
  }

  // Degeneralize with a round-robin counter over the accepting sets: the
  // counter advances when the source state lies in the awaited set, and a
  // plain accepting state is a set-0 member awaited at counter 0.
  std::map<std::pair<int, int>, int> prod_id;
  std::vector<std::pair<int, int>> prod_nodes;
  std::deque<std::pair<int, int>> frontier;
  auto intern = [&](int q, int j) {
    auto [it, fresh] = prod_id.emplace(std::make_pair(q, j), static_cast<int>(prod_nodes.size()));
    if (fresh) {
      prod_nodes.emplace_back(q, j);
      frontier.emplace_back(q, j);
    }
    return it->second;
  };

  BuchiAutomaton result;
  intern(0, 0);
  result.initial = 0;
  while (!frontier.empty()) {
    auto [q, j] = frontier.front();
    frontier.pop_front();
    int from = prod_id.at({q, j});
    int j2 = in_set[j][q] ? (j + 1) % n_sets : j;
    if (result.out.size() <= static_cast<std::size_t>(from)) result.out.resize(from + 1);
    for (const Transition& t : gba_out[q])
      result.out[from].push_back(Transition{intern(t.to, j2), t.guard});
  }
  result.num_states = static_cast<int>(prod_nodes.size());
  result.out.resize(result.num_states);
  result.accepting.resize(result.num_states);
  for (int p = 0; p < result.num_states; ++p) {
    auto [q, j] = prod_nodes[p];
    result.accepting[p] = j == 0 && in_set[0][q];
  }

  detail::merge_equivalent_states(result);
  return result;
}

// ── Membership ──────────────────────────────────────────────────────────────

// Does the automaton accept the infinite word denoted by the lasso?  Decided
// on the product of the automaton with the prefix+cycle position graph: the
// word is accepted iff an accepting product node inside the cycle region can
// reach itself and is reachable from the start.
inline bool accepts_lasso(const BuchiAutomaton& b, const LassoWord& w) {
  if (w.cycle.empty()) throw std::invalid_argument("lasso word must have a nonempty cycle");
  const std::size_t m = w.prefix.size();
  const std::size_t n = w.positions();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : m; };
  auto pid = [&](int q, std::size_t i) { return static_cast<int>(q * n + i); };

  const int total = static_cast<int>(b.num_states * n);
  std::vector<char> reached(total, 0);
  std::deque<int> queue;
  reached[pid(b.initial, 0)] = 1;
  queue.push_back(pid(b.initial, 0));
  std::vector<std::vector<int>> adj(total);
  while (!queue.empty()) {
    int p = queue.front();
    queue.pop_front();
    int q = p / static_cast<int>(n);
    std::size_t i = static_cast<std::size_t>(p) % n;
    for (const Transition& t : b.out[q]) {
      if (!t.guard.eval(w.at(i))) continue;
      int p2 = pid(t.to, succ(i));
      adj[p].push_back(p2);
      if (!reached[p2]) {
        reached[p2] = 1;
        queue.push_back(p2);
      }
    }
  }

  // Iterative Tarjan over the reachable subgraph.
  std::vector<int> index(total, -1), low(total, 0), comp(total, -1);
  std::vector<char> on_stack(total, 0);
  std::vector<int> scc_stack;
  std::vector<char> comp_nontrivial;
  int next_index = 0;

  struct Frame {
    int node;
    std::size_t edge;
  };
  for (int root = 0; root < total; ++root) {
    if (!reached[root] || index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    scc_stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.node].size()) {
        int next = adj[f.node][f.edge++];
        if (index[next] == -1) {
          index[next] = low[next] = next_index++;
          scc_stack.push_back(next);
          on_stack[next] = 1;
          call.push_back({next, 0});
        } else if (on_stack[next]) {
          low[f.node] = std::min(low[f.node], index[next]);
        }
      } else {
        int v = f.node;
        call.pop_back();
        if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
        if (low[v] == index[v]) {
          int c = static_cast<int>(comp_nontrivial.size());
          comp_nontrivial.push_back(0);
          int size = 0;
          for (;;) {
            int u = scc_stack.back();
            scc_stack.pop_back();
            on_stack[u] = 0;
            comp[u] = c;
            ++size;
            if (u == v) break;
          }
          if (size > 1) comp_nontrivial[c] = 1;
        }
      }
    }
  }
  for (int p = 0; p < total; ++p) {
    if (!reached[p]) continue;
    for (int p2 : adj[p])
      if (p2 == p) comp_nontrivial[comp[p]] = 1; // self-loop
  }

  for (int q = 0; q < b.num_states; ++q) {
    if (!b.accepting[q]) continue;
    for (std::size_t i = m; i < n; ++i) {
      int p = pid(q, i);
      if (reached[p] && comp_nontrivial[comp[p]]) return true;
    }
  }
  return false;
}

// ── Accepting-lasso search ──────────────────────────────────────────────────

// One step of a found run: the state entered and the letter consumed by the
// entering transition.  The run starts at the automaton's initial state.
struct LassoStep {
  int state = 0;
  Letter letter;

  friend bool operator==(const LassoStep&, const LassoStep&) = default;
};

// A concrete accepting run shape: prefix steps, then cycle steps repeated
// forever.  The cycle re-enters its first stored state from its last one,
// and contains at least one accepting state.
struct Lasso {
  std::vector<LassoStep> prefix;
  std::vector<LassoStep> cycle;

  LassoWord word() const {
    LassoWord w;
    for (const LassoStep& s : prefix) w.prefix.push_back(s.letter);
    for (const LassoStep& s : cycle) w.cycle.push_back(s.letter);
    return w;
  }
};

namespace detail {

struct SearchParent {
  int from = -1;
  Letter letter;
};

// Deterministic BFS tree over concrete letters: explores targets in
// ascending state id and letters in ascending lexicographic order.
inline std::vector<SearchParent> bfs_tree(const BuchiAutomaton& b, int start,
                                          const std::vector<Letter>& letters,
                                          std::vector<int>& dist) {
  dist.assign(b.num_states, -1);
  std::vector<SearchParent> parent(b.num_states);
  std::deque<int> queue;
  dist[start] = 0;
  queue.push_back(start);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (const Transition& t : b.out[u]) {
      if (dist[t.to] != -1) continue;
      for (const Letter& l : letters) {
        if (!t.guard.eval(l)) continue;
        dist[t.to] = dist[u] + 1;
        parent[t.to] = SearchParent{u, l};
        queue.push_back(t.to);
        break;
      }
    }
  }
  return parent;
}

} // namespace detail

// Finds an accepting lasso using only the given letters: shortest prefix to
// an accepting state that lies on a cycle, then a shortest cycle through it;
// std::nullopt when the automaton accepts no word over the pool.  The result
// is normalized so the prefix is as short as the found run allows (a prefix
// tail equal to the cycle tail is rotated into the cycle).
inline std::optional<Lasso> find_accepting_lasso(const BuchiAutomaton& b,
                                                 const std::vector<Letter>& pool) {
  std::vector<Letter> letters = pool;
  std::sort(letters.begin(), letters.end());
  letters.erase(std::unique(letters.begin(), letters.end()), letters.end());

  std::vector<int> dist;
  std::vector<detail::SearchParent> parent = detail::bfs_tree(b, b.initial, letters, dist);

  std::vector<int> candidates;
  for (int q = 0; q < b.num_states; ++q)
    if (b.accepting[q] && dist[q] != -1) candidates.push_back(q);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int a, int c) { return dist[a] < dist[c]; });

  for (int q : candidates) {
    // Shortest way back: BFS from q, catching the first re-entry into q.
    std::vector<int> cdist(b.num_states, -1);
    std::vector<detail::SearchParent> cparent(b.num_states);
    std::deque<int> queue;
    cdist[q] = 0;
    queue.push_back(q);
    std::optional<detail::SearchParent> closing;
    while (!queue.empty() && !closing) {
      int u = queue.front();
      queue.pop_front();
      for (const Transition& t : b.out[u]) {
        if (t.to == q) {
          for (const Letter& l : letters) {
            if (!t.guard.eval(l)) continue;
            closing = detail::SearchParent{u, l};
            break;
          }
          if (closing) break;
        }
        if (cdist[t.to] != -1) continue;
        for (const Letter& l : letters) {
          if (!t.guard.eval(l)) continue;
          cdist[t.to] = cdist[u] + 1;
          cparent[t.to] = detail::SearchParent{u, l};
          queue.push_back(t.to);
          break;
        }
      }
    }
    if (!closing) continue;

    Lasso lasso;
    for (int v = q; v != b.initial; v = parent[v].from)
      lasso.prefix.push_back(LassoStep{v, parent[v].letter});
    std::reverse(lasso.prefix.begin(), lasso.prefix.end());

    std::vector<LassoStep> back;
    back.push_back(LassoStep{q, closing->letter});
    for (int v = closing->from; v != q;) {
      back.push_back(LassoStep{v, cparent[v].letter});
      v = cparent[v].from;
    }
    lasso.cycle.assign(back.rbegin(), back.rend());

    // Rotate shared tail into the cycle: the word is unchanged but the
    // reported prefix becomes minimal for this run.
    while (!lasso.prefix.empty() && lasso.prefix.back() == lasso.cycle.back()) {
      lasso.cycle.insert(lasso.cycle.begin(), lasso.cycle.back());
      lasso.cycle.pop_back();
      lasso.prefix.pop_back();
    }
    return lasso;
  }
  return std::nullopt;
}

// ── Debug rendering ─────────────────────────────────────────────────────────

inline std::string to_dot(const BuchiAutomaton& b, const std::string& name = "buchi") {
  std::string out = "digraph \"" + name + "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
  out += "  __init [shape=point, style=invis];\n";
  for (int q = 0; q < b.num_states; ++q) {
    out += "  s" + std::to_string(q);
    if (b.accepting[q]) out += " [shape=doublecircle]";
    out += ";\n";
  }
  out += "  __init -> s" + std::to_string(b.initial) + ";\n";
  for (int q = 0; q < b.num_states; ++q)
    for (const Transition& t : b.out[q])
      out += "  s" + std::to_string(q) + " -> s" + std::to_string(t.to) + " [label=\"" +
             t.guard.str() + "\"];\n";
  out += "}\n";
  return out;
}

} // namespace ltlswarm
