#pragma once
//
// World model: the team, each agent's labeled regions and service
// capabilities, and the global motion/communication parameters.  Includes
// the JSON scenario format (load/save/validate); the file layout is
// documented in the top-level README.
//
// KEY DESIGN DECISIONS
//  - Region ids double as atomic propositions, and a service contributes its
//    providing-action label plus one label per cooperating action.  A letter
//    of an agent's task alphabet is always "service labels + one region id",
//    so validation insists that letters identify their (service, region)
//    pair uniquely.
//  - The initial communication graph uses a strict `< comm_radius` test;
//    links born later live in the hysteresis band and are owned by the
//    dynamics layer.  Validation requires the initial graph to be connected,
//    since the whole coordination scheme assumes it stays so.
//  - save/load round-trips are byte-identical: object keys serialize in
//    sorted order and doubles use shortest round-trip formatting.
//

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ltlswarm/errors.hpp"
#include "ltlswarm/formula.hpp"
#include "ltlswarm/geometry.hpp"

namespace ltlswarm {

// ── Scenario model ──────────────────────────────────────────────────────────

struct Region {
  std::string id; // also the atomic proposition labeling this region
  Vec2 center;
  double radius = 0.0;
};

inline bool region_contains(const Region& r, Vec2 p) {
  return distance(r.center, p) <= r.radius; // closed ball
}

// One cooperating participant of a service: who helps and which action
// label their contribution carries.
struct Cooperation {
  int agent = 0;
  std::string action;
};

struct ServiceSpec {
  std::string id;
  std::string action;                    // providing-action label
  std::vector<Cooperation> cooperations; // empty when the agent works alone
  std::vector<std::string> regions;      // region ids where this service can run

  std::set<std::string> labels() const {
    std::set<std::string> out{action};
    for (const Cooperation& c : cooperations) out.insert(c.action);
    return out;
  }

  std::vector<int> cooperators() const {
    std::vector<int> out;
    for (const Cooperation& c : cooperations) out.push_back(c.agent);
    return out;
  }
};

struct AgentSpec {
  int id = 0; // agents are numbered 1..N
  Vec2 start;
  std::string formula_text;
  Formula task; // parsed from formula_text
  std::vector<Region> regions;
  std::vector<ServiceSpec> services;

  const Region* region_by_id(const std::string& rid) const {
    for (const Region& r : regions)
      if (r.id == rid) return &r;
    return nullptr;
  }

  const ServiceSpec* service_by_id(const std::string& sid) const {
    for (const ServiceSpec& s : services)
      if (s.id == sid) return &s;
    return nullptr;
  }
};

struct GlobalSpec {
  double comm_radius = 1.5;       // r: links cannot stretch past this
  double hysteresis = 0.1;        // eps: new links need d <= r - eps
  double min_region_radius = 0.2; // smallest meaningful region
  double dt = 0.005;              // outer integration step [s]
  double duration = 35.0;         // default run length [s]
  Vec2 workspace_min{0.0, 0.0};   // drawing bounds only
  Vec2 workspace_max{4.0, 4.0};
};

struct Scenario {
  GlobalSpec global;
  std::vector<AgentSpec> agents;

  const AgentSpec& agent(int id) const {
    for (const AgentSpec& a : agents)
      if (a.id == id) return a;
    throw ValidationError("unknown agent id " + std::to_string(id));
  }
};

// ── Graph helpers ───────────────────────────────────────────────────────────

using EdgePair = std::pair<int, int>; // agent ids, smaller first

inline EdgePair make_edge(int a, int b) { return a < b ? EdgePair{a, b} : EdgePair{b, a}; }

// Initial communication graph: strictly closer than the communication
// radius.  (Later link updates use the hysteresis rule in the dynamics
// layer; only the start-of-run graph uses the strict test.)
inline std::set<EdgePair> initial_edges(const Scenario& sc) {
  std::set<EdgePair> out;
  for (std::size_t i = 0; i < sc.agents.size(); ++i)
    for (std::size_t j = i + 1; j < sc.agents.size(); ++j)
      if (distance(sc.agents[i].start, sc.agents[j].start) < sc.global.comm_radius)
        out.insert(make_edge(sc.agents[i].id, sc.agents[j].id));
  return out;
}

inline bool is_connected(const std::vector<int>& ids, const std::set<EdgePair>& edges) {
  if (ids.empty()) return true;
  std::set<int> seen{ids.front()};
  std::deque<int> frontier{ids.front()};
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop_front();
    for (const EdgePair& e : edges) {
      int v = e.first == u ? e.second : e.second == u ? e.first : -1;
      if (v != -1 && !seen.count(v)) {
        seen.insert(v);
        frontier.push_back(v);
      }
    }
  }
  return seen.size() == ids.size();
}

// ── Validation ──────────────────────────────────────────────────────────────

namespace detail {

inline bool is_atom_name(const std::string& s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return s != "true" && s != "false";
}

} // namespace detail

// All structural problems with the scenario, empty when it is well-formed.
// Letters must identify their (service, region) pair uniquely per agent,
// geometry and timing parameters must be sane, and the initial graph must
// be connected.
inline std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  const GlobalSpec& g = sc.global;
  if (!(g.comm_radius > 0)) complain("comm_radius must be positive");
  if (!(g.hysteresis > 0) || !(g.hysteresis < g.comm_radius))
    complain("hysteresis must satisfy 0 < hysteresis < comm_radius");
  if (!(g.dt > 0)) complain("dt must be positive");
  if (!(g.duration >= 0)) complain("duration must be non-negative");
  if (!(g.min_region_radius > 0)) complain("min_region_radius must be positive");
  if (!(g.workspace_min.x < g.workspace_max.x && g.workspace_min.y < g.workspace_max.y))
    complain("workspace bounds must have positive extent");

  if (sc.agents.empty()) complain("scenario needs at least one agent");
  std::vector<int> ids;
  for (const AgentSpec& a : sc.agents) ids.push_back(a.id);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] != static_cast<int>(i) + 1) {
      complain("agent ids must be 1..N in order");
      break;
    }

  for (const AgentSpec& a : sc.agents) {
    const std::string who = "agent " + std::to_string(a.id) + ": ";
    std::set<std::string> region_ids;
    for (const Region& r : a.regions) {
      if (!detail::is_atom_name(r.id)) complain(who + "region id '" + r.id + "' is not atom syntax");
      if (!region_ids.insert(r.id).second) complain(who + "duplicate region id '" + r.id + "'");
      if (!(r.radius >= g.min_region_radius))
        complain(who + "region '" + r.id + "' radius below min_region_radius");
    }

    std::set<std::string> service_ids;
    std::map<Letter, std::string> letter_owner;
    for (const ServiceSpec& s : a.services) {
      const std::string swho = who + "service '" + s.id + "': ";
      if (!service_ids.insert(s.id).second) complain(who + "duplicate service id '" + s.id + "'");
      if (!detail::is_atom_name(s.action))
        complain(swho + "action label '" + s.action + "' is not atom syntax");
      for (const Cooperation& c : s.cooperations) {
        if (c.agent == a.id) complain(swho + "lists its own provider as cooperator");
        bool known = false;
        for (const AgentSpec& other : sc.agents) known = known || other.id == c.agent;
        if (!known) complain(swho + "cooperator " + std::to_string(c.agent) + " does not exist");
        if (!detail::is_atom_name(c.action))
          complain(swho + "cooperating action '" + c.action + "' is not atom syntax");
      }
      for (const std::string& rid : s.regions) {
        if (!region_ids.count(rid)) {
          complain(swho + "references unknown region '" + rid + "'");
          continue;
        }
        Letter letter = s.labels();
        letter.insert(rid);
        auto [it, fresh] = letter_owner.emplace(letter, s.id);
        if (!fresh && it->second != s.id)
          complain(who + "services '" + it->second + "' and '" + s.id +
                   "' produce the same letter in region '" + rid + "'");
      }
    }
  }

  if (!sc.agents.empty() && !is_connected(ids, initial_edges(sc)))
    complain("initial agent placement is not a connected communication graph");

  return problems;
}

// Convenience wrapper: throw with all diagnostics joined.
inline void ensure_valid(const Scenario& sc) {
  std::vector<std::string> problems = validate(sc);
  if (problems.empty()) return;
  std::string msg = "invalid scenario:";
  for (const std::string& p : problems) msg += "\n  - " + p;
  throw ValidationError(msg);
}

// ── JSON serialization ──────────────────────────────────────────────────────

namespace detail {

inline Vec2 vec2_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(what + " must be a [x, y] number pair");
  return Vec2{j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json vec2_to_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

} // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario sc;
    const nlohmann::json& g = j.at("global");
    sc.global.comm_radius = g.at("comm_radius").get<double>();
    sc.global.hysteresis = g.at("hysteresis").get<double>();
    sc.global.dt = g.at("dt").get<double>();
    sc.global.duration = g.at("duration").get<double>();
    if (g.contains("min_region_radius"))
      sc.global.min_region_radius = g.at("min_region_radius").get<double>();
    if (g.contains("workspace")) {
      sc.global.workspace_min = detail::vec2_from_json(g.at("workspace").at(0), "workspace min");
      sc.global.workspace_max = detail::vec2_from_json(g.at("workspace").at(1), "workspace max");
    }
    for (const nlohmann::json& ja : j.at("agents")) {
      AgentSpec a;
      a.id = ja.at("id").get<int>();
      a.start = detail::vec2_from_json(ja.at("start"), "agent start");
      a.formula_text = ja.at("formula").get<std::string>();
      a.task = parse(a.formula_text);
      for (const nlohmann::json& jr : ja.at("regions")) {
        Region r;
        r.id = jr.at("id").get<std::string>();
        r.center = detail::vec2_from_json(jr.at("center"), "region center");
        r.radius = jr.at("radius").get<double>();
        a.regions.push_back(std::move(r));
      }
      for (const nlohmann::json& js : ja.at("services")) {
        ServiceSpec s;
        s.id = js.at("id").get<std::string>();
        s.action = js.at("action").get<std::string>();
        if (js.contains("cooperations"))
          for (const nlohmann::json& jc : js.at("cooperations"))
            s.cooperations.push_back(
                Cooperation{jc.at("agent").get<int>(), jc.at("action").get<std::string>()});
        for (const nlohmann::json& jr : js.at("regions"))
          s.regions.push_back(jr.get<std::string>());
        a.services.push_back(std::move(s));
      }
      sc.agents.push_back(std::move(a));
    }
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  } catch (const ParseError& e) {
    throw ValidationError(std::string("malformed scenario formula: ") + e.what());
  }
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["global"]["comm_radius"] = sc.global.comm_radius;
  j["global"]["hysteresis"] = sc.global.hysteresis;
  j["global"]["min_region_radius"] = sc.global.min_region_radius;
  j["global"]["dt"] = sc.global.dt;
  j["global"]["duration"] = sc.global.duration;
  j["global"]["workspace"] = nlohmann::json::array(
      {detail::vec2_to_json(sc.global.workspace_min), detail::vec2_to_json(sc.global.workspace_max)});
  j["agents"] = nlohmann::json::array();
  for (const AgentSpec& a : sc.agents) {
    nlohmann::json ja;
    ja["id"] = a.id;
    ja["start"] = detail::vec2_to_json(a.start);
    ja["formula"] = a.formula_text;
    ja["regions"] = nlohmann::json::array();
    for (const Region& r : a.regions) {
      nlohmann::json jr;
      jr["id"] = r.id;
      jr["center"] = detail::vec2_to_json(r.center);
      jr["radius"] = r.radius;
      ja["regions"].push_back(std::move(jr));
    }
    ja["services"] = nlohmann::json::array();
    for (const ServiceSpec& s : a.services) {
      nlohmann::json js;
      js["id"] = s.id;
      js["action"] = s.action;
      js["cooperations"] = nlohmann::json::array();
      for (const Cooperation& c : s.cooperations) {
        nlohmann::json jc;
        jc["agent"] = c.agent;
        jc["action"] = c.action;
        js["cooperations"].push_back(std::move(jc));
      }
      js["regions"] = s.regions;
      ja["services"].push_back(std::move(js));
    }
    j["agents"].push_back(std::move(ja));
  }
  return j;
}

inline std::string save_scenario(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write scenario file: " + path);
  out << save_scenario(sc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scenario JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

} // namespace ltlswarm
