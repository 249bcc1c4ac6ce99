#pragma once
//
// Motion layer: hysteresis link maintenance, the potential-field controller,
// classical 4th-order integration with frozen links, and the energy/weight
// oracles used by the test suite.
//
// KEY DESIGN DECISIONS
//  - Links are frozen during one integration step and refreshed once at the
//    end: within-step graph switching is excluded by construction.
//  - The controller's link penalty blows up as a link approaches the
//    communication radius, which continuous-time analysis turns into a
//    no-link-loss guarantee.  Discrete steps can overshoot, so the step
//    routine adaptively halves its sub-step whenever an existing link
//    stretches beyond r - eps/2 (floor: step/64).  Refinement is a
//    precision measure only; the hard failure is reserved for a link
//    reaching the radius itself even at the floor, which signals a
//    too-coarse step and aborts the run rather than silently continuing.
//

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltlswarm/errors.hpp"
#include "ltlswarm/geometry.hpp"
#include "ltlswarm/world.hpp"

namespace ltlswarm {

// Dynamic state of the team: positions (index i holds agent id i+1), the
// current link set over agent ids, per-agent leader flags, and the elected
// leader's goal center (meaningful only while some flag is set).
struct SwarmState {
  std::vector<Vec2> positions;
  std::set<EdgePair> edges;
  std::vector<char> leader; // b_i in {0,1}; at most one set
  Vec2 goal{0.0, 0.0};

  int size() const { return static_cast<int>(positions.size()); }
  Vec2 position_of(int id) const { return positions[static_cast<std::size_t>(id - 1)]; }
};

// Link-distance penalty d^2 / (r^2 - d^2): zero at contact, unbounded as d
// approaches the communication radius.
inline double phi(double d, double r) {
  if (d >= r)
    throw IntegrationError("link length " + std::to_string(d) +
                           " reached communication radius " + std::to_string(r));
  return d * d / (r * r - d * d);
}

// Hysteresis update: a pair is linked iff it is closer than r - eps, or it
// was already linked and has not stretched past r.  (The start-of-run link
// set instead uses the strict < r rule; see initial_edges in world.hpp.)
inline std::set<EdgePair> update_edges(const std::set<EdgePair>& prev,
                                       const std::vector<Vec2>& positions, double r, double eps) {
  std::set<EdgePair> out;
  int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = distance(positions[i], positions[j]);
      EdgePair e = make_edge(i + 1, j + 1);
      if (d <= r - eps || (d <= r && prev.count(e))) out.insert(e);
    }
  return out;
}

namespace detail {

// Gradient weight of the link penalty: d(phi)/d(x_i) = w * (x_i - x_j)
// with w = 2 r^2 / (r^2 - d^2)^2.  Finite (and zero-force) at d = 0.
inline double gradient_weight(double d, double r) {
  if (d >= r)
    throw IntegrationError("link length " + std::to_string(d) +
                           " reached communication radius " + std::to_string(r));
  double denom = r * r - d * d;
  return 2.0 * r * r / (denom * denom);
}

} // namespace detail

// Control input of one agent (0-based index): goal attraction if it leads,
// plus link-preserving attraction to each current neighbor.
inline Vec2 control_input(const SwarmState& s, int idx, double r) {
  Vec2 u{0.0, 0.0};
  const Vec2 xi = s.positions[static_cast<std::size_t>(idx)];
  if (s.leader[static_cast<std::size_t>(idx)]) u += (s.goal - xi);
  for (const EdgePair& e : s.edges) {
    int other = e.first == idx + 1 ? e.second : e.second == idx + 1 ? e.first : 0;
    if (other == 0) continue;
    const Vec2 xj = s.positions[static_cast<std::size_t>(other - 1)];
    u += (xj - xi) * detail::gradient_weight(distance(xi, xj), r);
  }
  return u;
}

inline std::vector<Vec2> control_field(const SwarmState& s, double r) {
  std::vector<Vec2> u(s.positions.size());
  for (int i = 0; i < s.size(); ++i) u[static_cast<std::size_t>(i)] = control_input(s, i, r);
  return u;
}

// Team energy: sum of link penalties plus half the squared leader-goal
// distance.  Non-increasing along trajectories while the link set is
// constant; jumps upward only when new links appear.
inline double lyapunov(const SwarmState& s, double r) {
  double v = 0.0;
  for (const EdgePair& e : s.edges)
    v += phi(distance(s.position_of(e.first), s.position_of(e.second)), r);
  for (int i = 0; i < s.size(); ++i)
    if (s.leader[static_cast<std::size_t>(i)])
      v += 0.5 * squared_norm(s.positions[static_cast<std::size_t>(i)] - s.goal);
  return v;
}

// Link-weight matrix (row-major N x N): off-diagonal -w_ij for links,
// diagonal sum of the row's weights.  Exposed as a test oracle: rows sum
// to zero and the matrix is positive semidefinite.
inline std::vector<double> build_weight_matrix(const SwarmState& s, double r) {
  std::size_t n = s.positions.size();
  std::vector<double> h(n * n, 0.0);
  for (const EdgePair& e : s.edges) {
    std::size_t i = static_cast<std::size_t>(e.first - 1);
    std::size_t j = static_cast<std::size_t>(e.second - 1);
    double w = detail::gradient_weight(distance(s.positions[i], s.positions[j]), r);
    h[i * n + j] -= w;
    h[j * n + i] -= w;
    h[i * n + i] += w;
    h[j * n + j] += w;
  }
  return h;
}

namespace detail {

// One classical 4th-order step over the frozen link set; nullopt when any
// stage or the endpoint puts a frozen link at or past the radius.
inline std::optional<std::vector<Vec2>> rk4_once(const SwarmState& base, double h, double r) {
  auto field_at = [&](const std::vector<Vec2>& xs) {
    SwarmState probe = base;
    probe.positions = xs;
    return control_field(probe, r);
  };
  auto shifted = [&](const std::vector<Vec2>& k, double scale) {
    std::vector<Vec2> xs = base.positions;
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += k[i] * scale;
    return xs;
  };
  try {
    std::vector<Vec2> k1 = field_at(base.positions);
    std::vector<Vec2> k2 = field_at(shifted(k1, h / 2.0));
    std::vector<Vec2> k3 = field_at(shifted(k2, h / 2.0));
    std::vector<Vec2> k4 = field_at(shifted(k3, h));
    std::vector<Vec2> out = base.positions;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
    for (const EdgePair& e : base.edges)
      if (distance(out[static_cast<std::size_t>(e.first - 1)],
                   out[static_cast<std::size_t>(e.second - 1)]) >= r)
        return std::nullopt;
    return out;
  } catch (const IntegrationError&) {
    return std::nullopt; // a stage point stretched a frozen link to the radius
  }
}

// True when some frozen link ends the step inside the warning band
// (longer than r - eps/2): the step should be refined for accuracy.
inline bool in_warning_band(const SwarmState& base, const std::vector<Vec2>& xs, double r,
                            double eps) {
  for (const EdgePair& e : base.edges)
    if (distance(xs[static_cast<std::size_t>(e.first - 1)],
                 xs[static_cast<std::size_t>(e.second - 1)]) > r - eps / 2.0)
      return true;
  return false;
}

inline std::vector<Vec2> integrate(const SwarmState& base, double h, double h_min, double r,
                                   double eps, double now) {
  std::optional<std::vector<Vec2>> trial = rk4_once(base, h, r);
  bool refinable = h / 2.0 >= h_min * (1.0 - 1e-12);
  if (trial && !in_warning_band(base, *trial, r, eps)) return *trial;
  if (refinable) {
    SwarmState mid = base;
    mid.positions = integrate(base, h / 2.0, h_min, r, eps, now);
    return integrate(mid, h / 2.0, h_min, r, eps, now + h / 2.0);
  }
  if (trial) return *trial; // inside the warning band at the floor: accept
  throw IntegrationError("link reached communication radius near t = " + std::to_string(now) +
                         " even at the minimum sub-step; decrease dt");
}

} // namespace detail

// Advance the team by h seconds: integrate the controller with the link
// set frozen, then refresh links with the hysteresis rule.  `now` is used
// only for the failure diagnostic.  Throws IntegrationError when a frozen
// link reaches the communication radius even at the minimum sub-step
// (h/64) — the run must abort rather than continue from an invalid state.
inline SwarmState step(const SwarmState& s, double h, double r, double eps, double now = 0.0) {
  SwarmState out = s;
  out.positions = detail::integrate(s, h, h / 64.0, r, eps, now);
  out.edges = update_edges(s.edges, out.positions, r, eps);
  return out;
}

} // namespace ltlswarm
