#pragma once
//
// Minimal planar vector arithmetic used by the workspace model and the
// motion controller.  Nothing here is aware of agents or regions.
//

#include <cmath>

namespace ltlswarm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return s * a; }

  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline double squared_norm(Vec2 a) { return a.x * a.x + a.y * a.y; }

inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

} // namespace ltlswarm
