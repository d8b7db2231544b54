#pragma once

#include <cmath>

namespace mwsn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double k) noexcept { return {a.x * k, a.y * k}; }
  friend bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

}  // namespace mwsn
