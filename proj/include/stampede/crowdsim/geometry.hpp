#pragma once

#include <algorithm>
#include <cmath>

namespace stampede::crowdsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) noexcept {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) noexcept {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::sqrt(dot(a, a)); }
/// Counter-clockwise perpendicular.
constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }

inline Vec2 normalized(Vec2 a) noexcept {
  const double n = norm(a);
  return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{};
}

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const noexcept { return norm(b - a); }
  Vec2 midpoint() const noexcept { return 0.5 * (a + b); }
};

/// Parameter in [0, 1] of the point of `s` closest to `p`.
inline double closest_param(const Segment& s, Vec2 p) noexcept {
  const Vec2 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return 0.0;
  return std::clamp(dot(p - s.a, ab) / len2, 0.0, 1.0);
}

inline Vec2 closest_point(const Segment& s, Vec2 p) noexcept {
  return s.a + closest_param(s, p) * (s.b - s.a);
}

inline double distance(const Segment& s, Vec2 p) noexcept { return norm(p - closest_point(s, p)); }

/// Segment shortened by `margin` at both ends; collapses to the midpoint when
/// it is shorter than 2 * margin.
inline Segment shrink(const Segment& s, double margin) noexcept {
  const double len = s.length();
  if (len <= 2.0 * margin) return {s.midpoint(), s.midpoint()};
  const Vec2 dir = (1.0 / len) * (s.b - s.a);
  return {s.a + margin * dir, s.b - margin * dir};
}

/// True when the move p0 -> p1 ends strictly on the other side of the line
/// through `s` (or exactly on it) and the crossing point lies on `s`.
inline bool crosses(const Segment& s, Vec2 p0, Vec2 p1) noexcept {
  const Vec2 ab = s.b - s.a;
  const double s0 = cross(ab, p0 - s.a);
  const double s1 = cross(ab, p1 - s.a);
  if (s0 == 0.0) return false;
  if (s1 != 0.0 && (s0 > 0.0) == (s1 > 0.0)) return false;
  const double lambda = s0 / (s0 - s1);
  const Vec2 q = p0 + lambda * (p1 - p0);
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return false;
  const double u = dot(q - s.a, ab) / len2;
  return u >= 0.0 && u <= 1.0;
}

/// Sign of the side of the infinite line through `s` that `p` lies on.
inline int side(const Segment& s, Vec2 p) noexcept {
  const double c = cross(s.b - s.a, p - s.a);
  return (c > 0.0) - (c < 0.0);
}

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  Vec2 center() const noexcept { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(Vec2 p) const noexcept { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

inline bool segments_intersect(const Segment& s, const Segment& t) noexcept {
  const auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  const auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(s.a, s.b, t.a);
  const int o2 = orient(s.a, s.b, t.b);
  const int o3 = orient(t.a, t.b, s.a);
  const int o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

inline bool segment_touches_rect(const Segment& s, const Rect& r) noexcept {
  if (r.contains(s.a) || r.contains(s.b)) return true;
  const Vec2 c00{r.x_min, r.y_min}, c10{r.x_max, r.y_min}, c11{r.x_max, r.y_max}, c01{r.x_min, r.y_max};
  return segments_intersect(s, {c00, c10}) || segments_intersect(s, {c10, c11}) ||
         segments_intersect(s, {c11, c01}) || segments_intersect(s, {c01, c00});
}

}  // namespace stampede::crowdsim
