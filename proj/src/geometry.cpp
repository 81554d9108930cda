#include "fraktal/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fraktal/errors.hpp"

namespace fraktal {

namespace {

constexpr int kMaxLevel = 10;

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Distance from p to segment [a,b].
double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

double koch_dimension() { return std::log(4.0) / std::log(3.0); }

double koch_diameter() { return 2.0 / std::numbers::sqrt3; }

double PrefractalCurve::perimeter() const {
  return 3.0 * ipow(4.0, level) / ipow(3.0, level);
}

double PrefractalCurve::measure_total() const {
  return static_cast<double>(segment_count()) * segment_measure;
}

double PrefractalCurve::delta_n() const {
  return ipow(3.0, level) / ipow(4.0, level);
}

PrefractalCurve build_prefractal(int n) {
  if (n < 0) throw GeometryError("prefractal level must be nonnegative");
  if (n > kMaxLevel)
    throw GeometryError("prefractal level too large (max " + std::to_string(kMaxLevel) +
                        "), got " + std::to_string(n));

  std::vector<Point2> verts = {
      Point2(0.0, 0.0), Point2(1.0, 0.0), Point2(0.5, std::numbers::sqrt3 / 2.0)};

  // One subdivision step: A -> A, A+d, A+d+R(-60°)d, A+2d with d=(B-A)/3.
  // For a CCW polygon the clockwise rotation points the bump outward.
  const double c = 0.5;                          // cos(-60°)
  const double s = -std::numbers::sqrt3 / 2.0;   // sin(-60°)
  for (int lev = 0; lev < n; ++lev) {
    std::vector<Point2> next;
    next.reserve(verts.size() * 4);
    const std::size_t m = verts.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point2& a = verts[i];
      const Point2& b = verts[(i + 1) % m];
      const Point2 d = (b - a) / 3.0;
      const Point2 tip(a.x() + d.x() + c * d.x() - s * d.y(),
                       a.y() + d.y() + s * d.x() + c * d.y());
      next.push_back(a);
      next.push_back(a + d);
      next.push_back(tip);
      next.push_back(a + 2.0 * d);
    }
    verts = std::move(next);
  }

  PrefractalCurve curve;
  curve.level = n;
  curve.vertices = std::move(verts);
  const int count = static_cast<int>(curve.vertices.size());
  curve.segments.reserve(count);
  for (int i = 0; i < count; ++i) curve.segments.emplace_back(i, (i + 1) % count);
  curve.segment_length = 1.0 / ipow(3.0, n);
  curve.segment_measure = 1.0 / ipow(4.0, n);  // power of two scaled, exact
  return curve;
}

double domain_area(const PrefractalCurve& curve) {
  // Shoelace with Kahan compensation; the vertex count reaches 3*4^10.
  double sum = 0.0, comp = 0.0;
  const auto& v = curve.vertices;
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % m];
    const double term = a.x() * b.y() - b.x() * a.y();
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return 0.5 * sum;
}

PrefractalDomain build_domain(int n) {
  PrefractalDomain dom;
  dom.curve = build_prefractal(n);
  dom.area = domain_area(dom.curve);
  return dom;
}

double boundary_distance(const PrefractalCurve& curve, const Point2& p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = curve.vertices;
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < m; ++i) {
    best = std::min(best, segment_distance(p, v[i], v[(i + 1) % m]));
  }
  return best;
}

bool contains(const PrefractalCurve& curve, const Point2& p) {
  const auto& v = curve.vertices;
  const std::size_t m = v.size();
  bool inside = false;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % m];
    // Half-open crossing rule keeps vertex hits unambiguous.
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xint = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xint) inside = !inside;
    }
    dist = std::min(dist, segment_distance(p, a, b));
  }
  return inside && dist > 1e-12;
}

double ball_measure(const PrefractalCurve& curve, const Point2& center, double radius) {
  if (radius <= 0.0) throw GeometryError("ball_measure: radius must be positive");
  if (boundary_distance(curve, center) > 1e-9)
    throw GeometryError("ball_measure: center does not lie on the curve");
  const auto& v = curve.vertices;
  const std::size_t m = v.size();
  const double r2 = radius * radius;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Point2 mid = 0.5 * (v[i] + v[(i + 1) % m]);
    if ((mid - center).squaredNorm() < r2) ++hits;
  }
  return static_cast<double>(hits) * curve.segment_measure;
}

}  // namespace fraktal
