#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace fraktal {

using Point2 = Eigen::Vector2d;

// Closed polygonal approximation of the Koch snowflake at a given level.
// The level-0 curve is the unit-side triangle (0,0), (1,0), (1/2, sqrt(3)/2),
// oriented counterclockwise; each refinement replaces every segment by the
// four-segment motif bumping outward from the enclosed region.
//
// Exact closed-form data carried alongside the vertices:
//   segment_length  = 3^-n        (all segments congruent)
//   segment_measure = 4^-n        (self-similar mass of one segment)
// so that total arc length = 3*(4/3)^n and total measure mass = 3.
struct PrefractalCurve {
  int level = 0;
  std::vector<Point2> vertices;                 // closed CCW polygon
  std::vector<std::pair<int, int>> segments;    // (i, i+1 mod V)
  double segment_length = 1.0;
  double segment_measure = 1.0;

  int segment_count() const { return static_cast<int>(segments.size()); }
  // 3*(4/3)^n, computed as one correctly rounded division of exact integers.
  double perimeter() const;
  // count * 4^-n == 3 exactly in double arithmetic.
  double measure_total() const;
  // (3/4)^n; exact in double (3^n scaled by a power of two).
  double delta_n() const;
};

// Planar domain bounded by a pre-fractal curve.
struct PrefractalDomain {
  PrefractalCurve curve;
  double area = 0.0;  // shoelace area, compensated summation
};

// Hausdorff dimension of the Koch curve, ln 4 / ln 3.
double koch_dimension();

// Diameter of the snowflake over all levels >= 1 (hexagram hull), 2/sqrt(3).
// Used as the global coordinate scale for kernel evaluation.
double koch_diameter();

// Builds the level-n curve. Throws GeometryError for n < 0 or n > 10.
PrefractalCurve build_prefractal(int n);

// Shoelace area of the closed polygon.
double domain_area(const PrefractalCurve& curve);

PrefractalDomain build_domain(int n);

// Even-odd ray-crossing test. Points within 1e-12 of the boundary are
// classified as outside, so interior sampling never touches the curve.
bool contains(const PrefractalCurve& curve, const Point2& p);

// Unsigned distance from p to the curve.
double boundary_distance(const PrefractalCurve& curve, const Point2& p);

// Collocation approximation of mu(B(center, radius)): sums segment_measure
// over segments whose midpoint falls strictly inside the ball. The center
// must lie on the curve (within 1e-9); otherwise GeometryError.
double ball_measure(const PrefractalCurve& curve, const Point2& center, double radius);

}  // namespace fraktal
