#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mrmp {

using Point2 = Eigen::Vector2d;

// Default spacing for discretized collision checks, in world units
// (a quarter of the benchmark disk radius).
inline constexpr double kDefaultCollisionStep = 0.05;

// Closed solid obstacle. Vertices must form a simple counter-clockwise loop.
struct Polygon {
  std::vector<Point2> vertices;

  // Even-odd ray-crossing test; points exactly on the boundary are not
  // guaranteed either way (the distance test governs there).
  bool contains(const Point2& p) const;

  // Minimum distance from p to the polygon boundary.
  double boundary_distance(const Point2& p) const;
  double boundary_squared_distance(const Point2& p) const;

  // Throws std::invalid_argument when the loop is not a simple CCW polygon
  // with at least 3 pairwise-distinct consecutive vertices.
  void validate() const;

  bool operator==(const Polygon& o) const { return vertices == o.vertices; }
};

struct Workspace {
  Eigen::AlignedBox2d bounds;
  std::vector<Polygon> obstacles;

  // Throws std::invalid_argument on degenerate bounds, invalid obstacle
  // polygons, or obstacle vertices outside the bounds.
  void validate() const;
};

struct DiskRobot {
  double radius = 0.0;
  Point2 start{0.0, 0.0};
  Point2 goal{0.0, 0.0};
};

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
double point_segment_squared_distance(const Point2& p, const Point2& a, const Point2& b);

// Inclusive segment intersection test (shared endpoints count as intersecting).
bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

// True iff the closed disk of the given radius centered at q stays inside the
// workspace bounds and keeps distance >= radius from every obstacle.
// Touching (exact equality) is free.
bool point_free(const Point2& q, double radius, const Workspace& w);

// Discretized sweep of point_free along the segment: checked at arc-length
// multiples of step from a, plus the endpoint b. Throws on step <= 0.
bool segment_free(const Point2& a, const Point2& b, double radius, const Workspace& w,
                  double step);

// Strict overlap test; tangent disks do not collide.
bool disks_collide(const Point2& q1, double r1, const Point2& q2, double r2);

}  // namespace mrmp
