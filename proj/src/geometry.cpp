#include "mrmp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mrmp {

namespace {

double cross2(const Point2& a, const Point2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

int orientation_sign(const Point2& a, const Point2& b, const Point2& c) {
  double v = cross2(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

}  // namespace

bool Polygon::contains(const Point2& p) const {
  bool inside = false;
  const size_t m = vertices.size();
  for (size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point2& a = vertices[i];
    const Point2& b = vertices[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

double Polygon::boundary_squared_distance(const Point2& p) const {
  double best = std::numeric_limits<double>::infinity();
  const size_t m = vertices.size();
  for (size_t i = 0, j = m - 1; i < m; j = i++) {
    best = std::min(best, point_segment_squared_distance(p, vertices[j], vertices[i]));
  }
  return best;
}

double Polygon::boundary_distance(const Point2& p) const {
  return std::sqrt(boundary_squared_distance(p));
}

void Polygon::validate() const {
  const size_t m = vertices.size();
  if (m < 3) throw std::invalid_argument("polygon: fewer than 3 vertices");
  for (const Point2& v : vertices) {
    if (!v.allFinite()) throw std::invalid_argument("polygon: non-finite vertex");
  }
  for (size_t i = 0, j = m - 1; i < m; j = i++) {
    if (vertices[i] == vertices[j]) {
      throw std::invalid_argument("polygon: consecutive vertices " + std::to_string(j) +
                                  " and " + std::to_string(i) + " coincide");
    }
  }
  double area2 = 0.0;
  for (size_t i = 0, j = m - 1; i < m; j = i++) {
    area2 += cross2(vertices[j], vertices[i]);
  }
  if (area2 <= 0.0) throw std::invalid_argument("polygon: vertices are not counter-clockwise");
  // Simplicity: no two non-adjacent edges may intersect (touching included).
  for (size_t i = 0; i < m; ++i) {
    size_t i2 = (i + 1) % m;
    for (size_t j = i + 1; j < m; ++j) {
      size_t j2 = (j + 1) % m;
      if (j == i2 || j2 == i) continue;  // shares an endpoint with edge i
      if (segments_intersect(vertices[i], vertices[i2], vertices[j], vertices[j2])) {
        throw std::invalid_argument("polygon: edges " + std::to_string(i) + " and " +
                                    std::to_string(j) + " intersect (not simple)");
      }
    }
  }
}

void Workspace::validate() const {
  if (!(bounds.sizes().x() > 0.0) || !(bounds.sizes().y() > 0.0)) {
    throw std::invalid_argument("workspace: bounds must have positive width and height");
  }
  for (size_t k = 0; k < obstacles.size(); ++k) {
    try {
      obstacles[k].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("workspace: obstacles[" + std::to_string(k) + "]: " + e.what());
    }
    for (const Point2& v : obstacles[k].vertices) {
      if (!bounds.contains(v)) {
        throw std::invalid_argument("workspace: obstacles[" + std::to_string(k) +
                                    "] has a vertex outside the bounds");
      }
    }
  }
}

double point_segment_squared_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).squaredNorm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  return std::sqrt(point_segment_squared_distance(p, a, b));
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const int o1 = orientation_sign(a, b, c);
  const int o2 = orientation_sign(a, b, d);
  const int o3 = orientation_sign(c, d, a);
  const int o4 = orientation_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool point_free(const Point2& q, double radius, const Workspace& w) {
  const Point2& lo = w.bounds.min();
  const Point2& hi = w.bounds.max();
  if (q.x() - radius < lo.x() || q.y() - radius < lo.y() ||
      q.x() + radius > hi.x() || q.y() + radius > hi.y()) {
    return false;
  }
  const double r2 = radius * radius;
  for (const Polygon& ob : w.obstacles) {
    if (ob.contains(q)) return false;
    if (ob.boundary_squared_distance(q) < r2) return false;
  }
  return true;
}

bool segment_free(const Point2& a, const Point2& b, double radius, const Workspace& w,
                  double step) {
  if (!(step > 0.0)) throw std::invalid_argument("segment_free: step must be positive");
  const Point2 ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return point_free(a, radius, w);
  for (long k = 0; k * step < len; ++k) {
    const double t = k * step / len;
    if (!point_free(a + t * ab, radius, w)) return false;
  }
  return point_free(b, radius, w);
}

bool disks_collide(const Point2& q1, double r1, const Point2& q2, double r2) {
  const double rr = r1 + r2;
  return (q1 - q2).squaredNorm() < rr * rr;
}

}  // namespace mrmp
