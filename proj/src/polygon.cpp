#include "boxpose/polygon.hpp"

#include <algorithm>
#include <cmath>

namespace boxpose {

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
             const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(),
            [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
              if (a.x() != b.x()) return a.x() < b.x();
              return a.y() < b.y();
            });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;

  std::vector<Eigen::Vector2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower hull
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper hull
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return std::abs(twice) / 2.0;
}

std::vector<Eigen::Vector2d> clip_convex_polygon(
    const std::vector<Eigen::Vector2d>& subject,
    const std::vector<Eigen::Vector2d>& clip) {
  std::vector<Eigen::Vector2d> output = subject;
  for (std::size_t i = 0; i < clip.size() && !output.empty(); ++i) {
    const Eigen::Vector2d& a = clip[i];
    const Eigen::Vector2d& b = clip[(i + 1) % clip.size()];
    const std::vector<Eigen::Vector2d> input = std::move(output);
    output.clear();
    const auto inside = [&](const Eigen::Vector2d& p) {
      return cross(a, b, p) >= 0.0;  // on or left of the edge
    };
    const auto intersect = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
      const Eigen::Vector2d edge = b - a;
      const Eigen::Vector2d dir = q - p;
      const double denom = edge.x() * dir.y() - edge.y() * dir.x();
      const double t = (edge.x() * (a.y() - p.y()) - edge.y() * (a.x() - p.x())) / denom;
      return Eigen::Vector2d(p + t * dir);
    };
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Eigen::Vector2d& cur = input[j];
      const Eigen::Vector2d& prev = input[(j + input.size() - 1) % input.size()];
      const bool cur_in = inside(cur);
      const bool prev_in = inside(prev);
      if (cur_in) {
        if (!prev_in) output.push_back(intersect(prev, cur));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(intersect(prev, cur));
      }
    }
  }
  return output;
}

}  // namespace boxpose
