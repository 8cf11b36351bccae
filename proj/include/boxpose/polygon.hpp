#pragma once

#include <Eigen/Dense>

#include <vector>

namespace boxpose {

/// Convex hull (monotone chain), counter-clockwise, collinear points dropped.
/// Degenerate inputs yield fewer than three vertices.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points);

/// Unsigned polygon area (shoelace formula).
double polygon_area(const std::vector<Eigen::Vector2d>& poly);

/// Sutherland-Hodgman clipping of `subject` against a convex
/// counter-clockwise `clip` polygon.
std::vector<Eigen::Vector2d> clip_convex_polygon(
    const std::vector<Eigen::Vector2d>& subject,
    const std::vector<Eigen::Vector2d>& clip);

}  // namespace boxpose
