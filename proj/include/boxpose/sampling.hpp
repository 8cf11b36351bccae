#pragma once

#include <cmath>

#include "boxpose/geometry.hpp"
#include "boxpose/random.hpp"

namespace boxpose {

/// Random 640x480 camera with focal length in [300, 1200] px, mild
/// fx/fy anisotropy, and a principal point near the image center.
inline CameraIntrinsics random_camera(std::mt19937_64& rng) {
  const double fx = uniform_range(rng, 300.0, 1200.0);
  const double fy = fx * uniform_range(rng, 0.97, 1.03);
  const double cx = 320.0 + uniform_range(rng, -20.0, 20.0);
  const double cy = 240.0 + uniform_range(rng, -20.0, 20.0);
  return CameraIntrinsics(fx, fy, cx, cy, 640, 480);
}

struct BoxInViewOptions {
  double min_depth = 1.5;
  double max_depth = 5.0;
  double min_size = 0.2;
  double max_size = 2.0;
  /// Rejects boxes whose projected axis-aligned extent is smaller than this.
  double min_subtense_px = 8.0;
  /// Keeps every projected vertex this fraction of the image away from the border.
  double margin_frac = 0.15;
};

/// Rejection-samples an oriented box whose eight vertices all project inside
/// the image with the requested margin. Throws NumericError if no box is
/// accepted within a generous attempt budget.
inline OrientedBox3 random_box_in_view(std::mt19937_64& rng,
                                       const CameraIntrinsics& cam,
                                       const BoxInViewOptions& opts = {}) {
  const double margin_x = opts.margin_frac * cam.width;
  const double margin_y = opts.margin_frac * cam.height;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double depth = uniform_range(rng, opts.min_depth, opts.max_depth);
    const double half_span_x = (cam.width / 2.0 - margin_x) / cam.fx * depth;
    const double half_span_y = (cam.height / 2.0 - margin_y) / cam.fy * depth;
    const Eigen::Vector3d center(
        uniform_range(rng, -half_span_x, half_span_x) +
            (cam.cx - cam.width / 2.0) / cam.fx * depth,
        uniform_range(rng, -half_span_y, half_span_y) +
            (cam.cy - cam.height / 2.0) / cam.fy * depth,
        depth);
    const Eigen::Vector3d size(uniform_range(rng, opts.min_size, opts.max_size),
                               uniform_range(rng, opts.min_size, opts.max_size),
                               uniform_range(rng, opts.min_size, opts.max_size));
    const OrientedBox3 box(random_rotation(rng), center, size);

    double min_u = 1e300, max_u = -1e300, min_v = 1e300, max_v = -1e300;
    bool ok = true;
    for (const auto& vertex : box_vertices(box)) {
      if (!(vertex.z() > 0.1)) {
        ok = false;
        break;
      }
      const Eigen::Vector2d px = project(cam, vertex);
      min_u = std::min(min_u, px.x());
      max_u = std::max(max_u, px.x());
      min_v = std::min(min_v, px.y());
      max_v = std::max(max_v, px.y());
      if (px.x() < margin_x || px.x() > cam.width - margin_x ||
          px.y() < margin_y || px.y() > cam.height - margin_y) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (max_u - min_u < opts.min_subtense_px || max_v - min_v < opts.min_subtense_px)
      continue;
    return box;
  }
  throw NumericError("no box satisfied the visibility constraints");
}

}  // namespace boxpose
