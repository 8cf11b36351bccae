#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "boxpose/geometry.hpp"
#include "boxpose/target_codec.hpp"

namespace boxpose {

struct Peak {
  int gx = 0;
  int gy = 0;
  double heat = 0.0;
};

struct Detection {
  Peak peak;
  std::array<Eigen::Vector2d, 8> vertices2d;
  double confidence = 0.0;
};

/// Box pose recovered up to a global scale. The representation is normalized
/// so that the box center C0 sits at depth 1; all quantities scale together
/// with the true scene.
struct EpnpSolution {
  /// Camera-frame control points: C0 is the box center, C1..C3 are the
  /// centers of the +x, +y, +z axis offsets (Cj - C0 spans axis j scaled by
  /// the box extent).
  std::array<Eigen::Vector3d, 4> control_points_cam;
  std::array<Eigen::Vector3d, 8> vertices_cam;
  Rotation3 rotation;
  /// Box center at the canonical depth (z component is 1).
  Eigen::Vector3d translation_dir = Eigen::Vector3d::UnitZ();
  /// Per-axis extents normalized so the largest is 1.
  Eigen::Vector3d size_ratios = Eigen::Vector3d::Ones();
  /// Smallest eigenvalue of Mt M for the assembled linear system.
  double residual = 0.0;
};

struct DecoderConfig {
  double peak_threshold = 0.5;
  int nms_radius = 1;
  int max_detections = 8;
};

/// Cells that are strict local maxima over the (2r+1)^2 neighborhood and at
/// least peak_threshold, sorted by heat descending (ties broken by lowest
/// row-major index), truncated to max_detections.
std::vector<Peak> extract_peaks(const Heatmap& heat, const DecoderConfig& cfg);

/// Vertex i = cell center + displacement channels (2i, 2i+1), pixels.
std::array<Eigen::Vector2d, 8> decode_vertices(const Peak& peak,
                                               const DisplacementField& disp,
                                               const GridSpec& grid);

/// Fixed barycentric coordinates of box corner i with respect to the control
/// points (C0, C1, C2, C3); every row sums to 1.
std::array<std::array<double, 4>, 8> epnp_alpha_coefficients();

/// Control points of a box: its center and the three points one full extent
/// along each rotated axis. Satisfies, for every corner i,
/// sum_j alpha[i][j] * control[j] == box_vertices(box)[i].
std::array<Eigen::Vector3d, 4> box_control_points(const OrientedBox3& box);

/// Recovers the up-to-scale pose of a box from its 8 projected corners.
///
/// Each observed corner (u, v) contributes two linear equations in the 12
/// unknown control-point coordinates:
///   sum_j alpha_ij (fx Cj.x + (cx - u) Cj.z) = 0
///   sum_j alpha_ij (fy Cj.y + (cy - v) Cj.z) = 0
/// The 16x12 system has a one-dimensional null space for non-degenerate
/// views; the solution is the eigenvector of Mt M with the smallest
/// eigenvalue, sign-fixed so the reconstruction lies in front of the camera
/// and scaled so the box center has depth 1. Rotation comes from the nearest
/// orthogonal matrix (SVD, determinant forced positive) to the recovered
/// axis triplet, sizes from the axis lengths.
///
/// Throws NumericError("degenerate configuration") when the null space is
/// ambiguous (second eigenvalue within 1e-8 of zero, relative to the
/// largest) or the reconstruction collapses.
EpnpSolution solve_epnp(const std::array<Eigen::Vector2d, 8>& vertices2d,
                        const CameraIntrinsics& cam);

/// Fixes the metric scale of an up-to-scale solution against a support plane:
/// the scale s = -plane.d / min_i(plane.normal . vertices_cam[i]) is the one
/// that makes the box's lowest vertex touch the plane. Throws
/// NumericError("plane inconsistent with detection") when the scale is
/// non-positive or the support is numerically undefined.
OrientedBox3 resolve_scale(const EpnpSolution& sol, const Plane3& plane);

struct FrameDetection {
  Detection detection;
  EpnpSolution pose;
  std::optional<OrientedBox3> metric_box;
};

struct DecodedFrame {
  std::vector<FrameDetection> detections;
  /// Peaks whose pose solve failed, with the reason.
  std::vector<std::string> dropped;
  /// Detections kept without a metric box because scale resolution failed.
  std::vector<std::string> notes;
};

/// Full per-frame decode: peaks -> vertices -> up-to-scale pose, plus metric
/// boxes when a support plane is given. Detections whose solve fails are
/// dropped with a logged reason.
DecodedFrame decode_frame(const Heatmap& heat, const DisplacementField& disp,
                          const CameraIntrinsics& cam, const GridSpec& grid,
                          const DecoderConfig& cfg,
                          const std::optional<Plane3>& plane = std::nullopt);

}  // namespace boxpose
