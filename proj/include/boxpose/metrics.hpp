#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "boxpose/geometry.hpp"

namespace boxpose {

/// Exact intersection-over-union of two oriented boxes. The intersection is
/// the convex hull of the candidate points (corners of one box inside the
/// other plus all edge/face intersection points); its volume is accumulated
/// as signed tetrahedra from the candidate centroid over the hull facets.
/// Inside and coplanarity tests use a 1e-9 tolerance.
double iou3d(const OrientedBox3& a, const OrientedBox3& b);

/// Monte-Carlo estimate of the same quantity: uniform samples inside `a`
/// counted against membership in `b`, deterministic for a fixed seed.
double iou3d_mc(const OrientedBox3& a, const OrientedBox3& b,
                std::uint64_t samples, std::uint64_t seed);

/// IoU of the projected convex silhouettes of the two boxes. Throws
/// NumericError when any corner projects behind the camera.
double iou2d_projection(const OrientedBox3& a, const OrientedBox3& b,
                        const CameraIntrinsics& cam);

struct DetectionRecord {
  std::int64_t frame = 0;
  double confidence = 0.0;
  OrientedBox3 box;
};

struct GroundTruthRecord {
  std::int64_t frame = 0;
  OrientedBox3 box;
};

struct MatchedDetection {
  std::size_t detection_index = 0;
  std::optional<std::size_t> gt_index;  ///< empty for false positives
  double iou = 0.0;                     ///< best same-frame IoU seen
  double confidence = 0.0;
};

/// Greedy matching in order of descending confidence (input order breaks
/// ties): each detection takes the unmatched same-frame ground truth of
/// highest IoU when that IoU reaches the threshold. Every ground truth is
/// matched at most once.
std::vector<MatchedDetection> match_detections(
    const std::vector<DetectionRecord>& detections,
    const std::vector<GroundTruthRecord>& ground_truth, double iou_threshold);

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PRCurve {
  /// One cumulative (recall, precision) point per detection, recall
  /// non-decreasing.
  std::vector<PRPoint> points;
  /// Area under the precision envelope (all-point interpolation).
  double ap = 0.0;
};

/// Average precision over the matched detections. Throws
/// DataError("undefined recall") when there is no ground truth.
PRCurve average_precision(const std::vector<DetectionRecord>& detections,
                          const std::vector<GroundTruthRecord>& ground_truth,
                          double iou_threshold);

struct RepResult {
  bool success = false;
  double mean_error_px = 0.0;
};

/// Mean reprojection distance of the model points under the two poses;
/// success when strictly below threshold_px.
RepResult rep_metric(const RigidPose& est, const RigidPose& gt,
                     const std::vector<Eigen::Vector3d>& points,
                     const CameraIntrinsics& cam, double threshold_px = 5.0);

struct AddResult {
  bool success = false;
  double mean_distance = 0.0;
};

/// Average 3D distance of the model points under the two poses. With
/// `symmetric`, each transformed point is matched to its nearest counterpart
/// instead of its index peer. Success when strictly below
/// fraction * diameter.
AddResult add_metric(const RigidPose& est, const RigidPose& gt,
                     const std::vector<Eigen::Vector3d>& points, double diameter,
                     bool symmetric, double fraction = 0.1);

}  // namespace boxpose
