#include "boxpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "boxpose/polygon.hpp"
#include "boxpose/random.hpp"

namespace boxpose {

namespace {

constexpr double kTol = 1e-9;

/// Face plane {x : n . x + d = 0} with n pointing out of the box.
struct FacePlane {
  Eigen::Vector3d n;
  double d;
};

std::array<FacePlane, 6> face_planes(const OrientedBox3& box) {
  const Eigen::Matrix3d rot = box.rotation.matrix();
  std::array<FacePlane, 6> out;
  int idx = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (const double sign : {-1.0, 1.0}) {
      const Eigen::Vector3d n = sign * rot.col(axis);
      out[idx++] = {n, -(n.dot(box.center) + box.size(axis) / 2.0)};
    }
  }
  return out;
}

void collect_edge_face_hits(const std::array<Eigen::Vector3d, 8>& verts,
                            const OrientedBox3& other,
                            std::vector<Eigen::Vector3d>* out) {
  const auto planes = face_planes(other);
  for (const int bit : {1, 2, 4}) {
    for (int i = 0; i < 8; ++i) {
      if (i & bit) continue;
      const Eigen::Vector3d& p = verts[i];
      const Eigen::Vector3d dir = verts[i | bit] - p;
      for (const auto& plane : planes) {
        const double denom = plane.n.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        double t = -(plane.n.dot(p) + plane.d) / denom;
        if (t < -kTol || t > 1.0 + kTol) continue;
        t = std::clamp(t, 0.0, 1.0);
        const Eigen::Vector3d hit = p + t * dir;
        if (box_contains(other, hit, kTol)) out->push_back(hit);
      }
    }
  }
}

/// Corners of each box inside the other, plus every edge/face intersection.
/// In general position these are exactly the vertices of the intersection
/// polytope.
std::vector<Eigen::Vector3d> intersection_candidates(const OrientedBox3& a,
                                                     const OrientedBox3& b) {
  std::vector<Eigen::Vector3d> pts;
  const auto va = box_vertices(a);
  const auto vb = box_vertices(b);
  for (const auto& v : va)
    if (box_contains(b, v, kTol)) pts.push_back(v);
  for (const auto& v : vb)
    if (box_contains(a, v, kTol)) pts.push_back(v);
  collect_edge_face_hits(va, b, &pts);
  collect_edge_face_hits(vb, a, &pts);
  return pts;
}

/// Convex hull volume of the candidate set. Every hull facet lies on one of
/// the twelve box face planes, so facets are enumerated plane by plane: the
/// coplanar candidates are reduced to their 2D convex hull and the facet
/// polygon contributes its signed cone volume from the candidate centroid.
double intersection_volume(const OrientedBox3& a, const OrientedBox3& b) {
  std::vector<Eigen::Vector3d> pts = intersection_candidates(a, b);

  std::vector<Eigen::Vector3d> uniq;
  uniq.reserve(pts.size());
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& q : uniq) {
      if ((p - q).cwiseAbs().maxCoeff() <= kTol) {
        seen = true;
        break;
      }
    }
    if (!seen) uniq.push_back(p);
  }
  if (uniq.size() < 4) return 0.0;

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : uniq) centroid += p;
  centroid /= static_cast<double>(uniq.size());

  std::vector<FacePlane> planes;
  planes.reserve(12);
  for (const auto& boxed : {face_planes(a), face_planes(b)}) {
    for (const auto& plane : boxed) {
      bool dup = false;
      for (const auto& kept : planes) {
        if (kept.n.dot(plane.n) > 1.0 - kTol && std::abs(kept.d - plane.d) <= kTol) {
          dup = true;
          break;
        }
      }
      if (!dup) planes.push_back(plane);
    }
  }

  double volume = 0.0;
  std::vector<Eigen::Vector2d> flat;
  for (const auto& plane : planes) {
    flat.clear();
    const Eigen::Vector3d u = plane.n.unitOrthogonal();
    const Eigen::Vector3d v = plane.n.cross(u);
    for (const auto& p : uniq) {
      if (std::abs(plane.n.dot(p) + plane.d) > kTol) continue;
      flat.emplace_back(u.dot(p), v.dot(p));
    }
    if (flat.size() < 3) continue;
    const double area = polygon_area(convex_hull_2d(flat));
    // Cone from the centroid to the facet; the centroid lies on the inner
    // side of every supporting plane, so each term is non-negative.
    volume += area * (-plane.d - plane.n.dot(centroid)) / 3.0;
  }
  return std::max(volume, 0.0);
}

}  // namespace

double iou3d(const OrientedBox3& a, const OrientedBox3& b) {
  const double vol_a = box_volume(a);
  const double vol_b = box_volume(b);
  const auto contained = [](const OrientedBox3& inner, const OrientedBox3& outer) {
    for (const auto& v : box_vertices(inner))
      if (!box_contains(outer, v, kTol)) return false;
    return true;
  };
  // Containment makes the intersection volume exact: all corners of a convex
  // box inside the other means the whole box is inside.
  double inter;
  if (contained(a, b)) {
    inter = vol_a;
  } else if (contained(b, a)) {
    inter = vol_b;
  } else {
    inter = std::clamp(intersection_volume(a, b), 0.0, std::min(vol_a, vol_b));
  }
  return std::clamp(inter / (vol_a + vol_b - inter), 0.0, 1.0);
}

double iou3d_mc(const OrientedBox3& a, const OrientedBox3& b,
                std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DataError("sample count must be positive");
  std::mt19937_64 rng(seed);
  const Eigen::Matrix3d rot_a = a.rotation.matrix();
  const Eigen::Matrix3d rot_bt = b.rotation.matrix().transpose();
  const Eigen::Vector3d half_a = a.size / 2.0;
  const Eigen::Vector3d half_b = b.size / 2.0;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Eigen::Vector3d u(uniform_range(rng, -1.0, 1.0), uniform_range(rng, -1.0, 1.0),
                            uniform_range(rng, -1.0, 1.0));
    const Eigen::Vector3d p = a.center + rot_a * u.cwiseProduct(half_a);
    const Eigen::Vector3d local = rot_bt * (p - b.center);
    if (std::abs(local.x()) <= half_b.x() && std::abs(local.y()) <= half_b.y() &&
        std::abs(local.z()) <= half_b.z())
      ++hits;
  }
  const double inter = box_volume(a) * static_cast<double>(hits) /
                       static_cast<double>(samples);
  return std::clamp(inter / (box_volume(a) + box_volume(b) - inter), 0.0, 1.0);
}

double iou2d_projection(const OrientedBox3& a, const OrientedBox3& b,
                        const CameraIntrinsics& cam) {
  const auto silhouette = [&cam](const OrientedBox3& box) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(8);
    for (const auto& v : box_vertices(box)) pts.push_back(project(cam, v));
    return convex_hull_2d(std::move(pts));
  };
  const auto hull_a = silhouette(a);
  const auto hull_b = silhouette(b);
  const double area_a = polygon_area(hull_a);
  const double area_b = polygon_area(hull_b);
  double inter = 0.0;
  if (hull_a.size() >= 3 && hull_b.size() >= 3)
    inter = polygon_area(clip_convex_polygon(hull_a, hull_b));
  inter = std::min(inter, std::min(area_a, area_b));
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<MatchedDetection> match_detections(
    const std::vector<DetectionRecord>& detections,
    const std::vector<GroundTruthRecord>& ground_truth, double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&detections](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<bool> taken(ground_truth.size(), false);
  std::vector<MatchedDetection> out;
  out.reserve(detections.size());
  for (const std::size_t det_idx : order) {
    const DetectionRecord& det = detections[det_idx];
    MatchedDetection match;
    match.detection_index = det_idx;
    match.confidence = det.confidence;
    double best_free = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (ground_truth[g].frame != det.frame) continue;
      const double iou = iou3d(det.box, ground_truth[g].box);
      match.iou = std::max(match.iou, iou);
      if (!taken[g] && iou > best_free) {
        best_free = iou;
        best_gt = g;
      }
    }
    if (best_free >= iou_threshold) {
      taken[best_gt] = true;
      match.gt_index = best_gt;
    }
    out.push_back(match);
  }
  return out;
}

PRCurve average_precision(const std::vector<DetectionRecord>& detections,
                          const std::vector<GroundTruthRecord>& ground_truth,
                          double iou_threshold) {
  if (ground_truth.empty()) throw DataError("undefined recall");
  const auto matches = match_detections(detections, ground_truth, iou_threshold);

  PRCurve curve;
  curve.points.reserve(matches.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (matches[k].gt_index) ++tp;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(ground_truth.size()),
                            static_cast<double>(tp) / static_cast<double>(k + 1)});
  }

  std::vector<double> envelope(curve.points.size());
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    envelope[i] = curve.points[i].precision;
  for (std::size_t i = envelope.size(); i-- > 1;)
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (curve.points[i].recall > prev_recall) {
      ap += (curve.points[i].recall - prev_recall) * envelope[i];
      prev_recall = curve.points[i].recall;
    }
  }
  curve.ap = ap;
  return curve;
}

RepResult rep_metric(const RigidPose& est, const RigidPose& gt,
                     const std::vector<Eigen::Vector3d>& points,
                     const CameraIntrinsics& cam, double threshold_px) {
  if (points.empty()) throw DataError("points must be non-empty");
  if (!(threshold_px > 0.0)) throw DataError("threshold must be positive");
  double sum = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector2d pe = project(cam, est.rotation * p + est.translation);
    const Eigen::Vector2d pg = project(cam, gt.rotation * p + gt.translation);
    sum += (pe - pg).norm();
  }
  const double mean = sum / static_cast<double>(points.size());
  return {mean < threshold_px, mean};
}

AddResult add_metric(const RigidPose& est, const RigidPose& gt,
                     const std::vector<Eigen::Vector3d>& points, double diameter,
                     bool symmetric, double fraction) {
  if (points.empty()) throw DataError("points must be non-empty");
  if (!(diameter > 0.0)) throw DataError("diameter must be positive");
  if (!(fraction > 0.0)) throw DataError("fraction must be positive");

  std::vector<Eigen::Vector3d> est_pts, gt_pts;
  est_pts.reserve(points.size());
  gt_pts.reserve(points.size());
  for (const auto& p : points) {
    est_pts.push_back(est.rotation * p + est.translation);
    gt_pts.push_back(gt.rotation * p + gt.translation);
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (symmetric) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& g : gt_pts) best = std::min(best, (est_pts[i] - g).norm());
      sum += best;
    } else {
      sum += (est_pts[i] - gt_pts[i]).norm();
    }
  }
  const double mean = sum / static_cast<double>(points.size());
  return {mean < fraction * diameter, mean};
}

}  // namespace boxpose
