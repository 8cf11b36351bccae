#include "boxpose/pose_decoder.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace boxpose {

namespace {

constexpr double kNullspaceTolerance = 1e-8;

void validate_decoder_config(const DecoderConfig& cfg) {
  if (cfg.nms_radius < 1) throw DataError("decoder: nms_radius must be >= 1");
  if (cfg.max_detections < 1) throw DataError("decoder: max_detections must be >= 1");
}

}  // namespace

std::vector<Peak> extract_peaks(const Heatmap& heat, const DecoderConfig& cfg) {
  validate_decoder_config(cfg);
  std::vector<Peak> peaks;
  const int r = cfg.nms_radius;
  for (int gy = 0; gy < heat.height; ++gy) {
    for (int gx = 0; gx < heat.width; ++gx) {
      const double v = heat.at(gy, gx);
      if (v < cfg.peak_threshold) continue;
      bool strict_max = true;
      for (int dy = -r; dy <= r && strict_max; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int ny = gy + dy;
          const int nx = gx + dx;
          if (ny < 0 || ny >= heat.height || nx < 0 || nx >= heat.width) continue;
          if (heat.at(ny, nx) >= v) {
            strict_max = false;
            break;
          }
        }
      }
      if (strict_max) peaks.push_back({gx, gy, v});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [&heat](const Peak& a, const Peak& b) {
    if (a.heat != b.heat) return a.heat > b.heat;
    return a.gy * heat.width + a.gx < b.gy * heat.width + b.gx;
  });
  if (peaks.size() > static_cast<std::size_t>(cfg.max_detections))
    peaks.resize(cfg.max_detections);
  return peaks;
}

std::array<Eigen::Vector2d, 8> decode_vertices(const Peak& peak,
                                               const DisplacementField& disp,
                                               const GridSpec& grid) {
  if (disp.height != grid.grid_h || disp.width != grid.grid_w)
    throw DataError("displacement shape does not match the grid");
  if (peak.gx < 0 || peak.gx >= grid.grid_w || peak.gy < 0 || peak.gy >= grid.grid_h)
    throw DataError("peak cell outside the grid");
  const Eigen::Vector2d cell = grid.cell_center_px(peak.gx, peak.gy);
  std::array<Eigen::Vector2d, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = cell + Eigen::Vector2d(disp.at(peak.gy, peak.gx, 2 * i),
                                    disp.at(peak.gy, peak.gx, 2 * i + 1));
  }
  return out;
}

std::array<std::array<double, 4>, 8> epnp_alpha_coefficients() {
  std::array<std::array<double, 4>, 8> alpha;
  for (int i = 0; i < 8; ++i) {
    const double sx = i & 1 ? 1.0 : -1.0;
    const double sy = i & 2 ? 1.0 : -1.0;
    const double sz = i & 4 ? 1.0 : -1.0;
    alpha[i] = {1.0 - (sx + sy + sz) / 2.0, sx / 2.0, sy / 2.0, sz / 2.0};
  }
  return alpha;
}

std::array<Eigen::Vector3d, 4> box_control_points(const OrientedBox3& box) {
  const Eigen::Matrix3d rot = box.rotation.matrix();
  return {box.center, box.center + box.size.x() * rot.col(0),
          box.center + box.size.y() * rot.col(1),
          box.center + box.size.z() * rot.col(2)};
}

EpnpSolution solve_epnp(const std::array<Eigen::Vector2d, 8>& vertices2d,
                        const CameraIntrinsics& cam) {
  for (const auto& v : vertices2d)
    if (!v.allFinite()) throw DataError("vertices must be finite");

  const auto alpha = epnp_alpha_coefficients();
  Eigen::Matrix<double, 16, 12> m = Eigen::Matrix<double, 16, 12>::Zero();
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 4; ++j) {
      m(2 * i, 3 * j) = alpha[i][j] * cam.fx;
      m(2 * i, 3 * j + 2) = alpha[i][j] * (cam.cx - vertices2d[i].x());
      m(2 * i + 1, 3 * j + 1) = alpha[i][j] * cam.fy;
      m(2 * i + 1, 3 * j + 2) = alpha[i][j] * (cam.cy - vertices2d[i].y());
    }
  }

  const Eigen::Matrix<double, 12, 12> mtm = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(mtm);
  if (eig.info() != Eigen::Success) throw NumericError("degenerate configuration");
  const auto& lambda = eig.eigenvalues();  // ascending
  if (!(lambda(11) > 0.0) || lambda(1) <= kNullspaceTolerance * lambda(11))
    throw NumericError("degenerate configuration");

  Eigen::Matrix<double, 12, 1> c = eig.eigenvectors().col(0);

  const auto reconstruct = [&alpha](const Eigen::Matrix<double, 12, 1>& ctrl) {
    std::array<Eigen::Vector3d, 8> verts;
    for (int i = 0; i < 8; ++i) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (int j = 0; j < 4; ++j) v += alpha[i][j] * ctrl.segment<3>(3 * j);
      verts[i] = v;
    }
    return verts;
  };

  auto verts = reconstruct(c);
  double mean_z = 0.0;
  for (const auto& v : verts) mean_z += v.z();
  if (mean_z < 0.0) c = -c;

  const double center_z = c(2);
  if (!(center_z > 1e-12 * c.cwiseAbs().maxCoeff()))
    throw NumericError("degenerate configuration");
  c /= center_z;
  verts = reconstruct(c);
  for (const auto& v : verts)
    if (!(v.z() > 0.0)) throw NumericError("degenerate configuration");

  EpnpSolution sol;
  for (int j = 0; j < 4; ++j) sol.control_points_cam[j] = c.segment<3>(3 * j);
  sol.vertices_cam = verts;
  sol.residual = lambda(0);

  Eigen::Matrix3d axes;
  Eigen::Vector3d lengths;
  for (int j = 0; j < 3; ++j) {
    axes.col(j) = sol.control_points_cam[j + 1] - sol.control_points_cam[0];
    lengths(j) = axes.col(j).norm();
  }
  if (!(lengths.minCoeff() > 1e-12)) throw NumericError("degenerate configuration");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(axes, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d rot = svd.matrixU() * svd.matrixV().transpose();
  if (rot.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    rot = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  sol.rotation = Rotation3::from_matrix(rot);
  sol.translation_dir = sol.control_points_cam[0];
  sol.size_ratios = lengths / lengths.maxCoeff();
  return sol;
}

OrientedBox3 resolve_scale(const EpnpSolution& sol, const Plane3& plane) {
  double support = std::numeric_limits<double>::infinity();
  for (const auto& v : sol.vertices_cam)
    support = std::min(support, plane.normal.dot(v));
  if (std::abs(support) < 1e-9)
    throw NumericError("plane inconsistent with detection");
  const double s = -plane.d / support;
  if (!(s > 0.0)) throw NumericError("plane inconsistent with detection");
  Eigen::Vector3d size;
  for (int j = 0; j < 3; ++j)
    size(j) = s * (sol.control_points_cam[j + 1] - sol.control_points_cam[0]).norm();
  return OrientedBox3(sol.rotation, s * sol.control_points_cam[0], size);
}

DecodedFrame decode_frame(const Heatmap& heat, const DisplacementField& disp,
                          const CameraIntrinsics& cam, const GridSpec& grid,
                          const DecoderConfig& cfg, const std::optional<Plane3>& plane) {
  validate_grid_for_camera(grid, cam);
  if (heat.height != grid.grid_h || heat.width != grid.grid_w)
    throw DataError("heatmap shape does not match the grid");
  if (disp.height != grid.grid_h || disp.width != grid.grid_w)
    throw DataError("displacement shape does not match the grid");

  DecodedFrame out;
  for (const Peak& peak : extract_peaks(heat, cfg)) {
    FrameDetection det;
    det.detection.peak = peak;
    det.detection.confidence = peak.heat;
    det.detection.vertices2d = decode_vertices(peak, disp, grid);
    try {
      det.pose = solve_epnp(det.detection.vertices2d, cam);
    } catch (const NumericError& e) {
      out.dropped.push_back("peak (" + std::to_string(peak.gx) + ", " +
                            std::to_string(peak.gy) + "): " + e.what());
      continue;
    }
    if (plane) {
      try {
        det.metric_box = resolve_scale(det.pose, *plane);
      } catch (const NumericError& e) {
        out.notes.push_back("peak (" + std::to_string(peak.gx) + ", " +
                            std::to_string(peak.gy) + "): " + e.what());
      }
    }
    out.detections.push_back(std::move(det));
  }
  return out;
}

}  // namespace boxpose
