#include "boxpose/target_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boxpose {

namespace {

constexpr double kCoverTolerance = 1e-6;

void validate_config(const EncoderConfig& cfg) {
  if (!(cfg.sigma_factor > 0.0)) throw DataError("encoder: sigma_factor must be positive");
  if (!(cfg.sigma_min > 0.0)) throw DataError("encoder: sigma_min must be positive");
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))
    throw DataError("encoder: epsilon must be in (0, 1)");
}

struct ProjectedObject {
  std::size_t index = 0;
  Eigen::Vector2d mu_grid = Eigen::Vector2d::Zero();
  double sigma = 1.0;  // grid cells
  std::array<Eigen::Vector2d, 8> vertices_px;
};

/// Projects each object, dropping the ones whose center lands outside the
/// image or with a corner behind the camera. A center behind the camera is an
/// error rather than a skip.
std::vector<ProjectedObject> project_objects(const std::vector<OrientedBox3>& objects,
                                             const CameraIntrinsics& cam,
                                             const GridSpec& grid,
                                             const EncoderConfig& cfg,
                                             std::vector<std::size_t>* skipped) {
  std::vector<ProjectedObject> out;
  out.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Eigen::Vector2d mu = project(cam, objects[i].center);
    if (!(mu.x() >= 0.0 && mu.x() < cam.width && mu.y() >= 0.0 && mu.y() < cam.height)) {
      if (skipped) skipped->push_back(i);
      continue;
    }
    ProjectedObject proj;
    proj.index = i;
    proj.mu_grid = grid.to_grid(mu);
    const auto corners = box_vertices(objects[i]);
    bool behind = false;
    for (int k = 0; k < 8; ++k) {
      if (!(corners[k].z() > 0.0)) {
        behind = true;
        break;
      }
      proj.vertices_px[k] = project(cam, corners[k]);
    }
    if (behind) {
      if (skipped) skipped->push_back(i);
      continue;
    }
    Eigen::Vector2d lo = proj.vertices_px[0];
    Eigen::Vector2d hi = proj.vertices_px[0];
    for (int k = 1; k < 8; ++k) {
      lo = lo.cwiseMin(proj.vertices_px[k]);
      hi = hi.cwiseMax(proj.vertices_px[k]);
    }
    const double diag_cells = std::hypot((hi.x() - lo.x()) / grid.stride_x,
                                         (hi.y() - lo.y()) / grid.stride_y);
    proj.sigma = std::max(cfg.sigma_factor * diag_cells, cfg.sigma_min);
    out.push_back(proj);
  }
  return out;
}

double heat_at(const ProjectedObject& obj, int gx, int gy) {
  const double dx = (gx + 0.5) - obj.mu_grid.x();
  const double dy = (gy + 0.5) - obj.mu_grid.y();
  return std::exp(-(dx * dx + dy * dy) / (2.0 * obj.sigma * obj.sigma));
}

}  // namespace

GridSpec::GridSpec(int grid_w_in, int grid_h_in, double stride_x_in, double stride_y_in)
    : grid_w(grid_w_in), grid_h(grid_h_in), stride_x(stride_x_in), stride_y(stride_y_in) {
  if (grid_w <= 0 || grid_h <= 0) throw DataError("grid: cell counts must be positive");
  if (!(stride_x > 0.0) || !(stride_y > 0.0)) throw DataError("grid: strides must be positive");
}

GridSpec GridSpec::for_camera(const CameraIntrinsics& cam, int grid_w_in, int grid_h_in) {
  if (grid_w_in <= 0 || grid_h_in <= 0) throw DataError("grid: cell counts must be positive");
  return GridSpec(grid_w_in, grid_h_in, static_cast<double>(cam.width) / grid_w_in,
                  static_cast<double>(cam.height) / grid_h_in);
}

void validate_grid_for_camera(const GridSpec& grid, const CameraIntrinsics& cam) {
  if (std::abs(grid.grid_w * grid.stride_x - cam.width) > kCoverTolerance ||
      std::abs(grid.grid_h * grid.stride_y - cam.height) > kCoverTolerance)
    throw DataError("grid does not cover the camera image");
}

Heatmap encode_heatmap(const std::vector<OrientedBox3>& objects,
                       const CameraIntrinsics& cam, const GridSpec& grid,
                       const EncoderConfig& cfg, std::vector<std::size_t>* skipped) {
  validate_config(cfg);
  validate_grid_for_camera(grid, cam);
  const auto projected = project_objects(objects, cam, grid, cfg, skipped);
  Heatmap heat(grid.grid_h, grid.grid_w);
  for (int gy = 0; gy < grid.grid_h; ++gy) {
    for (int gx = 0; gx < grid.grid_w; ++gx) {
      double best = 0.0;
      for (const auto& obj : projected) best = std::max(best, heat_at(obj, gx, gy));
      heat.at(gy, gx) = best;
    }
  }
  return heat;
}

DisplacementField encode_displacements(const std::vector<OrientedBox3>& objects,
                                       const CameraIntrinsics& cam, const GridSpec& grid,
                                       const Heatmap& heat, const EncoderConfig& cfg,
                                       std::vector<std::size_t>* skipped) {
  validate_config(cfg);
  validate_grid_for_camera(grid, cam);
  if (heat.height != grid.grid_h || heat.width != grid.grid_w)
    throw DataError("heatmap shape does not match the grid");
  const auto projected = project_objects(objects, cam, grid, cfg, skipped);
  DisplacementField disp(grid.grid_h, grid.grid_w);
  if (projected.empty()) return disp;
  for (int gy = 0; gy < grid.grid_h; ++gy) {
    for (int gx = 0; gx < grid.grid_w; ++gx) {
      if (heat.at(gy, gx) < cfg.epsilon) continue;
      const ProjectedObject* best = nullptr;
      double best_heat = -1.0;
      for (const auto& obj : projected) {
        const double h = heat_at(obj, gx, gy);
        if (h > best_heat) {
          best_heat = h;
          best = &obj;
        }
      }
      const Eigen::Vector2d cell = grid.cell_center_px(gx, gy);
      for (int i = 0; i < 8; ++i) {
        disp.at(gy, gx, 2 * i) = best->vertices_px[i].x() - cell.x();
        disp.at(gy, gx, 2 * i + 1) = best->vertices_px[i].y() - cell.y();
      }
    }
  }
  return disp;
}

double detection_loss(const Heatmap& pred, const Heatmap& target) {
  if (pred.height != target.height || pred.width != target.width)
    throw DataError("heatmap shapes do not match");
  if (pred.values.empty()) throw DataError("heatmaps must be non-empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double diff = pred.values[i] - target.values[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(pred.values.size());
}

double regression_loss(const DisplacementField& pred, const DisplacementField& target,
                       const Heatmap& heat, double epsilon) {
  if (pred.height != target.height || pred.width != target.width)
    throw DataError("displacement shapes do not match");
  if (pred.height != heat.height || pred.width != heat.width)
    throw DataError("heatmap shape does not match the displacement field");
  double sum = 0.0;
  std::size_t cells = 0;
  for (int y = 0; y < heat.height; ++y) {
    for (int x = 0; x < heat.width; ++x) {
      if (!(heat.at(y, x) > epsilon)) continue;
      ++cells;
      for (int c = 0; c < DisplacementField::kChannels; ++c)
        sum += std::abs(pred.at(y, x, c) - target.at(y, x, c));
    }
  }
  if (cells == 0) return 0.0;
  return sum / static_cast<double>(cells * DisplacementField::kChannels);
}

double shape_loss(const ShapeMap& pred, const ShapeMap& target, bool has_label) {
  if (!has_label) return 0.0;
  if (pred.height != target.height || pred.width != target.width)
    throw DataError("shape map shapes do not match");
  if (pred.values.empty()) throw DataError("shape maps must be non-empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double diff = pred.values[i] - target.values[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(pred.values.size());
}

}  // namespace boxpose
