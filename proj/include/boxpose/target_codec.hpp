#pragma once

#include <cstddef>
#include <vector>

#include "boxpose/geometry.hpp"

namespace boxpose {

/// Output grid of the detector. Cells are stride_x by stride_y pixels;
/// grid_w * stride_x and grid_h * stride_y must equal the camera image size
/// wherever a grid and a camera are used together.
struct GridSpec {
  int grid_w = 40;
  int grid_h = 30;
  double stride_x = 16.0;
  double stride_y = 16.0;

  GridSpec() = default;
  GridSpec(int grid_w_in, int grid_h_in, double stride_x_in, double stride_y_in);

  /// Grid covering the camera image with the given cell counts.
  static GridSpec for_camera(const CameraIntrinsics& cam, int grid_w_in = 40,
                             int grid_h_in = 30);

  /// Image-space center of cell (gx, gy), pixels.
  Eigen::Vector2d cell_center_px(int gx, int gy) const {
    return {(gx + 0.5) * stride_x, (gy + 0.5) * stride_y};
  }

  /// Pixel coordinates expressed in grid cells.
  Eigen::Vector2d to_grid(const Eigen::Vector2d& px) const {
    return {px.x() / stride_x, px.y() / stride_y};
  }
};

/// Throws DataError unless the grid exactly covers the camera image.
void validate_grid_for_camera(const GridSpec& grid, const CameraIntrinsics& cam);

/// Dense [height][width] map, row-major.
struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Heatmap() = default;
  Heatmap(int height_in, int width_in)
      : height(height_in), width(width_in),
        values(static_cast<std::size_t>(height_in) * width_in, 0.0) {}

  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Dense [height][width][16] map, row-major. Channels (2i, 2i+1) hold the
/// pixel-space displacement from the cell center to projected box vertex i.
struct DisplacementField {
  static constexpr int kChannels = 16;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  DisplacementField() = default;
  DisplacementField(int height_in, int width_in)
      : height(height_in), width(width_in),
        values(static_cast<std::size_t>(height_in) * width_in * kChannels, 0.0) {}

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
};

/// Dense [height][width][4] auxiliary shape map, row-major.
struct ShapeMap {
  static constexpr int kChannels = 4;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ShapeMap() = default;
  ShapeMap(int height_in, int width_in)
      : height(height_in), width(width_in),
        values(static_cast<std::size_t>(height_in) * width_in * kChannels, 0.0) {}

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
};

struct EncoderConfig {
  /// Gaussian spread per object is sigma_factor times the diagonal of the
  /// projected 2D bounding box (measured in grid cells), floored at sigma_min.
  double sigma_factor = 0.1;
  double sigma_min = 1.0;
  /// Heat threshold for displacement support.
  double epsilon = 0.2;
};

/// Per-cell heat target, evaluated at cell centers in grid coordinates:
/// the per-object peak-normalized Gaussians exp(-|p - mu|^2 / (2 sigma^2))
/// merged by taking the per-cell maximum. Projected centers keep their
/// fractional coordinates. An object whose center projects behind the camera
/// raises NumericError; an object whose center projects outside the image
/// (or with any corner behind the camera) is skipped and its index recorded
/// in *skipped.
Heatmap encode_heatmap(const std::vector<OrientedBox3>& objects,
                       const CameraIntrinsics& cam, const GridSpec& grid,
                       const EncoderConfig& cfg,
                       std::vector<std::size_t>* skipped = nullptr);

/// Per-cell vertex displacement target, pixels. Each cell with heat >= epsilon
/// is assigned to the object of maximal heat at that cell and carries, per
/// vertex i, channels (2i, 2i+1) = projected_vertex_i - cell_center. Cells
/// below epsilon carry zeros. `heat` is the merged heatmap defining support;
/// it must match the grid shape. The same objects are skipped as in
/// encode_heatmap.
DisplacementField encode_displacements(const std::vector<OrientedBox3>& objects,
                                       const CameraIntrinsics& cam,
                                       const GridSpec& grid, const Heatmap& heat,
                                       const EncoderConfig& cfg,
                                       std::vector<std::size_t>* skipped = nullptr);

/// Mean squared error over all cells.
double detection_loss(const Heatmap& pred, const Heatmap& target);

/// Mean absolute error over {cells with heat > epsilon} x 16 channels.
/// Returns 0 when no cell is above epsilon.
double regression_loss(const DisplacementField& pred, const DisplacementField& target,
                       const Heatmap& heat, double epsilon);

/// Mean squared error over all entries, or exactly 0 when has_label is false
/// (unlabeled examples contribute nothing).
double shape_loss(const ShapeMap& pred, const ShapeMap& target, bool has_label);

}  // namespace boxpose
