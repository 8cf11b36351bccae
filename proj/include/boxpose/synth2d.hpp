#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boxpose/image.hpp"

namespace boxpose {

/// RGBA cut-out pasted onto backgrounds. At least one pixel must have
/// non-zero alpha.
struct ForegroundAsset {
  ImageU8 rgba;

  explicit ForegroundAsset(ImageU8 image);
};

/// Similarity transform applied to a foreground: the asset is scaled and
/// rotated about its own center, whose image lands at (tx, ty) in background
/// coordinates. Identity placement of an asset therefore uses
/// tx = width / 2, ty = height / 2.
struct Placement {
  double tx = 0.0;
  double ty = 0.0;
  double rotation_deg = 0.0;
  double scale = 1.0;
};

struct PlacementConfig {
  double scale_min = 0.3;
  double scale_max = 1.2;
  /// Per axis, the placed bounding box may extend beyond the frame by at
  /// most this fraction of its own extent. 0 keeps it fully inside.
  double max_overhang = 0.0;
};

struct CompositeSample {
  ImageU8 image;  ///< RGB composite
  ImageU8 mask;   ///< 1 channel, 255 where resampled alpha > threshold
  /// Resampled per-pixel alpha in [0, 1], row-major; diagnostic companion to
  /// the thresholded mask.
  std::vector<float> alpha;
  Placement placement;
  std::string foreground_id;
  std::string background_id;
  std::uint64_t seed = 0;
};

/// Pastes the foreground over the background: the foreground is resampled
/// bilinearly (premultiplied alpha, transparent outside its bounds) and
/// blended as out = alpha * fg + (1 - alpha) * bg. Pixels with zero alpha
/// reproduce the background bytes exactly; pixels with alpha 1 reproduce the
/// foreground. Throws DataError when no output pixel receives any alpha.
CompositeSample composite(const ForegroundAsset& fg, const ImageU8& bg,
                          const Placement& placement, double alpha_threshold = 0.5);

/// Deterministic placement draw: scale, rotation and translation are uniform
/// within the configured ranges, with the translation constrained so that a
/// fg_w x fg_h rectangle centered at the rotation center respects the
/// overhang limit. Draw order is scale, rotation, tx, ty. Throws DataError
/// when the constraint set is empty.
Placement sample_placement(std::uint64_t seed, int bg_w, int bg_h, int fg_w,
                           int fg_h, const PlacementConfig& cfg);

/// Pixel rectangle, half-open: x in [x0, x1), y in [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};

/// Tight bounding box of the pixels with non-zero alpha.
PixelRect alpha_bbox(const ForegroundAsset& asset);

/// sample_placement applied to the asset's alpha bounding box (rather than
/// its full canvas), with the translation adjusted for the offset between
/// the bounding-box center and the rotation center.
Placement sample_placement_for_asset(std::uint64_t seed, int bg_w, int bg_h,
                                     const ForegroundAsset& asset,
                                     const PlacementConfig& cfg);

struct SynthSources {
  std::vector<ForegroundAsset> foregrounds;
  std::vector<std::string> foreground_ids;
  std::vector<ImageU8> backgrounds;
  std::vector<std::string> background_ids;
};

/// Sample `index` of a batch: asset and background choice, placement and
/// compositing all derive from a per-index seed, so any subset of a batch can
/// be generated independently with identical results.
CompositeSample generate_sample(const SynthSources& sources, std::uint64_t master_seed,
                                std::uint64_t index, const PlacementConfig& cfg,
                                double alpha_threshold = 0.5);

/// Generates `count` samples, optionally across threads. Output is identical
/// for any thread count.
std::vector<CompositeSample> generate_batch(const SynthSources& sources,
                                            std::uint64_t master_seed, std::size_t count,
                                            const PlacementConfig& cfg,
                                            double alpha_threshold = 0.5, int threads = 1);

}  // namespace boxpose
