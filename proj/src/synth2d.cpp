#include "boxpose/synth2d.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "boxpose/error.hpp"
#include "boxpose/random.hpp"

namespace boxpose {

namespace {

struct Vec2 {
  double x, y;
};

Vec2 rotate(const Vec2& v, double cos_t, double sin_t) {
  return {cos_t * v.x - sin_t * v.y, sin_t * v.x + cos_t * v.y};
}

}  // namespace

ForegroundAsset::ForegroundAsset(ImageU8 image) : rgba(std::move(image)) {
  if (rgba.channels != 4) throw DataError("foreground asset must be RGBA");
  bool any_alpha = false;
  for (std::size_t i = 3; i < rgba.pixels.size(); i += 4) {
    if (rgba.pixels[i] != 0) {
      any_alpha = true;
      break;
    }
  }
  if (!any_alpha) throw DataError("foreground asset has no visible pixels");
}

CompositeSample composite(const ForegroundAsset& fg, const ImageU8& bg,
                          const Placement& placement, double alpha_threshold) {
  if (bg.channels != 3) throw DataError("background must be RGB");
  if (!(placement.scale > 0.0)) throw DataError("placement scale must be positive");
  if (!(alpha_threshold >= 0.0) || !(alpha_threshold < 1.0))
    throw DataError("alpha threshold must be in [0, 1)");

  CompositeSample out;
  out.image = bg;
  out.mask = ImageU8(bg.width, bg.height, 1, 0);
  out.alpha.assign(static_cast<std::size_t>(bg.width) * bg.height, 0.0f);
  out.placement = placement;

  const int fw = fg.rgba.width;
  const int fh = fg.rgba.height;
  const double theta = placement.rotation_deg * M_PI / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double inv_scale = 1.0 / placement.scale;
  const double cx = fw / 2.0;
  const double cy = fh / 2.0;

  // Forward image of the (slightly padded) asset canvas bounds the affected
  // output region; everything outside keeps the background bytes untouched.
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const double px : {-1.0, fw + 1.0}) {
    for (const double py : {-1.0, fh + 1.0}) {
      const Vec2 t = rotate({(px - cx) * placement.scale, (py - cy) * placement.scale},
                            cos_t, sin_t);
      min_x = std::min(min_x, t.x + placement.tx);
      max_x = std::max(max_x, t.x + placement.tx);
      min_y = std::min(min_y, t.y + placement.ty);
      max_y = std::max(max_y, t.y + placement.ty);
    }
  }
  const int x_begin = std::max(0, static_cast<int>(std::floor(min_x)) - 1);
  const int x_end = std::min(bg.width, static_cast<int>(std::ceil(max_x)) + 1);
  const int y_begin = std::max(0, static_cast<int>(std::floor(min_y)) - 1);
  const int y_end = std::min(bg.height, static_cast<int>(std::ceil(max_y)) + 1);

  const auto sample_premultiplied = [&](int ix, int iy, double w, double acc[4]) {
    if (ix < 0 || ix >= fw || iy < 0 || iy >= fh || w == 0.0) return;
    const double a = fg.rgba.at(ix, iy, 3) / 255.0;
    if (a == 0.0) return;
    const double wa = w * a;
    acc[0] += wa * fg.rgba.at(ix, iy, 0);
    acc[1] += wa * fg.rgba.at(ix, iy, 1);
    acc[2] += wa * fg.rgba.at(ix, iy, 2);
    acc[3] += wa;
  };

  bool any_support = false;
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) {
      const Vec2 q{x + 0.5 - placement.tx, y + 0.5 - placement.ty};
      const Vec2 r = rotate(q, cos_t, -sin_t);  // inverse rotation
      const double sx = r.x * inv_scale + cx;
      const double sy = r.y * inv_scale + cy;

      const double u = sx - 0.5;
      const double v = sy - 0.5;
      const int i0 = static_cast<int>(std::floor(u));
      const int j0 = static_cast<int>(std::floor(v));
      const double fu = u - i0;
      const double fv = v - j0;

      double acc[4] = {0.0, 0.0, 0.0, 0.0};
      sample_premultiplied(i0, j0, (1.0 - fu) * (1.0 - fv), acc);
      sample_premultiplied(i0 + 1, j0, fu * (1.0 - fv), acc);
      sample_premultiplied(i0, j0 + 1, (1.0 - fu) * fv, acc);
      sample_premultiplied(i0 + 1, j0 + 1, fu * fv, acc);

      const double alpha = acc[3];
      if (alpha == 0.0) continue;
      any_support = true;
      out.alpha[static_cast<std::size_t>(y) * bg.width + x] = static_cast<float>(alpha);
      for (int c = 0; c < 3; ++c) {
        const double blended = acc[c] + (1.0 - alpha) * bg.at(x, y, c);
        out.image.at(x, y, c) =
            static_cast<std::uint8_t>(std::clamp(std::lround(blended), 0L, 255L));
      }
      if (alpha > alpha_threshold) out.mask.at(x, y, 0) = 255;
    }
  }
  if (!any_support) throw DataError("placement has no on-frame support");
  return out;
}

Placement sample_placement(std::uint64_t seed, int bg_w, int bg_h, int fg_w,
                           int fg_h, const PlacementConfig& cfg) {
  if (bg_w <= 0 || bg_h <= 0 || fg_w <= 0 || fg_h <= 0)
    throw DataError("placement: sizes must be positive");
  if (!(cfg.scale_min > 0.0) || !(cfg.scale_max >= cfg.scale_min))
    throw DataError("placement: invalid scale range");
  if (!(cfg.max_overhang >= 0.0) || !(cfg.max_overhang <= 1.0))
    throw DataError("placement: overhang must be in [0, 1]");

  std::mt19937_64 rng(seed);
  Placement p;
  p.scale = uniform_range(rng, cfg.scale_min, cfg.scale_max);
  p.rotation_deg = uniform_range(rng, 0.0, 360.0);

  const double theta = p.rotation_deg * M_PI / 180.0;
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  const double half_x = (c * fg_w + s * fg_h) * p.scale / 2.0;
  const double half_y = (s * fg_w + c * fg_h) * p.scale / 2.0;

  const double lo_x = half_x - cfg.max_overhang * 2.0 * half_x;
  const double hi_x = bg_w - half_x + cfg.max_overhang * 2.0 * half_x;
  const double lo_y = half_y - cfg.max_overhang * 2.0 * half_y;
  const double hi_y = bg_h - half_y + cfg.max_overhang * 2.0 * half_y;
  if (lo_x > hi_x || lo_y > hi_y) throw DataError("infeasible placement constraints");

  p.tx = uniform_range(rng, lo_x, hi_x);
  p.ty = uniform_range(rng, lo_y, hi_y);
  return p;
}

PixelRect alpha_bbox(const ForegroundAsset& asset) {
  PixelRect rect{asset.rgba.width, asset.rgba.height, 0, 0};
  for (int y = 0; y < asset.rgba.height; ++y) {
    for (int x = 0; x < asset.rgba.width; ++x) {
      if (asset.rgba.at(x, y, 3) == 0) continue;
      rect.x0 = std::min(rect.x0, x);
      rect.y0 = std::min(rect.y0, y);
      rect.x1 = std::max(rect.x1, x + 1);
      rect.y1 = std::max(rect.y1, y + 1);
    }
  }
  return rect;
}

Placement sample_placement_for_asset(std::uint64_t seed, int bg_w, int bg_h,
                                     const ForegroundAsset& asset,
                                     const PlacementConfig& cfg) {
  const PixelRect rect = alpha_bbox(asset);
  Placement p = sample_placement(seed, bg_w, bg_h, rect.x1 - rect.x0,
                                 rect.y1 - rect.y0, cfg);
  // The sampled translation positions the bounding-box center; shift it so
  // the placement keeps addressing the asset's rotation center.
  const double theta = p.rotation_deg * M_PI / 180.0;
  const Vec2 offset{((rect.x0 + rect.x1) / 2.0 - asset.rgba.width / 2.0) * p.scale,
                    ((rect.y0 + rect.y1) / 2.0 - asset.rgba.height / 2.0) * p.scale};
  const Vec2 delta = rotate(offset, std::cos(theta), std::sin(theta));
  p.tx -= delta.x;
  p.ty -= delta.y;
  return p;
}

CompositeSample generate_sample(const SynthSources& sources, std::uint64_t master_seed,
                                std::uint64_t index, const PlacementConfig& cfg,
                                double alpha_threshold) {
  if (sources.foregrounds.empty() || sources.backgrounds.empty())
    throw DataError("synth sources must be non-empty");
  if (sources.foreground_ids.size() != sources.foregrounds.size() ||
      sources.background_ids.size() != sources.backgrounds.size())
    throw DataError("synth source ids must match the assets");

  const std::uint64_t seed = derive_seed(master_seed, index);
  std::mt19937_64 rng(seed);
  const std::size_t fg_idx = bounded_index(rng, sources.foregrounds.size());
  const std::size_t bg_idx = bounded_index(rng, sources.backgrounds.size());
  const std::uint64_t placement_seed = rng();

  const ForegroundAsset& fg = sources.foregrounds[fg_idx];
  const ImageU8& bg = sources.backgrounds[bg_idx];
  CompositeSample sample = composite(
      fg, bg, sample_placement_for_asset(placement_seed, bg.width, bg.height, fg, cfg),
      alpha_threshold);
  sample.foreground_id = sources.foreground_ids[fg_idx];
  sample.background_id = sources.background_ids[bg_idx];
  sample.seed = seed;
  return sample;
}

std::vector<CompositeSample> generate_batch(const SynthSources& sources,
                                            std::uint64_t master_seed, std::size_t count,
                                            const PlacementConfig& cfg,
                                            double alpha_threshold, int threads) {
  std::vector<CompositeSample> out(count);
  if (count == 0) return out;
  const int workers = std::clamp(threads, 1, static_cast<int>(count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      out[i] = generate_sample(sources, master_seed, i, cfg, alpha_threshold);
    return out;
  }

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += workers)
          out[i] = generate_sample(sources, master_seed, i, cfg, alpha_threshold);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace boxpose
