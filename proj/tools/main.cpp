#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "boxpose/error.hpp"
#include "boxpose/geometry.hpp"
#include "boxpose/manifest.hpp"
#include "boxpose/metrics.hpp"
#include "boxpose/pose_decoder.hpp"
#include "boxpose/sampling.hpp"
#include "boxpose/synth2d.hpp"
#include "boxpose/target_codec.hpp"
#include "boxpose/tensor_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace boxpose;

namespace {

std::vector<double> parse_csv(const std::string& text, std::size_t n,
                              const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
        ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DataError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.size() != n)
    throw DataError(what + ": expected " + std::to_string(n) +
                    " comma-separated values");
  return out;
}

OrientedBox3 parse_box_csv(const std::string& text, const std::string& what) {
  const auto v = parse_csv(text, 10, what);
  return OrientedBox3(Rotation3::from_quaternion(v[0], v[1], v[2], v[3]),
                      {v[4], v[5], v[6]}, {v[7], v[8], v[9]});
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json quat_json(const Rotation3& r) {
  return json::array({r.w(), r.x(), r.y(), r.z()});
}

json box_json(const OrientedBox3& box) {
  json j = json::object();
  j["rotation"] = quat_json(box.rotation);
  j["center"] = vec3_json(box.center);
  j["size"] = vec3_json(box.size);
  return j;
}

OrientedBox3 box_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("center") ||
      !j.contains("size"))
    throw DataError(what + ": expected {rotation, center, size}");
  auto vec3 = [&](const json& v) {
    if (!v.is_array() || v.size() != 3) throw DataError(what + ": expected [x, y, z]");
    return Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  };
  const json& q = j["rotation"];
  if (!q.is_array() || q.size() != 4)
    throw DataError(what + ": rotation: expected [w, x, y, z]");
  return OrientedBox3(Rotation3::from_quaternion(q[0].get<double>(), q[1].get<double>(),
                                                 q[2].get<double>(), q[3].get<double>()),
                      vec3(j["center"]), vec3(j["size"]));
}

void emit_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + out_path + " for writing");
  out << text;
  if (!out) throw IoError("failed to write " + out_path);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - lo);
}

// ---------------------------------------------------------------------------
// encode

struct EncodeOpts {
  std::string manifest;
  std::string out_dir;
  double sigma_factor = 0.1;
  double sigma_min = 1.0;
  double epsilon = 0.2;
  int grid_w = 40;
  int grid_h = 30;
};

void run_encode(const EncodeOpts& o) {
  const DatasetManifest manifest = read_manifest(o.manifest);
  fs::create_directories(o.out_dir);
  const GridSpec grid = GridSpec::for_camera(manifest.camera, o.grid_w, o.grid_h);
  const EncoderConfig cfg{o.sigma_factor, o.sigma_min, o.epsilon};
  int encoded = 0;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const ManifestFrame& frame = manifest.frames[i];
    if (!frame.labels.pose) continue;
    std::vector<OrientedBox3> boxes;
    boxes.reserve(frame.objects.size());
    for (const ManifestObject& object : frame.objects) boxes.push_back(object.box);
    std::vector<std::size_t> skipped;
    const Heatmap heat = encode_heatmap(boxes, manifest.camera, grid, cfg, &skipped);
    const DisplacementField disp =
        encode_displacements(boxes, manifest.camera, grid, heat, cfg);
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%06zu", i);
    write_tensor((fs::path(o.out_dir) / (std::string(stem) + "_heat.mpt")).string(),
                 heatmap_to_tensor(heat));
    write_tensor((fs::path(o.out_dir) / (std::string(stem) + "_disp.mpt")).string(),
                 displacement_to_tensor(disp));
    for (const std::size_t s : skipped)
      std::cerr << "frame " << i << ": object " << s
                << " projects outside the image, skipped\n";
    ++encoded;
  }
  std::cout << "encoded " << encoded << " frame(s) to " << o.out_dir << "\n";
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOpts {
  std::string heat_path;
  std::string disp_path;
  std::string camera_csv;
  std::string plane_csv;
  std::string manifest;
  std::string out;
  int frame = 0;
  double peak_threshold = 0.5;
  int nms_radius = 1;
  int max_detections = 8;
};

void run_decode(const DecodeOpts& o) {
  std::optional<CameraIntrinsics> cam;
  std::optional<Plane3> plane;
  if (!o.manifest.empty()) {
    const DatasetManifest manifest = read_manifest(o.manifest);
    cam = manifest.camera;
    if (o.frame >= 0 && static_cast<std::size_t>(o.frame) < manifest.frames.size())
      plane = manifest.frames[o.frame].plane;
  }
  if (!o.camera_csv.empty()) {
    const auto v = parse_csv(o.camera_csv, 6, "--camera");
    cam = CameraIntrinsics(v[0], v[1], v[2], v[3],
                           static_cast<int>(std::lround(v[4])),
                           static_cast<int>(std::lround(v[5])));
  }
  if (!cam) throw DataError("camera required: pass --camera or --manifest");
  if (!o.plane_csv.empty()) {
    const auto v = parse_csv(o.plane_csv, 4, "--plane");
    plane = Plane3({v[0], v[1], v[2]}, v[3]);
  }

  const Heatmap heat = tensor_to_heatmap(read_tensor(o.heat_path));
  const DisplacementField disp = tensor_to_displacement(read_tensor(o.disp_path));
  const GridSpec grid(heat.width, heat.height, cam->width / double(heat.width),
                      cam->height / double(heat.height));
  validate_grid_for_camera(grid, *cam);
  const DecoderConfig cfg{o.peak_threshold, o.nms_radius, o.max_detections};
  const DecodedFrame decoded = decode_frame(heat, disp, *cam, grid, cfg, plane);

  json frame_json = json::object();
  frame_json["frame"] = o.frame;
  frame_json["detections"] = json::array();
  for (const FrameDetection& fd : decoded.detections) {
    json d = json::object();
    d["confidence"] = fd.detection.confidence;
    d["peak"] = json::array({fd.detection.peak.gx, fd.detection.peak.gy});
    json vertices = json::array();
    for (const Eigen::Vector2d& v : fd.detection.vertices2d)
      vertices.push_back(json::array({v.x(), v.y()}));
    d["vertices2d"] = vertices;
    json pose = json::object();
    pose["rotation"] = quat_json(fd.pose.rotation);
    pose["translation_dir"] = vec3_json(fd.pose.translation_dir);
    pose["size_ratios"] = vec3_json(fd.pose.size_ratios);
    pose["residual"] = fd.pose.residual;
    d["pose_up_to_scale"] = pose;
    if (fd.metric_box) d["metric_box"] = box_json(*fd.metric_box);
    frame_json["detections"].push_back(d);
  }
  frame_json["dropped"] = decoded.dropped;
  frame_json["notes"] = decoded.notes;

  json out = json::object();
  out["version"] = 1;
  out["frames"] = json::array({frame_json});
  emit_json(out, o.out);
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string manifest;
  std::string detections;
  std::string metric = "ap3d";
  std::string report;
  double iou_threshold = 0.5;
  double rep_threshold_px = 5.0;
  double add_fraction = 0.1;
  bool symmetric = false;
};

struct LoadedDetections {
  std::vector<DetectionRecord> records;
  std::size_t without_metric_box = 0;
};

LoadedDetections load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array())
    throw DataError(path + ": expected an object with a frames array");
  LoadedDetections out;
  for (const json& frame : j["frames"]) {
    if (!frame.is_object() || !frame.contains("frame") ||
        !frame["frame"].is_number_integer())
      throw DataError(path + ": frames[].frame: expected an integer");
    const std::int64_t index = frame["frame"].get<std::int64_t>();
    if (!frame.contains("detections")) continue;
    if (!frame["detections"].is_array())
      throw DataError(path + ": frames[].detections: expected an array");
    for (const json& det : frame["detections"]) {
      if (!det.is_object() || !det.contains("confidence"))
        throw DataError(path + ": detection entries need a confidence");
      if (!det.contains("metric_box")) {
        ++out.without_metric_box;
        continue;
      }
      DetectionRecord rec;
      rec.frame = index;
      rec.confidence = det["confidence"].get<double>();
      rec.box = box_from_json(det["metric_box"], path + ": metric_box");
      out.records.push_back(rec);
    }
  }
  return out;
}

void run_eval(const EvalOpts& o) {
  const DatasetManifest manifest = read_manifest(o.manifest);
  std::vector<GroundTruthRecord> gt;
  std::vector<char> frame_has_pose(manifest.frames.size(), 0);
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    if (!manifest.frames[i].labels.pose) continue;
    frame_has_pose[i] = 1;
    for (const ManifestObject& object : manifest.frames[i].objects)
      gt.push_back({static_cast<std::int64_t>(i), object.box});
  }

  LoadedDetections loaded = load_detections(o.detections);
  std::vector<DetectionRecord> detections;
  std::size_t off_frame = 0;
  for (DetectionRecord& rec : loaded.records) {
    if (rec.frame < 0 ||
        rec.frame >= static_cast<std::int64_t>(manifest.frames.size()) ||
        !frame_has_pose[static_cast<std::size_t>(rec.frame)]) {
      ++off_frame;
      continue;
    }
    detections.push_back(std::move(rec));
  }

  json report = json::object();
  report["metric"] = (o.metric == "add" && o.symmetric) ? "add-s" : o.metric;
  report["iou_threshold"] = o.iou_threshold;
  report["ground_truth"] = gt.size();
  report["detections"] = detections.size();
  if (loaded.without_metric_box)
    report["skipped_without_metric_box"] = loaded.without_metric_box;
  if (off_frame) report["skipped_off_frame"] = off_frame;

  if (o.metric == "ap3d") {
    const PRCurve curve = average_precision(detections, gt, o.iou_threshold);
    report["ap"] = curve.ap;
    json points = json::array();
    for (const PRPoint& p : curve.points)
      points.push_back(json::array({p.recall, p.precision}));
    report["pr_curve"] = points;
  } else {
    if (gt.empty()) throw DataError("undefined recall: no ground truth");
    const auto matches = match_detections(detections, gt, o.iou_threshold);
    std::size_t matched = 0;
    std::size_t successes = 0;
    double error_sum = 0.0;
    for (const MatchedDetection& match : matches) {
      if (!match.gt_index) continue;
      ++matched;
      const GroundTruthRecord& g = gt[*match.gt_index];
      const DetectionRecord& d = detections[match.detection_index];
      const OrientedBox3 local(Rotation3::identity(), Eigen::Vector3d::Zero(),
                               g.box.size);
      const auto corners = box_vertices(local);
      const std::vector<Eigen::Vector3d> points(corners.begin(), corners.end());
      const RigidPose est{d.box.rotation, d.box.center};
      const RigidPose truth{g.box.rotation, g.box.center};
      if (o.metric == "rep") {
        const RepResult r =
            rep_metric(est, truth, points, manifest.camera, o.rep_threshold_px);
        error_sum += r.mean_error_px;
        if (r.success) ++successes;
      } else {
        const AddResult r = add_metric(est, truth, points, g.box.size.norm(),
                                       o.symmetric, o.add_fraction);
        error_sum += r.mean_distance;
        if (r.success) ++successes;
      }
    }
    report["matched"] = matched;
    report["success_rate"] = static_cast<double>(successes) / static_cast<double>(gt.size());
    report["mean_error"] = matched ? error_sum / static_cast<double>(matched) : 0.0;
  }
  emit_json(report, o.report);
}

// ---------------------------------------------------------------------------
// iou

struct IouOpts {
  std::string box_a;
  std::string box_b;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 12345;
};

void run_iou(const IouOpts& o) {
  const OrientedBox3 a = parse_box_csv(o.box_a, "--box-a");
  const OrientedBox3 b = parse_box_csv(o.box_b, "--box-b");
  json out = json::object();
  out["iou3d"] = iou3d(a, b);
  if (o.mc_samples) out["iou3d_mc"] = iou3d_mc(a, b, o.mc_samples, o.seed);
  emit_json(out, "");
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  std::string foregrounds;
  std::string backgrounds;
  std::string out_dir;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  double scale_min = 0.3;
  double scale_max = 1.2;
  double overhang = 0.0;
  double alpha_threshold = 0.5;
};

std::vector<std::pair<std::string, std::string>> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".png") continue;
    out.emplace_back(entry.path().string(), entry.path().filename().string());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

ImageU8 to_rgb(const ImageU8& img) {
  if (img.channels == 3) return img;
  ImageU8 out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = img.channels == 1 ? img.at(x, y, 0) : img.at(x, y, c);
  return out;
}

void run_synth(const SynthOpts& o) {
  SynthSources sources;
  for (const auto& [path, id] : list_pngs(o.foregrounds)) {
    ImageU8 img = read_png(path);
    if (img.channels != 4)
      throw DataError("foreground " + id + " must be RGBA (has " +
                      std::to_string(img.channels) + " channel(s))");
    sources.foregrounds.emplace_back(std::move(img));
    sources.foreground_ids.push_back(id);
  }
  for (const auto& [path, id] : list_pngs(o.backgrounds)) {
    sources.backgrounds.push_back(to_rgb(read_png(path)));
    sources.background_ids.push_back(id);
  }
  if (sources.foregrounds.empty())
    throw DataError("no foreground PNGs in " + o.foregrounds);
  if (sources.backgrounds.empty())
    throw DataError("no background PNGs in " + o.backgrounds);

  const PlacementConfig cfg{o.scale_min, o.scale_max, o.overhang};
  const auto samples =
      generate_batch(sources, o.seed, o.count, cfg, o.alpha_threshold, o.threads);

  fs::create_directories(o.out_dir);
  const fs::path manifest_path = fs::path(o.out_dir) / "manifest.json";
  DatasetManifest manifest;
  std::size_t start = 0;
  if (fs::exists(manifest_path)) {
    manifest = read_manifest(manifest_path.string());
    start = manifest.frames.size();
  } else {
    const ImageU8& bg0 = sources.backgrounds.front();
    const double f = std::max(bg0.width, bg0.height);
    manifest.camera = CameraIntrinsics(f, f, bg0.width / 2.0, bg0.height / 2.0,
                                       bg0.width, bg0.height);
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CompositeSample& sample = samples[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "sample_%06zu", start + i);
    const std::string image_name = std::string(stem) + ".png";
    const std::string mask_name = std::string(stem) + "_mask.png";
    write_png((fs::path(o.out_dir) / image_name).string(), sample.image);
    write_png((fs::path(o.out_dir) / mask_name).string(), sample.mask);

    ManifestFrame frame;
    frame.image = image_name;
    frame.mask = mask_name;
    frame.labels.pose = false;
    frame.labels.segmentation = true;
    frame.labels.coordinate_map = false;
    json placement = json::object();
    placement["tx"] = sample.placement.tx;
    placement["ty"] = sample.placement.ty;
    placement["rotation_deg"] = sample.placement.rotation_deg;
    placement["scale"] = sample.placement.scale;
    json synth = json::object();
    synth["foreground"] = sample.foreground_id;
    synth["background"] = sample.background_id;
    synth["seed"] = sample.seed;
    synth["placement"] = placement;
    synth["alpha_threshold"] = o.alpha_threshold;
    frame.extras["synth"] = synth;
    manifest.frames.push_back(std::move(frame));
  }
  write_manifest(manifest_path.string(), manifest);
  std::cout << "wrote " << samples.size() << " sample(s) to " << o.out_dir << "\n";
}

// ---------------------------------------------------------------------------
// epnp-bench

struct BenchOpts {
  int trials = 1000;
  double noise_px = 0.0;
  std::uint64_t seed = 1234;
};

void run_bench(const BenchOpts& o) {
  std::mt19937_64 rng(o.seed);
  std::vector<double> rot_err_deg, reproj_rmse, size_err, solve_us;
  int degenerate = 0;
  for (int trial = 0; trial < o.trials; ++trial) {
    const CameraIntrinsics cam = random_camera(rng);
    const OrientedBox3 box = random_box_in_view(rng, cam);
    const auto vertices = box_vertices(box);
    std::array<Eigen::Vector2d, 8> points2d;
    for (int i = 0; i < 8; ++i) {
      points2d[i] = project(cam, vertices[i]);
      if (o.noise_px > 0.0)
        points2d[i] +=
            o.noise_px * Eigen::Vector2d(normal_sample(rng), normal_sample(rng));
    }
    EpnpSolution sol;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sol = solve_epnp(points2d, cam);
    } catch (const NumericError&) {
      ++degenerate;
      continue;
    }
    const auto t1 = std::chrono::steady_clock::now();
    solve_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());

    rot_err_deg.push_back(sol.rotation.angle_to(box.rotation) * 180.0 / M_PI);
    double se = 0.0;
    for (int i = 0; i < 8; ++i)
      se += (project(cam, sol.vertices_cam[i]) - points2d[i]).squaredNorm();
    reproj_rmse.push_back(std::sqrt(se / 8.0));
    const Eigen::Vector3d gt_ratio = box.size / box.size.maxCoeff();
    size_err.push_back((sol.size_ratios - gt_ratio).cwiseAbs().maxCoeff());
  }

  auto row = [](const char* name, const std::vector<double>& v) {
    std::printf("%-18s p50=%-12.5g p90=%-12.5g max=%-12.5g\n", name,
                percentile(v, 0.5), percentile(v, 0.9), percentile(v, 1.0));
  };
  std::printf("trials:            %d\n", o.trials);
  std::printf("noise_px:          %.3f\n", o.noise_px);
  std::printf("degenerate:        %d\n", degenerate);
  row("solve_time_us:", solve_us);
  row("rotation_err_deg:", rot_err_deg);
  row("reproj_rmse_px:", reproj_rmse);
  row("size_ratio_err:", size_err);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Oriented-box pose toolkit: target encoding, pose decoding, box metrics "
      "and 2D compositing"};
  app.require_subcommand(1);

  auto encode_opts = std::make_shared<EncodeOpts>();
  CLI::App* encode = app.add_subcommand(
      "encode", "Encode manifest pose labels into heat/displacement tensors");
  encode->add_option("--manifest", encode_opts->manifest, "Dataset manifest JSON")
      ->required();
  encode->add_option("--out-dir", encode_opts->out_dir, "Output directory")->required();
  encode->add_option("--sigma-factor", encode_opts->sigma_factor,
                     "Gaussian spread as a fraction of the projected diagonal");
  encode->add_option("--sigma-min", encode_opts->sigma_min, "Spread floor, cells");
  encode->add_option("--epsilon", encode_opts->epsilon,
                     "Heat threshold for displacement support");
  encode->add_option("--grid-w", encode_opts->grid_w, "Grid cells across");
  encode->add_option("--grid-h", encode_opts->grid_h, "Grid cells down");
  encode->callback([encode_opts] { run_encode(*encode_opts); });

  auto decode_opts = std::make_shared<DecodeOpts>();
  CLI::App* decode =
      app.add_subcommand("decode", "Decode tensors into box detections and poses");
  decode->add_option("--heat", decode_opts->heat_path, "Heat tensor (.mpt)")->required();
  decode->add_option("--disp", decode_opts->disp_path, "Displacement tensor (.mpt)")
      ->required();
  decode->add_option("--camera", decode_opts->camera_csv,
                     "Camera as fx,fy,cx,cy,width,height");
  decode->add_option("--manifest", decode_opts->manifest,
                     "Manifest supplying the camera and per-frame plane");
  decode->add_option("--frame", decode_opts->frame,
                     "Frame index for the output (and manifest plane lookup)");
  decode->add_option("--plane", decode_opts->plane_csv,
                     "Support plane as nx,ny,nz,d (overrides the manifest)");
  decode->add_option("--peak-threshold", decode_opts->peak_threshold,
                     "Minimum heat for a peak");
  decode->add_option("--nms-radius", decode_opts->nms_radius,
                     "Local-maximum suppression radius, cells");
  decode->add_option("--max-detections", decode_opts->max_detections,
                     "Keep at most this many peaks");
  decode->add_option("--out", decode_opts->out, "Output JSON path (default stdout)");
  decode->callback([decode_opts] { run_decode(*decode_opts); });

  auto eval_opts = std::make_shared<EvalOpts>();
  CLI::App* eval =
      app.add_subcommand("eval", "Score detections against manifest ground truth");
  eval->add_option("--manifest", eval_opts->manifest, "Ground-truth manifest")
      ->required();
  eval->add_option("--detections", eval_opts->detections,
                   "Detections JSON (decode output)")
      ->required();
  eval->add_option("--metric", eval_opts->metric, "ap3d, rep or add")
      ->check(CLI::IsMember({"ap3d", "rep", "add"}));
  eval->add_option("--iou-threshold", eval_opts->iou_threshold,
                   "3D IoU required for a match");
  eval->add_option("--rep-threshold", eval_opts->rep_threshold_px,
                   "Reprojection success threshold, pixels");
  eval->add_option("--add-fraction", eval_opts->add_fraction,
                   "ADD success threshold as a fraction of the diameter");
  eval->add_flag("--symmetric", eval_opts->symmetric,
                 "Use closest-point matching (ADD-S)");
  eval->add_option("--report", eval_opts->report, "Report JSON path (default stdout)");
  eval->callback([eval_opts] { run_eval(*eval_opts); });

  auto iou_opts = std::make_shared<IouOpts>();
  CLI::App* iou = app.add_subcommand("iou", "3D IoU of two oriented boxes");
  iou->add_option("--box-a", iou_opts->box_a,
                  "Box as qw,qx,qy,qz,cx,cy,cz,sx,sy,sz")
      ->required();
  iou->add_option("--box-b", iou_opts->box_b, "Second box, same format")->required();
  iou->add_option("--mc-samples", iou_opts->mc_samples,
                  "Also report a Monte-Carlo estimate with this many samples");
  iou->add_option("--seed", iou_opts->seed, "Monte-Carlo seed");
  iou->callback([iou_opts] { run_iou(*iou_opts); });

  auto synth_opts = std::make_shared<SynthOpts>();
  CLI::App* synth = app.add_subcommand(
      "synth", "Composite foreground cut-outs onto backgrounds with masks");
  synth->add_option("--foregrounds", synth_opts->foregrounds,
                    "Directory of RGBA PNG cut-outs")
      ->required();
  synth->add_option("--backgrounds", synth_opts->backgrounds,
                    "Directory of background PNGs")
      ->required();
  synth->add_option("--count", synth_opts->count, "Number of samples")->required();
  synth->add_option("--seed", synth_opts->seed, "Master seed");
  synth->add_option("--out-dir", synth_opts->out_dir, "Output directory")->required();
  synth->add_option("--threads", synth_opts->threads, "Worker threads");
  synth->add_option("--scale-min", synth_opts->scale_min, "Minimum scale");
  synth->add_option("--scale-max", synth_opts->scale_max, "Maximum scale");
  synth->add_option("--overhang", synth_opts->overhang,
                    "Allowed out-of-frame fraction per axis");
  synth->add_option("--alpha-threshold", synth_opts->alpha_threshold,
                    "Mask cut-off on resampled alpha");
  synth->callback([synth_opts] { run_synth(*synth_opts); });

  auto bench_opts = std::make_shared<BenchOpts>();
  CLI::App* bench = app.add_subcommand(
      "epnp-bench", "Accuracy/latency statistics for the pose solver");
  bench->add_option("--trials", bench_opts->trials, "Number of random instances");
  bench->add_option("--noise-px", bench_opts->noise_px,
                    "Gaussian noise added to each projected corner");
  bench->add_option("--seed", bench_opts->seed, "RNG seed");
  bench->callback([bench_opts] { run_bench(*bench_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
