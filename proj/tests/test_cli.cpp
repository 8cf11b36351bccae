#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "doctest.h"

#include "boxpose/image.hpp"
#include "boxpose/manifest.hpp"

using namespace boxpose;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path root =
      fs::temp_directory_path() / ("boxpose_cli_" + std::to_string(::getpid()));
  fs::create_directories(root);
  return root;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

CliResult run_cli(const std::string& args) {
  static int invocation = 0;
  const fs::path out = scratch_root() / ("stdout_" + std::to_string(invocation));
  const fs::path err = scratch_root() / ("stderr_" + std::to_string(invocation));
  ++invocation;
  const std::string cmd = std::string("\"") + CLI_BINARY_PATH + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

DatasetManifest reference_manifest() {
  DatasetManifest m;
  m.camera = CameraIntrinsics(500, 500, 320, 240, 640, 480);
  ManifestFrame frame;
  frame.image = "images/frame0.png";
  frame.plane = Plane3({0.0, -1.0, 0.0}, 0.25);
  ManifestObject obj;
  obj.box = OrientedBox3(Rotation3::identity(), {0.07, 0.05, 2.0}, {0.5, 0.4, 0.3});
  frame.objects.push_back(obj);
  frame.labels.pose = true;
  m.frames.push_back(frame);
  return m;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits cleanly and unknown input does not") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("decode --heat only").exit_code == 1);  // missing required --disp
}

TEST_CASE("volume overlap command reports exact and sampled values") {
  const CliResult plain =
      run_cli("iou --box-a 1,0,0,0,0,0,0,1,1,1 --box-b 1,0,0,0,0.5,0,0,1,1,1");
  REQUIRE(plain.exit_code == 0);
  const json j = json::parse(plain.out);
  CHECK(std::abs(j["iou3d"].get<double>() - 1.0 / 3.0) < 1e-9);
  CHECK(!j.contains("iou3d_mc"));

  const CliResult sampled = run_cli(
      "iou --box-a 1,0,0,0,0,0,0,1,1,1 --box-b 1,0,0,0,0.5,0,0,1,1,1 "
      "--mc-samples 200000 --seed 5");
  REQUIRE(sampled.exit_code == 0);
  const json js = json::parse(sampled.out);
  CHECK(std::abs(js["iou3d_mc"].get<double>() - 1.0 / 3.0) < 0.01);

  CHECK(run_cli("iou --box-a 1,0,0,0,0,0,0,1,1 --box-b 1,0,0,0,0,0,0,1,1,1").exit_code ==
        2);  // nine values instead of ten
}

TEST_CASE("error classes map to distinct exit codes") {
  const fs::path dir = scratch_root() / "codes";
  fs::create_directories(dir);
  CHECK(run_cli("encode --manifest " + (dir / "missing.json").string() +
                " --out-dir " + dir.string())
            .exit_code == 2);

  DatasetManifest behind = reference_manifest();
  behind.frames[0].plane.reset();
  behind.frames[0].objects[0].box.center = {0.0, 0.0, -2.0};
  const fs::path bad = dir / "behind.json";
  write_manifest(bad.string(), behind);
  const CliResult r =
      run_cli("encode --manifest " + bad.string() + " --out-dir " + dir.string());
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("numeric error") != std::string::npos);
}

TEST_CASE("encode, decode and eval round trip") {
  const fs::path dir = scratch_root() / "roundtrip";
  fs::create_directories(dir);
  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest_path.string(), reference_manifest());

  const fs::path enc = dir / "enc";
  REQUIRE(run_cli("encode --manifest " + manifest_path.string() + " --out-dir " +
                  enc.string())
              .exit_code == 0);
  REQUIRE(fs::exists(enc / "frame_000000_heat.mpt"));
  REQUIRE(fs::exists(enc / "frame_000000_disp.mpt"));

  const fs::path dets = dir / "dets.json";
  const CliResult decode = run_cli(
      "decode --heat " + (enc / "frame_000000_heat.mpt").string() + " --disp " +
      (enc / "frame_000000_disp.mpt").string() + " --manifest " +
      manifest_path.string() + " --frame 0 --out " + dets.string());
  REQUIRE(decode.exit_code == 0);

  const json out = json::parse(slurp(dets));
  CHECK(out["version"] == 1);
  REQUIRE(out["frames"].size() == 1);
  const json& frame = out["frames"][0];
  CHECK(frame["frame"] == 0);
  CHECK(frame["dropped"].empty());
  CHECK(frame["notes"].empty());
  REQUIRE(frame["detections"].size() == 1);
  const json& det = frame["detections"][0];
  CHECK(det["confidence"].get<double>() > 0.5);
  CHECK(det["peak"].size() == 2);
  REQUIRE(det["vertices2d"].size() == 8);
  CHECK(det["vertices2d"][0].size() == 2);
  CHECK(det["pose_up_to_scale"]["rotation"].size() == 4);
  CHECK(det["pose_up_to_scale"]["translation_dir"][2].get<double>() == 1.0);
  REQUIRE(det.contains("metric_box"));
  // tensors are float32 on disk, so recovery is close rather than exact
  CHECK(std::abs(det["metric_box"]["center"][0].get<double>() - 0.07) < 1e-4);
  CHECK(std::abs(det["metric_box"]["center"][2].get<double>() - 2.0) < 1e-4);
  CHECK(std::abs(det["metric_box"]["size"][0].get<double>() - 0.5) < 1e-4);
  CHECK(std::abs(det["metric_box"]["size"][1].get<double>() - 0.4) < 1e-4);

  const fs::path report_path = dir / "report.json";
  const CliResult eval = run_cli("eval --manifest " + manifest_path.string() +
                                 " --detections " + dets.string() +
                                 " --metric ap3d --report " + report_path.string());
  REQUIRE(eval.exit_code == 0);
  const json report = json::parse(slurp(report_path));
  CHECK(report["metric"] == "ap3d");
  CHECK(report["ground_truth"] == 1);
  CHECK(report["detections"] == 1);
  CHECK(report["ap"].get<double>() == 1.0);
  REQUIRE(report["pr_curve"].size() == 1);
  CHECK(report["pr_curve"][0][0].get<double>() == 1.0);
  CHECK(report["pr_curve"][0][1].get<double>() == 1.0);

  const CliResult rep = run_cli("eval --manifest " + manifest_path.string() +
                                " --detections " + dets.string() + " --metric rep");
  REQUIRE(rep.exit_code == 0);
  const json rep_json = json::parse(rep.out);
  CHECK(rep_json["metric"] == "rep");
  CHECK(rep_json["matched"] == 1);
  CHECK(rep_json["success_rate"].get<double>() == 1.0);
  CHECK(rep_json["mean_error"].get<double>() < 0.01);

  const CliResult add = run_cli("eval --manifest " + manifest_path.string() +
                                " --detections " + dets.string() +
                                " --metric add --symmetric");
  REQUIRE(add.exit_code == 0);
  CHECK(json::parse(add.out)["metric"] == "add-s");
}

TEST_CASE("solver benchmark runs") {
  const CliResult r = run_cli("epnp-bench --trials 40 --seed 3");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("trials:") != std::string::npos);
  CHECK(r.out.find("rotation_err_deg:") != std::string::npos);
  CHECK(r.out.find("degenerate:") != std::string::npos);
}

TEST_CASE("synthetic batches reproduce byte-for-byte") {
  const fs::path dir = scratch_root() / "synth";
  const fs::path fg_dir = dir / "fg";
  const fs::path bg_dir = dir / "bg";
  fs::create_directories(fg_dir);
  fs::create_directories(bg_dir);

  ImageU8 fg(8, 8, 4, 0);
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) {
      fg.at(x, y, 0) = 210;
      fg.at(x, y, 1) = 40;
      fg.at(x, y, 3) = 255;
    }
  write_png((fg_dir / "crate.png").string(), fg);

  ImageU8 bg(32, 24, 3, 0);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) {
      bg.at(x, y, 0) = static_cast<std::uint8_t>(4 * x);
      bg.at(x, y, 2) = static_cast<std::uint8_t>(10 * y);
    }
  write_png((bg_dir / "floor.png").string(), bg);

  const std::string common = "synth --foregrounds " + fg_dir.string() +
                             " --backgrounds " + bg_dir.string() +
                             " --count 2 --seed 11 --out-dir ";
  const fs::path s1 = dir / "s1";
  const fs::path s2 = dir / "s2";
  REQUIRE(run_cli(common + s1.string()).exit_code == 0);
  REQUIRE(run_cli(common + s2.string() + " --threads 2").exit_code == 0);

  for (const char* name : {"sample_000000.png", "sample_000000_mask.png",
                           "sample_000001.png", "sample_000001_mask.png",
                           "manifest.json"}) {
    REQUIRE(fs::exists(s1 / name));
    CHECK(slurp(s1 / name) == slurp(s2 / name));
  }

  const DatasetManifest m = read_manifest((s1 / "manifest.json").string());
  REQUIRE(m.frames.size() == 2);
  CHECK(m.frames[0].labels.segmentation);
  CHECK(!m.frames[0].labels.pose);
  REQUIRE(m.frames[0].extras.contains("synth"));
  const auto& synth = m.frames[0].extras.at("synth");
  CHECK(synth["foreground"] == "crate.png");
  CHECK(synth["background"] == "floor.png");
  CHECK(synth["placement"].contains("rotation_deg"));
}

}  // TEST_SUITE
