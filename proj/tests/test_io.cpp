#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "boxpose/image.hpp"
#include "boxpose/manifest.hpp"
#include "boxpose/random.hpp"
#include "boxpose/tensor_io.hpp"

using namespace boxpose;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d =
        fs::temp_directory_path() / ("boxpose_io_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

const fs::path kGoldenTensor = fs::path(TEST_DATA_DIR) / "golden.mpt";
const fs::path kGoldenManifest = fs::path(TEST_DATA_DIR) / "golden_manifest.json";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("golden tensor bytes are pinned") {
  // [DERIVED] magic 'MPT1', rank 3, dims (1, 2, 1), payload 1.0f, -2.5f,
  // all little-endian.
  const std::uint8_t expected[28] = {
      0x4d, 0x50, 0x54, 0x31, 0x03, 0x00, 0x00, 0x00, 0x01, 0x00,
      0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00,
      0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0};
  const auto bytes = read_bytes(kGoldenTensor);
  REQUIRE(bytes.size() == 28);
  CHECK(std::memcmp(bytes.data(), expected, 28) == 0);

  const TensorData tensor = read_tensor(kGoldenTensor.string());
  REQUIRE(tensor.dims == std::vector<std::uint32_t>{1, 2, 1});
  REQUIRE(tensor.values.size() == 2);
  CHECK(tensor.values[0] == 1.0f);
  CHECK(tensor.values[1] == -2.5f);
}

TEST_CASE("writer reproduces the golden tensor byte for byte") {
  const fs::path out = scratch_dir() / "rewrite.mpt";
  write_tensor(out.string(), {1, 2, 1}, {1.0f, -2.5f});
  CHECK(read_bytes(out) == read_bytes(kGoldenTensor));
}

TEST_CASE("tensor round trip preserves dims and values") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    TensorData tensor;
    const int rank = 1 + static_cast<int>(bounded_index(rng, 4));
    std::size_t count = 1;
    for (int i = 0; i < rank; ++i) {
      tensor.dims.push_back(1 + static_cast<std::uint32_t>(bounded_index(rng, 5)));
      count *= tensor.dims.back();
    }
    for (std::size_t i = 0; i < count; ++i)
      tensor.values.push_back(static_cast<float>(uniform_range(rng, -100, 100)));
    const fs::path out = scratch_dir() / "roundtrip.mpt";
    write_tensor(out.string(), tensor);
    const TensorData back = read_tensor(out.string());
    CHECK(back.dims == tensor.dims);
    CHECK(back.values == tensor.values);
  }
}

TEST_CASE("tensor writer validates rank and payload") {
  const fs::path out = scratch_dir() / "invalid.mpt";
  CHECK_THROWS_AS(write_tensor(out.string(), {}, {}), DataError);
  CHECK_THROWS_AS(write_tensor(out.string(), {1, 1, 1, 1, 1}, {1.0f}), DataError);
  CHECK_THROWS_WITH(write_tensor(out.string(), {1, 1, 1, 1, 1}, {1.0f}),
                    "tensor rank must be in [1, 4]");
  CHECK_THROWS_AS(write_tensor(out.string(), {2, 2}, {1.0f}), DataError);
  CHECK_THROWS_AS(write_tensor(out.string(), {2, 0}, {}), DataError);
  CHECK_THROWS_AS(
      write_tensor((scratch_dir() / "no_dir/x.mpt").string(), {1}, {1.0f}), IoError);
}

TEST_CASE("tensor reader distinguishes failure modes") {
  CHECK_THROWS_AS(read_tensor((scratch_dir() / "missing.mpt").string()), IoError);

  const auto golden = read_bytes(kGoldenTensor);

  auto corrupted = golden;
  corrupted[0] = 'X';
  const fs::path bad_magic = scratch_dir() / "bad_magic.mpt";
  write_bytes(bad_magic, corrupted);
  CHECK_THROWS_WITH_AS(read_tensor(bad_magic.string()),
                       doctest::Contains("malformed header"), DataError);

  corrupted = golden;
  corrupted[4] = 9;  // rank out of range
  const fs::path bad_rank = scratch_dir() / "bad_rank.mpt";
  write_bytes(bad_rank, corrupted);
  CHECK_THROWS_WITH_AS(read_tensor(bad_rank.string()),
                       doctest::Contains("malformed header"), DataError);

  corrupted = golden;
  corrupted.resize(24);  // one payload float missing
  const fs::path truncated = scratch_dir() / "truncated.mpt";
  write_bytes(truncated, corrupted);
  CHECK_THROWS_WITH_AS(read_tensor(truncated.string()),
                       doctest::Contains("truncated payload"), DataError);

  corrupted = golden;
  corrupted.push_back(0);  // trailing garbage
  const fs::path trailing = scratch_dir() / "trailing.mpt";
  write_bytes(trailing, corrupted);
  CHECK_THROWS_WITH_AS(read_tensor(trailing.string()),
                       doctest::Contains("payload length mismatch"), DataError);

  corrupted = golden;
  corrupted.resize(10);  // header dims cut short
  const fs::path short_header = scratch_dir() / "short_header.mpt";
  write_bytes(short_header, corrupted);
  CHECK_THROWS_WITH_AS(read_tensor(short_header.string()),
                       doctest::Contains("malformed header"), DataError);
}

TEST_CASE("heatmap and displacement tensor bridges") {
  Heatmap heat(3, 4);
  heat.at(1, 2) = 0.75;
  heat.at(2, 3) = -1.5;
  const TensorData tensor = heatmap_to_tensor(heat);
  CHECK(tensor.dims == std::vector<std::uint32_t>{3, 4, 1});
  const Heatmap back = tensor_to_heatmap(tensor);
  CHECK(back.height == 3);
  CHECK(back.width == 4);
  CHECK(back.at(1, 2) == 0.75);
  CHECK(back.at(2, 3) == -1.5);
  CHECK(back.at(0, 0) == 0.0);

  // rank-2 tensors are accepted as heatmaps
  TensorData flat;
  flat.dims = {2, 2};
  flat.values = {1.0f, 2.0f, 3.0f, 4.0f};
  const Heatmap from_flat = tensor_to_heatmap(flat);
  CHECK(from_flat.height == 2);
  CHECK(from_flat.at(1, 0) == 3.0);

  TensorData wrong;
  wrong.dims = {2, 2, 3};
  wrong.values.assign(12, 0.0f);
  CHECK_THROWS_AS(tensor_to_heatmap(wrong), DataError);

  DisplacementField disp(2, 3);
  disp.at(1, 2, 15) = 42.0;
  disp.at(0, 1, 3) = -7.25;
  const TensorData dt = displacement_to_tensor(disp);
  CHECK(dt.dims == std::vector<std::uint32_t>{2, 3, 16});
  const DisplacementField dback = tensor_to_displacement(dt);
  CHECK(dback.at(1, 2, 15) == 42.0);
  CHECK(dback.at(0, 1, 3) == -7.25);
  CHECK_THROWS_AS(tensor_to_displacement(wrong), DataError);
}

TEST_CASE("float32 storage rounds doubles") {
  Heatmap heat(1, 1);
  heat.at(0, 0) = 0.1;  // not representable in float32
  const Heatmap back = tensor_to_heatmap(heatmap_to_tensor(heat));
  CHECK(back.at(0, 0) == static_cast<double>(0.1f));
  CHECK(back.at(0, 0) != 0.1);
}

// ---------------------------------------------------------------------------

TEST_CASE("manifest writer output is pinned to hand-written bytes") {
  DatasetManifest manifest;
  manifest.camera = CameraIntrinsics(100.0, 100.0, 8.0, 6.0, 16, 12);
  ManifestFrame frame;
  frame.image = "img.png";
  frame.labels.pose = false;
  frame.labels.segmentation = false;
  frame.labels.coordinate_map = false;
  manifest.frames.push_back(frame);
  // [DERIVED] canonical layout: fixed key order, two-space indent, trailing
  // newline.
  const std::string expected =
      "{\n"
      "  \"version\": 1,\n"
      "  \"camera\": {\n"
      "    \"fx\": 100.0,\n"
      "    \"fy\": 100.0,\n"
      "    \"cx\": 8.0,\n"
      "    \"cy\": 6.0,\n"
      "    \"width\": 16,\n"
      "    \"height\": 12\n"
      "  },\n"
      "  \"frames\": [\n"
      "    {\n"
      "      \"image\": \"img.png\",\n"
      "      \"objects\": [],\n"
      "      \"labels\": {\n"
      "        \"pose\": false,\n"
      "        \"segmentation\": false,\n"
      "        \"coordinate_map\": false\n"
      "      }\n"
      "    }\n"
      "  ]\n"
      "}\n";
  CHECK(manifest_to_json(manifest) == expected);
}

TEST_CASE("golden manifest round trips byte for byte") {
  const DatasetManifest manifest = read_manifest(kGoldenManifest.string());
  CHECK(manifest.version == 1);
  CHECK(manifest.camera.fx == 500.0);
  CHECK(manifest.camera.width == 640);
  REQUIRE(manifest.frames.size() == 2);
  const ManifestFrame& f0 = manifest.frames[0];
  CHECK(f0.image == "images/frame0.png");
  REQUIRE(f0.mask.has_value());
  CHECK(*f0.mask == "masks/frame0.png");
  REQUIRE(f0.plane.has_value());
  CHECK(f0.plane->normal.y() == -1.0);
  CHECK(f0.plane->d == 0.25);
  REQUIRE(f0.objects.size() == 1);
  CHECK(f0.objects[0].box.size.y() == 0.25);
  CHECK(f0.objects[0].extras.at("tag") == "crate");
  CHECK(f0.labels.pose);
  CHECK(f0.extras.at("source") == "handmade");
  CHECK(!manifest.frames[1].labels.pose);
  CHECK(manifest.extras.at("note") == "golden fixture");

  const fs::path out = scratch_dir() / "golden_roundtrip.json";
  write_manifest(out.string(), manifest);
  CHECK(read_bytes(out) == read_bytes(kGoldenManifest));
}

TEST_CASE("manifest label defaults") {
  const std::string text = R"({
    "camera": {"fx": 100.0, "fy": 100.0, "cx": 8.0, "cy": 6.0, "width": 16, "height": 12},
    "frames": [
      {"image": "a.png", "mask": "m.png",
       "objects": [{"rotation": [1.0, 0.0, 0.0, 0.0], "center": [0.0, 0.0, 2.0], "size": [1.0, 1.0, 1.0]}]},
      {"image": "b.png"}
    ]
  })";
  const DatasetManifest manifest = manifest_from_json(text);
  CHECK(manifest.frames[0].labels.pose);          // objects present
  CHECK(manifest.frames[0].labels.segmentation);  // mask present
  CHECK(!manifest.frames[0].labels.coordinate_map);
  CHECK(!manifest.frames[1].labels.pose);
  CHECK(!manifest.frames[1].labels.segmentation);
}

TEST_CASE("manifest validation errors name the offending field") {
  CHECK_THROWS_WITH_AS(manifest_from_json("{}"), "camera required", DataError);
  CHECK_THROWS_AS(manifest_from_json("not json"), DataError);

  const std::string base =
      R"({"camera": {"fx": 100.0, "fy": 100.0, "cx": 8.0, "cy": 6.0, "width": 16, "height": 12},)";

  CHECK_THROWS_WITH_AS(
      manifest_from_json(
          base +
          R"("frames": [{"image": "a.png", "objects": [{"rotation": [0.9, 0.0, 0.0, 0.0], "center": [0.0, 0.0, 2.0], "size": [1.0, 1.0, 1.0]}]}]})"),
      "frames[0].objects[0].rotation: quaternion norm 0.9 outside tolerance",
      DataError);

  CHECK_THROWS_WITH_AS(
      manifest_from_json(base + R"("frames": [{"image": "/abs/a.png"}]})"),
      "frames[0].image: path must be relative to the manifest", DataError);

  CHECK_THROWS_WITH_AS(
      manifest_from_json(
          base +
          R"("frames": [{"image": "a.png", "objects": [{"rotation": [1.0, 0.0, 0.0, 0.0], "center": [0.0, 0.0, 2.0], "size": [1.0, 0.0, 1.0]}]}]})"),
      "frames[0].objects[0].size: components must be positive", DataError);

  CHECK_THROWS_WITH_AS(
      manifest_from_json(
          base + R"("frames": [{"image": "a.png", "plane": {"normal": [0.0, -2.0, 0.0], "d": 0.25}}]})"),
      "frames[0].plane.normal: must be unit length", DataError);

  CHECK_THROWS_WITH_AS(
      manifest_from_json(base + R"("frames": [{"image": "a.png", "labels": {"pose": 1}}]})"),
      "frames[0].labels.pose: expected a boolean", DataError);

  CHECK_THROWS_WITH_AS(
      manifest_from_json(base + R"("frames": [{"objects": []}]})"),
      "frames[0].image: required", DataError);

  CHECK_THROWS_AS(
      manifest_from_json(
          base + R"("frames": [{"image": "a.png", "objects": [{"rotation": [1.0, 0.0, 0.0, 0.0], "center": [0.0, 0.0], "size": [1.0, 1.0, 1.0]}]}]})"),
      DataError);

  // missing camera field
  CHECK_THROWS_WITH_AS(
      manifest_from_json(
          R"({"camera": {"fx": 100.0, "fy": 100.0, "cx": 8.0, "cy": 6.0, "width": 16}})"),
      "camera.height: required", DataError);

  CHECK_THROWS_AS(read_manifest((scratch_dir() / "missing_manifest.json").string()),
                  IoError);
}

TEST_CASE("unknown keys survive a round trip after known keys") {
  const std::string text = R"({
    "generator": "unit-test",
    "camera": {"fx": 100.0, "fy": 100.0, "cx": 8.0, "cy": 6.0, "width": 16, "height": 12},
    "frames": [{"custom": {"a": [1, 2]}, "image": "a.png"}]
  })";
  const DatasetManifest manifest = manifest_from_json(text);
  const std::string out = manifest_to_json(manifest);
  const DatasetManifest back = manifest_from_json(out);
  CHECK(back.extras.at("generator") == "unit-test");
  CHECK(back.frames[0].extras.at("custom").at("a")[1] == 2);
  // canonical order puts extras last
  CHECK(out.find("\"version\"") < out.find("\"generator\""));
  CHECK(out.find("\"labels\"") < out.find("\"custom\""));
  // idempotence: writing the reread manifest reproduces the same bytes
  CHECK(manifest_to_json(back) == out);
}

TEST_CASE("resolve_manifest_path is relative to the manifest directory") {
  CHECK(resolve_manifest_path("/data/set/manifest.json", "images/a.png") ==
        fs::path("/data/set/images/a.png"));
}

// ---------------------------------------------------------------------------

TEST_CASE("png round trip for all channel counts") {
  std::mt19937_64 rng(23);
  for (const int channels : {1, 3, 4}) {
    ImageU8 img(7, 5, channels);
    for (auto& px : img.pixels)
      px = static_cast<std::uint8_t>(bounded_index(rng, 256));
    const fs::path out =
        scratch_dir() / ("img_" + std::to_string(channels) + ".png");
    write_png(out.string(), img);
    const ImageU8 back = read_png(out.string());
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.channels == img.channels);
    CHECK(back.pixels == img.pixels);
  }
}

TEST_CASE("png writer is deterministic") {
  ImageU8 img(16, 16, 3);
  std::mt19937_64 rng(29);
  for (auto& px : img.pixels) px = static_cast<std::uint8_t>(bounded_index(rng, 256));
  const fs::path a = scratch_dir() / "det_a.png";
  const fs::path b = scratch_dir() / "det_b.png";
  write_png(a.string(), img);
  write_png(b.string(), img);
  CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("png reader errors") {
  CHECK_THROWS_AS(read_png((scratch_dir() / "missing.png").string()), IoError);
  const fs::path garbage = scratch_dir() / "garbage.png";
  write_bytes(garbage, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK_THROWS_AS(read_png(garbage.string()), DataError);
  CHECK_THROWS_AS(ImageU8(4, 4, 2), DataError);
  CHECK_THROWS_AS(ImageU8(0, 4, 3), DataError);
}

}  // TEST_SUITE
