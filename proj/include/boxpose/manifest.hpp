#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxpose/geometry.hpp"

namespace boxpose {

struct LabelFlags {
  bool pose = false;
  bool segmentation = false;
  bool coordinate_map = false;
};

/// One labeled object; unknown JSON keys round trip through `extras`.
struct ManifestObject {
  OrientedBox3 box;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
};

struct ManifestFrame {
  std::string image;  ///< path relative to the manifest
  std::optional<std::string> mask;
  std::optional<Plane3> plane;  ///< support plane in the camera frame
  std::vector<ManifestObject> objects;
  LabelFlags labels;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
};

/// Dataset description: one camera, a list of frames with oriented-box
/// labels, per-frame label-availability flags and optional support planes.
/// Writing is canonical: fixed key order, two-space indent, one trailing
/// newline, so a manifest written by this module round trips byte-for-byte.
struct DatasetManifest {
  int version = 1;
  CameraIntrinsics camera;
  std::vector<ManifestFrame> frames;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
};

/// Parses and validates manifest JSON. Schema errors name the offending
/// field, e.g. "frames[3].objects[1].rotation: quaternion norm 0.9 outside
/// tolerance"; a missing camera reports "camera required". `origin` only
/// decorates error messages.
DatasetManifest manifest_from_json(const std::string& text,
                                   const std::string& origin = "manifest");

/// Canonical serialization of the manifest (see DatasetManifest).
std::string manifest_to_json(const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& manifest);

/// Resolves a manifest-relative path against the manifest's directory.
std::filesystem::path resolve_manifest_path(const std::filesystem::path& manifest_path,
                                            const std::string& relative);

}  // namespace boxpose
