#include "boxpose/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace boxpose {

namespace {

using json = nlohmann::ordered_json;

constexpr double kUnitTolerance = 1e-6;

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw DataError(path + ": expected a number");
  return j.get<double>();
}

int require_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw DataError(path + ": expected an integer");
  return j.get<int>();
}

bool require_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw DataError(path + ": expected a boolean");
  return j.get<bool>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw DataError(path + ": expected a string");
  return j.get<std::string>();
}

Eigen::Vector3d require_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw DataError(path + ": expected [x, y, z]");
  return {require_number(j[0], path), require_number(j[1], path),
          require_number(j[2], path)};
}

std::string require_relative_path(const json& j, const std::string& path) {
  const std::string value = require_string(j, path);
  if (value.empty()) throw DataError(path + ": must be non-empty");
  if (std::filesystem::path(value).is_absolute())
    throw DataError(path + ": path must be relative to the manifest");
  return value;
}

std::string format_norm(double norm) {
  std::ostringstream out;
  out << norm;
  return out.str();
}

CameraIntrinsics parse_camera(const json& j) {
  if (!j.is_object()) throw DataError("camera: expected an object");
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"})
    if (!j.contains(key)) throw DataError(std::string("camera.") + key + ": required");
  return CameraIntrinsics(require_number(j["fx"], "camera.fx"),
                          require_number(j["fy"], "camera.fy"),
                          require_number(j["cx"], "camera.cx"),
                          require_number(j["cy"], "camera.cy"),
                          require_int(j["width"], "camera.width"),
                          require_int(j["height"], "camera.height"));
}

ManifestObject parse_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw DataError(path + ": expected an object");
  for (const char* key : {"rotation", "center", "size"})
    if (!j.contains(key)) throw DataError(path + "." + key + ": required");

  const json& q = j["rotation"];
  if (!q.is_array() || q.size() != 4)
    throw DataError(path + ".rotation: expected [w, x, y, z]");
  const double w = require_number(q[0], path + ".rotation");
  const double x = require_number(q[1], path + ".rotation");
  const double y = require_number(q[2], path + ".rotation");
  const double z = require_number(q[3], path + ".rotation");
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(norm - 1.0) > kUnitTolerance)
    throw DataError(path + ".rotation: quaternion norm " + format_norm(norm) +
                    " outside tolerance");

  const Eigen::Vector3d center = require_vec3(j["center"], path + ".center");
  const Eigen::Vector3d size = require_vec3(j["size"], path + ".size");
  if (!(size.minCoeff() > 0.0))
    throw DataError(path + ".size: components must be positive");

  ManifestObject object;
  object.box = OrientedBox3(Rotation3::from_quaternion(w, x, y, z), center, size);
  for (const auto& [key, value] : j.items())
    if (key != "rotation" && key != "center" && key != "size") object.extras[key] = value;
  return object;
}

ManifestFrame parse_frame(const json& j, const std::string& path) {
  if (!j.is_object()) throw DataError(path + ": expected an object");
  if (!j.contains("image")) throw DataError(path + ".image: required");

  ManifestFrame frame;
  frame.image = require_relative_path(j["image"], path + ".image");
  if (j.contains("mask"))
    frame.mask = require_relative_path(j["mask"], path + ".mask");

  if (j.contains("plane")) {
    const json& p = j["plane"];
    if (!p.is_object() || !p.contains("normal") || !p.contains("d"))
      throw DataError(path + ".plane: expected {normal, d}");
    const Eigen::Vector3d normal = require_vec3(p["normal"], path + ".plane.normal");
    if (std::abs(normal.norm() - 1.0) > kUnitTolerance)
      throw DataError(path + ".plane.normal: must be unit length");
    frame.plane = Plane3(normal, require_number(p["d"], path + ".plane.d"));
  }

  if (j.contains("objects")) {
    const json& objs = j["objects"];
    if (!objs.is_array()) throw DataError(path + ".objects: expected an array");
    for (std::size_t i = 0; i < objs.size(); ++i)
      frame.objects.push_back(
          parse_object(objs[i], path + ".objects[" + std::to_string(i) + "]"));
  }

  frame.labels.pose = !frame.objects.empty();
  frame.labels.segmentation = frame.mask.has_value();
  frame.labels.coordinate_map = false;
  if (j.contains("labels")) {
    const json& labels = j["labels"];
    if (!labels.is_object()) throw DataError(path + ".labels: expected an object");
    for (const auto& [key, value] : labels.items()) {
      if (key == "pose") frame.labels.pose = require_bool(value, path + ".labels.pose");
      else if (key == "segmentation")
        frame.labels.segmentation = require_bool(value, path + ".labels.segmentation");
      else if (key == "coordinate_map")
        frame.labels.coordinate_map = require_bool(value, path + ".labels.coordinate_map");
      else throw DataError(path + ".labels: unknown field '" + key + "'");
    }
  }

  for (const auto& [key, value] : j.items()) {
    if (key == "image" || key == "mask" || key == "plane" || key == "objects" ||
        key == "labels")
      continue;
    frame.extras[key] = value;
  }
  return frame;
}

json camera_to_json(const CameraIntrinsics& cam) {
  json j = json::object();
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  return j;
}

json object_to_json(const ManifestObject& object) {
  json j = json::object();
  j["rotation"] = {object.box.rotation.w(), object.box.rotation.x(),
                   object.box.rotation.y(), object.box.rotation.z()};
  j["center"] = {object.box.center.x(), object.box.center.y(), object.box.center.z()};
  j["size"] = {object.box.size.x(), object.box.size.y(), object.box.size.z()};
  for (const auto& [key, value] : object.extras.items())
    if (!j.contains(key)) j[key] = value;
  return j;
}

json frame_to_json(const ManifestFrame& frame) {
  json j = json::object();
  j["image"] = frame.image;
  if (frame.mask) j["mask"] = *frame.mask;
  if (frame.plane) {
    json p = json::object();
    p["normal"] = {frame.plane->normal.x(), frame.plane->normal.y(),
                   frame.plane->normal.z()};
    p["d"] = frame.plane->d;
    j["plane"] = p;
  }
  j["objects"] = json::array();
  for (const auto& object : frame.objects) j["objects"].push_back(object_to_json(object));
  json labels = json::object();
  labels["pose"] = frame.labels.pose;
  labels["segmentation"] = frame.labels.segmentation;
  labels["coordinate_map"] = frame.labels.coordinate_map;
  j["labels"] = labels;
  for (const auto& [key, value] : frame.extras.items())
    if (!j.contains(key)) j[key] = value;
  return j;
}

}  // namespace

DatasetManifest manifest_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(origin + ": expected a JSON object");
  if (!j.contains("camera")) throw DataError("camera required");

  DatasetManifest manifest;
  if (j.contains("version")) manifest.version = require_int(j["version"], "version");
  manifest.camera = parse_camera(j["camera"]);
  if (j.contains("frames")) {
    const json& frames = j["frames"];
    if (!frames.is_array()) throw DataError("frames: expected an array");
    for (std::size_t i = 0; i < frames.size(); ++i)
      manifest.frames.push_back(
          parse_frame(frames[i], "frames[" + std::to_string(i) + "]"));
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "version" || key == "camera" || key == "frames") continue;
    manifest.extras[key] = value;
  }
  return manifest;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json j = json::object();
  j["version"] = manifest.version;
  j["camera"] = camera_to_json(manifest.camera);
  j["frames"] = json::array();
  for (const auto& frame : manifest.frames) j["frames"].push_back(frame_to_json(frame));
  for (const auto& [key, value] : manifest.extras.items())
    if (!j.contains(key)) j[key] = value;
  return j.dump(2) + "\n";
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return manifest_from_json(text.str(), path);
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  const std::string text = manifest_to_json(manifest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed to write " + path);
}

std::filesystem::path resolve_manifest_path(const std::filesystem::path& manifest_path,
                                            const std::string& relative) {
  return manifest_path.parent_path() / relative;
}

}  // namespace boxpose
