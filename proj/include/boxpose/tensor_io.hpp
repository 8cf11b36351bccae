#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boxpose/target_codec.hpp"

namespace boxpose {

/// Dense float tensor as stored on disk.
///
/// File layout (all integers and floats little-endian):
///   bytes 0..3   magic "MPT1"
///   bytes 4..7   rank, uint32, 1 to 4
///   then rank    uint32 dimensions
///   then         float32 payload, row-major, prod(dims) entries
struct TensorData {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

/// Throws IoError when the file cannot be written, DataError when dims and
/// payload disagree or the rank is out of range.
void write_tensor(const std::string& path, const TensorData& tensor);
void write_tensor(const std::string& path, const std::vector<std::uint32_t>& dims,
                  const std::vector<float>& values);

/// Throws IoError when the file cannot be opened; DataError("malformed
/// header") for a bad magic or rank, DataError("truncated payload") when the
/// file ends early, DataError("payload length mismatch") when trailing bytes
/// remain.
TensorData read_tensor(const std::string& path);

/// Conversions between in-memory maps and tensors. Heatmaps serialize as
/// [H, W, 1], displacement fields as [H, W, 16].
TensorData heatmap_to_tensor(const Heatmap& heat);
Heatmap tensor_to_heatmap(const TensorData& tensor);
TensorData displacement_to_tensor(const DisplacementField& disp);
DisplacementField tensor_to_displacement(const TensorData& tensor);

}  // namespace boxpose
