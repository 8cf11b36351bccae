#include "boxpose/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "boxpose/error.hpp"

namespace boxpose {

namespace {

constexpr char kMagic[4] = {'M', 'P', 'T', '1'};
constexpr std::uint32_t kMaxRank = 4;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t* v) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  *v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
       (static_cast<std::uint32_t>(bytes[2]) << 16) |
       (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

std::uint64_t element_count(const std::vector<std::uint32_t>& dims) {
  std::uint64_t count = 1;
  for (const std::uint32_t d : dims) {
    if (d == 0) throw DataError("tensor dimensions must be positive");
    count *= d;
    if (count > (1ull << 32)) throw DataError("tensor too large");
  }
  return count;
}

}  // namespace

void write_tensor(const std::string& path, const TensorData& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > kMaxRank)
    throw DataError("tensor rank must be in [1, 4]");
  if (element_count(tensor.dims) != tensor.values.size())
    throw DataError("tensor dimensions do not match the payload size");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (const std::uint32_t d : tensor.dims) put_u32(out, d);
  for (const float f : tensor.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  if (!out) throw IoError("failed to write " + path);
}

void write_tensor(const std::string& path, const std::vector<std::uint32_t>& dims,
                  const std::vector<float>& values) {
  write_tensor(path, TensorData{dims, values});
}

TensorData read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("malformed header in " + path);
  std::uint32_t rank = 0;
  if (!get_u32(in, &rank) || rank < 1 || rank > kMaxRank)
    throw DataError("malformed header in " + path);

  TensorData tensor;
  tensor.dims.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    if (!get_u32(in, &tensor.dims[i])) throw DataError("malformed header in " + path);
    if (tensor.dims[i] == 0) throw DataError("malformed header in " + path);
  }

  const std::uint64_t count = element_count(tensor.dims);
  tensor.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    if (!get_u32(in, &bits)) throw DataError("truncated payload in " + path);
    tensor.values[i] = std::bit_cast<float>(bits);
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw DataError("payload length mismatch in " + path);
  return tensor;
}

TensorData heatmap_to_tensor(const Heatmap& heat) {
  TensorData tensor;
  tensor.dims = {static_cast<std::uint32_t>(heat.height),
                 static_cast<std::uint32_t>(heat.width), 1};
  tensor.values.reserve(heat.values.size());
  for (const double v : heat.values) tensor.values.push_back(static_cast<float>(v));
  return tensor;
}

Heatmap tensor_to_heatmap(const TensorData& tensor) {
  const bool rank2 = tensor.dims.size() == 2;
  const bool rank3 = tensor.dims.size() == 3 && tensor.dims[2] == 1;
  if (!rank2 && !rank3) throw DataError("tensor dimensions do not describe a heatmap");
  Heatmap heat(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i)
    heat.values[i] = tensor.values[i];
  return heat;
}

TensorData displacement_to_tensor(const DisplacementField& disp) {
  TensorData tensor;
  tensor.dims = {static_cast<std::uint32_t>(disp.height),
                 static_cast<std::uint32_t>(disp.width), DisplacementField::kChannels};
  tensor.values.reserve(disp.values.size());
  for (const double v : disp.values) tensor.values.push_back(static_cast<float>(v));
  return tensor;
}

DisplacementField tensor_to_displacement(const TensorData& tensor) {
  if (tensor.dims.size() != 3 || tensor.dims[2] != DisplacementField::kChannels)
    throw DataError("tensor dimensions do not describe a displacement field");
  DisplacementField disp(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i)
    disp.values[i] = tensor.values[i];
  return disp;
}

}  // namespace boxpose
