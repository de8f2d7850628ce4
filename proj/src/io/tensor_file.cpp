#include "tcd/io/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "tcd/errors.hpp"

namespace tcd {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'D', '1'};

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const TensorFile& tensor) {
  if (tensor.data.size() != tensor.element_count())
    throw IoError("tensor payload does not match dims: " + path.string());
  std::string buf;
  buf.reserve(8 + 4 * tensor.dims.size() + 4 * tensor.data.size());
  buf.append(kMagic, 4);
  put_u32_le(buf, static_cast<std::uint32_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) put_u32_le(buf, d);
  for (float f : tensor.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    if constexpr (std::endian::native == std::endian::big)
      bits = __builtin_bswap32(bits);
    put_u32_le(buf, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

TensorFile read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw IoError("malformed tensor file (bad magic): " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint32_t rank = get_u32_le(p + 4);
  if (rank == 0 || rank > 8 || buf.size() < 8 + 4ull * rank)
    throw IoError("malformed tensor file (bad rank): " + path.string());
  TensorFile tensor;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t d = get_u32_le(p + 8 + 4ull * i);
    if (d == 0) throw IoError("malformed tensor file (zero dim): " + path.string());
    tensor.dims.push_back(d);
    if (count > std::numeric_limits<std::size_t>::max() / d)
      throw IoError("malformed tensor file (dims overflow): " + path.string());
    count *= d;
  }
  const std::size_t header = 8 + 4ull * rank;
  if (buf.size() != header + 4ull * count)
    throw IoError("malformed tensor file (payload size): " + path.string());
  tensor.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = get_u32_le(p + header + 4 * i);
    if constexpr (std::endian::native == std::endian::big)
      bits = __builtin_bswap32(bits);
    float f;
    std::memcpy(&f, &bits, 4);
    tensor.data[i] = f;
  }
  return tensor;
}

TensorFile tensor_from_image(const Image& img) {
  TensorFile t;
  t.dims = {static_cast<std::uint32_t>(img.channels), static_cast<std::uint32_t>(img.height),
            static_cast<std::uint32_t>(img.width)};
  t.data.assign(img.data.begin(), img.data.end());
  return t;
}

TensorFile tensor_from_scoremap(const ScoreMap& map) {
  TensorFile t;
  t.dims = {static_cast<std::uint32_t>(map.height), static_cast<std::uint32_t>(map.width)};
  t.data.assign(map.data.begin(), map.data.end());
  return t;
}

TensorFile tensor_from_field(const DisplacementField& field) {
  TensorFile t;
  t.dims = {2u, static_cast<std::uint32_t>(field.height), static_cast<std::uint32_t>(field.width)};
  t.data.assign(field.data.begin(), field.data.end());
  return t;
}

TensorFile tensor_from_variational(const VariationalField& q) {
  TensorFile t;
  t.dims = {2u, 2u, static_cast<std::uint32_t>(q.height), static_cast<std::uint32_t>(q.width)};
  t.data.reserve(q.mu.size() + q.log_v.size());
  t.data.assign(q.mu.begin(), q.mu.end());
  t.data.insert(t.data.end(), q.log_v.begin(), q.log_v.end());
  return t;
}

Image image_from_tensor(const TensorFile& tensor) {
  if (tensor.dims.size() == 2) {
    Image img(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]), 1);
    img.data.assign(tensor.data.begin(), tensor.data.end());
    return img;
  }
  if (tensor.dims.size() == 3) {
    Image img(static_cast<int>(tensor.dims[1]), static_cast<int>(tensor.dims[2]),
              static_cast<int>(tensor.dims[0]));
    img.data.assign(tensor.data.begin(), tensor.data.end());
    return img;
  }
  throw IoError("tensor is not an image (rank must be 2 or 3)");
}

ScoreMap scoremap_from_tensor(const TensorFile& tensor) {
  if (tensor.dims.size() != 2) throw IoError("tensor is not a score map (rank must be 2)");
  ScoreMap map(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]));
  map.data.assign(tensor.data.begin(), tensor.data.end());
  return map;
}

DisplacementField field_from_tensor(const TensorFile& tensor) {
  if (tensor.dims.size() != 3 || tensor.dims[0] != 2)
    throw IoError("tensor is not a displacement field (expected [2, H, W])");
  DisplacementField field(static_cast<int>(tensor.dims[1]), static_cast<int>(tensor.dims[2]));
  field.data.assign(tensor.data.begin(), tensor.data.end());
  return field;
}

VariationalField variational_from_tensor(const TensorFile& tensor) {
  if (tensor.dims.size() != 4 || tensor.dims[0] != 2 || tensor.dims[1] != 2)
    throw IoError("tensor is not a variational field (expected [2, 2, H, W])");
  VariationalField q(static_cast<int>(tensor.dims[2]), static_cast<int>(tensor.dims[3]));
  const std::size_t half = tensor.data.size() / 2;
  q.mu.assign(tensor.data.begin(), tensor.data.begin() + static_cast<std::ptrdiff_t>(half));
  q.log_v.assign(tensor.data.begin() + static_cast<std::ptrdiff_t>(half), tensor.data.end());
  return q;
}

}  // namespace tcd
