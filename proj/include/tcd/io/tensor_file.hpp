// Minimal binary tensor container:
//   magic "TCD1" | rank: u32 LE | dims: rank x u32 LE | payload: f32 LE,
// row-major, channel-major for images. Images are rank 3 [C, H, W],
// displacement fields rank 3 [2, H, W], score maps rank 2 [H, W].
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tcd/types.hpp"

namespace tcd {

struct TensorFile {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return n;
  }
};

void write_tensor(const std::filesystem::path& path, const TensorFile& tensor);
TensorFile read_tensor(const std::filesystem::path& path);

TensorFile tensor_from_image(const Image& img);
TensorFile tensor_from_scoremap(const ScoreMap& map);
TensorFile tensor_from_field(const DisplacementField& field);
TensorFile tensor_from_variational(const VariationalField& q);  // rank 4 [2, 2, H, W]

Image image_from_tensor(const TensorFile& tensor);            // rank 2 or 3
ScoreMap scoremap_from_tensor(const TensorFile& tensor);      // rank 2
DisplacementField field_from_tensor(const TensorFile& tensor);  // rank 3, dims[0] == 2
VariationalField variational_from_tensor(const TensorFile& tensor);

}  // namespace tcd
