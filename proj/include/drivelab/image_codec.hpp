#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drivelab/observer.hpp"

namespace drivelab {

/// Indexed-color PNG of a palette image. Pixel values are stored as palette
/// indices, so decoding returns the exact matrix.
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace drivelab
