#include "drivelab/image_codec.hpp"

#include <png.h>
#include <sodium.h>

#include <array>
#include <cstring>

#include "drivelab/errors.hpp"

namespace drivelab {

namespace {

// Display colors for the fixed BEV classes; indices beyond are grey.
constexpr std::array<png_color, 8> kColors = {{
    {0, 0, 0},        // background
    {70, 70, 70},     // road
    {60, 140, 255},   // route waypoint
    {255, 200, 40},   // intention waypoint
    {230, 40, 40},    // red signal
    {40, 200, 80},    // green signal
    {240, 240, 240},  // other vehicle
    {255, 0, 255},    // ego
}};

void on_png_warning(png_structp, png_const_charp) {}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.height <= 0 || image.width <= 0) throw Error("cannot encode an empty image");
  std::vector<std::uint8_t> out;
  std::array<png_color, 256> palette{};
  for (std::size_t i = 0; i < palette.size(); ++i) {
    if (i < kColors.size()) {
      palette[i] = kColors[i];
    } else {
      const auto g = static_cast<png_byte>(i);
      palette[i] = {g, g, g};
    }
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_png_warning);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png encoding failed");
  }
  {
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t n) {
          auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
          v->insert(v->end(), data, data + n);
        },
        nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_PLTE(png, info, palette.data(), static_cast<int>(palette.size()));
    png_write_info(png, info);
    for (int r = 0; r < image.height; ++r)
      png_write_row(png, const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(r * image.width)));
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error("not a PNG stream");
  ReadCursor cursor{&bytes, 0};
  Image image;
  bool bad_format = false;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_png_warning);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("png decoding failed");
  }
  {
    png_set_read_fn(png, &cursor, [](png_structp p, png_bytep data, png_size_t n) {
      auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
      if (c->pos + n > c->bytes->size()) png_error(p, "truncated stream");
      std::memcpy(data, c->bytes->data() + c->pos, n);
      c->pos += n;
    });
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    bad_format = png_get_bit_depth(png, info) != 8 || (color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY);
  }
  if (bad_format) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("expected an 8-bit indexed PNG");
  }
  {
    image = Image(static_cast<int>(png_get_image_height(png, info)), static_cast<int>(png_get_image_width(png, info)));
    for (int r = 0; r < image.height; ++r)
      png_read_row(png, image.pixels.data() + static_cast<std::size_t>(r * image.width), nullptr);
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  const int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0)
    throw Error("invalid base64 payload");
  out.resize(len);
  return out;
}

}  // namespace drivelab
