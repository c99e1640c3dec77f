#include <png.h>

#include <cstring>

#include "pambench/errors.hpp"
#include "pambench/stimuli.hpp"

namespace pambench {
namespace {

std::vector<std::uint8_t> write_png(int w, int h, png_uint_32 format, const std::uint8_t* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, data, 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, data, 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_png(std::span<const std::uint8_t> bytes, png_uint_32 format, const std::string& what,
                                   int& w, int& h) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError(what + ": " + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DecodeError(what + ": " + image.message);
  }
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
  return write_png(img.width, img.height, PNG_FORMAT_RGB, img.pixels.data());
}

std::vector<std::uint8_t> encode_png(const Sprite& sprite) {
  return write_png(sprite.width, sprite.height, PNG_FORMAT_RGBA, sprite.rgba.data());
}

Image decode_png_rgb(std::span<const std::uint8_t> bytes, const std::string& what) {
  Image img;
  img.pixels = read_png(bytes, PNG_FORMAT_RGB, what, img.width, img.height);
  return img;
}

Sprite decode_png_rgba(std::span<const std::uint8_t> bytes, const std::string& what) {
  Sprite s;
  s.rgba = read_png(bytes, PNG_FORMAT_RGBA, what, s.width, s.height);
  return s;
}

}  // namespace pambench
