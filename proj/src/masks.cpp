#include "hypermaps/masks.hpp"

#include <png.h>

#include <cstring>

#include "hypermaps/errors.hpp"
#include "hypermaps/tensor_file.hpp"

namespace hypermaps {
namespace {

struct PngPixels {
  ImageSize size;
  std::vector<std::uint8_t> bytes;
};

PngPixels read_png(const std::filesystem::path& path, png_uint_32 format, bool require_gray_source) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  if (require_gray_source && (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_LINEAR)) != 0) {
    png_image_free(&image);
    throw DataError(path.string() + ": mask must be an 8-bit grayscale PNG");
  }
  image.format = format;
  PngPixels out;
  out.size = {static_cast<int>(image.height), static_cast<int>(image.width)};
  out.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.bytes.data(), 0, nullptr)) {
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

std::vector<std::byte> encode_png(ImageSize size, png_uint_32 format, const std::uint8_t* pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(size.width);
  image.height = static_cast<png_uint_32>(size.height);
  image.format = format;
  png_alloc_size_t bytes = 0;
  if (!png_image_write_to_memory(&image, nullptr, &bytes, 0, pixels, 0, nullptr)) {
    throw DataError(std::string("PNG encoding failed: ") + image.message);
  }
  std::vector<std::byte> out(bytes);
  if (!png_image_write_to_memory(&image, out.data(), &bytes, 0, pixels, 0, nullptr)) {
    throw DataError(std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(bytes);
  return out;
}

}  // namespace

ChangeMask read_change_mask(const std::filesystem::path& path) {
  auto png = read_png(path, PNG_FORMAT_GRAY, true);
  ChangeMask mask(png.size, 0);
  for (std::size_t i = 0; i < png.bytes.size(); ++i) mask.data[i] = png.bytes[i] != 0 ? 1 : 0;
  return mask;
}

void write_change_mask(const std::filesystem::path& path, const ChangeMask& mask) {
  std::vector<std::uint8_t> px(mask.data.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data[i] ? 255 : 0;
  write_file_atomic(path, encode_png(mask.size, PNG_FORMAT_GRAY, px.data()));
}

LabelMask read_label_mask(const std::filesystem::path& path) {
  auto png = read_png(path, PNG_FORMAT_GRAY, true);
  LabelMask mask;
  mask.size = png.size;
  mask.data = std::move(png.bytes);
  for (auto v : mask.data) {
    if (v >= kNumLabels && v != kUnlabeled) {
      throw DataError(path.string() + ": label value " + std::to_string(v) + " is not 0, 1, 2 or 255");
    }
  }
  return mask;
}

void write_label_mask(const std::filesystem::path& path, const LabelMask& mask) {
  for (auto v : mask.data) {
    if (v >= kNumLabels && v != kUnlabeled) {
      throw ValidationError("label value " + std::to_string(v) + " is not 0, 1, 2 or 255");
    }
  }
  write_file_atomic(path, encode_png(mask.size, PNG_FORMAT_GRAY, mask.data.data()));
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  auto png = read_png(path, PNG_FORMAT_RGB, false);
  return {png.size, std::move(png.bytes)};
}

std::vector<std::byte> encode_png_rgb(const RgbImage& image) {
  if (image.rgb.size() != static_cast<std::size_t>(image.size.area()) * 3) {
    throw ValidationError("RGB buffer does not match the image size");
  }
  return encode_png(image.size, PNG_FORMAT_RGB, image.rgb.data());
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  write_file_atomic(path, encode_png_rgb(image));
}

}  // namespace hypermaps
