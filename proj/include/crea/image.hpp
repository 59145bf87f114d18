#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "crea/error.hpp"
#include "crea/zip.hpp"

namespace crea {

/// 8-bit RGBA raster, row-major.
struct RgbaImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

inline RgbaImage decode_png(const Bytes& data) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, data.data(), data.size()))
    throw FormatError(std::string("png: ") + img.message);
  img.format = PNG_FORMAT_RGBA;
  RgbaImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("png: " + msg);
  }
  return out;
}

namespace detail {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

}  // namespace detail

inline RgbaImage decode_jpeg(const Bytes& data) {
  jpeg_decompress_struct cinfo{};
  detail::JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = detail::jpeg_fail;
  RgbaImage out;
  std::vector<std::uint8_t> row;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = cinfo.output_width;
  out.height = cinfo.output_height;
  out.pixels.resize(out.width * out.height * 4);
  row.resize(out.width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    const std::size_t y = cinfo.output_scanline;
    JSAMPROW rp = row.data();
    jpeg_read_scanlines(&cinfo, &rp, 1);
    for (std::size_t x = 0; x < out.width; ++x) {
      std::uint8_t* px = &out.pixels[(y * out.width + x) * 4];
      px[0] = row[x * 3];
      px[1] = row[x * 3 + 1];
      px[2] = row[x * 3 + 2];
      px[3] = 255;
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

/// Decodes PNG or JPEG by signature.
inline RgbaImage decode_image(const Bytes& data) {
  if (data.size() >= 8 && data[0] == 0x89 && data[1] == 'P' && data[2] == 'N' && data[3] == 'G') return decode_png(data);
  if (data.size() >= 3 && data[0] == 0xff && data[1] == 0xd8 && data[2] == 0xff) return decode_jpeg(data);
  throw FormatError("image: unsupported format (only PNG and JPEG rasters are decoded)");
}

inline Bytes encode_png(const RgbaImage& img) {
  png_image p{};
  p.version = PNG_IMAGE_VERSION;
  p.width = static_cast<png_uint_32>(img.width);
  p.height = static_cast<png_uint_32>(img.height);
  p.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&p, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
    throw Error(std::string("png: ") + p.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&p, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
    throw Error(std::string("png: ") + p.message);
  out.resize(size);
  return out;
}

/// 512-bin colour histogram (8 levels per RGB channel) with mass one.
/// Fully transparent pixels are ignored unless every pixel is transparent.
inline std::vector<double> baseline_image_embedding(const RgbaImage& img) {
  const std::size_t n = img.width * img.height;
  if (n == 0) throw InvalidArgument("image: empty raster");
  std::vector<double> h(512, 0.0);
  bool any_opaque = false;
  for (std::size_t i = 0; i < n; ++i) any_opaque = any_opaque || img.pixels[i * 4 + 3] != 0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = &img.pixels[i * 4];
    if (any_opaque && px[3] == 0) continue;
    h[static_cast<std::size_t>((px[0] >> 5) * 64 + (px[1] >> 5) * 8 + (px[2] >> 5))] += 1.0;
    mass += 1.0;
  }
  for (auto& v : h) v /= mass;
  return h;
}

}  // namespace crea
