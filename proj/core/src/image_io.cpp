#include "otvm/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace otvm::core {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

ArrayD read_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int ctype = png_get_color_type(png, info);

  if (ctype == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (ctype == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian 16-bit samples
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buf(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  int C = channels >= 3 ? 3 : 1;
  ArrayD out({C, (int)h, (int)w});
  // true division, so k/255 and k/65535 come back bit-exact
  double div = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < C; ++c) {
        double v;
        if (depth == 16) {
          const uint16_t* p = reinterpret_cast<const uint16_t*>(rows[y]);
          v = p[x * channels + c] / div;
        } else {
          v = rows[y][x * channels + c] / div;
        }
        out.at(c, (int)y, (int)x) = v;
      }
    }
  }
  return out;
}

namespace {

void write_png_impl(const std::string& path, const ArrayD& img, int depth) {
  if (img.ndim() != 3) throw std::invalid_argument("write_png wants {C,H,W}");
  int C = img.dim(0), H = img.dim(1), W = img.dim(2);
  if (C != 1 && C != 3) throw std::invalid_argument("write_png wants 1 or 3 channels");
  if (depth == 16 && C != 1) throw std::invalid_argument("16-bit write is single-channel");

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode " + path);
  }
  png_init_io(png, f.get());
  int ctype = C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, (png_uint_32)W, (png_uint_32)H, depth, ctype, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  auto q8 = [](double v) {
    v = std::min(std::max(v, 0.0), 1.0);
    return (png_byte)(v * 255.0 + 0.5);
  };
  auto q16 = [](double v) {
    v = std::min(std::max(v, 0.0), 1.0);
    return (uint16_t)(v * 65535.0 + 0.5);
  };

  if (depth == 8) {
    std::vector<png_byte> row((size_t)W * C);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < C; ++c) row[(size_t)x * C + c] = q8(img.at(c, y, x));
      png_write_row(png, row.data());
    }
  } else {
    std::vector<png_byte> row((size_t)W * 2);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        uint16_t v = q16(img.at(0, y, x));
        row[(size_t)x * 2] = (png_byte)(v >> 8);  // network byte order
        row[(size_t)x * 2 + 1] = (png_byte)(v & 0xff);
      }
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const std::string& path, const ArrayD& img) { write_png_impl(path, img, 8); }
void write_png16(const std::string& path, const ArrayD& img) { write_png_impl(path, img, 16); }

ArrayD jpeg_roundtrip(const ArrayD& rgb, int quality) {
  if (rgb.ndim() != 3 || rgb.dim(0) != 3) throw std::invalid_argument("jpeg wants {3,H,W}");
  int H = rgb.dim(1), W = rgb.dim(2);

  std::vector<unsigned char> pixels((size_t)H * W * 3);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = std::min(std::max(rgb.at(c, y, x), 0.0), 1.0);
        pixels[((size_t)y * W + x) * 3 + c] = (unsigned char)(v * 255.0 + 0.5);
      }

  unsigned char* enc = nullptr;
  unsigned long enc_size = 0;
  {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &enc, &enc_size);
    cinfo.image_width = (JDIMENSION)W;
    cinfo.image_height = (JDIMENSION)H;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    for (int i = 0; i < cinfo.num_components; ++i) {
      cinfo.comp_info[i].h_samp_factor = 1;
      cinfo.comp_info[i].v_samp_factor = 1;
    }
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row = pixels.data() + (size_t)cinfo.next_scanline * W * 3;
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
  }

  ArrayD out({3, H, W});
  {
    jpeg_decompress_struct dinfo;
    jpeg_error_mgr jerr;
    dinfo.err = jpeg_std_error(&jerr);
    jpeg_create_decompress(&dinfo);
    jpeg_mem_src(&dinfo, enc, enc_size);
    jpeg_read_header(&dinfo, TRUE);
    dinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&dinfo);
    std::vector<unsigned char> row((size_t)W * 3);
    int y = 0;
    while (dinfo.output_scanline < dinfo.output_height) {
      JSAMPROW r = row.data();
      jpeg_read_scanlines(&dinfo, &r, 1);
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < 3; ++c) out.at(c, y, x) = row[(size_t)x * 3 + c] / 255.0;
      ++y;
    }
    jpeg_finish_decompress(&dinfo);
    jpeg_destroy_decompress(&dinfo);
  }
  free(enc);
  return out;
}

}  // namespace otvm::core
