#include "irsim/pngio.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace irsim {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

ImageF read_png_gray(const std::string& path, int* bit_depth_out) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png_gray: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png_gray: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png_gray: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png_gray: decode error in " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (depth == 16) png_set_swap(png); // stored big-endian; read as host LE u16

    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);

    ImageF img(height, width);
    if (depth == 16) {
        std::vector<std::uint16_t> row(static_cast<size_t>(width));
        for (int y = 0; y < height; ++y) {
            png_read_row(png, reinterpret_cast<png_bytep>(row.data()), nullptr);
            for (int x = 0; x < width; ++x) img.at(y, x) = row[x];
        }
    } else {
        std::vector<std::uint8_t> row(static_cast<size_t>(width));
        for (int y = 0; y < height; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (int x = 0; x < width; ++x) img.at(y, x) = row[x];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    if (bit_depth_out) *bit_depth_out = depth;
    return img;
}

namespace {

void write_png_gray(const std::string& path, const void* data, int height, int width, int depth) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png_gray: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png_gray: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png_gray: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png_gray: encode error for " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (depth == 16) png_set_swap(png);

    const size_t row_bytes = static_cast<size_t>(width) * (depth / 8);
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(bytes + static_cast<size_t>(y) * row_bytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

void write_png_gray8(const std::string& path, const std::vector<std::uint8_t>& data,
                     int height, int width) {
    if (static_cast<size_t>(height) * width != data.size())
        throw std::invalid_argument("write_png_gray8: size mismatch");
    write_png_gray(path, data.data(), height, width, 8);
}

void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& data,
                      int height, int width) {
    if (static_cast<size_t>(height) * width != data.size())
        throw std::invalid_argument("write_png_gray16: size mismatch");
    write_png_gray(path, data.data(), height, width, 16);
}

} // namespace irsim
