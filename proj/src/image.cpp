#include "gsmpm/image.hpp"

#include "gsmpm/errors.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>

namespace gsmpm {

namespace {

void png_sink(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png_rgba8(const ImageRgba8& image) {
    if (image.width <= 0 || image.height <= 0) {
        throw ValidationError("cannot encode a zero-size image");
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed");
    }

    png_set_write_fn(png, &out, &png_sink, &png_flush);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB_ALPHA,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB_gAMA_and_cHRM(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    // Fixed compression settings keep identical pixels -> identical bytes.
    png_set_compression_level(png, 6);

    std::vector<png_const_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = image.at(0, y);

    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png_rgba8(const std::filesystem::path& path, const ImageRgba8& image) {
    const std::vector<std::uint8_t> bytes = encode_png_rgba8(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace gsmpm
