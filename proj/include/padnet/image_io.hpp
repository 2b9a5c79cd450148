#pragma once

// Image file I/O: 8-bit PNG (gray or RGB, via libpng) and binary PPM (P6) /
// PGM (P5). Loading maps samples to [0,1] by division by 255; saving clamps
// to [0,1] and quantizes with byte = round(v * 255). Formats are sniffed
// from the file's magic bytes on load and chosen by extension on save.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "padnet/image.hpp"

namespace padnet {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::uint8_t quantize_byte(double v) {
    return std::uint8_t(std::lround(clamp01(v) * 255.0));
}

// --- PNG ----------------------------------------------------------------

inline Image load_png(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("load_image: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("load_image: png_create_info_struct failed");
    }
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buf;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_image: corrupt PNG: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);
    if (w == 0 || h == 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_image: zero-dimension PNG: " + path);
    }
    if (depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_image: 16-bit PNG not supported: " + path);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    int chans = png_get_channels(png, info);
    if (chans != 1 && chans != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("load_image: unsupported PNG channel count: " + path);
    }
    std::size_t stride = png_get_rowbytes(png, info);
    buf.resize(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(int(h), int(w), chans);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < chans; ++c)
                img.at(c, y, x) = double(buf[y * stride + std::size_t(x) * chans + c]) / 255.0;
    return img;
}

inline void save_png(const Image& img, std::FILE* f, const std::string& path) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("save_image: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("save_image: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("save_image: PNG write failed: " + path);
    }
    png_init_io(png, f);
    int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<std::uint8_t> row(std::size_t(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                row[std::size_t(x) * img.channels + c] = quantize_byte(img.at(c, y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// --- PPM / PGM ------------------------------------------------------------

// Reads one whitespace/comment-delimited token from a PNM header.
inline std::string pnm_token(std::FILE* f, const std::string& path) {
    std::string tok;
    int ch;
    while ((ch = std::fgetc(f)) != EOF) {
        if (ch == '#') {
            while ((ch = std::fgetc(f)) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(char(ch));
    }
    if (tok.empty()) throw std::runtime_error("load_image: truncated PNM header: " + path);
    return tok;
}

inline Image load_pnm(std::FILE* f, const std::string& path) {
    std::string magic = pnm_token(f, path);
    int chans = 0;
    if (magic == "P5") chans = 1;
    else if (magic == "P6") chans = 3;
    else throw std::runtime_error("load_image: unsupported format: " + path);
    long w = std::stol(pnm_token(f, path));
    long h = std::stol(pnm_token(f, path));
    long maxval = std::stol(pnm_token(f, path));
    if (w <= 0 || h <= 0) throw std::runtime_error("load_image: zero-dimension PNM: " + path);
    if (maxval != 255) throw std::runtime_error("load_image: only 8-bit PNM supported: " + path);

    std::vector<std::uint8_t> buf(std::size_t(w) * std::size_t(h) * std::size_t(chans));
    if (std::fread(buf.data(), 1, buf.size(), f) != buf.size())
        throw std::runtime_error("load_image: truncated PNM data: " + path);

    Image img(int(h), int(w), chans);
    std::size_t i = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < chans; ++c) img.at(c, y, x) = double(buf[i++]) / 255.0;
    return img;
}

inline void save_pnm(const Image& img, std::FILE* f, const std::string& path) {
    const char* magic = img.channels == 1 ? "P5" : "P6";
    std::string header = std::string(magic) + "\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    if (std::fwrite(header.data(), 1, header.size(), f) != header.size())
        throw std::runtime_error("save_image: write failed: " + path);
    std::vector<std::uint8_t> buf;
    buf.reserve(img.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) buf.push_back(quantize_byte(img.at(c, y, x)));
    if (std::fwrite(buf.data(), 1, buf.size(), f) != buf.size())
        throw std::runtime_error("save_image: write failed: " + path);
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

inline Image load_image(const std::string& path) {
    detail::FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("load_image: cannot open " + path);
    unsigned char sig[8] = {};
    std::size_t got = std::fread(sig, 1, sizeof(sig), f.get());
    std::rewind(f.get());
    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return detail::load_png(f.get(), path);
    if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6'))
        return detail::load_pnm(f.get(), path);
    throw std::runtime_error("load_image: unsupported format: " + path);
}

inline void save_image(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("save_image: channel count must be 1 or 3");
    if (img.height <= 0 || img.width <= 0)
        throw std::invalid_argument("save_image: empty image");
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("save_image: cannot open " + path + " for writing");
    if (detail::ends_with(path, ".png")) {
        detail::save_png(img, f.get(), path);
    } else if (detail::ends_with(path, ".pgm")) {
        if (img.channels != 1)
            throw std::invalid_argument("save_image: PGM requires a single channel");
        detail::save_pnm(img, f.get(), path);
    } else if (detail::ends_with(path, ".ppm")) {
        if (img.channels != 3)
            throw std::invalid_argument("save_image: PPM requires three channels");
        detail::save_pnm(img, f.get(), path);
    } else {
        throw std::runtime_error("save_image: unsupported extension: " + path);
    }
}

}  // namespace padnet
