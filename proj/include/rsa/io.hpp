#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rsa/tensor.hpp"

namespace rsa {

// Portable tensor file: "RSAT", u32 version (1), u32 C, u32 a, u32 b, then C*a*b
// IEEE-754 binary64 values in (c,w,h) row-major order. Everything little-endian.

inline constexpr std::array<char, 4> kPtfMagic{'R', 'S', 'A', 'T'};
inline constexpr std::uint32_t kPtfVersion = 1;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFU));
}

inline void put_f64(std::vector<unsigned char>& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFU));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace detail

inline std::vector<unsigned char> encode_ptf(const ImageTensor& x) {
    std::vector<unsigned char> out;
    out.reserve(20 + 8 * x.size());
    out.insert(out.end(), kPtfMagic.begin(), kPtfMagic.end());
    detail::put_u32(out, kPtfVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(x.channels()));
    detail::put_u32(out, static_cast<std::uint32_t>(x.height()));
    detail::put_u32(out, static_cast<std::uint32_t>(x.width()));
    for (double v : x.values()) detail::put_f64(out, v);
    return out;
}

inline ImageTensor decode_ptf(std::span<const unsigned char> bytes) {
    if (bytes.size() < 20 || !std::equal(kPtfMagic.begin(), kPtfMagic.end(), bytes.begin())) {
        throw IoError("not a PTF stream (bad magic)");
    }
    const std::uint32_t version = detail::get_u32(bytes.data() + 4);
    if (version != kPtfVersion) throw IoError("unsupported PTF version " + std::to_string(version));
    const Shape shape{detail::get_u32(bytes.data() + 8), detail::get_u32(bytes.data() + 12),
                      detail::get_u32(bytes.data() + 16)};
    if (shape.size() == 0) throw IoError("PTF header has a zero dimension");
    if (bytes.size() != 20 + 8 * shape.size()) {
        throw IoError("PTF payload length " + std::to_string(bytes.size() - 20) + " does not match " +
                      to_string(shape));
    }
    std::vector<double> data(shape.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = detail::get_f64(bytes.data() + 20 + 8 * i);
    return ImageTensor(shape, std::move(data));
}

inline void write_ptf(const std::filesystem::path& path, const ImageTensor& x) {
    const auto bytes = encode_ptf(x);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline ImageTensor read_ptf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ptf(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

/// Value to 8-bit: clamp to [0,1], scale by 255, round half up.
inline unsigned char to_byte(double v) {
    const double s = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<unsigned char>(std::floor(s + 0.5));
}

/// Writes a 1-channel (gray) or 3-channel (RGB) tensor as an 8-bit PNG.
inline void write_png(const std::filesystem::path& path, const ImageTensor& x) {
    if (x.channels() != 1 && x.channels() != 3) {
        throw ShapeError("PNG export needs 1 or 3 channels, got " + std::to_string(x.channels()));
    }
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    const int color = x.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, static_cast<png_uint_32>(x.width()), static_cast<png_uint_32>(x.height()), 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(x.width() * x.channels());
    for (std::size_t w = 0; w < x.height(); ++w) {
        for (std::size_t h = 0; h < x.width(); ++h) {
            for (std::size_t c = 0; c < x.channels(); ++c) row[h * x.channels() + c] = to_byte(x(c, w, h));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

/// Reads an 8-bit PNG into [0,1] intensities; gray stays 1 channel, everything else becomes RGB.
inline ImageTensor read_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng failed reading " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const std::size_t width = png_get_image_width(png, info);
    const std::size_t height = png_get_image_height(png, info);
    const std::size_t channels = png_get_channels(png, info);
    std::vector<unsigned char> row(width * channels);
    ImageTensor out(Shape{channels == 1 ? 1U : 3U, height, width});
    for (std::size_t w = 0; w < height; ++w) {
        png_read_row(png, row.data(), nullptr);
        for (std::size_t h = 0; h < width; ++h) {
            for (std::size_t c = 0; c < out.channels(); ++c) {
                out(c, w, h) = static_cast<double>(row[h * channels + c]) / 255.0;
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

/// Kernel rendering for inspection: scaled so the largest entry is white.
inline void write_kernel_png(const std::filesystem::path& path, const GeneralizedKernel& k) {
    ImageTensor t = kernel_to_tensor(k);
    double peak = 0.0;
    for (double v : t.values()) peak = std::max(peak, v);
    if (peak > 0.0) {
        for (double& v : t.values()) v /= peak;
    }
    write_png(path, t);
}

/// Dispatches on extension: ".png" through libpng, anything else as PTF.
inline ImageTensor read_image(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext == ".png" ? read_png(path) : read_ptf(path);
}

/// All regular files in `dir` with the given extension, sorted by name.
inline std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& ext) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace rsa
