#pragma once

// PNG decoding and encoding at the 8-bit I/O boundary. Internally every
// raster holds reals in [0,1]; 8-bit values only exist in the byte buffers
// handled here.

#include <png.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "propmat/errors.hpp"
#include "propmat/raster.hpp"

namespace propmat {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1, 2, 3 or 4 as stored in the file
    Bytes pixels;      // interleaved, `channels` bytes per pixel
};

class PngImage {
public:
    PngImage() {
        image_.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image_); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;

    png_image* get() noexcept { return &image_; }
    std::string message() const { return image_.message; }

private:
    png_image image_{};
};

inline DecodedPng decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) {
        throw DecodeError("decode: empty input");
    }
    PngImage png;
    if (png_image_begin_read_from_memory(png.get(), bytes.data(), bytes.size()) == 0) {
        throw DecodeError("decode: " + png.message());
    }
    const png_uint_32 src = png.get()->format;
    if ((src & PNG_FORMAT_FLAG_LINEAR) != 0) {
        throw DecodeError("decode: only 8-bit-per-channel PNG is supported");
    }
    const bool color = (src & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (src & PNG_FORMAT_FLAG_ALPHA) != 0;

    DecodedPng out;
    out.channels = (color ? 3 : 1) + (alpha ? 1 : 0);
    png.get()->format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                              : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
    out.width = static_cast<int>(png.get()->width);
    out.height = static_cast<int>(png.get()->height);
    out.pixels.resize(PNG_IMAGE_SIZE(*png.get()));
    if (png_image_finish_read(png.get(), nullptr, out.pixels.data(), 0, nullptr) == 0) {
        throw DecodeError("decode: " + png.message());
    }
    return out;
}

inline Bytes encode_png(std::span<const std::uint8_t> pixels, int width, int height,
                        int channels) {
    PngImage png;
    png.get()->width = static_cast<png_uint_32>(width);
    png.get()->height = static_cast<png_uint_32>(height);
    png.get()->format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (png_image_write_to_memory(png.get(), nullptr, &size, 0, pixels.data(), 0, nullptr) == 0) {
        throw Error("encode: " + png.message());
    }
    Bytes out(size);
    if (png_image_write_to_memory(png.get(), out.data(), &size, 0, pixels.data(), 0, nullptr) ==
        0) {
        throw Error("encode: " + png.message());
    }
    out.resize(size);
    return out;
}

// Gray plane of a decoded PNG. Color input is accepted only when every pixel
// has equal R, G and B.
inline std::vector<std::uint8_t> collapse_to_gray(const DecodedPng& png, const char* what) {
    const std::size_t n = static_cast<std::size_t>(png.width) * static_cast<std::size_t>(png.height);
    std::vector<std::uint8_t> gray(n);
    const auto stride = static_cast<std::size_t>(png.channels);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = png.pixels.data() + i * stride;
        if (png.channels >= 3 && (p[0] != p[1] || p[1] != p[2])) {
            throw FormatError(std::string(what) + ": color input with unequal channels at pixel " +
                              std::to_string(i));
        }
        gray[i] = p[0];
    }
    return gray;
}

}  // namespace detail

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DecodeError("cannot open '" + path.string() + "'");
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

// RGB or RGBA 8-bit PNG -> samples raw/255. Alpha, when present, is dropped.
inline RgbImage decode_image(std::span<const std::uint8_t> bytes) {
    const detail::DecodedPng png = detail::decode_png(bytes);
    if (png.channels < 3) {
        throw FormatError("decode_image: expected a 3-channel color image, got " +
                          std::to_string(png.channels) + " channel(s)");
    }
    RgbImage img(png.width, png.height);
    const auto stride = static_cast<std::size_t>(png.channels);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            img[i * 3 + c] = png.pixels[i * stride + c] / 255.0;
        }
    }
    return img;
}

// Benchmark convention: 255 Foreground, 0 Background, anything else Unknown.
inline Trimap decode_trimap(std::span<const std::uint8_t> bytes) {
    const detail::DecodedPng png = detail::decode_png(bytes);
    const std::vector<std::uint8_t> gray = detail::collapse_to_gray(png, "decode_trimap");
    Trimap tri(png.width, png.height, Label::Unknown);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        tri[i] = gray[i] == 255 ? Label::Foreground
                 : gray[i] == 0 ? Label::Background
                                : Label::Unknown;
    }
    return tri;
}

inline AlphaMatte decode_matte(std::span<const std::uint8_t> bytes) {
    const detail::DecodedPng png = detail::decode_png(bytes);
    const std::vector<std::uint8_t> gray = detail::collapse_to_gray(png, "decode_matte");
    AlphaMatte matte(png.width, png.height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        matte[i] = gray[i] / 255.0;
    }
    return matte;
}

inline std::uint8_t to_byte(double unit) {
    return static_cast<std::uint8_t>(std::lround(unit * 255.0));
}

// 8-bit grayscale PNG, gray = round(alpha * 255). Alphas must already be in [0,1].
inline Bytes encode_matte(const AlphaMatte& matte) {
    require_unit_range(matte, "encode_matte");
    std::vector<std::uint8_t> gray(matte.pixel_count());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = to_byte(matte[i]);
    }
    return detail::encode_png(gray, matte.width(), matte.height(), 1);
}

inline Bytes encode_image(const RgbImage& img) {
    require_unit_range(img, "encode_image");
    std::vector<std::uint8_t> rgb(img.pixel_count() * 3);
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        rgb[i] = to_byte(img[i]);
    }
    return detail::encode_png(rgb, img.width(), img.height(), 3);
}

inline Bytes encode_trimap(const Trimap& tri) {
    std::vector<std::uint8_t> gray(tri.pixel_count());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = tri[i] == Label::Foreground ? 255 : tri[i] == Label::Background ? 0 : 128;
    }
    return detail::encode_png(gray, tri.width(), tri.height(), 1);
}

inline Bytes encode_gray(std::span<const std::uint8_t> gray, int width, int height) {
    if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("encode_gray: buffer size does not match dimensions");
    }
    return detail::encode_png(gray, width, height, 1);
}

}  // namespace propmat
