#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "propmat/errors.hpp"

namespace propmat {

// Row-major multi-channel raster. The Tag parameter keeps rasters with the
// same layout but different meaning (sRGB vs CIELAB, alpha vs gradient)
// from being mixed up.
template <typename T, std::size_t Channels, typename Tag>
class Raster {
public:
    using value_type = T;
    static constexpr std::size_t channels = Channels;

    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw DimensionError("raster dimensions must be positive, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * Channels,
                     fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width <= 0 || height <= 0) {
            throw DimensionError("raster dimensions must be positive");
        }
        if (data_.size() != pixel_count() * Channels) {
            throw DimensionError("raster data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(width) + "x" +
                                 std::to_string(height) + "x" + std::to_string(Channels));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    T& at(int x, int y, std::size_t c = 0) noexcept { return data_[index(x, y) * Channels + c]; }
    const T& at(int x, int y, std::size_t c = 0) const noexcept {
        return data_[index(x, y) * Channels + c];
    }

    T& operator[](std::size_t flat) noexcept { return data_[flat]; }
    const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

    // All channels of one pixel.
    std::span<T, Channels> pixel(std::size_t i) noexcept {
        return std::span<T, Channels>(data_.data() + i * Channels, Channels);
    }
    std::span<const T, Channels> pixel(std::size_t i) const noexcept {
        return std::span<const T, Channels>(data_.data() + i * Channels, Channels);
    }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    bool same_shape(int width, int height) const noexcept {
        return width_ == width && height_ == height;
    }
    template <typename Other>
    bool same_shape(const Other& other) const noexcept {
        return same_shape(other.width(), other.height());
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

enum class Label : std::uint8_t { Background, Foreground, Unknown };

struct RgbTag;
struct LabTag;
struct GradientTag;
struct AlphaTag;
struct TrimapTag;

// Color samples in [0,1], channel order R, G, B.
using RgbImage = Raster<double, 3, RgbTag>;
// CIELAB with every channel rescaled onto [0,255].
using LabImage = Raster<double, 3, LabTag>;
using GradientImage = Raster<double, 3, GradientTag>;
using AlphaMatte = Raster<double, 1, AlphaTag>;
using Trimap = Raster<Label, 1, TrimapTag>;

struct GradientMaps {
    GradientImage gx;  // horizontal derivative
    GradientImage gy;  // vertical derivative
};

struct PixelPos {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

inline bool is_known(Label l) noexcept { return l != Label::Unknown; }

inline void require_same_shape(int w0, int h0, int w1, int h1, const char* what) {
    if (w0 != w1 || h0 != h1) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(w0) +
                             "x" + std::to_string(h0) + " vs " + std::to_string(w1) + "x" +
                             std::to_string(h1) + ")");
    }
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
    require_same_shape(a.width(), a.height(), b.width(), b.height(), what);
}

// Throws ContractError unless every sample lies in [0,1].
template <typename Tag, std::size_t C>
void require_unit_range(const Raster<double, C, Tag>& r, const char* what) {
    for (double v : r.data()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ContractError(std::string(what) + ": sample " + std::to_string(v) +
                                " outside [0,1]");
        }
    }
}

// beta of the data term: 1 on Foreground, 0 elsewhere.
inline double known_alpha(Label l) noexcept { return l == Label::Foreground ? 1.0 : 0.0; }

}  // namespace propmat
