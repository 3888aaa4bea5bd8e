#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "propmat/color.hpp"
#include "propmat/errors.hpp"
#include "propmat/raster.hpp"

namespace propmat {

inline constexpr std::size_t kColorTextureDims = 9;
inline constexpr std::size_t kWithCoordsDims = 11;

// Per-pixel feature: (l, a, b, gx_l, gx_a, gx_b, gy_l, gy_a, gy_b[, x, y]).
class FeatureVector {
public:
    FeatureVector() = default;

    explicit FeatureVector(std::span<const double> values) : size_(values.size()) {
        if (values.size() != kColorTextureDims && values.size() != kWithCoordsDims) {
            throw DimensionError("feature vector length must be 9 or 11, got " +
                                 std::to_string(values.size()));
        }
        std::copy(values.begin(), values.end(), values_.begin());
    }

    FeatureVector(std::initializer_list<double> values)
        : FeatureVector(std::span<const double>(values.begin(), values.size())) {}

    std::size_t size() const noexcept { return size_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return {values_.data(), size_}; }

    friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
        return a.size_ == b.size_ &&
               std::equal(a.values_.begin(), a.values_.begin() + static_cast<std::ptrdiff_t>(a.size_),
                          b.values_.begin());
    }

private:
    std::array<double, kWithCoordsDims> values_{};
    std::size_t size_ = 0;
};

// Unchecked squared L2 distance over equal-length spans.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

inline double feature_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("feature_distance: length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
    return std::sqrt(squared_distance(a.values(), b.values()));
}

class FeatureField {
public:
    FeatureField(int width, int height, std::size_t dims)
        : width_(width), height_(height), dims_(dims),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * dims) {
        if (dims != kColorTextureDims && dims != kWithCoordsDims) {
            throw DimensionError("feature dimensionality must be 9 or 11");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t dimensionality() const noexcept { return dims_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool has_coords() const noexcept { return dims_ == kWithCoordsDims; }

    std::span<const double> row(std::size_t pixel) const noexcept {
        return {data_.data() + pixel * dims_, dims_};
    }
    std::span<double> row(std::size_t pixel) noexcept { return {data_.data() + pixel * dims_, dims_}; }

    FeatureVector vector(std::size_t pixel) const { return FeatureVector(row(pixel)); }

private:
    int width_;
    int height_;
    std::size_t dims_;
    std::vector<double> data_;
};

// Coordinates, when requested, are scaled onto [0,255] to share the color
// range: x * 255 / (width - 1), and 0 along a one-pixel axis.
inline FeatureField build_features(const LabImage& lab, const GradientMaps& grads, bool with_coords) {
    require_same_shape(lab, grads.gx, "build_features");
    require_same_shape(lab, grads.gy, "build_features");
    const int w = lab.width();
    const int h = lab.height();
    FeatureField field(w, h, with_coords ? kWithCoordsDims : kColorTextureDims);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = lab.index(x, y);
            auto out = field.row(i);
            for (std::size_t c = 0; c < 3; ++c) {
                out[c] = lab.at(x, y, c);
                out[3 + c] = grads.gx.at(x, y, c);
                out[6 + c] = grads.gy.at(x, y, c);
            }
            if (with_coords) {
                out[9] = w > 1 ? x * 255.0 / (w - 1) : 0.0;
                out[10] = h > 1 ? y * 255.0 / (h - 1) : 0.0;
            }
        }
    }
    return field;
}

// Both dimensionalities from one image.
struct FeatureSpaces {
    FeatureField color_texture;
    FeatureField with_coords;
};

inline FeatureSpaces build_feature_spaces(const RgbImage& img) {
    const LabImage lab = to_lab(img);
    const GradientMaps grads = gradients(lab);
    return {build_features(lab, grads, false), build_features(lab, grads, true)};
}

}  // namespace propmat
