#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "propmat/raster.hpp"

namespace propmat {

namespace detail {

inline double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

// sRGB (D65) linear RGB -> XYZ.
inline constexpr std::array<std::array<double, 3>, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

// D65 reference white taken as the image of RGB (1,1,1) so neutral grays
// land exactly on a = b = 0.
inline constexpr std::array<double, 3> kWhite{
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

}  // namespace detail

// Standard CIELAB triple (L in [0,100], a and b roughly [-128,127]).
inline std::array<double, 3> srgb_to_cielab(double r, double g, double b) {
    const double lin[3] = {detail::srgb_to_linear(r), detail::srgb_to_linear(g),
                           detail::srgb_to_linear(b)};
    double f[3];
    for (int row = 0; row < 3; ++row) {
        const auto& m = detail::kRgbToXyz[static_cast<std::size_t>(row)];
        const double v = m[0] * lin[0] + m[1] * lin[1] + m[2] * lin[2];
        f[row] = detail::lab_f(v / detail::kWhite[static_cast<std::size_t>(row)]);
    }
    return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

// L: [0,100] -> [0,255]; a, b: [-128,127] -> [0,255]. Results are clipped.
inline std::array<double, 3> rescale_lab(const std::array<double, 3>& lab) {
    return {std::clamp(lab[0] * 2.55, 0.0, 255.0), std::clamp(lab[1] + 128.0, 0.0, 255.0),
            std::clamp(lab[2] + 128.0, 0.0, 255.0)};
}

inline LabImage to_lab(const RgbImage& img) {
    LabImage lab(img.width(), img.height());
    const std::size_t n = img.pixel_count();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto px = img.pixel(static_cast<std::size_t>(i));
        const auto scaled = rescale_lab(srgb_to_cielab(px[0], px[1], px[2]));
        auto out = lab.pixel(static_cast<std::size_t>(i));
        std::copy(scaled.begin(), scaled.end(), out.begin());
    }
    return lab;
}

// Per-channel 3x3 Sobel responses with edge replication. Unnormalized, so a
// unit ramp along x gives gx = 8.
template <typename Tag>
GradientMaps gradients(const Raster<double, 3, Tag>& img) {
    const int w = img.width();
    const int h = img.height();
    GradientMaps g{GradientImage(w, h), GradientImage(w, h)};
    auto sample = [&](int x, int y, std::size_t c) {
        return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), c);
    };
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double tl = sample(x - 1, y - 1, c), tc = sample(x, y - 1, c),
                             tr = sample(x + 1, y - 1, c);
                const double ml = sample(x - 1, y, c), mr = sample(x + 1, y, c);
                const double bl = sample(x - 1, y + 1, c), bc = sample(x, y + 1, c),
                             br = sample(x + 1, y + 1, c);
                g.gx.at(x, y, c) = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
                g.gy.at(x, y, c) = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            }
        }
    }
    return g;
}

}  // namespace propmat
