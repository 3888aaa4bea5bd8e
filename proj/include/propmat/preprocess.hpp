#pragma once

#include <algorithm>
#include <cmath>

#include "propmat/errors.hpp"
#include "propmat/raster.hpp"

namespace propmat {

struct ExpansionParams {
    double spatial_threshold = 9.0;  // pixels
    double color_threshold = 9.0;    // RGB distance on the 0-255 scale

    void validate() const {
        if (!(spatial_threshold > 0.0) || !(color_threshold > 0.0)) {
            throw ContractError("expansion thresholds must be positive");
        }
    }
};

// Relabels an unknown pixel p as Foreground when some foreground q has
// D(p,q) < spatial_threshold and |I_p - I_q| <= color_threshold - D(p,q);
// likewise for Background. Every decision reads the input trimap, so there
// is no cascading. Pixels matching both classes stay Unknown.
inline Trimap expand_trimap(const RgbImage& img, const Trimap& tri, const ExpansionParams& params) {
    require_same_shape(img, tri, "expand_trimap");
    params.validate();

    const int w = tri.width();
    const int h = tri.height();
    // Largest integer offset r with r < spatial_threshold.
    const int reach = static_cast<int>(std::ceil(params.spatial_threshold)) - 1;
    const double spatial_sq = params.spatial_threshold * params.spatial_threshold;

    Trimap out = tri;
#pragma omp parallel for schedule(dynamic, 8)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (tri.at(x, y) != Label::Unknown) continue;
            const auto p = img.pixel(img.index(x, y));
            bool to_fg = false;
            bool to_bg = false;
            for (int dy = -reach; dy <= reach && !(to_fg && to_bg); ++dy) {
                const int qy = y + dy;
                if (qy < 0 || qy >= h) continue;
                for (int dx = -reach; dx <= reach; ++dx) {
                    const int qx = x + dx;
                    if (qx < 0 || qx >= w) continue;
                    const Label lq = tri.at(qx, qy);
                    if (lq == Label::Unknown) continue;
                    if ((lq == Label::Foreground && to_fg) || (lq == Label::Background && to_bg)) {
                        continue;
                    }
                    const double d_sq = static_cast<double>(dx * dx + dy * dy);
                    if (!(d_sq < spatial_sq)) continue;
                    const double budget = params.color_threshold - std::sqrt(d_sq);
                    if (budget < 0.0) continue;
                    const auto q = img.pixel(img.index(qx, qy));
                    double c_sq = 0.0;
                    for (std::size_t c = 0; c < 3; ++c) {
                        const double diff = (p[c] - q[c]) * 255.0;
                        c_sq += diff * diff;
                    }
                    if (std::sqrt(c_sq) <= budget) {
                        (lq == Label::Foreground ? to_fg : to_bg) = true;
                    }
                }
            }
            if (to_fg != to_bg) {
                out.at(x, y) = to_fg ? Label::Foreground : Label::Background;
            }
        }
    }
    return out;
}

}  // namespace propmat
