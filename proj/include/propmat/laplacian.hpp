#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <string>
#include <vector>

#include "propmat/errors.hpp"
#include "propmat/raster.hpp"

namespace propmat {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LaplacianParams {
    int window_radius = 1;
    double epsilon_reg = 1e-7;

    int window_size() const noexcept { return 2 * window_radius + 1; }
    int window_area() const noexcept { return window_size() * window_size(); }

    void validate() const {
        if (window_radius < 1) throw ContractError("window_radius must be at least 1");
        if (!(epsilon_reg > 0.0)) throw ContractError("epsilon_reg must be positive");
    }
};

namespace detail {

struct WindowStats {
    Eigen::Vector3d mean;
    Eigen::Matrix3d inv;  // (cov + eps/|w| I)^-1
};

}  // namespace detail

// Closed-form matting Laplacian over all (2r+1)^2 windows that fit inside
// the image:
//   L_ij = sum_{k : i,j in w_k} delta_ij - (1 + (I_i - mu_k)^T
//          (Sigma_k + eps/|w_k| Id)^-1 (I_j - mu_k)) / |w_k|
// Pixels are indexed row-major. Each row is accumulated independently in a
// fixed window order and the upper triangle is mirrored, so the result is
// exactly symmetric and independent of thread count.
inline SparseMatrix build_laplacian(const RgbImage& img, const LaplacianParams& params = {}) {
    params.validate();
    const int w = img.width();
    const int h = img.height();
    const int r = params.window_radius;
    const int size = params.window_size();
    if (w < size || h < size) {
        throw DimensionError("build_laplacian: image " + std::to_string(w) + "x" + std::to_string(h) +
                             " is smaller than the " + std::to_string(size) + "x" +
                             std::to_string(size) + " window");
    }
    const double area = params.window_area();

    // Window centers run over [r, w-r) x [r, h-r).
    const int cw = w - 2 * r;
    const int ch = h - 2 * r;
    std::vector<detail::WindowStats> stats(static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch));
    auto color = [&](int x, int y) {
        const auto p = img.pixel(img.index(x, y));
        return Eigen::Vector3d(p[0], p[1], p[2]);
    };

#pragma omp parallel for schedule(static)
    for (int cy = 0; cy < ch; ++cy) {
        for (int cx = 0; cx < cw; ++cx) {
            Eigen::Vector3d mean = Eigen::Vector3d::Zero();
            for (int dy = 0; dy < size; ++dy)
                for (int dx = 0; dx < size; ++dx) mean += color(cx + dx, cy + dy);
            mean /= area;
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (int dy = 0; dy < size; ++dy) {
                for (int dx = 0; dx < size; ++dx) {
                    const Eigen::Vector3d d = color(cx + dx, cy + dy) - mean;
                    cov += d * d.transpose();
                }
            }
            cov /= area;
            cov += (params.epsilon_reg / area) * Eigen::Matrix3d::Identity();
            auto& s = stats[static_cast<std::size_t>(cy) * static_cast<std::size_t>(cw) +
                            static_cast<std::size_t>(cx)];
            s.mean = mean;
            s.inv = cov.inverse();
        }
    }

    // Band storage: row i keeps offsets (ox, oy) in [-2r, 2r]^2.
    const int span = 4 * r + 1;
    const std::size_t band = static_cast<std::size_t>(span) * static_cast<std::size_t>(span);
    const std::size_t n = img.pixel_count();
    std::vector<double> values(n * band, 0.0);
    std::vector<unsigned char> present(n * band, 0);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = img.index(x, y);
            double* row = values.data() + i * band;
            unsigned char* mask = present.data() + i * band;
            const Eigen::Vector3d ci = color(x, y);
            // Windows whose top-left corner (cx, cy) covers (x, y).
            for (int cy = std::max(0, y - 2 * r); cy <= std::min(ch - 1, y); ++cy) {
                for (int cx = std::max(0, x - 2 * r); cx <= std::min(cw - 1, x); ++cx) {
                    const auto& s = stats[static_cast<std::size_t>(cy) * static_cast<std::size_t>(cw) +
                                          static_cast<std::size_t>(cx)];
                    const Eigen::Vector3d vi = s.inv * (ci - s.mean);
                    for (int jy = cy; jy < cy + size; ++jy) {
                        for (int jx = cx; jx < cx + size; ++jx) {
                            const std::size_t j = img.index(jx, jy);
                            if (j < i) continue;  // lower triangle mirrored below
                            const double affinity = (1.0 + vi.dot(color(jx, jy) - s.mean)) / area;
                            const std::size_t slot =
                                static_cast<std::size_t>(jy - y + 2 * r) * static_cast<std::size_t>(span) +
                                static_cast<std::size_t>(jx - x + 2 * r);
                            row[slot] += (i == j ? 1.0 : 0.0) - affinity;
                            mask[slot] = 1;
                        }
                    }
                }
            }
        }
    }

    // Mirror: entry (i, j) with j < i comes from row j at the opposite offset.
    Eigen::VectorXi per_row(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        int count = 0;
        for (int oy = -2 * r; oy <= 2 * r; ++oy) {
            for (int ox = -2 * r; ox <= 2 * r; ++ox) {
                const int jx = x + ox;
                const int jy = y + oy;
                if (jx < 0 || jy < 0 || jx >= w || jy >= h) continue;
                const std::size_t j = img.index(jx, jy);
                const std::size_t owner = std::min(i, j);
                const int sox = owner == i ? ox : -ox;
                const int soy = owner == i ? oy : -oy;
                const std::size_t slot = static_cast<std::size_t>(soy + 2 * r) * static_cast<std::size_t>(span) +
                                         static_cast<std::size_t>(sox + 2 * r);
                count += present[owner * band + slot];
            }
        }
        per_row[static_cast<Eigen::Index>(i)] = count;
    }

    SparseMatrix L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    L.reserve(per_row);
    for (std::size_t i = 0; i < n; ++i) {
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        for (int oy = -2 * r; oy <= 2 * r; ++oy) {
            for (int ox = -2 * r; ox <= 2 * r; ++ox) {
                const int jx = x + ox;
                const int jy = y + oy;
                if (jx < 0 || jy < 0 || jx >= w || jy >= h) continue;
                const std::size_t j = img.index(jx, jy);
                const std::size_t owner = std::min(i, j);
                const int sox = owner == i ? ox : -ox;
                const int soy = owner == i ? oy : -oy;
                const std::size_t slot = static_cast<std::size_t>(soy + 2 * r) * static_cast<std::size_t>(span) +
                                         static_cast<std::size_t>(sox + 2 * r);
                if (!present[owner * band + slot]) continue;
                L.insert(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    values[owner * band + slot];
            }
        }
    }
    L.makeCompressed();
    return L;
}

}  // namespace propmat
