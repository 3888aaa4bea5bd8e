#pragma once

// Synthetic scenes and independent reference implementations used by the
// unit and acceptance suites. Nothing here calls into the code paths it is
// used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "propmat/propmat.hpp"

namespace propmat::testing {

inline RgbImage random_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RgbImage img(w, h);
    for (auto& v : img.data()) v = u(rng);
    return img;
}

// Each pixel Foreground / Background / Unknown with the given odds; at least
// one pixel of each class is forced.
inline Trimap random_trimap(int w, int h, std::uint64_t seed, double p_fg = 0.3, double p_bg = 0.3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Trimap tri(w, h, Label::Unknown);
    for (auto& l : tri.data()) {
        const double v = u(rng);
        l = v < p_fg ? Label::Foreground : v < p_fg + p_bg ? Label::Background : Label::Unknown;
    }
    tri[0] = Label::Foreground;
    tri[tri.pixel_count() - 1] = Label::Background;
    return tri;
}

inline RgbImage constant_image(int w, int h, double r, double g, double b) {
    RgbImage img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img[i * 3] = r;
        img[i * 3 + 1] = g;
        img[i * 3 + 2] = b;
    }
    return img;
}

inline void set_rgb(RgbImage& img, int x, int y, const Rgb& c) {
    for (std::size_t k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
}

// Dense matting Laplacian assembled window by window from the defining sum.
inline Eigen::MatrixXd dense_laplacian(const RgbImage& img, int radius, double eps) {
    const int w = img.width();
    const int h = img.height();
    const int n = w * h;
    const int size = 2 * radius + 1;
    const int area = size * size;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int cy = radius; cy < h - radius; ++cy) {
        for (int cx = radius; cx < w - radius; ++cx) {
            Eigen::MatrixXd W(area, 3);
            std::vector<int> ids;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int row = static_cast<int>(ids.size());
                    for (int c = 0; c < 3; ++c) W(row, c) = img.at(cx + dx, cy + dy, static_cast<std::size_t>(c));
                    ids.push_back((cy + dy) * w + (cx + dx));
                }
            }
            const Eigen::RowVector3d mu = W.colwise().mean();
            const Eigen::MatrixXd centered = W.rowwise() - mu;
            const Eigen::Matrix3d sigma = (centered.transpose() * centered) / area;
            const Eigen::Matrix3d reg = sigma + (eps / area) * Eigen::Matrix3d::Identity();
            const Eigen::MatrixXd G =
                Eigen::MatrixXd::Identity(area, area) -
                (Eigen::MatrixXd::Ones(area, area) + centered * reg.inverse() * centered.transpose()) / area;
            for (int a = 0; a < area; ++a)
                for (int b = 0; b < area; ++b) L(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]) += G(a, b);
        }
    }
    return L;
}

struct DenseSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

// (L + lambda D + diag(gamma c)) x = lambda D beta + gamma c A_init, built
// densely from a dense Laplacian.
inline DenseSystem dense_system(const Eigen::MatrixXd& L, const Trimap& tri, const ConstraintField& cf,
                                double lambda) {
    const auto n = L.rows();
    DenseSystem s{L, Eigen::VectorXd::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const bool known = tri[u] != Label::Unknown;
        const double beta = tri[u] == Label::Foreground ? 1.0 : 0.0;
        s.A(i, i) += (known ? lambda : 0.0) + cf.gamma[u] * cf.confidence[u];
        s.b[i] = (known ? lambda * beta : 0.0) + cf.gamma[u] * cf.confidence[u] * cf.a_init[u];
    }
    return s;
}

inline Eigen::VectorXd dense_solve(const DenseSystem& s) {
    return s.A.fullPivLu().solve(s.b);
}

inline Eigen::MatrixXd to_dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

// Mean of the k smallest distances per class via a full sort.
struct BruteKnn {
    ClassLabel flag;
    double dist_f;
    double dist_b;
};

inline BruteKnn brute_force_knn(const SampleSet& set, const FeatureVector& x, int k) {
    std::vector<double> df, db;
    for (const Sample& s : set.samples) {
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = s.feature[i] - x[i];
            sum += d * d;
        }
        (s.label == ClassLabel::Foreground ? df : db).push_back(std::sqrt(sum));
    }
    std::sort(df.begin(), df.end());
    std::sort(db.begin(), db.end());
    auto mean_first = [k](const std::vector<double>& v) {
        const std::size_t m = std::min(static_cast<std::size_t>(k), v.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += v[i];
        return sum / static_cast<double>(m);
    };
    BruteKnn r{ClassLabel::Background, mean_first(df), mean_first(db)};
    r.flag = r.dist_f < r.dist_b ? ClassLabel::Foreground : ClassLabel::Background;
    return r;
}

// argmin over alpha in {0, step, ..., 1} of |P - alpha F - (1 - alpha) B|.
inline double grid_project(const Rgb& p, const Rgb& f, const Rgb& b, double step = 1e-4) {
    const int steps = static_cast<int>(std::lround(1.0 / step));
    double best_alpha = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
        const double a = i * step;
        double e = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = p[c] - a * f[c] - (1.0 - a) * b[c];
            e += d * d;
        }
        if (e < best) {
            best = e;
            best_alpha = a;
        }
    }
    return best_alpha;
}

// Synthetic features laid out as a 9D or 11D field with all-zero entries,
// for driving the classifier without an image.
inline SampleSet make_samples(const std::vector<std::vector<double>>& fg,
                              const std::vector<std::vector<double>>& bg) {
    SampleSet set;
    set.dimensionality = fg.front().size();
    int x = 0;
    for (const auto& f : fg) set.samples.push_back({FeatureVector(f), ClassLabel::Foreground, {x++, 0}});
    for (const auto& b : bg) set.samples.push_back({FeatureVector(b), ClassLabel::Background, {x++, 1}});
    return set;
}

struct Scene {
    RgbImage image;
    Trimap trimap;
    AlphaMatte truth;
};

// Foreground-colored square with a background-colored hole in its middle.
// The hole and a margin around it are Unknown; the nearest background
// samples sit outside the square, far from the hole.
inline Scene hole_scene(int size = 64) {
    const Rgb fg{0.85, 0.25, 0.2};
    const Rgb bg{0.15, 0.35, 0.9};
    Scene s{RgbImage(size, size), Trimap(size, size, Label::Background), AlphaMatte(size, size, 0.0)};
    const int margin = size / 8;          // background frame around the square
    const int c0 = size / 2 - size / 8;   // hole bounds
    const int c1 = size / 2 + size / 8;
    const int band = 3;                   // unknown band width around the hole
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const bool in_square = x >= margin && x < size - margin && y >= margin && y < size - margin;
            const bool in_hole = x >= c0 && x < c1 && y >= c0 && y < c1;
            const bool in_band = x >= c0 - band && x < c1 + band && y >= c0 - band && y < c1 + band;
            const bool is_fg = in_square && !in_hole;
            set_rgb(s.image, x, y, is_fg ? fg : bg);
            s.truth.at(x, y) = is_fg ? 1.0 : 0.0;
            if (in_square) s.trimap.at(x, y) = in_band ? Label::Unknown : Label::Foreground;
            // Outer border of the square left unknown too, so the outside
            // has its own boundary samples.
            const bool outer_band = (in_square && (x < margin + band || x >= size - margin - band ||
                                                   y < margin + band || y >= size - margin - band)) ||
                                    (!in_square && (x >= margin - band && x < size - margin + band &&
                                                    y >= margin - band && y < size - margin + band));
            if (outer_band) s.trimap.at(x, y) = Label::Unknown;
        }
    }
    return s;
}

}  // namespace propmat::testing
