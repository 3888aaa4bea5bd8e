#pragma once

// Automatically generated constraints for unknown pixels. Each unknown pixel
// gets an initial alpha, a confidence and a weight, either from its nearest
// foreground/background boundary samples (local sampling) or, when that pair
// explains the pixel color poorly, from the KNN classifier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propmat/codec.hpp"
#include "propmat/errors.hpp"
#include "propmat/features.hpp"
#include "propmat/knn.hpp"
#include "propmat/raster.hpp"

namespace propmat {

using Rgb = std::array<double, 3>;

inline constexpr double kLocalSamplingWeight = 1.0;
inline constexpr double kClassifierWeight = 0.1;

enum class ConstraintSource : std::uint8_t {
    Known,
    LocalSampling,
    Classifier,
    Unconstrained,  // constraints disabled (closed-form baseline)
};

struct ConstraintField {
    int width = 0;
    int height = 0;
    std::vector<double> a_init;      // initial alpha
    std::vector<double> confidence;  // diagonal of the trust matrix
    std::vector<double> gamma;       // per-pixel weight
    std::vector<ConstraintSource> source;

    ConstraintField() = default;
    ConstraintField(int w, int h)
        : width(w), height(h), a_init(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
          confidence(a_init.size(), 0.0), gamma(a_init.size(), 0.0),
          source(a_init.size(), ConstraintSource::Known) {}

    std::size_t pixel_count() const noexcept { return a_init.size(); }

    // Known pixels keep beta; unknown pixels carry no constraint at all.
    static ConstraintField disabled(const Trimap& tri) {
        ConstraintField field(tri.width(), tri.height());
        for (std::size_t i = 0; i < field.pixel_count(); ++i) {
            field.a_init[i] = known_alpha(tri[i]);
            if (tri[i] == Label::Unknown) field.source[i] = ConstraintSource::Unconstrained;
        }
        return field;
    }

    void force_zero_gamma() { std::fill(gamma.begin(), gamma.end(), 0.0); }
};

struct BranchParams {
    double epsilon = 0.1;  // residual threshold for accepting a local F/B pair, [0,1] RGB units
    double sigma_sq = 2.0;
    double rho = 15.0;

    void validate() const {
        if (!(epsilon > 0.0) || !(sigma_sq > 0.0) || !(rho > 0.0)) {
            throw ContractError("epsilon, sigma_sq and rho must all be positive");
        }
    }
};

// Alpha of P projected onto the segment B -> F, clamped to [0,1]. Empty when
// F == B, in which case the caller falls back to the classifier.
inline std::optional<double> project_alpha(const Rgb& p, const Rgb& f, const Rgb& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        const double fb = f[c] - b[c];
        num += (p[c] - b[c]) * fb;
        den += fb * fb;
    }
    if (den == 0.0) return std::nullopt;
    return std::clamp(num / den, 0.0, 1.0);
}

// Compositing error |P - (alpha F + (1 - alpha) B)|.
inline double residual(const Rgb& p, const Rgb& f, const Rgb& b, double alpha) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        const double d = p[c] - (alpha * f[c] + (1.0 - alpha) * b[c]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

struct Prior {
    double a_init = 0.0;
    double confidence = 0.0;
};

inline Prior local_sampling_prior(double alpha, double similarity) {
    return {alpha, std::exp(-similarity)};
}

// Confidence exp(-dis / sigma^2) and a sigmoid of the signed inverse
// distance for the initial alpha. dis == 0 takes the limit: a step at the
// flag with full confidence.
inline Prior classifier_prior(ClassLabel flag, double dis, const BranchParams& params) {
    if (dis == 0.0) {
        return {(1.0 + flag_value(flag)) / 2.0, 1.0};
    }
    const double a = 1.0 / (1.0 + std::exp(params.rho * -flag_value(flag) / dis));
    return {a, std::exp(-dis / params.sigma_sq)};
}

// Exact nearest sample position per class. Uniform grid buckets, searched in
// growing rings; ties resolve to the lowest sample id.
class SpatialIndex {
public:
    SpatialIndex(const SampleSet& set, ClassLabel label, int width, int height, int cell = 16)
        : set_(&set), cell_(cell), cols_((width + cell - 1) / cell), rows_((height + cell - 1) / cell),
          buckets_(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_)) {
        for (std::size_t i = 0; i < set.samples.size(); ++i) {
            const Sample& s = set.samples[i];
            if (s.label != label) continue;
            const int cx = std::clamp(s.position.x / cell_, 0, cols_ - 1);
            const int cy = std::clamp(s.position.y / cell_, 0, rows_ - 1);
            buckets_[static_cast<std::size_t>(cy * cols_ + cx)].push_back(i);
            ++count_;
        }
    }

    bool empty() const noexcept { return count_ == 0; }

    std::size_t nearest(int x, int y) const {
        const int pcx = std::clamp(x / cell_, 0, cols_ - 1);
        const int pcy = std::clamp(y / cell_, 0, rows_ - 1);
        long long best_d2 = std::numeric_limits<long long>::max();
        std::size_t best = std::numeric_limits<std::size_t>::max();
        const int max_ring = std::max(cols_, rows_);
        for (int r = 0; r <= max_ring; ++r) {
            for (int cy = pcy - r; cy <= pcy + r; ++cy) {
                if (cy < 0 || cy >= rows_) continue;
                const bool edge_row = cy == pcy - r || cy == pcy + r;
                const int step = edge_row ? 1 : 2 * r;
                for (int cx = pcx - r; cx <= pcx + r; cx += std::max(step, 1)) {
                    if (cx < 0 || cx >= cols_) continue;
                    for (std::size_t id : buckets_[static_cast<std::size_t>(cy * cols_ + cx)]) {
                        const PixelPos& q = set_->samples[id].position;
                        const long long dx = q.x - x;
                        const long long dy = q.y - y;
                        const long long d2 = dx * dx + dy * dy;
                        if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
                            best_d2 = d2;
                            best = id;
                        }
                    }
                }
            }
            // Every point in ring r + 1 is at least r * cell away.
            const long long bound = static_cast<long long>(r) * cell_;
            if (best != std::numeric_limits<std::size_t>::max() && bound * bound > best_d2) break;
        }
        return best;
    }

private:
    const SampleSet* set_;
    int cell_;
    int cols_;
    int rows_;
    std::vector<std::vector<std::size_t>> buckets_;
    std::size_t count_ = 0;
};

inline Rgb rgb_at(const RgbImage& img, PixelPos p) {
    const auto px = img.pixel(img.index(p.x, p.y));
    return {px[0], px[1], px[2]};
}

// Per unknown pixel P:
//   F_p, B_p = spatially nearest boundary samples of each class;
//   alpha = projection of P onto B_p -> F_p, s = compositing residual;
//   s < epsilon: a_init = alpha, c = exp(-s), gamma = 1;
//   otherwise the classifier decides the flag, dis is the feature distance to
//   the closest sample of that class, and classifier_prior() gives a_init
//   and c with gamma = 0.1.
inline ConstraintField build_constraints(const RgbImage& img, const Trimap& tri,
                                         const TrainedClassifier& clf, const FeatureField& features,
                                         const BranchParams& params = {}) {
    require_same_shape(img, tri, "build_constraints");
    require_same_shape(img.width(), img.height(), features.width(), features.height(),
                       "build_constraints");
    if (features.dimensionality() != clf.dimensionality()) {
        throw DimensionError("build_constraints: feature field is " +
                             std::to_string(features.dimensionality()) + "D, classifier is " +
                             std::to_string(clf.dimensionality()) + "D");
    }
    params.validate();

    const SampleSet& samples = clf.samples();
    const SpatialIndex fg_index(samples, ClassLabel::Foreground, img.width(), img.height());
    const SpatialIndex bg_index(samples, ClassLabel::Background, img.width(), img.height());

    ConstraintField field(img.width(), img.height());
    const int w = img.width();
    const int h = img.height();
#pragma omp parallel for schedule(dynamic, 4)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = img.index(x, y);
            if (tri[i] != Label::Unknown) {
                field.a_init[i] = known_alpha(tri[i]);
                continue;
            }
            const Rgb p = rgb_at(img, {x, y});
            const Rgb f = rgb_at(img, samples.samples[fg_index.nearest(x, y)].position);
            const Rgb b = rgb_at(img, samples.samples[bg_index.nearest(x, y)].position);

            const std::optional<double> alpha = project_alpha(p, f, b);
            if (alpha) {
                const double s = residual(p, f, b, *alpha);
                if (s < params.epsilon) {
                    const Prior prior = local_sampling_prior(*alpha, s);
                    field.a_init[i] = prior.a_init;
                    field.confidence[i] = prior.confidence;
                    field.gamma[i] = kLocalSamplingWeight;
                    field.source[i] = ConstraintSource::LocalSampling;
                    continue;
                }
            }

            const auto x_p = features.row(i);
            const Classification cls = clf.classify(x_p);
            const std::size_t ref =
                cls.flag == ClassLabel::Foreground ? cls.nearest_f : cls.nearest_b;
            const double dis = std::sqrt(squared_distance(samples.samples[ref].feature.values(), x_p));
            const Prior prior = classifier_prior(cls.flag, dis, params);
            field.a_init[i] = prior.a_init;
            field.confidence[i] = prior.confidence;
            field.gamma[i] = kClassifierWeight;
            field.source[i] = ConstraintSource::Classifier;
        }
    }
    return field;
}

struct ConstraintDebugImages {
    Bytes a_init;
    Bytes confidence;
    Bytes source;  // Known 0, Unconstrained 64, Classifier 128, LocalSampling 255
};

inline ConstraintDebugImages constraint_debug_images(const ConstraintField& field) {
    std::vector<std::uint8_t> a(field.pixel_count()), c(field.pixel_count()), s(field.pixel_count());
    for (std::size_t i = 0; i < field.pixel_count(); ++i) {
        a[i] = to_byte(std::clamp(field.a_init[i], 0.0, 1.0));
        c[i] = to_byte(std::clamp(field.confidence[i], 0.0, 1.0));
        switch (field.source[i]) {
            case ConstraintSource::Known: s[i] = 0; break;
            case ConstraintSource::Unconstrained: s[i] = 64; break;
            case ConstraintSource::Classifier: s[i] = 128; break;
            case ConstraintSource::LocalSampling: s[i] = 255; break;
        }
    }
    return {encode_gray(a, field.width, field.height), encode_gray(c, field.width, field.height),
            encode_gray(s, field.width, field.height)};
}

}  // namespace propmat
