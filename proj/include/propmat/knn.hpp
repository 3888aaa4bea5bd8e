#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "propmat/errors.hpp"
#include "propmat/features.hpp"
#include "propmat/raster.hpp"

namespace propmat {

enum class ClassLabel : int { Background = -1, Foreground = 1 };

inline int flag_value(ClassLabel l) noexcept { return static_cast<int>(l); }

struct Sample {
    FeatureVector feature;
    ClassLabel label = ClassLabel::Background;
    PixelPos position;
};

struct SampleSet {
    std::vector<Sample> samples;
    std::size_t dimensionality = 0;

    std::size_t count(ClassLabel label) const {
        return static_cast<std::size_t>(std::count_if(
            samples.begin(), samples.end(), [label](const Sample& s) { return s.label == label; }));
    }
};

// A known pixel is a boundary sample when one of its in-image 8-neighbors
// carries a different label.
inline SampleSet collect_boundary_samples(const FeatureField& features, const Trimap& tri) {
    require_same_shape(features.width(), features.height(), tri.width(), tri.height(),
                       "collect_boundary_samples");
    bool has_fg = false;
    bool has_bg = false;
    for (Label l : tri.data()) {
        has_fg |= l == Label::Foreground;
        has_bg |= l == Label::Background;
    }
    if (!has_fg || !has_bg) {
        throw UnusableTrimapError(std::string("trimap has no ") +
                                  (has_fg ? "background" : "foreground") + " pixels");
    }

    const int w = tri.width();
    const int h = tri.height();
    SampleSet set;
    set.dimensionality = features.dimensionality();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Label own = tri.at(x, y);
            if (own == Label::Unknown) continue;
            bool boundary = false;
            for (int dy = -1; dy <= 1 && !boundary; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (tri.at(nx, ny) != own) {
                        boundary = true;
                        break;
                    }
                }
            }
            if (boundary) {
                set.samples.push_back(
                    {features.vector(tri.index(x, y)),
                     own == Label::Foreground ? ClassLabel::Foreground : ClassLabel::Background,
                     {x, y}});
            }
        }
    }
    return set;
}

namespace detail {

struct Neighbor {
    double dist_sq;
    std::size_t id;
};

// Keeps the `capacity` smallest distances in ascending order; equal
// distances keep insertion order.
class NearestList {
public:
    explicit NearestList(std::size_t capacity) : capacity_(capacity) { items_.reserve(capacity + 1); }

    void clear() noexcept { items_.clear(); }

    void offer(double dist_sq, std::size_t id) {
        if (items_.size() == capacity_ && !(dist_sq < items_.back().dist_sq)) return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), dist_sq,
                                    [](double d, const Neighbor& n) { return d < n.dist_sq; });
        items_.insert(pos, Neighbor{dist_sq, id});
        if (items_.size() > capacity_) items_.pop_back();
    }

    std::size_t size() const noexcept { return items_.size(); }
    const Neighbor& operator[](std::size_t i) const noexcept { return items_[i]; }

    // Mean Euclidean distance over the first min(k, size) entries, summed
    // in ascending order.
    double mean_distance(std::size_t k) const {
        const std::size_t n = std::min(k, items_.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += std::sqrt(items_[i].dist_sq);
        return sum / static_cast<double>(n);
    }

private:
    std::size_t capacity_;
    std::vector<Neighbor> items_;
};

// Flat per-class copy of the sample features for cache-friendly scans.
struct ClassPool {
    std::size_t dims = 0;
    std::vector<double> features;
    std::vector<std::size_t> ids;  // index into SampleSet::samples

    std::size_t size() const noexcept { return ids.size(); }
    std::span<const double> row(std::size_t i) const noexcept {
        return {features.data() + i * dims, dims};
    }
};

inline ClassPool make_pool(const SampleSet& set, ClassLabel label) {
    ClassPool pool;
    pool.dims = set.dimensionality;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        if (set.samples[i].label != label) continue;
        const auto v = set.samples[i].feature.values();
        pool.features.insert(pool.features.end(), v.begin(), v.end());
        pool.ids.push_back(i);
    }
    return pool;
}

inline void scan_pool(const ClassPool& pool, std::span<const double> x, NearestList& out) {
    out.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out.offer(squared_distance(pool.row(i), x), pool.ids[i]);
    }
}

// Minimum mean distance rule: Foreground only when strictly closer.
inline ClassLabel decide(double dist_f, double dist_b) noexcept {
    return dist_f < dist_b ? ClassLabel::Foreground : ClassLabel::Background;
}

}  // namespace detail

enum class FeaturePolicy { Auto, Force9, Force11 };

struct TrainOptions {
    FeaturePolicy policy = FeaturePolicy::Auto;
    double accuracy_floor = 0.85;  // below this the 9D space is retried with coordinates
    int k_max = 15;
    int cv_folds = 5;

    void validate() const {
        if (k_max < 1) throw ContractError("k_max must be at least 1");
        if (cv_folds < 2) throw ContractError("cv_folds must be at least 2");
        if (!(accuracy_floor >= 0.0 && accuracy_floor <= 1.0)) {
            throw ContractError("accuracy_floor must lie in [0,1]");
        }
    }

    // Both classes need this many samples so every fold holds at least two.
    std::size_t min_samples_per_class() const {
        return std::max<std::size_t>(10, 2 * static_cast<std::size_t>(cv_folds));
    }
};

struct KScore {
    int k = 0;
    double accuracy = 0.0;
};

struct Classification {
    ClassLabel flag = ClassLabel::Background;
    double dist_f = 0.0;  // mean distance to the k nearest foreground samples
    double dist_b = 0.0;
    std::size_t nearest_f = 0;  // index of the closest foreground sample
    std::size_t nearest_b = 0;
};

class TrainedClassifier {
public:
    TrainedClassifier(SampleSet samples, int k, double cv_accuracy, bool used_coords,
                      std::vector<KScore> scores = {})
        : samples_(std::move(samples)), k_(k), cv_accuracy_(cv_accuracy),
          used_coords_(used_coords), scores_(std::move(scores)),
          fg_(detail::make_pool(samples_, ClassLabel::Foreground)),
          bg_(detail::make_pool(samples_, ClassLabel::Background)) {
        if (fg_.size() == 0 || bg_.size() == 0) {
            throw UnusableTrimapError("classifier needs samples of both classes");
        }
        if (k_ < 1 || static_cast<std::size_t>(k_) > samples_.samples.size()) {
            throw ContractError("k must lie in [1, sample count]");
        }
    }

    const SampleSet& samples() const noexcept { return samples_; }
    const Sample& sample(std::size_t id) const { return samples_.samples.at(id); }
    int k() const noexcept { return k_; }
    double cv_accuracy() const noexcept { return cv_accuracy_; }
    bool used_coords() const noexcept { return used_coords_; }
    std::size_t dimensionality() const noexcept { return samples_.dimensionality; }
    const std::vector<KScore>& score_table() const noexcept { return scores_; }

    Classification classify(std::span<const double> x) const {
        if (x.size() != dimensionality()) {
            throw DimensionError("classify: feature has " + std::to_string(x.size()) +
                                 " components, classifier expects " +
                                 std::to_string(dimensionality()));
        }
        const auto k = static_cast<std::size_t>(k_);
        detail::NearestList near_f(k), near_b(k);
        detail::scan_pool(fg_, x, near_f);
        detail::scan_pool(bg_, x, near_b);
        Classification out;
        out.dist_f = near_f.mean_distance(k);
        out.dist_b = near_b.mean_distance(k);
        out.flag = detail::decide(out.dist_f, out.dist_b);
        out.nearest_f = near_f[0].id;
        out.nearest_b = near_b[0].id;
        return out;
    }

    Classification classify(const FeatureVector& x) const { return classify(x.values()); }

private:
    SampleSet samples_;
    int k_;
    double cv_accuracy_;
    bool used_coords_;
    std::vector<KScore> scores_;
    detail::ClassPool fg_;
    detail::ClassPool bg_;
};

inline Classification classify(const TrainedClassifier& clf, const FeatureVector& x) {
    return clf.classify(x);
}

// Stratified cross-validation: the i-th sample of each class goes to fold
// i mod folds. Returns the mean per-fold accuracy for every odd k <= k_max.
inline std::vector<KScore> cross_validate(const SampleSet& set, int folds, int k_max) {
    if (folds < 2) throw ContractError("cross_validate: need at least 2 folds");
    std::vector<int> ks;
    for (int k = 1; k <= k_max; k += 2) ks.push_back(k);
    if (ks.empty()) throw ContractError("cross_validate: no odd k <= k_max");

    const std::size_t n = set.samples.size();
    std::vector<int> fold(n);
    std::size_t seen_f = 0;
    std::size_t seen_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t& seen = set.samples[i].label == ClassLabel::Foreground ? seen_f : seen_b;
        fold[i] = static_cast<int>(seen++ % static_cast<std::size_t>(folds));
    }

    const auto cap = static_cast<std::size_t>(ks.back());
    // correct[f][ki], total[f]
    std::vector<std::vector<std::size_t>> correct(static_cast<std::size_t>(folds),
                                                  std::vector<std::size_t>(ks.size(), 0));
    std::vector<std::size_t> total(static_cast<std::size_t>(folds), 0);

#pragma omp parallel
    {
        detail::NearestList near_f(cap), near_b(cap);
        std::vector<std::vector<std::size_t>> local(static_cast<std::size_t>(folds),
                                                    std::vector<std::size_t>(ks.size(), 0));
        std::vector<std::size_t> local_total(static_cast<std::size_t>(folds), 0);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(n); ++qi) {
            const auto q = static_cast<std::size_t>(qi);
            const auto x = set.samples[q].feature.values();
            near_f.clear();
            near_b.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (fold[j] == fold[q]) continue;
                const double d = squared_distance(set.samples[j].feature.values(), x);
                (set.samples[j].label == ClassLabel::Foreground ? near_f : near_b).offer(d, j);
            }
            const auto f = static_cast<std::size_t>(fold[q]);
            ++local_total[f];
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                const auto k = static_cast<std::size_t>(ks[ki]);
                const ClassLabel guess = detail::decide(near_f.mean_distance(k), near_b.mean_distance(k));
                if (guess == set.samples[q].label) ++local[f][ki];
            }
        }
#pragma omp critical
        {
            for (std::size_t f = 0; f < local.size(); ++f) {
                total[f] += local_total[f];
                for (std::size_t ki = 0; ki < ks.size(); ++ki) correct[f][ki] += local[f][ki];
            }
        }
    }

    std::vector<KScore> scores;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        double acc = 0.0;
        int used = 0;
        for (std::size_t f = 0; f < total.size(); ++f) {
            if (total[f] == 0) continue;
            acc += static_cast<double>(correct[f][ki]) / static_cast<double>(total[f]);
            ++used;
        }
        scores.push_back({ks[ki], used > 0 ? acc / used : 0.0});
    }
    return scores;
}

// Highest accuracy wins; ties go to the smaller k.
inline KScore best_k(const std::vector<KScore>& scores) {
    KScore best = scores.front();
    for (const KScore& s : scores) {
        if (s.accuracy > best.accuracy) best = s;
    }
    return best;
}

inline TrainedClassifier train_on(SampleSet set, const TrainOptions& options, bool used_coords) {
    const std::size_t need = options.min_samples_per_class();
    const std::size_t nf = set.count(ClassLabel::Foreground);
    const std::size_t nb = set.count(ClassLabel::Background);
    if (nf < need || nb < need) {
        throw DegenerateSampleSetError("need at least " + std::to_string(need) +
                                       " boundary samples per class, got " + std::to_string(nf) +
                                       " foreground and " + std::to_string(nb) + " background");
    }
    std::vector<KScore> scores = cross_validate(set, options.cv_folds, options.k_max);
    const KScore best = best_k(scores);
    return TrainedClassifier(std::move(set), best.k, best.accuracy, used_coords, std::move(scores));
}

// Under FeaturePolicy::Auto the 9D space is tried first; when its best
// accuracy falls below the floor the 11D space is trained too and the higher
// scoring one is kept (9D on a tie).
inline TrainedClassifier train(const FeatureField& features9, const FeatureField& features11,
                               const Trimap& tri, const TrainOptions& options = {}) {
    options.validate();
    if (features9.dimensionality() != kColorTextureDims ||
        features11.dimensionality() != kWithCoordsDims) {
        throw DimensionError("train: expected 9D and 11D feature fields");
    }
    switch (options.policy) {
        case FeaturePolicy::Force9:
            return train_on(collect_boundary_samples(features9, tri), options, false);
        case FeaturePolicy::Force11:
            return train_on(collect_boundary_samples(features11, tri), options, true);
        case FeaturePolicy::Auto:
            break;
    }
    TrainedClassifier base = train_on(collect_boundary_samples(features9, tri), options, false);
    if (base.cv_accuracy() >= options.accuracy_floor) return base;
    TrainedClassifier extended = train_on(collect_boundary_samples(features11, tri), options, true);
    return extended.cv_accuracy() > base.cv_accuracy() ? std::move(extended) : std::move(base);
}

}  // namespace propmat
