#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "propmat/errors.hpp"
#include "propmat/raster.hpp"

namespace propmat {

struct EvalReport {
    double sad = 0.0;  // sum of |a - a_true| over the evaluated pixels, [0,1] scale
    double mse = 0.0;  // mean of (a - a_true)^2
    std::size_t pixel_count = 0;

    double sad_255() const noexcept { return sad * 255.0; }
};

enum class EvalRegion { All, Unknown };

namespace detail {

template <typename Pred>
EvalReport accumulate_errors(const AlphaMatte& pred, const AlphaMatte& truth, Pred include) {
    require_same_shape(pred, truth, "evaluate");
    EvalReport r;
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
        if (!include(i)) continue;
        const double e = pred[i] - truth[i];
        r.sad += std::abs(e);
        sq += e * e;
        ++r.pixel_count;
    }
    r.mse = r.pixel_count > 0 ? sq / static_cast<double>(r.pixel_count) : 0.0;
    return r;
}

}  // namespace detail

// SAD and MSE over every pixel.
inline EvalReport evaluate(const AlphaMatte& pred, const AlphaMatte& truth) {
    return detail::accumulate_errors(pred, truth, [](std::size_t) { return true; });
}

// Restricted to pixels the trimap marks Unknown (benchmark convention).
inline EvalReport evaluate_unknown(const AlphaMatte& pred, const AlphaMatte& truth,
                                   const Trimap& tri) {
    require_same_shape(pred, tri, "evaluate_unknown");
    return detail::accumulate_errors(pred, truth,
                                     [&](std::size_t i) { return tri[i] == Label::Unknown; });
}

struct RankedMethod {
    std::string name;
    EvalReport report;
};

// Ascending by SAD, then MSE; full ties keep input order.
inline std::vector<RankedMethod> compare_methods(std::vector<RankedMethod> reports) {
    if (reports.empty()) throw ContractError("compare_methods: no reports");
    std::stable_sort(reports.begin(), reports.end(), [](const RankedMethod& a, const RankedMethod& b) {
        if (a.report.sad != b.report.sad) return a.report.sad < b.report.sad;
        return a.report.mse < b.report.mse;
    });
    return reports;
}

inline std::string format_key_values(const EvalReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "sad=%.10g mse=%.10g n=%zu", r.sad, r.mse, r.pixel_count);
    return buf;
}

inline std::string format_text(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "SAD  %.6f  (x255: %.3f)\nMSE  %.8f\npixels  %zu\n", r.sad,
                  r.sad_255(), r.mse, r.pixel_count);
    return buf;
}

inline std::string format_ranking(const std::vector<RankedMethod>& table) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4s %-20s %14s %14s %14s\n", "rank", "method", "SAD", "SADx255",
                  "MSE");
    out += buf;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table[i].report;
        std::snprintf(buf, sizeof buf, "%-4zu %-20s %14.6f %14.3f %14.8f\n", i + 1,
                      table[i].name.c_str(), r.sad, r.sad_255(), r.mse);
        out += buf;
    }
    return out;
}

}  // namespace propmat
