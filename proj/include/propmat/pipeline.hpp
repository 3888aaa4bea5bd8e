#pragma once

#include <chrono>
#include <exception>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "propmat/constraints.hpp"
#include "propmat/errors.hpp"
#include "propmat/features.hpp"
#include "propmat/knn.hpp"
#include "propmat/laplacian.hpp"
#include "propmat/preprocess.hpp"
#include "propmat/raster.hpp"
#include "propmat/solver.hpp"

namespace propmat {

enum class MattingMode { Augmented, CfBaseline };

inline const char* to_string(MattingMode m) noexcept {
    return m == MattingMode::Augmented ? "augmented" : "cf-baseline";
}

struct PipelineConfig {
    MattingMode mode = MattingMode::Augmented;
    bool preprocess = true;
    ExpansionParams expansion;
    TrainOptions train;
    BranchParams branch;
    LaplacianParams laplacian;
    double lambda = 100.0;
    SolverOptions solver;
    // Keeps the augmented stages but zeroes every constraint weight.
    bool force_zero_gamma = false;
    bool keep_system = false;

    void validate() const {
        expansion.validate();
        train.validate();
        branch.validate();
        laplacian.validate();
        if (!(lambda > 0.0)) throw ContractError("lambda must be positive");
    }
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    AlphaMatte matte;
    Eigen::VectorXd raw;  // solver output before clamping
    Trimap trimap;  // after preprocessing
    std::optional<TrainedClassifier> classifier;
    ConstraintField constraints;
    std::optional<MattingSystem> system;
    double relative_residual = 0.0;
    int iterations = 0;
    std::vector<StageTiming> timings;
};

// Runs `fn`, rethrowing any failure as a StageError carrying `name`.
template <typename Fn>
auto run_stage(const char* name, std::vector<StageTiming>* timings, Fn&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
        if (timings) {
            timings->push_back(
                {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
        }
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record();
        } else {
            auto result = fn();
            record();
            return result;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

inline PipelineResult run_pipeline(const RgbImage& img, const Trimap& input_trimap,
                                   const PipelineConfig& config) {
    run_stage("config", nullptr, [&] { config.validate(); });
    run_stage("input", nullptr, [&] { require_same_shape(img, input_trimap, "image/trimap"); });

    PipelineResult out;
    out.trimap = config.preprocess
                     ? run_stage("preprocess", &out.timings,
                                 [&] { return expand_trimap(img, input_trimap, config.expansion); })
                     : input_trimap;
    const Trimap& tri = out.trimap;

    if (config.mode == MattingMode::Augmented) {
        FeatureSpaces spaces =
            run_stage("features", &out.timings, [&] { return build_feature_spaces(img); });
        out.classifier = run_stage("train", &out.timings, [&] {
            return train(spaces.color_texture, spaces.with_coords, tri, config.train);
        });
        out.constraints = run_stage("constraints", &out.timings, [&] {
            const FeatureField& f =
                out.classifier->used_coords() ? spaces.with_coords : spaces.color_texture;
            return build_constraints(img, tri, *out.classifier, f, config.branch);
        });
        if (config.force_zero_gamma) out.constraints.force_zero_gamma();
    } else {
        out.constraints = ConstraintField::disabled(tri);
    }

    SparseMatrix laplacian =
        run_stage("laplacian", &out.timings, [&] { return build_laplacian(img, config.laplacian); });
    MattingSystem sys = run_stage("assemble", &out.timings, [&] {
        return assemble_system(laplacian, tri, out.constraints, config.lambda);
    });
    laplacian = SparseMatrix();
    SolveResult solved = run_stage("solve", &out.timings, [&] { return solve(sys, config.solver); });
    out.matte = std::move(solved.matte);
    out.raw = std::move(solved.raw);
    out.relative_residual = solved.relative_residual;
    out.iterations = solved.iterations;
    if (config.keep_system) out.system = std::move(sys);
    return out;
}

}  // namespace propmat
