#pragma once

// Command-line front end: `matte`, `eval` and `batch`. Kept in the library so
// tests can drive it in-process.

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "propmat/codec.hpp"
#include "propmat/manifest.hpp"
#include "propmat/metrics.hpp"
#include "propmat/pipeline.hpp"

namespace propmat::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kPipelineError = 2,
    kPartialBatchFailure = 3,
};

struct RunOptions {
    PipelineConfig pipeline;
    std::string dump_system;
    std::string debug_constraints;
    bool verbose = false;
};

inline void add_pipeline_flags(CLI::App* cmd, RunOptions& opt) {
    PipelineConfig& p = opt.pipeline;
    const std::map<std::string, MattingMode> modes{{"augmented", MattingMode::Augmented},
                                                   {"cf-baseline", MattingMode::CfBaseline}};
    const std::map<std::string, FeaturePolicy> policies{
        {"auto", FeaturePolicy::Auto}, {"9d", FeaturePolicy::Force9}, {"11d", FeaturePolicy::Force11}};

    cmd->add_option("--mode", p.mode, "augmented (auto constraints) or cf-baseline")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
        ->option_text("augmented|cf-baseline [augmented]");
    cmd->add_option("--lambda", p.lambda, "known-pixel constraint weight (default is an implementation choice)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--epsilon-sim", p.branch.epsilon,
                    "residual threshold for local F/B sampling, RGB in [0,1] "
                    "(default is an implementation choice)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--sigma-sq", p.branch.sigma_sq, "classifier confidence scale")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--rho", p.branch.rho, "classifier sigmoid enlargement coefficient")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--pre-spatial", p.expansion.spatial_threshold,
                    "trimap expansion spatial threshold (pixels)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--pre-color", p.expansion.color_threshold,
                    "trimap expansion color threshold (0-255 RGB distance)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--no-preprocess", [&p](std::int64_t) { p.preprocess = false; },
                  "skip trimap expansion");
    cmd->add_option("--features", p.train.policy, "feature space: auto, 9d or 11d")
        ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case))
        ->option_text("auto|9d|11d [auto]");
    cmd->add_option("--accuracy-floor", p.train.accuracy_floor,
                    "9D cross-validation accuracy below which coordinates are added")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--k-max", p.train.k_max, "largest odd k tried by cross-validation")
        ->check(CLI::Range(1, 1001))
        ->capture_default_str();
    cmd->add_option("--cv-folds", p.train.cv_folds, "cross-validation folds")
        ->check(CLI::Range(2, 100))
        ->capture_default_str();
    cmd->add_flag("--verbose", opt.verbose, "print classifier scores, constraint counts and timings");
}

inline void print_diagnostics(const PipelineResult& r, std::ostream& err) {
    if (r.classifier) {
        const auto& clf = *r.classifier;
        err << "classifier: " << (clf.used_coords() ? "11D" : "9D") << ", k=" << clf.k()
            << ", cv_accuracy=" << clf.cv_accuracy()
            << ", samples=" << clf.samples().count(ClassLabel::Foreground) << " fg / "
            << clf.samples().count(ClassLabel::Background) << " bg\n";
        err << "  k   accuracy\n";
        for (const auto& s : clf.score_table()) {
            err << "  " << s.k << "   " << s.accuracy << "\n";
        }
    }
    std::size_t local = 0, classifier = 0, unknown = 0;
    for (std::size_t i = 0; i < r.constraints.pixel_count(); ++i) {
        switch (r.constraints.source[i]) {
            case ConstraintSource::LocalSampling: ++local; break;
            case ConstraintSource::Classifier: ++classifier; break;
            case ConstraintSource::Unconstrained: ++unknown; break;
            case ConstraintSource::Known: break;
        }
    }
    err << "constraints: " << local << " local-sampling, " << classifier << " classifier, "
        << unknown << " unconstrained\n";
    err << "solver: relative residual " << r.relative_residual << ", iterations " << r.iterations
        << "\n";
    for (const auto& t : r.timings) err << "  " << t.stage << ": " << t.seconds << " s\n";
}

// Decoded inputs with the failing stage named on error.
struct Inputs {
    RgbImage image;
    Trimap trimap;
};

inline Inputs load_inputs(const std::filesystem::path& image, const std::filesystem::path& trimap) {
    Inputs in;
    in.image = run_stage("decode-image", nullptr, [&] { return decode_image(read_file(image)); });
    in.trimap = run_stage("decode-trimap", nullptr, [&] { return decode_trimap(read_file(trimap)); });
    return in;
}

inline AlphaMatte load_matte(const std::filesystem::path& path, const char* stage) {
    return run_stage(stage, nullptr, [&] { return decode_matte(read_file(path)); });
}

inline void write_debug_constraints(const ConstraintField& field, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ConstraintDebugImages imgs = constraint_debug_images(field);
    write_file(dir / "a_init.png", imgs.a_init);
    write_file(dir / "confidence.png", imgs.confidence);
    write_file(dir / "source.png", imgs.source);
}

inline int cmd_matte(const std::string& image, const std::string& trimap, const std::string& output,
                     const std::optional<std::string>& truth, RunOptions opt, std::ostream& out,
                     std::ostream& err) {
    try {
        const Inputs in = load_inputs(image, trimap);
        std::optional<AlphaMatte> gt;
        if (truth) gt = load_matte(*truth, "decode-truth");
        opt.pipeline.keep_system = !opt.dump_system.empty();
        const PipelineResult r = run_pipeline(in.image, in.trimap, opt.pipeline);
        run_stage("encode", nullptr, [&] { write_file(output, encode_matte(r.matte)); });
        if (r.system) {
            run_stage("dump-system", nullptr, [&] { dump_system(*r.system, opt.dump_system); });
        }
        if (!opt.debug_constraints.empty()) {
            run_stage("debug-constraints", nullptr,
                      [&] { write_debug_constraints(r.constraints, opt.debug_constraints); });
        }
        if (opt.verbose) print_diagnostics(r, err);
        out << "wrote " << output << " (" << to_string(opt.pipeline.mode) << ")\n";
        if (gt) {
            const EvalReport rep = run_stage("evaluate", nullptr, [&] { return evaluate(r.matte, *gt); });
            out << format_text(rep) << format_key_values(rep) << "\n";
        }
        return kSuccess;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kPipelineError;
    }
}

inline int cmd_eval(const std::string& pred_path, const std::string& truth_path,
                    EvalRegion region, const std::string& trimap_path, std::ostream& out,
                    std::ostream& err) {
    try {
        const AlphaMatte pred = load_matte(pred_path, "decode-prediction");
        const AlphaMatte truth = load_matte(truth_path, "decode-truth");
        EvalReport rep;
        if (region == EvalRegion::Unknown) {
            const Trimap tri =
                run_stage("decode-trimap", nullptr, [&] { return decode_trimap(read_file(trimap_path)); });
            rep = run_stage("evaluate", nullptr, [&] { return evaluate_unknown(pred, truth, tri); });
        } else {
            rep = run_stage("evaluate", nullptr, [&] { return evaluate(pred, truth); });
        }
        out << format_text(rep) << format_key_values(rep) << "\n";
        return kSuccess;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kPipelineError;
    }
}

struct BatchRow {
    std::string name;
    std::optional<EvalReport> augmented;
    std::optional<EvalReport> baseline;
};

inline int cmd_batch(const std::string& manifest_path, const RunOptions& opt,
                     const std::string& out_dir, std::ostream& out, std::ostream& err) {
    BatchManifest manifest;
    try {
        manifest = load_manifest(manifest_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    std::vector<BatchRow> rows;
    std::size_t failures = 0;
    for (const ManifestEntry& entry : manifest.entries) {
        const std::string name = entry.image.stem().string();
        try {
            const Inputs in = load_inputs(entry.image, entry.trimap);
            std::optional<AlphaMatte> gt;
            if (entry.truth) gt = load_matte(*entry.truth, "decode-truth");

            BatchRow row{name, std::nullopt, std::nullopt};
            std::vector<MattingMode> modes{MattingMode::Augmented};
            if (gt) modes.push_back(MattingMode::CfBaseline);
            for (MattingMode mode : modes) {
                PipelineConfig cfg = opt.pipeline;
                cfg.mode = mode;
                const PipelineResult r = run_pipeline(in.image, in.trimap, cfg);
                if (opt.verbose) {
                    err << name << " [" << to_string(mode) << "]\n";
                    print_diagnostics(r, err);
                }
                if (!out_dir.empty()) {
                    const auto path = std::filesystem::path(out_dir) /
                                      (name + (mode == MattingMode::Augmented ? ".augmented.png" : ".cf.png"));
                    run_stage("encode", nullptr, [&] { write_file(path, encode_matte(r.matte)); });
                }
                if (gt) {
                    const EvalReport rep =
                        run_stage("evaluate", nullptr, [&] { return evaluate(r.matte, *gt); });
                    (mode == MattingMode::Augmented ? row.augmented : row.baseline) = rep;
                }
            }
            rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            ++failures;
            err << "entry at line " << entry.line << " (" << entry.image.string() << ") failed: "
                << e.what() << "\n";
        }
    }

    EvalReport total_aug, total_cf;
    std::size_t compared = 0;
    for (const BatchRow& row : rows) {
        out << "== " << row.name << "\n";
        if (!row.augmented || !row.baseline) {
            out << "(no ground truth; matte only)\n";
            continue;
        }
        out << format_ranking(compare_methods({{"augmented", *row.augmented}, {"cf-baseline", *row.baseline}}));
        out << "augmented " << format_key_values(*row.augmented) << "\n";
        out << "cf-baseline " << format_key_values(*row.baseline) << "\n";
        total_aug.sad += row.augmented->sad;
        total_aug.mse += row.augmented->mse;
        total_aug.pixel_count += row.augmented->pixel_count;
        total_cf.sad += row.baseline->sad;
        total_cf.mse += row.baseline->mse;
        total_cf.pixel_count += row.baseline->pixel_count;
        ++compared;
    }
    out << "processed " << rows.size() << " of " << manifest.entries.size() << " entries, "
        << compared << " comparison row(s), " << failures << " failure(s)\n";
    if (compared > 0) {
        // Aggregate: summed SAD, MSE averaged over images.
        total_aug.mse /= static_cast<double>(compared);
        total_cf.mse /= static_cast<double>(compared);
        out << "== summary\n"
            << format_ranking(compare_methods({{"augmented", total_aug}, {"cf-baseline", total_cf}}));
    }
    return failures > 0 ? kPartialBatchFailure : kSuccess;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Propagation alpha matting with automatically generated constraints", "propmat"};
    app.require_subcommand(1);

    RunOptions matte_opt;
    std::string image, trimap, output;
    std::string truth;
    auto* matte = app.add_subcommand("matte", "extract an alpha matte from an image and trimap");
    matte->add_option("image", image, "input RGB PNG")->required();
    matte->add_option("trimap", trimap, "trimap PNG (255 fg, 0 bg, other unknown)")->required();
    matte->add_option("-o,--output", output, "output matte PNG")->required();
    matte->add_option("--gt", truth, "ground-truth matte; prints SAD/MSE");
    add_pipeline_flags(matte, matte_opt);
    matte->add_option("--dump-system", matte_opt.dump_system,
                      "write the linear system as Matrix Market (PATH) and rhs (PATH.rhs)");
    matte->add_option("--debug-constraints", matte_opt.debug_constraints,
                      "directory for a_init/confidence/source debug images");

    std::string pred, eval_truth, eval_trimap;
    EvalRegion region = EvalRegion::All;
    auto* eval = app.add_subcommand("eval", "SAD/MSE between a predicted and a ground-truth matte");
    eval->add_option("pred", pred, "predicted matte PNG")->required();
    eval->add_option("truth", eval_truth, "ground-truth matte PNG")->required();
    eval->add_option("--region", region, "all pixels (default) or unknown-only")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, EvalRegion>{{"all", EvalRegion::All}, {"unknown", EvalRegion::Unknown}},
            CLI::ignore_case))
        ->option_text("all|unknown [all]");
    eval->add_option("--trimap", eval_trimap, "trimap defining the unknown region");

    RunOptions batch_opt;
    std::string manifest, out_dir;
    auto* batch = app.add_subcommand("batch", "run a manifest in augmented and cf-baseline modes");
    batch->add_option("manifest", manifest, "manifest file: <image> <trimap> [truth] per line")->required();
    batch->add_option("--out-dir", out_dir, "directory for output mattes");
    add_pipeline_flags(batch, batch_opt);

    try {
        app.parse(argc, argv);
        if (eval->parsed() && region == EvalRegion::Unknown && eval_trimap.empty()) {
            throw CLI::ValidationError("--region unknown requires --trimap");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    if (matte->parsed()) {
        return cmd_matte(image, trimap, output,
                         truth.empty() ? std::nullopt : std::optional<std::string>(truth), matte_opt,
                         out, err);
    }
    if (eval->parsed()) return cmd_eval(pred, eval_truth, region, eval_trimap, out, err);
    return cmd_batch(manifest, batch_opt, out_dir, out, err);
}

}  // namespace propmat::cli
