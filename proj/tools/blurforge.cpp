#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "blurforge/annotations.hpp"
#include "blurforge/crf.hpp"
#include "blurforge/metrics.hpp"
#include "blurforge/png_io.hpp"
#include "blurforge/synth.hpp"
#include "blurforge/threads.hpp"
#include "blurforge/verify.hpp"
#include "blurforge/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace blurforge;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Relative manifest paths resolve against the manifest's directory.
void resolve_paths(ManifestFile& mf, const fs::path& base) {
    auto fix = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
    };
    for (auto& clip : mf.clips) {
        for (auto& p : clip.frames) fix(p);
        for (auto& p : clip.depth) fix(p);
        for (auto& p : clip.confidence) fix(p);
        for (auto& p : clip.sharp) fix(p);
    }
}

std::vector<double> load_exposure_times(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read exposure times: " + path);
    std::vector<double> times;
    if (fs::path(path).extension() == ".json") {
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw InputError(path + ": " + e.what());
        }
        if (!j.is_array()) throw InputError(path + ": expected a JSON array of seconds");
        times = j.get<std::vector<double>>();
    } else {
        // CSV: comma- or newline-separated seconds.
        std::string cell;
        while (std::getline(f, cell)) {
            std::stringstream line(cell);
            std::string tok;
            while (std::getline(line, tok, ',')) {
                if (tok.find_first_not_of(" \t\r") == std::string::npos) continue;
                try {
                    times.push_back(std::stod(tok));
                } catch (...) {
                    throw InputError(path + ": bad exposure time '" + tok + "'");
                }
            }
        }
    }
    if (times.empty()) throw InputError(path + ": no exposure times found");
    return times;
}

std::string format_double(double v) {
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

json slice_to_json(const AttributeSlice& s) {
    json j;
    j["count"] = s.count;
    j["psnr_finite_count"] = s.psnr_finite_count;
    j["mean_psnr"] = s.psnr_finite_count ? json(s.mean_psnr) : json(nullptr);
    j["mean_ssim"] = s.count ? json(s.mean_ssim) : json(nullptr);
    return j;
}

int run_calibrate(const std::string& stack_dir, const std::string& times_path, double lambda,
                  int grid, const std::string& out_path) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(stack_dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.size() < 2) throw InputError("exposure stack needs at least 2 PNGs in " + stack_dir);

    ExposureStack stack;
    for (const auto& p : files) stack.images.push_back(read_png_rgb8(p.string()));
    stack.exposure_times = load_exposure_times(times_path);
    if (stack.exposure_times.size() != stack.images.size())
        throw InputError("found " + std::to_string(stack.images.size()) + " images but " +
                         std::to_string(stack.exposure_times.size()) + " exposure times");

    const CrfCurve curve = calibrate_crf(stack, lambda, grid);
    const InverseCrf inv = extend_linear(curve);
    save_crf_json(out_path, curve, inv);
    std::cout << "calibrated 3 channels from " << stack.images.size() << " exposures -> "
              << out_path << "\n";
    return 0;
}

int run_synthesize(const std::string& manifest_path, const std::string& crf_path,
                   const PipelineOptions& options) {
    ManifestFile mf = load_manifest(manifest_path);
    resolve_paths(mf, fs::path(manifest_path).parent_path());
    CrfCurve curve;
    InverseCrf inv;
    load_crf_json(crf_path, curve, inv);
    const PipelineSummary summary = run_pipeline(mf, inv, options);
    std::cout << "clips processed: " << summary.clips_processed
              << ", skipped: " << summary.clips_skipped
              << ", samples: " << summary.samples_written
              << ", clamped values: " << summary.saturated_values << "\n"
              << "manifest: " << summary.output_manifest_path << "\n";
    return 0;
}

int run_annotate(const std::string& manifest_path, const std::string& attrs_path,
                 const std::string& out_path, bool tie_toward_far) {
    ManifestFile mf = load_manifest(manifest_path);
    resolve_paths(mf, fs::path(manifest_path).parent_path());
    const auto attrs = load_clip_attributes(attrs_path);

    AnnotationSet set;
    for (const auto& [clip_id, a] : attrs) set.clips[clip_id] = a;

    for (const auto& clip : mf.clips) {
        for (const auto& p : clip.depth)
            if (!fs::exists(p)) throw InputError("missing depth file: " + p);
        for (const auto& p : clip.confidence)
            if (!fs::exists(p)) throw InputError("missing confidence file: " + p);
    }

    for (const auto& clip : mf.clips) {
        const int n = static_cast<int>(clip.depth.size());
        std::vector<FrameAnnotation> anns(n);
        std::string first_error;
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            try {
                const DepthFrame d = read_depth_frame(clip.depth[i], clip.confidence[i]);
                anns[i].proximity = proximity_label(d, !tie_toward_far);
                anns[i].mean_confidence = mean_confidence(d);
            } catch (const std::exception& e) {
#pragma omp critical
                if (first_error.empty())
                    first_error = clip.clip_id + "[" + std::to_string(i) + "]: " + e.what();
            }
        }
        if (!first_error.empty()) throw UnlabeledError(first_error);
        for (int i = 0; i < n; ++i) set.frames[{clip.clip_id, i}] = anns[i];
    }

    save_annotations(out_path, set);
    std::cout << "annotated " << set.frames.size() << " frames -> " << out_path << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string pred, pred_sub, gt, gt_sub, pred_b, pred_b_sub;
    std::string annotations_path, out_json, out_csv;
    double bin_width = 0.1;
    bool ssim_per_channel = false;
};

int run_evaluate(const EvaluateArgs& args) {
    const AnnotationSet annotations = load_annotations(args.annotations_path);
    const SsimMode mode = args.ssim_per_channel ? SsimMode::PerChannelMean : SsimMode::Luma;

    const auto run_a = score_directory_pair(args.pred, args.pred_sub, args.gt, args.gt_sub, mode);
    const SlicedReport sliced = aggregate_by_attribute(run_a, annotations);

    json report;
    report["schema"] = 1;
    report["tool_version"] = kVersion;
    report["config"] = {{"pred", args.pred},
                        {"pred_sub", args.pred_sub},
                        {"gt", args.gt},
                        {"gt_sub", args.gt_sub},
                        {"pred_b", args.pred_b},
                        {"pred_b_sub", args.pred_b_sub},
                        {"annotations", args.annotations_path},
                        {"bin_width", args.bin_width},
                        {"ssim_mode", args.ssim_per_channel ? "per_channel_mean" : "luma"}};

    report["frames"] = json::array();
    for (const auto& m : run_a) {
        json jf;
        jf["clip"] = m.clip;
        jf["index"] = m.index;
        jf["psnr"] = psnr_is_infinite(m.psnr) ? json(nullptr) : json(m.psnr);
        jf["psnr_infinite"] = psnr_is_infinite(m.psnr);
        jf["ssim"] = m.ssim;
        report["frames"].push_back(std::move(jf));
    }

    report["overall"] = slice_to_json(sliced.overall);
    report["psnr_infinite_count"] = sliced.psnr_infinite_count;
    report["slices"] = json::object();
    for (const auto& [cat, values] : sliced.slices) {
        json jc = json::object();
        for (const auto& [value, slice] : values) jc[value] = slice_to_json(slice);
        report["slices"][cat] = std::move(jc);
    }
    report["missing_annotations"] = json::array();
    for (const auto& [clip, index] : sliced.missing_annotations)
        report["missing_annotations"].push_back({{"clip", clip}, {"index", index}});

    // Histogram of the scored frames' mean confidences.
    {
        const int bins = confidence_bin_count(args.bin_width);
        std::vector<std::size_t> hist(bins, 0);
        for (const auto& m : run_a) {
            const auto it = annotations.frames.find({m.clip, m.index});
            if (it != annotations.frames.end())
                ++hist[confidence_bin(it->second.mean_confidence, args.bin_width)];
        }
        report["confidence_histogram"] = {{"bin_width", args.bin_width}, {"counts", hist}};
    }

    if (!args.pred_b.empty()) {
        const auto run_b =
            score_directory_pair(args.pred_b, args.pred_b_sub, args.gt, args.gt_sub, mode);
        ConfidenceMap confidences;
        for (const auto& m : run_a) {
            const auto it = annotations.frames.find({m.clip, m.index});
            if (it != annotations.frames.end())
                confidences[{m.clip, m.index}] = it->second.mean_confidence;
        }
        const ConfidenceGain gains = gain_by_confidence(run_a, run_b, confidences, args.bin_width);
        json jg;
        jg["bin_width"] = gains.bin_width;
        jg["count"] = gains.count;
        jg["gain"] = json::array();
        for (std::size_t i = 0; i < gains.gain.size(); ++i)
            jg["gain"].push_back(gains.count[i] ? json(gains.gain[i]) : json(nullptr));
        report["gain_by_confidence"] = std::move(jg);
    }

    std::ofstream jf(args.out_json, std::ios::binary);
    if (!jf) throw InputError("cannot write " + args.out_json);
    jf << report.dump(2) << '\n';

    if (!args.out_csv.empty()) {
        std::ofstream csv(args.out_csv, std::ios::binary);
        if (!csv) throw InputError("cannot write " + args.out_csv);
        csv << "clip,index,psnr,ssim,proximity,environment,motion,mean_confidence\n";
        for (const auto& m : run_a) {
            csv << m.clip << ',' << m.index << ',' << format_double(m.psnr) << ','
                << format_double(m.ssim) << ',';
            const auto it = annotations.frames.find({m.clip, m.index});
            if (it != annotations.frames.end()) csv << to_string(it->second.proximity);
            csv << ',';
            if (auto env = annotations.environment_of(m.clip)) csv << *env;
            csv << ',';
            if (auto mot = annotations.motion_of(m.clip)) csv << *mot;
            csv << ',';
            if (it != annotations.frames.end()) csv << format_double(it->second.mean_confidence);
            csv << '\n';
        }
    }

    std::cout << "scored " << run_a.size() << " frames -> " << args.out_json << "\n";
    return 0;
}

int run_verify_kernels(std::uint64_t seed, int cases, const std::string& out_path) {
    const KernelReport report = verify_kernels(seed, cases);
    save_kernel_report(out_path, report);
    for (const auto& c : report.checks) {
        std::printf("[%s] %-46s cases=%-5d max_dev=%.3e tol=%.1e\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.cases, c.max_deviation, c.tolerance);
    }
    std::cout << "seed " << seed << ", report -> " << out_path << "\n";
    if (!report.all_pass()) {
        std::cerr << "kernel verification failed\n";
        return kExitRuntime;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blurforge: blur-synthesis dataset toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: BLURFORGE_THREADS or hardware)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "calibrate a response curve from an exposure stack");
    std::string cal_stack, cal_times, cal_out;
    double cal_lambda = 100.0;
    int cal_grid = 20;
    cal->add_option("--stack", cal_stack, "directory of stack PNGs (sorted by name)")->required();
    cal->add_option("--times", cal_times, "exposure times (csv or json array, seconds)")->required();
    cal->add_option("--lambda", cal_lambda, "smoothness weight");
    cal->add_option("--grid", cal_grid, "sample grid size per axis");
    cal->add_option("--out", cal_out, "output crf.json")->required();

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "synthesize blur/sharp/depth samples");
    std::string syn_manifest, syn_crf, syn_out, syn_interp_dir;
    PipelineOptions syn_options;
    syn->add_option("--manifest", syn_manifest, "input clips.json")->required();
    syn->add_option("--crf", syn_crf, "calibrated crf.json")->required();
    syn->add_option("--interp-factor", syn_options.cfg.interp_factor, "temporal upsampling multiple");
    syn->add_option("--window", syn_options.cfg.window, "averaging window N");
    syn->add_option("--interpolated-dir", syn_interp_dir,
                    "externally interpolated encoded frames, <dir>/<clip>/%08d.png");
    syn->add_option("--out", syn_out, "output directory")->required();

    // annotate
    auto* ann = app.add_subcommand("annotate", "compute per-frame attributes and confidence");
    std::string ann_manifest, ann_attrs, ann_out;
    bool ann_tie_far = false;
    ann->add_option("--manifest", ann_manifest, "clips.json")->required();
    ann->add_option("--attrs", ann_attrs, "clip_attrs.json")->required();
    ann->add_option("--out", ann_out, "output annotations.json")->required();
    ann->add_flag("--tie-toward-far", ann_tie_far, "break proximity ties toward the farther bin");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "PSNR/SSIM scoring and sliced reports");
    EvaluateArgs eargs;
    eva->add_option("--pred", eargs.pred, "prediction root (<root>/<clip>/*.png)")->required();
    eva->add_option("--pred-sub", eargs.pred_sub, "subdirectory inside each prediction clip");
    eva->add_option("--gt", eargs.gt, "ground-truth root")->required();
    eva->add_option("--gt-sub", eargs.gt_sub, "subdirectory inside each ground-truth clip");
    eva->add_option("--pred-b", eargs.pred_b, "second run for confidence-binned gains");
    eva->add_option("--pred-b-sub", eargs.pred_b_sub, "subdirectory inside each second-run clip");
    eva->add_option("--annotations", eargs.annotations_path, "annotations.json")->required();
    eva->add_option("--out", eargs.out_json, "output report.json")->required();
    eva->add_option("--csv", eargs.out_csv, "output per-frame csv");
    eva->add_option("--bin-width", eargs.bin_width, "confidence bin width");
    eva->add_flag("--ssim-per-channel", eargs.ssim_per_channel,
                  "average per-channel SSIM instead of luma SSIM");

    // verify-kernels
    auto* ver = app.add_subcommand("verify-kernels", "run the randomized kernel oracle suite");
    std::uint64_t ver_seed = 0;
    int ver_cases = 100;
    std::string ver_out = "kernel_report.json";
    ver->add_option("--seed", ver_seed, "rng seed (echoed to the report)");
    ver->add_option("--cases", ver_cases, "randomized cases per check");
    ver->add_option("--out", ver_out, "output kernel_report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return kExitValidation;
    }

    configure_threads(threads);

    try {
        if (cal->parsed()) return run_calibrate(cal_stack, cal_times, cal_lambda, cal_grid, cal_out);
        if (syn->parsed()) {
            syn_options.out_dir = syn_out;
            if (!syn_interp_dir.empty()) syn_options.interpolated_dir = syn_interp_dir;
            return run_synthesize(syn_manifest, syn_crf, syn_options);
        }
        if (ann->parsed()) return run_annotate(ann_manifest, ann_attrs, ann_out, ann_tie_far);
        if (eva->parsed()) return run_evaluate(eargs);
        if (ver->parsed()) return run_verify_kernels(ver_seed, ver_cases, ver_out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
