#include "blurforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <iostream>

#include "blurforge/png_io.hpp"

namespace fs = std::filesystem;

namespace blurforge {

namespace {

inline double crossfade_value(double a, double b, double alpha) {
    return (1.0 - alpha) * a + alpha * b;
}

std::string frame_name(long long index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08lld.png", index);
    return buf;
}

}  // namespace

std::vector<LinearImage> interpolate_crossfade(const LinearImage& a, const LinearImage& b, int k) {
    if (!a.same_shape(b)) throw InputError("interpolate_crossfade: dimension mismatch");
    if (k < 1) throw InputError("interpolate_crossfade: k must be >= 1");
    std::vector<LinearImage> out;
    out.reserve(k);
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    for (int i = 1; i <= k; ++i) {
        const double alpha = static_cast<double>(i) / static_cast<double>(k + 1);
        LinearImage f(a.height(), a.width());
        const double* pa = a.data();
        const double* pb = b.data();
        double* pf = f.data();
#pragma omp parallel for schedule(static)
        for (std::int64_t j = 0; j < n; ++j) pf[j] = crossfade_value(pa[j], pb[j], alpha);
        out.push_back(std::move(f));
    }
    return out;
}

LinearImage average_window(const std::vector<LinearImage>& window) {
    if (window.empty()) throw InputError("average_window: empty window");
    for (const auto& f : window)
        if (!f.same_shape(window[0])) throw InputError("average_window: dimension mismatch");
    const std::int64_t n = static_cast<std::int64_t>(window[0].size());
    const double inv_n = 1.0 / static_cast<double>(window.size());
    LinearImage out(window[0].height(), window[0].width());
    double* po = out.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (const auto& f : window) acc += f.data()[j];
        po[j] = acc * inv_n;
    }
    return out;
}

EncodeResult synthesize_blur(const std::vector<LinearImage>& window, const InverseCrf& crf) {
    return encode(average_window(window), crf);
}

long long groundtruth_index(long long m, int window) {
    if (m < 0 || window < 1) throw InputError("groundtruth_index: m >= 0 and window >= 1 required");
    return m * window + window / 2;
}

long long nearest_original_index(long long interp_index, int interp_factor) {
    const long long q = interp_index / interp_factor;
    const long long r = interp_index % interp_factor;
    if (2 * r > interp_factor) return q + 1;
    return q;  // ties toward the earlier frame
}

long long interpolated_length(long long originals, int interp_factor) {
    if (originals < 1) return 0;
    return (originals - 1) * static_cast<long long>(interp_factor) + 1;
}

namespace {

// Accumulates the linear average of interpolated samples [m*N, (m+1)*N) and
// hands back the window mean. `fetch(q)` must return the linearized original
// frame q and stay valid until the call returns.
template <typename Fetch>
LinearImage window_mean_crossfade(long long m, const SynthConfig& cfg, int height, int width,
                                  Fetch&& fetch) {
    const int N = cfg.window;
    const int f = cfg.interp_factor;
    struct Term {
        const double* a;
        const double* b;  // nullptr when the sample falls on an original frame
        double alpha;
    };
    std::vector<Term> terms;
    terms.reserve(N);
    for (long long t = m * N; t < (m + 1) * N; ++t) {
        const long long q = t / f;
        const long long r = t % f;
        if (r == 0) {
            terms.push_back({fetch(q).data(), nullptr, 0.0});
        } else {
            const double alpha = static_cast<double>(r) / static_cast<double>(f);
            terms.push_back({fetch(q).data(), fetch(q + 1).data(), alpha});
        }
    }
    LinearImage out(height, width);
    double* po = out.data();
    const std::int64_t n = static_cast<std::int64_t>(out.size());
    const double inv_n = 1.0 / static_cast<double>(N);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (const Term& term : terms)
            acc += term.b ? crossfade_value(term.a[j], term.b[j], term.alpha) : term.a[j];
        po[j] = acc * inv_n;
    }
    return out;
}

}  // namespace

std::vector<SynthSample> synthesize_clip(const std::vector<Image8>& originals,
                                         const SynthConfig& cfg, const InverseCrf& crf,
                                         const std::vector<Image8>* external_interpolated) {
    cfg.validate();
    if (originals.size() < 2) throw InputError("synthesize_clip: at least 2 original frames required");
    for (const auto& img : originals)
        if (!img.same_shape(originals[0])) throw InputError("synthesize_clip: frame dimensions differ");

    const long long interp_len = interpolated_length(static_cast<long long>(originals.size()),
                                                     cfg.interp_factor);
    if (external_interpolated) {
        if (static_cast<long long>(external_interpolated->size()) != interp_len)
            throw InputError("synthesize_clip: external interpolation must supply " +
                             std::to_string(interp_len) + " frames");
        for (const auto& img : *external_interpolated)
            if (!img.same_shape(originals[0]))
                throw InputError("synthesize_clip: interpolated frame dimensions differ");
    }

    const long long n_out = interp_len / cfg.window;
    std::vector<SynthSample> samples;
    samples.reserve(n_out);

    if (external_interpolated) {
        for (long long m = 0; m < n_out; ++m) {
            std::vector<LinearImage> window;
            window.reserve(cfg.window);
            for (long long t = m * cfg.window; t < (m + 1) * cfg.window; ++t)
                window.push_back(linearize((*external_interpolated)[t], crf));
            EncodeResult enc = synthesize_blur(window, crf);
            const long long mid = groundtruth_index(m, cfg.window);
            samples.push_back({std::move(enc.image), mid,
                               nearest_original_index(mid, cfg.interp_factor), enc.saturated});
        }
        return samples;
    }

    std::vector<LinearImage> linear(originals.size());
    for (std::size_t i = 0; i < originals.size(); ++i) linear[i] = linearize(originals[i], crf);

    for (long long m = 0; m < n_out; ++m) {
        LinearImage mean = window_mean_crossfade(
            m, cfg, originals[0].height(), originals[0].width(),
            [&](long long q) -> const LinearImage& { return linear[static_cast<std::size_t>(q)]; });
        EncodeResult enc = encode(mean, crf);
        const long long mid = groundtruth_index(m, cfg.window);
        samples.push_back({std::move(enc.image), mid,
                           nearest_original_index(mid, cfg.interp_factor), enc.saturated});
    }
    return samples;
}

PipelineSummary run_pipeline(const ManifestFile& manifest, const InverseCrf& crf,
                             const PipelineOptions& options) {
    options.cfg.validate();
    crf.validate();
    if (options.out_dir.empty()) throw InputError("run_pipeline: output directory required");

    // Validate every referenced path before any work begins.
    for (const auto& clip : manifest.clips) {
        clip.validate();
        for (const auto& p : clip.frames)
            if (!fs::exists(p)) throw InputError("missing frame file: " + p);
        for (const auto& p : clip.depth)
            if (!fs::exists(p)) throw InputError("missing depth file: " + p);
        for (const auto& p : clip.confidence)
            if (!fs::exists(p)) throw InputError("missing confidence file: " + p);
        if (options.interpolated_dir) {
            const long long want = interpolated_length(
                static_cast<long long>(clip.frames.size()), options.cfg.interp_factor);
            for (long long t = 0; t < want; ++t) {
                const fs::path p = fs::path(*options.interpolated_dir) / clip.clip_id / frame_name(t);
                if (!fs::exists(p)) throw InputError("missing interpolated frame: " + p.string());
            }
        }
    }

    fs::create_directories(options.out_dir);

    PipelineSummary summary;
    ManifestFile out_manifest;

    const int N = options.cfg.window;
    const int f = options.cfg.interp_factor;

    for (const auto& clip : manifest.clips) {
        const long long k_orig = static_cast<long long>(clip.frames.size());
        const long long interp_len = interpolated_length(k_orig, f);
        const long long n_out = interp_len / N;
        if (n_out == 0) {
            std::cerr << "warning: clip '" << clip.clip_id << "' has " << k_orig
                      << " frames (" << interp_len << " interpolated), shorter than one window of "
                      << N << "; skipped\n";
            ++summary.clips_skipped;
            continue;
        }

        const fs::path clip_dir = fs::path(options.out_dir) / clip.clip_id;
        for (const char* sub : {"blur", "gt", "depth", "conf"})
            fs::create_directories(clip_dir / sub);

        ClipManifest out_clip;
        out_clip.clip_id = clip.clip_id;
        out_clip.fps = clip.fps * f / N;
        out_clip.split = clip.split;

        // Sliding cache of linearized originals; windows advance monotonically.
        std::deque<LinearImage> cache;
        long long cache_lo = 0;
        auto fetch = [&](long long q) -> const LinearImage& {
            while (cache_lo + static_cast<long long>(cache.size()) <= q) {
                const long long next = cache_lo + static_cast<long long>(cache.size());
                cache.push_back(linearize(read_png_rgb8(clip.frames[next]), crf));
            }
            return cache[static_cast<std::size_t>(q - cache_lo)];
        };

        int height = 0, width = 0;
        for (long long m = 0; m < n_out; ++m) {
            const long long q_min = (m * N) / f;
            while (cache_lo < q_min && !cache.empty()) {
                cache.pop_front();
                ++cache_lo;
            }
            cache_lo = std::max(cache_lo, q_min);

            LinearImage mean;
            std::uint64_t saturated = 0;
            Image8 blur;
            if (options.interpolated_dir) {
                std::vector<LinearImage> window;
                window.reserve(N);
                for (long long t = m * N; t < (m + 1) * N; ++t) {
                    const fs::path p =
                        fs::path(*options.interpolated_dir) / clip.clip_id / frame_name(t);
                    window.push_back(linearize(read_png_rgb8(p.string()), crf));
                }
                EncodeResult enc = synthesize_blur(window, crf);
                blur = std::move(enc.image);
                saturated = enc.saturated;
            } else {
                if (height == 0) {
                    const LinearImage& first = fetch(q_min);
                    height = first.height();
                    width = first.width();
                }
                mean = window_mean_crossfade(m, options.cfg, height, width, fetch);
                EncodeResult enc = encode(mean, crf);
                blur = std::move(enc.image);
                saturated = enc.saturated;
            }

            const long long mid = groundtruth_index(m, N);
            const long long gt_orig = nearest_original_index(mid, f);
            if (gt_orig >= k_orig)
                throw InputError("ground-truth index out of range for clip " + clip.clip_id);

            const std::string name = frame_name(m);
            write_png_rgb8((clip_dir / "blur" / name).string(), blur);
            // Sharp/depth/confidence pass through untouched from the original
            // timeline.
            fs::copy_file(clip.frames[gt_orig], clip_dir / "gt" / name,
                          fs::copy_options::overwrite_existing);
            fs::copy_file(clip.depth[gt_orig], clip_dir / "depth" / name,
                          fs::copy_options::overwrite_existing);
            fs::copy_file(clip.confidence[gt_orig], clip_dir / "conf" / name,
                          fs::copy_options::overwrite_existing);

            const std::string rel = clip.clip_id + "/";
            out_clip.frames.push_back(rel + "blur/" + name);
            out_clip.sharp.push_back(rel + "gt/" + name);
            out_clip.depth.push_back(rel + "depth/" + name);
            out_clip.confidence.push_back(rel + "conf/" + name);
            out_clip.source_index.push_back(mid);
            out_clip.gt_original_index.push_back(gt_orig);
            ++summary.samples_written;
            summary.saturated_values += saturated;
        }

        out_manifest.clips.push_back(std::move(out_clip));
        ++summary.clips_processed;
    }

    summary.output_manifest_path = (fs::path(options.out_dir) / "manifest.json").string();
    save_manifest(summary.output_manifest_path, out_manifest);
    return summary;
}

}  // namespace blurforge
