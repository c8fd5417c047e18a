#include "blurforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "blurforge/png_io.hpp"

namespace fs = std::filesystem;

namespace blurforge {

double psnr(const Image8& a, const Image8& b, double peak) {
    if (!a.same_shape(b)) throw InputError("psnr: dimension mismatch");
    const std::uint8_t* pa = a.data();
    const std::uint8_t* pb = b.data();
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    // Squared differences of 8-bit codes are exact in 64-bit integers.
    std::uint64_t sum = 0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t d = static_cast<std::int64_t>(pa[i]) - static_cast<std::int64_t>(pb[i]);
        sum += static_cast<std::uint64_t>(d * d);
    }
    if (sum == 0) return std::numeric_limits<double>::infinity();
    const double mse = static_cast<double>(sum) / static_cast<double>(n);
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWin = 11;
constexpr int kRadius = kWin / 2;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

// 1-D Gaussian taps normalized to sum 1; the outer product reproduces the
// renormalized 11x11 window.
const std::array<double, kWin>& gaussian_taps() {
    static const std::array<double, kWin> taps = [] {
        std::array<double, kWin> t{};
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - kRadius;
            t[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
            sum += t[i];
        }
        for (double& v : t) v /= sum;
        return t;
    }();
    return taps;
}

// Separable valid-region filter: horizontal then vertical pass.
void filter_valid(const std::vector<double>& src, int h, int w, std::vector<double>& tmp,
                  std::vector<double>& dst) {
    const auto& taps = gaussian_taps();
    const int ow = w - kWin + 1;
    const int oh = h - kWin + 1;
    tmp.assign(static_cast<std::size_t>(h) * ow, 0.0);
    dst.assign(static_cast<std::size_t>(oh) * ow, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * w;
        double* out = tmp.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += taps[k] * row[x + k];
            out[x] = acc;
        }
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        double* out = dst.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += taps[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
            out[x] = acc;
        }
    }
}

double ssim_plane(const std::vector<double>& px, const std::vector<double>& py, int h, int w) {
    const std::size_t n = static_cast<std::size_t>(h) * w;
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = px[i] * px[i];
        yy[i] = py[i] * py[i];
        xy[i] = px[i] * py[i];
    }
    std::vector<double> tmp, mu_x, mu_y, e_xx, e_yy, e_xy;
    filter_valid(px, h, w, tmp, mu_x);
    filter_valid(py, h, w, tmp, mu_y);
    filter_valid(xx, h, w, tmp, e_xx);
    filter_valid(yy, h, w, tmp, e_yy);
    filter_valid(xy, h, w, tmp, e_xy);

    const int oh = h - kWin + 1;
    const int ow = w - kWin + 1;
    std::vector<double> row_sum(oh, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        double acc = 0.0;
        for (int x = 0; x < ow; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * ow + x;
            const double var_x = e_xx[i] - mu_x[i] * mu_x[i];
            const double var_y = e_yy[i] - mu_y[i] * mu_y[i];
            const double cov = e_xy[i] - mu_x[i] * mu_y[i];
            const double num = (2.0 * mu_x[i] * mu_y[i] + kC1) * (2.0 * cov + kC2);
            const double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kC1) * (var_x + var_y + kC2);
            acc += num / den;
        }
        row_sum[y] = acc;
    }
    double total = 0.0;
    for (int y = 0; y < oh; ++y) total += row_sum[y];
    return total / (static_cast<double>(oh) * ow);
}

std::vector<double> luma_plane(const Image8& img) {
    const std::size_t n = img.pixel_count();
    std::vector<double> out(n);
    const std::uint8_t* p = img.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[i] = 0.299 * p[3 * i] + 0.587 * p[3 * i + 1] + 0.114 * p[3 * i + 2];
    return out;
}

std::vector<double> channel_plane(const Image8& img, int c) {
    const std::size_t n = img.pixel_count();
    std::vector<double> out(n);
    const std::uint8_t* p = img.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(p[3 * i + c]);
    return out;
}

}  // namespace

double ssim(const Image8& a, const Image8& b, SsimMode mode) {
    if (!a.same_shape(b)) throw InputError("ssim: dimension mismatch");
    if (a.height() < kWin || a.width() < kWin)
        throw InputError("ssim: image smaller than the 11x11 window");
    if (mode == SsimMode::Luma) {
        return ssim_plane(luma_plane(a), luma_plane(b), a.height(), a.width());
    }
    double acc = 0.0;
    for (int c = 0; c < 3; ++c)
        acc += ssim_plane(channel_plane(a, c), channel_plane(b, c), a.height(), a.width());
    return acc / 3.0;
}

SlicedReport aggregate_by_attribute(const std::vector<FramePairMetrics>& metrics,
                                    const AnnotationSet& annotations) {
    std::vector<FramePairMetrics> sorted = metrics;
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
        return std::tie(l.clip, l.index) < std::tie(r.clip, r.index);
    });

    struct Acc {
        std::size_t count = 0;
        std::size_t finite = 0;
        double psnr_sum = 0.0;
        double ssim_sum = 0.0;
        void add(const FramePairMetrics& m) {
            ++count;
            ssim_sum += m.ssim;
            if (!psnr_is_infinite(m.psnr)) {
                ++finite;
                psnr_sum += m.psnr;
            }
        }
        AttributeSlice slice() const {
            AttributeSlice s;
            s.count = count;
            s.psnr_finite_count = finite;
            s.mean_psnr = finite ? psnr_sum / static_cast<double>(finite)
                                 : std::numeric_limits<double>::quiet_NaN();
            s.mean_ssim = count ? ssim_sum / static_cast<double>(count)
                                : std::numeric_limits<double>::quiet_NaN();
            return s;
        }
    };

    Acc overall;
    std::map<std::string, std::map<std::string, Acc>> sliced;
    SlicedReport report;

    for (const auto& m : sorted) {
        overall.add(m);
        if (psnr_is_infinite(m.psnr)) ++report.psnr_infinite_count;

        const FrameKey key{m.clip, m.index};
        const auto it = annotations.frames.find(key);
        if (it == annotations.frames.end()) {
            report.missing_annotations.push_back(key);
            continue;
        }
        sliced["proximity"][to_string(it->second.proximity)].add(m);
        if (auto env = annotations.environment_of(m.clip)) sliced["environment"][*env].add(m);
        if (auto mot = annotations.motion_of(m.clip)) sliced["motion"][*mot].add(m);
    }

    report.overall = overall.slice();
    for (const auto& [cat, values] : sliced)
        for (const auto& [value, acc] : values) report.slices[cat][value] = acc.slice();
    return report;
}

ConfidenceGain gain_by_confidence(const std::vector<FramePairMetrics>& run_a,
                                  const std::vector<FramePairMetrics>& run_b,
                                  const ConfidenceMap& confidences, double bin_width) {
    const int bins = confidence_bin_count(bin_width);

    std::map<FrameKey, double> psnr_a, psnr_b;
    for (const auto& m : run_a) psnr_a[{m.clip, m.index}] = m.psnr;
    for (const auto& m : run_b) psnr_b[{m.clip, m.index}] = m.psnr;

    std::ostringstream missing;
    int missing_count = 0;
    for (const auto& [key, _] : psnr_a)
        if (!psnr_b.count(key)) {
            missing << " b-run missing (" << key.first << "," << key.second << ")";
            ++missing_count;
        }
    for (const auto& [key, _] : psnr_b)
        if (!psnr_a.count(key)) {
            missing << " a-run missing (" << key.first << "," << key.second << ")";
            ++missing_count;
        }
    if (missing_count > 0)
        throw InputError("gain_by_confidence: runs cover different frames:" + missing.str());

    std::vector<double> sum(bins, 0.0);
    ConfidenceGain out;
    out.bin_width = bin_width;
    out.count.assign(bins, 0);
    for (const auto& [key, pa] : psnr_a) {
        const double pb = psnr_b.at(key);
        if (psnr_is_infinite(pa) || psnr_is_infinite(pb)) continue;  // excluded pairwise
        const auto conf_it = confidences.find(key);
        if (conf_it == confidences.end())
            throw InputError("gain_by_confidence: no confidence for (" + key.first + "," +
                             std::to_string(key.second) + ")");
        const int bin = confidence_bin(conf_it->second, bin_width);
        sum[bin] += pa - pb;
        ++out.count[bin];
    }
    out.gain.assign(bins, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < bins; ++i)
        if (out.count[i] > 0) out.gain[i] = sum[i] / static_cast<double>(out.count[i]);
    return out;
}

std::vector<FramePairMetrics> score_directory_pair(const std::string& pred_root,
                                                   const std::string& pred_sub,
                                                   const std::string& gt_root,
                                                   const std::string& gt_sub, SsimMode mode) {
    if (!fs::is_directory(gt_root)) throw InputError("not a directory: " + gt_root);
    if (!fs::is_directory(pred_root)) throw InputError("not a directory: " + pred_root);

    struct Job {
        std::string clip;
        int index;
        fs::path pred;
        fs::path gt;
    };
    std::vector<Job> jobs;

    std::vector<std::string> clips;
    for (const auto& e : fs::directory_iterator(gt_root))
        if (e.is_directory()) clips.push_back(e.path().filename().string());
    std::sort(clips.begin(), clips.end());
    if (clips.empty()) throw InputError("no clip directories under " + gt_root);

    for (const auto& clip : clips) {
        fs::path gt_dir = fs::path(gt_root) / clip;
        if (!gt_sub.empty()) gt_dir /= gt_sub;
        fs::path pred_dir = fs::path(pred_root) / clip;
        if (!pred_sub.empty()) pred_dir /= pred_sub;
        if (!fs::is_directory(gt_dir)) throw InputError("not a directory: " + gt_dir.string());

        std::vector<fs::path> pngs;
        for (const auto& e : fs::directory_iterator(gt_dir))
            if (e.is_regular_file() && e.path().extension() == ".png") pngs.push_back(e.path());
        std::sort(pngs.begin(), pngs.end());

        for (const auto& gt_path : pngs) {
            const std::string stem = gt_path.stem().string();
            int index = 0;
            try {
                std::size_t pos = 0;
                index = std::stoi(stem, &pos);
                if (pos != stem.size()) throw std::invalid_argument(stem);
            } catch (...) {
                throw InputError("frame filename is not a numeric index: " + gt_path.string());
            }
            const fs::path pred_path = pred_dir / gt_path.filename();
            if (!fs::exists(pred_path))
                throw InputError("prediction missing for " + gt_path.string() + " (expected " +
                                 pred_path.string() + ")");
            jobs.push_back({clip, index, pred_path, gt_path});
        }
    }

    std::vector<FramePairMetrics> out(jobs.size());
    std::string first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(jobs.size()); ++i) {
        try {
            const Image8 pred = read_png_rgb8(jobs[i].pred.string());
            const Image8 gt = read_png_rgb8(jobs[i].gt.string());
            out[i] = {jobs[i].clip, jobs[i].index, psnr(pred, gt), ssim(pred, gt, mode)};
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw InputError(first_error);
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
        return std::tie(l.clip, l.index) < std::tie(r.clip, r.index);
    });
    return out;
}

}  // namespace blurforge
