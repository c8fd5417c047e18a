#include "blurforge/annotate.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace blurforge {

const char* to_string(Proximity p) {
    switch (p) {
        case Proximity::Close: return "Close";
        case Proximity::Mid: return "Mid";
        case Proximity::Far: return "Far";
    }
    return "Close";
}

Proximity proximity_from_string(const std::string& s) {
    if (s == "Close") return Proximity::Close;
    if (s == "Mid") return Proximity::Mid;
    if (s == "Far") return Proximity::Far;
    throw InputError("unknown proximity label: " + s);
}

std::array<std::size_t, 3> proximity_bin_counts(const DepthFrame& d) {
    d.validate();
    std::size_t close = 0, mid = 0, far = 0;
    const std::int64_t n = static_cast<std::int64_t>(d.pixel_count());
#pragma omp parallel for schedule(static) reduction(+ : close, mid, far)
    for (std::int64_t i = 0; i < n; ++i) {
        const float v = d.depth[i];
        if (v == 0.0f) continue;  // no-return pixel
        if (v <= 1.5f)
            ++close;
        else if (v <= 4.5f)
            ++mid;
        else
            ++far;
    }
    return {close, mid, far};
}

Proximity proximity_label(const DepthFrame& d, bool tie_toward_near) {
    const auto counts = proximity_bin_counts(d);
    const std::size_t total = counts[0] + counts[1] + counts[2];
    if (total == 0) throw UnlabeledError("proximity_label: no valid depth pixels");
    if (tie_toward_near) {
        if (counts[0] >= counts[1] && counts[0] >= counts[2]) return Proximity::Close;
        if (counts[1] >= counts[2]) return Proximity::Mid;
        return Proximity::Far;
    }
    if (counts[2] >= counts[1] && counts[2] >= counts[0]) return Proximity::Far;
    if (counts[1] >= counts[0]) return Proximity::Mid;
    return Proximity::Close;
}

double mean_confidence(const DepthFrame& d) {
    d.validate();
    const std::int64_t n = static_cast<std::int64_t>(d.pixel_count());
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) acc += static_cast<double>(d.confidence[i]);
    return acc / static_cast<double>(n);
}

int confidence_bin_count(double bin_width) {
    if (!(bin_width > 0.0) || bin_width > 1.0) throw InputError("bin_width must be in (0,1]");
    const double k = 1.0 / bin_width;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > 1e-9) throw InputError("bin_width must divide 1 evenly");
    return static_cast<int>(rounded);
}

int confidence_bin(double mean_conf, double bin_width) {
    const int bins = confidence_bin_count(bin_width);
    if (mean_conf >= 1.0) return bins - 1;  // last bin is closed
    if (mean_conf < 0.0) return 0;
    return std::min(bins - 1, static_cast<int>(mean_conf / bin_width));
}

std::vector<std::size_t> confidence_histogram(const std::vector<DepthFrame>& frames,
                                              double bin_width) {
    const int bins = confidence_bin_count(bin_width);
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& f : frames) ++counts[confidence_bin(mean_confidence(f), bin_width)];
    return counts;
}

std::vector<std::vector<float>> normalize_depth(const std::vector<DepthFrame>& sequence) {
    if (sequence.empty()) throw InputError("normalize_depth: empty sequence");
    float max_depth = 0.0f;
    for (const auto& f : sequence) {
        f.validate();
        for (float v : f.depth) max_depth = std::max(max_depth, v);
    }
    if (!(max_depth > 0.0f))
        throw DegenerateDepthError("normalize_depth: sequence has no positive depth");

    std::vector<std::vector<float>> out;
    out.reserve(sequence.size());
    for (const auto& f : sequence) {
        std::vector<float> norm(f.depth.size());
        const std::int64_t n = static_cast<std::int64_t>(norm.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) norm[i] = f.depth[i] / max_depth;
        out.push_back(std::move(norm));
    }
    return out;
}

}  // namespace blurforge
