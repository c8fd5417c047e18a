#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "blurforge/annotations.hpp"
#include "blurforge/image.hpp"

namespace blurforge {

// 10*log10(peak^2 / MSE) with the MSE taken over all channels in double
// precision. Identical frames return the +inf sentinel.
double psnr(const Image8& a, const Image8& b, double peak = 255.0);

inline bool psnr_is_infinite(double v) { return v == std::numeric_limits<double>::infinity(); }

enum class SsimMode { Luma, PerChannelMean };

// Single-scale SSIM: Rec.601 luma by default, Gaussian 11x11 sigma 1.5 window
// renormalized to sum 1, C1=(0.01*255)^2, C2=(0.03*255)^2, mean over valid
// window positions only.
double ssim(const Image8& a, const Image8& b, SsimMode mode = SsimMode::Luma);

struct FramePairMetrics {
    std::string clip;
    int index = 0;
    double psnr = 0.0;  // +inf sentinel possible
    double ssim = 0.0;
};

struct AttributeSlice {
    std::size_t count = 0;             // frames carrying this attribute value
    std::size_t psnr_finite_count = 0; // frames contributing to mean_psnr
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
};

struct SlicedReport {
    AttributeSlice overall;
    std::size_t psnr_infinite_count = 0;
    // category -> value -> slice, e.g. slices["proximity"]["Close"]
    std::map<std::string, std::map<std::string, AttributeSlice>> slices;
    std::vector<FrameKey> missing_annotations;  // scored but unannotated frames
};

// Arithmetic means per attribute value and overall. Frames without
// annotations are listed and excluded from the slices (but kept in overall).
SlicedReport aggregate_by_attribute(const std::vector<FramePairMetrics>& metrics,
                                    const AnnotationSet& annotations);

using ConfidenceMap = std::map<FrameKey, double>;

struct ConfidenceGain {
    double bin_width = 0.1;
    std::vector<double> gain;        // mean (psnr_a - psnr_b) per bin; NaN when empty
    std::vector<std::size_t> count;  // pairs per bin
};

// Per-confidence-bin mean PSNR difference between two runs covering the same
// (clip, index) set. Infinite sentinels are excluded pairwise.
ConfidenceGain gain_by_confidence(const std::vector<FramePairMetrics>& run_a,
                                  const std::vector<FramePairMetrics>& run_b,
                                  const ConfidenceMap& confidences, double bin_width = 0.1);

// Scores every (clip, frame) PNG pair found under gt_root/<clip>/<sub>
// against pred_root/<clip>/<sub>; results sorted by (clip, index).
std::vector<FramePairMetrics> score_directory_pair(const std::string& pred_root,
                                                   const std::string& pred_sub,
                                                   const std::string& gt_root,
                                                   const std::string& gt_sub,
                                                   SsimMode mode = SsimMode::Luma);

}  // namespace blurforge
