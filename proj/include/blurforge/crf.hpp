#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blurforge/image.hpp"

namespace blurforge {

// Exposure-bracketed stack of a static, pre-aligned scene.
struct ExposureStack {
    std::vector<Image8> images;
    std::vector<double> exposure_times;  // seconds, strictly increasing

    void validate() const;
};

// Per-channel log-exposure response g(z) recovered by least squares, pinned
// to g(anchor_code) = 0 and made monotonic by isotonic projection.
struct CrfCurve {
    std::array<std::vector<double>, 3> g;  // 256 entries per channel
    int anchor_code = 128;

    void validate() const;
};

// Extended, normalized inverse response: strictly increasing lookup table per
// channel with range (0, 1], table[255] = 1. `slope` is the linear-extension
// slope in the normalized domain.
struct InverseCrf {
    std::array<std::array<double, 256>, 3> table{};
    std::array<double, 3> slope{};

    void validate() const;
};

// Encoded frame plus the count of input values that fell outside [0,1] and
// were clamped.
struct EncodeResult {
    Image8 image;
    std::uint64_t saturated = 0;
};

// Recovers g per channel from the stack by weighted least squares with a
// second-difference smoothness prior, hat weighting w(z) = z for z <= 127
// else 255 - z, and the anchor g(128) = 0. `sample_grid` is the number of
// uniformly spaced sample pixels per axis.
CrfCurve calibrate_crf(const ExposureStack& stack, double lambda_smooth = 100.0,
                       int sample_grid = 20);

// Applies the saturated-region linear extension to one channel of the
// unnormalized inverse curve `gamma` (gamma[p] for p <= 250, slope extension
// above) and reports the extension slope m = (gamma[251] - gamma[249]) / 2.
std::array<double, 256> extend_channel(const std::array<double, 256>& gamma, double& m_out);

// exp(g) -> linear extension -> divide by the extended value at code 255.
InverseCrf extend_linear(const CrfCurve& curve);

// Per-pixel, per-channel table lookup.
LinearImage linearize(const Image8& frame, const InverseCrf& inv);

// Nearest-table-entry search over the strictly monotonic table; ties break
// toward the lower code. Out-of-range values are clamped and counted.
EncodeResult encode(const LinearImage& frame, const InverseCrf& inv);

// Single-value variants used by the per-pixel loops and the tests.
double linearize_value(std::uint8_t code, const InverseCrf& inv, int channel);
std::uint8_t encode_value(double v, const InverseCrf& inv, int channel, std::uint64_t& saturated);

// crf.json round-trip: per-channel g[256], gamma_ext[256], m, plus anchor_code.
void save_crf_json(const std::string& path, const CrfCurve& curve, const InverseCrf& inv);
void load_crf_json(const std::string& path, CrfCurve& curve, InverseCrf& inv);

}  // namespace blurforge
