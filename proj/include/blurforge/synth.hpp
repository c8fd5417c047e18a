#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blurforge/crf.hpp"
#include "blurforge/image.hpp"
#include "blurforge/manifest.hpp"

namespace blurforge {

struct SynthConfig {
    int interp_factor = 8;  // temporal upsampling multiple
    int window = 32;        // N, averaging window in interpolated frames

    void validate() const {
        if (interp_factor < 1) throw InputError("interp_factor must be >= 1");
        if (window < 1) throw InputError("window must be >= 1");
    }
};

// Cross-fade baseline for the pluggable interpolation stage: the i-th
// intermediate is (1 - i/(k+1))*a + (i/(k+1))*b, i = 1..k, in linear space.
std::vector<LinearImage> interpolate_crossfade(const LinearImage& a, const LinearImage& b, int k);

// Average of the window in linear space (double accumulation), re-encoded
// through the inverse-CRF table.
EncodeResult synthesize_blur(const std::vector<LinearImage>& window, const InverseCrf& crf);

// Linear average only; synthesize_blur = encode(average_window(...)).
LinearImage average_window(const std::vector<LinearImage>& window);

// Sharp ground-truth sample for output index m: m*N + floor(N/2) on the
// averaged timeline.
long long groundtruth_index(long long m, int window);

// Maps an interpolated-timeline index to the nearest original frame index;
// ties break toward the earlier frame.
long long nearest_original_index(long long interp_index, int interp_factor);

// Number of frames on the interpolated timeline for `originals` original
// frames at the given factor.
long long interpolated_length(long long originals, int interp_factor);

// One synthesized sample of an in-memory clip.
struct SynthSample {
    Image8 blur;
    long long source_index = 0;       // interpolated middle sample, m*N + floor(N/2)
    long long gt_original_index = 0;  // original frame paired with the sample
    std::uint64_t saturated = 0;
};

// Core of the pipeline for one clip held in memory. `external_interpolated`,
// when given, must contain the full interpolated sequence (already encoded)
// and replaces the cross-fade baseline.
std::vector<SynthSample> synthesize_clip(const std::vector<Image8>& originals,
                                         const SynthConfig& cfg, const InverseCrf& crf,
                                         const std::vector<Image8>* external_interpolated = nullptr);

struct PipelineOptions {
    SynthConfig cfg;
    std::string out_dir;
    std::optional<std::string> interpolated_dir;  // <dir>/<clip_id>/%08d.png, encoded frames
};

struct PipelineSummary {
    int clips_processed = 0;
    int clips_skipped = 0;
    long long samples_written = 0;
    std::uint64_t saturated_values = 0;
    std::string output_manifest_path;
};

// Disk pipeline: per clip, linearize originals, interpolate, average windows,
// re-encode, and pair sharp/depth/confidence at the ground-truth index.
// Writes <out>/<clip>/{blur,gt,depth,conf}/%08d.png plus a regenerated
// manifest. Clips shorter than one window are skipped with a warning.
PipelineSummary run_pipeline(const ManifestFile& manifest, const InverseCrf& crf,
                             const PipelineOptions& options);

}  // namespace blurforge
