#pragma once

#include <string>

#include "blurforge/kernels/primitives.hpp"
#include "blurforge/kernels/shift.hpp"
#include "blurforge/rng.hpp"

namespace blurforge {

// Bias-free 1x1 convolution followed by a 3x3 depth-wise convolution; the
// projection used for queries, keys, and values.
struct QkvProjection {
    Conv1x1 pointwise;
    DwConv3x3 depthwise;

    void validate() const;
};

// Two-layer convolution block predicting an SFT scale or offset map.
struct SftMap {
    Conv1x1 first;
    Conv1x1 second;
    float leaky_slope = 0.1f;

    void validate() const;
};

struct DatWeights {
    int heads = 1;
    int c_image = 0;  // reference feature channels
    int c_depth = 0;  // supporting feature channels
    int expansion = 2;

    QkvProjection query;  // c_image -> c_image
    QkvProjection key;    // c_depth -> c_depth
    QkvProjection value;  // c_depth -> c_depth
    std::vector<float> log_alpha;  // per head; the scale is exp(log_alpha) > 0
    Conv1x1 project;               // c_image -> c_image, bias-free

    SftMap sft_gamma;  // condition (c_image) -> scale (c_image)
    SftMap sft_beta;

    LayerNormParams norm;          // c_image entries
    Conv1x1 gdfn_expand1;          // c_image -> expansion*c_image
    DwConv3x3 gdfn_dw1;
    Conv1x1 gdfn_expand2;
    DwConv3x3 gdfn_dw2;
    Conv1x1 gdfn_project;          // expansion*c_image -> c_image

    void validate() const;
};

TensorF apply_qkv(const TensorF& in, const QkvProjection& proj);
TensorF apply_sft_map(const TensorF& in, const SftMap& map);

// Channel cross-attention: per head, softmax(Q^T K / alpha) over the
// supporting-channel axis reweights the value planes; a final 1x1 projection
// produces aligned features with c_image channels.
TensorF cross_attention(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w);

// Raw per-head attention rows (c_image/heads x c_depth/heads each) of one
// frame, exposed for verification.
std::vector<std::vector<float>> attention_maps(const TensorF& f_image, const TensorF& f_depth,
                                               const DatWeights& w, int frame = 0);

// gamma(z) * f + beta(z) with gamma/beta predicted from the condition signal.
TensorF sft_modulate(const TensorF& f_image, const TensorF& condition, const DatWeights& w);

// Gated feed-forward aggregation with a residual connection.
TensorF gdfn(const TensorF& f, const DatWeights& w);

// gdfn(sft(f_image, cross_attention(f_image, f_depth))).
TensorF dat_block(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w);

// Optionally widens the depth features by concatenating a grouped-spatial-
// shift copy before the fusion block.
TensorF fuse_depth(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w,
                   bool use_gss, const GssConfig& gss_cfg = {});

// Deterministic random weights for tests and the verification suite.
DatWeights random_dat_weights(Rng& rng, int c_image, int c_depth, int heads = 1,
                              int expansion = 2);

// Weight fixtures as JSON (row-major arrays, shapes inline).
void save_dat_weights(const std::string& path, const DatWeights& w);
DatWeights load_dat_weights(const std::string& path);

}  // namespace blurforge
