#pragma once

#include "blurforge/crf.hpp"
#include "blurforge/image.hpp"
#include "blurforge/kernels/dat.hpp"
#include "blurforge/kernels/shift.hpp"
#include "blurforge/metrics.hpp"
#include "blurforge/tensor.hpp"

// Serial reference implementations. These are deliberately naive loop
// formulations, independent of the OpenMP fast paths: the tests use them as
// oracles and the benchmark compares against them. Numeric kernels compute
// in double regardless of input precision.
namespace blurforge::ref {

LinearImage linearize(const Image8& frame, const InverseCrf& inv);

// Nearest code by exhaustive scan over all 256 table entries (the fast path
// uses binary search).
EncodeResult encode(const LinearImage& frame, const InverseCrf& inv);

LinearImage crossfade(const LinearImage& a, const LinearImage& b, double alpha);
LinearImage average_window(const std::vector<LinearImage>& window);

double psnr(const Image8& a, const Image8& b, double peak = 255.0);

// Direct 2D 11x11 windowed SSIM, one window at a time (the fast path filters
// separably).
double ssim(const Image8& a, const Image8& b, SsimMode mode = SsimMode::Luma);

double mean_confidence(const DepthFrame& d);

// Flatten (T,C), rotate, reshape back.
TensorF temporal_shift(const TensorF& in, ShiftDirection dir);
TensorF grouped_spatial_shift(const TensorF& in, const GssConfig& cfg);
TensorF concat_channels(const TensorF& a, const TensorF& b);

TensorD conv1x1(const TensorF& in, const Conv1x1& w);
TensorD dwconv3x3(const TensorF& in, const DwConv3x3& w);
TensorD layer_norm(const TensorF& in, const LayerNormParams& p);
TensorD gelu_tensor(const TensorF& in);
std::vector<double> softmax_row(const std::vector<double>& logits);

TensorD apply_qkv(const TensorF& in, const QkvProjection& proj);
TensorD cross_attention(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w);
TensorD sft_modulate(const TensorF& f_image, const TensorF& condition, const DatWeights& w);
TensorD gdfn(const TensorF& f, const DatWeights& w);
TensorD dat_block(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w);
TensorD fuse_depth(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w,
                   bool use_gss, const GssConfig& gss_cfg = {});

}  // namespace blurforge::ref
