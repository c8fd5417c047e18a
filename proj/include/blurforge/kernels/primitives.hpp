#pragma once

#include <vector>

#include "blurforge/tensor.hpp"

namespace blurforge {

// Pointwise convolution; weight is out_ch x in_ch row-major, bias optional
// (empty = bias-free).
struct Conv1x1 {
    int in_ch = 0;
    int out_ch = 0;
    std::vector<float> weight;
    std::vector<float> bias;

    void validate() const;
};

// Per-channel 3x3 convolution, zero padding, stride 1; weight is ch x 3 x 3.
struct DwConv3x3 {
    int channels = 0;
    std::vector<float> weight;
    std::vector<float> bias;

    void validate() const;
};

TensorF conv1x1(const TensorF& in, const Conv1x1& w);
TensorF dwconv3x3(const TensorF& in, const DwConv3x3& w);

// Layer normalization over the channel axis per spatial position, with
// per-channel affine parameters.
struct LayerNormParams {
    std::vector<float> gamma;
    std::vector<float> beta;
    float eps = 1e-5f;
};

TensorF layer_norm(const TensorF& in, const LayerNormParams& p);

// Exact (erf-based) GELU, elementwise.
TensorF gelu(const TensorF& in);
float gelu_value(float x);

// Row-wise softmax of a dense rows x cols matrix (max-subtracted).
void softmax_rows(std::vector<float>& m, int rows, int cols);

}  // namespace blurforge
