#include "blurforge/kernels/primitives.hpp"

#include <cmath>

namespace blurforge {

void Conv1x1::validate() const {
    if (in_ch < 1 || out_ch < 1) throw ConfigError("conv1x1: channel counts must be >= 1");
    if (weight.size() != static_cast<std::size_t>(in_ch) * out_ch)
        throw ConfigError("conv1x1: weight size must be out_ch*in_ch");
    if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_ch))
        throw ConfigError("conv1x1: bias size must be out_ch");
}

void DwConv3x3::validate() const {
    if (channels < 1) throw ConfigError("dwconv3x3: channels must be >= 1");
    if (weight.size() != static_cast<std::size_t>(channels) * 9)
        throw ConfigError("dwconv3x3: weight size must be channels*9");
    if (!bias.empty() && bias.size() != static_cast<std::size_t>(channels))
        throw ConfigError("dwconv3x3: bias size must be channels");
}

TensorF conv1x1(const TensorF& in, const Conv1x1& w) {
    w.validate();
    if (in.channels() != w.in_ch) throw ConfigError("conv1x1: input has wrong channel count");
    TensorF out(in.frames(), w.out_ch, in.height(), in.width());
    const long long plane = static_cast<long long>(in.height()) * in.width();
    const long long slabs = static_cast<long long>(in.frames()) * w.out_ch;
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < slabs; ++s) {
        const int t = static_cast<int>(s / w.out_ch);
        const int oc = static_cast<int>(s % w.out_ch);
        float* dst = out.frame_channel(t, oc);
        const float b = w.bias.empty() ? 0.0f : w.bias[oc];
        for (long long p = 0; p < plane; ++p) {
            float acc = b;
            for (int ic = 0; ic < w.in_ch; ++ic)
                acc += w.weight[static_cast<std::size_t>(oc) * w.in_ch + ic] *
                       in.frame_channel(t, ic)[p];
            dst[p] = acc;
        }
    }
    return out;
}

TensorF dwconv3x3(const TensorF& in, const DwConv3x3& w) {
    w.validate();
    if (in.channels() != w.channels) throw ConfigError("dwconv3x3: input has wrong channel count");
    const int h = in.height();
    const int wd = in.width();
    TensorF out(in.frames(), in.channels(), h, wd);
    const long long slabs = static_cast<long long>(in.frames()) * in.channels();
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < slabs; ++s) {
        const int c = static_cast<int>(s % in.channels());
        const float* src = in.data() + s * h * wd;
        float* dst = out.data() + s * h * wd;
        const float* k = w.weight.data() + static_cast<std::size_t>(c) * 9;
        const float b = w.bias.empty() ? 0.0f : w.bias[c];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < wd; ++x) {
                float acc = b;
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sx = x + kx - 1;
                        if (sx < 0 || sx >= wd) continue;
                        acc += k[ky * 3 + kx] * src[static_cast<std::size_t>(sy) * wd + sx];
                    }
                }
                dst[static_cast<std::size_t>(y) * wd + x] = acc;
            }
        }
    }
    return out;
}

TensorF layer_norm(const TensorF& in, const LayerNormParams& p) {
    const int c = in.channels();
    if (p.gamma.size() != static_cast<std::size_t>(c) || p.beta.size() != static_cast<std::size_t>(c))
        throw ConfigError("layer_norm: parameter size must match channels");
    TensorF out(in.frames(), c, in.height(), in.width());
    const long long plane = static_cast<long long>(in.height()) * in.width();
    const long long positions = static_cast<long long>(in.frames()) * plane;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < positions; ++i) {
        const int t = static_cast<int>(i / plane);
        const long long pix = i % plane;
        double mean = 0.0;
        for (int ch = 0; ch < c; ++ch) mean += in.frame_channel(t, ch)[pix];
        mean /= c;
        double var = 0.0;
        for (int ch = 0; ch < c; ++ch) {
            const double d = in.frame_channel(t, ch)[pix] - mean;
            var += d * d;
        }
        var /= c;
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(p.eps));
        for (int ch = 0; ch < c; ++ch) {
            const double norm = (in.frame_channel(t, ch)[pix] - mean) * inv;
            out.frame_channel(t, ch)[pix] =
                static_cast<float>(norm) * p.gamma[ch] + p.beta[ch];
        }
    }
    return out;
}

float gelu_value(float x) {
    const double xd = static_cast<double>(x);
    return static_cast<float>(0.5 * xd * (1.0 + std::erf(xd / std::sqrt(2.0))));
}

TensorF gelu(const TensorF& in) {
    TensorF out(in.frames(), in.channels(), in.height(), in.width());
    const long long n = static_cast<long long>(in.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out.data()[i] = gelu_value(in.data()[i]);
    return out;
}

void softmax_rows(std::vector<float>& m, int rows, int cols) {
    if (m.size() != static_cast<std::size_t>(rows) * cols)
        throw ConfigError("softmax_rows: matrix size mismatch");
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        float* row = m.data() + static_cast<std::size_t>(r) * cols;
        float mx = row[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            const double e = std::exp(static_cast<double>(row[j]) - mx);
            row[j] = static_cast<float>(e);
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (int j = 0; j < cols; ++j) row[j] = static_cast<float>(row[j] * inv);
    }
}

}  // namespace blurforge
