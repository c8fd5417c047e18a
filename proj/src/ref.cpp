#include "blurforge/ref.hpp"

#include <cmath>

namespace blurforge::ref {

namespace {

// Double-precision mirror of the fused weight blocks; all loops are written
// out longhand.

TensorD to_double(const TensorF& in) {
    return in.cast<double>();
}

TensorD conv1x1_d(const TensorD& in, const Conv1x1& w) {
    TensorD out(in.frames(), w.out_ch, in.height(), in.width());
    for (int t = 0; t < in.frames(); ++t)
        for (int oc = 0; oc < w.out_ch; ++oc)
            for (int y = 0; y < in.height(); ++y)
                for (int x = 0; x < in.width(); ++x) {
                    double acc = w.bias.empty() ? 0.0 : static_cast<double>(w.bias[oc]);
                    for (int ic = 0; ic < w.in_ch; ++ic)
                        acc += static_cast<double>(w.weight[static_cast<std::size_t>(oc) * w.in_ch + ic]) *
                               in.at(t, ic, y, x);
                    out.at(t, oc, y, x) = acc;
                }
    return out;
}

TensorD dwconv3x3_d(const TensorD& in, const DwConv3x3& w) {
    TensorD out(in.frames(), in.channels(), in.height(), in.width());
    for (int t = 0; t < in.frames(); ++t)
        for (int c = 0; c < in.channels(); ++c)
            for (int y = 0; y < in.height(); ++y)
                for (int x = 0; x < in.width(); ++x) {
                    double acc = w.bias.empty() ? 0.0 : static_cast<double>(w.bias[c]);
                    for (int ky = -1; ky <= 1; ++ky)
                        for (int kx = -1; kx <= 1; ++kx) {
                            const int sy = y + ky;
                            const int sx = x + kx;
                            if (sy < 0 || sy >= in.height() || sx < 0 || sx >= in.width()) continue;
                            acc += static_cast<double>(
                                       w.weight[static_cast<std::size_t>(c) * 9 + (ky + 1) * 3 + (kx + 1)]) *
                                   in.at(t, c, sy, sx);
                        }
                    out.at(t, c, y, x) = acc;
                }
    return out;
}

TensorD layer_norm_d(const TensorD& in, const LayerNormParams& p) {
    const int c = in.channels();
    TensorD out(in.frames(), c, in.height(), in.width());
    for (int t = 0; t < in.frames(); ++t)
        for (int y = 0; y < in.height(); ++y)
            for (int x = 0; x < in.width(); ++x) {
                double mean = 0.0;
                for (int ch = 0; ch < c; ++ch) mean += in.at(t, ch, y, x);
                mean /= c;
                double var = 0.0;
                for (int ch = 0; ch < c; ++ch) {
                    const double d = in.at(t, ch, y, x) - mean;
                    var += d * d;
                }
                var /= c;
                const double inv = 1.0 / std::sqrt(var + static_cast<double>(p.eps));
                for (int ch = 0; ch < c; ++ch)
                    out.at(t, ch, y, x) = (in.at(t, ch, y, x) - mean) * inv *
                                              static_cast<double>(p.gamma[ch]) +
                                          static_cast<double>(p.beta[ch]);
            }
    return out;
}

TensorD gelu_d(const TensorD& in) {
    TensorD out(in.frames(), in.channels(), in.height(), in.width());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double x = in.data()[i];
        out.data()[i] = 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    }
    return out;
}

TensorD apply_qkv_d(const TensorD& in, const QkvProjection& proj) {
    return dwconv3x3_d(conv1x1_d(in, proj.pointwise), proj.depthwise);
}

TensorD apply_sft_map_d(const TensorD& in, const SftMap& map) {
    TensorD mid = conv1x1_d(in, map.first);
    for (std::size_t i = 0; i < mid.size(); ++i) {
        const double v = mid.data()[i];
        mid.data()[i] = v >= 0.0 ? v : static_cast<double>(map.leaky_slope) * v;
    }
    return conv1x1_d(mid, map.second);
}

TensorD cross_attention_d(const TensorD& f_image, const TensorD& f_depth, const DatWeights& w) {
    const TensorD q = apply_qkv_d(f_image, w.query);
    const TensorD k = apply_qkv_d(f_depth, w.key);
    const TensorD v = apply_qkv_d(f_depth, w.value);

    const int hq = w.c_image / w.heads;
    const int hk = w.c_depth / w.heads;

    TensorD y(f_image.frames(), w.c_image, f_image.height(), f_image.width(), 0.0);
    for (int t = 0; t < f_image.frames(); ++t) {
        for (int head = 0; head < w.heads; ++head) {
            const double alpha = std::exp(static_cast<double>(w.log_alpha[head]));
            // A = softmax(Q^T K / alpha), row per reference channel.
            std::vector<double> a(static_cast<std::size_t>(hq) * hk);
            for (int i = 0; i < hq; ++i) {
                std::vector<double> logits(hk);
                for (int j = 0; j < hk; ++j) {
                    double dot = 0.0;
                    for (int yy = 0; yy < f_image.height(); ++yy)
                        for (int xx = 0; xx < f_image.width(); ++xx)
                            dot += q.at(t, head * hq + i, yy, xx) * k.at(t, head * hk + j, yy, xx);
                    logits[j] = dot / alpha;
                }
                const std::vector<double> row = softmax_row(logits);
                for (int j = 0; j < hk; ++j) a[static_cast<std::size_t>(i) * hk + j] = row[j];
            }
            // Y = V A^T over the channel dimension.
            for (int i = 0; i < hq; ++i)
                for (int yy = 0; yy < f_image.height(); ++yy)
                    for (int xx = 0; xx < f_image.width(); ++xx) {
                        double acc = 0.0;
                        for (int j = 0; j < hk; ++j)
                            acc += v.at(t, head * hk + j, yy, xx) *
                                   a[static_cast<std::size_t>(i) * hk + j];
                        y.at(t, head * hq + i, yy, xx) = acc;
                    }
        }
    }
    return conv1x1_d(y, w.project);
}

TensorD sft_modulate_d(const TensorD& f_image, const TensorD& condition, const DatWeights& w) {
    const TensorD gamma = apply_sft_map_d(condition, w.sft_gamma);
    const TensorD beta = apply_sft_map_d(condition, w.sft_beta);
    TensorD out(f_image.frames(), f_image.channels(), f_image.height(), f_image.width());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = gamma.data()[i] * f_image.data()[i] + beta.data()[i];
    return out;
}

TensorD gdfn_d(const TensorD& f, const DatWeights& w) {
    const TensorD normed = layer_norm_d(f, w.norm);
    const TensorD gate = gelu_d(dwconv3x3_d(conv1x1_d(normed, w.gdfn_expand1), w.gdfn_dw1));
    const TensorD lane = dwconv3x3_d(conv1x1_d(normed, w.gdfn_expand2), w.gdfn_dw2);
    TensorD gated(gate.frames(), gate.channels(), gate.height(), gate.width());
    for (std::size_t i = 0; i < gated.size(); ++i)
        gated.data()[i] = gate.data()[i] * lane.data()[i];
    TensorD out = conv1x1_d(gated, w.gdfn_project);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += f.data()[i];
    return out;
}

}  // namespace

LinearImage linearize(const Image8& frame, const InverseCrf& inv) {
    LinearImage out(frame.height(), frame.width());
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = inv.table[c][frame.at(y, x, c)];
    return out;
}

EncodeResult encode(const LinearImage& frame, const InverseCrf& inv) {
    EncodeResult res{Image8(frame.height(), frame.width()), 0};
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                double v = frame.at(y, x, c);
                if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
                    ++res.saturated;
                    v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
                }
                int best = 0;
                double best_dist = std::abs(inv.table[c][0] - v);
                for (int p = 1; p < 256; ++p) {
                    const double dist = std::abs(inv.table[c][p] - v);
                    if (dist < best_dist) {  // strict: ties keep the lower code
                        best = p;
                        best_dist = dist;
                    }
                }
                res.image.at(y, x, c) = static_cast<std::uint8_t>(best);
            }
    return res;
}

LinearImage crossfade(const LinearImage& a, const LinearImage& b, double alpha) {
    LinearImage out(a.height(), a.width());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = (1.0 - alpha) * a.at(y, x, c) + alpha * b.at(y, x, c);
    return out;
}

LinearImage average_window(const std::vector<LinearImage>& window) {
    LinearImage out(window[0].height(), window[0].width());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (const auto& f : window) acc += f.at(y, x, c);
                out.at(y, x, c) = acc / static_cast<double>(window.size());
            }
    return out;
}

double psnr(const Image8& a, const Image8& b, double peak) {
    double sum = 0.0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(a.at(y, x, c)) - static_cast<double>(b.at(y, x, c));
                sum += d * d;
            }
    if (sum == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sum / (static_cast<double>(a.pixel_count()) * 3.0);
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

double ssim_plane_ref(const std::vector<double>& px, const std::vector<double>& py, int h, int w) {
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    // Explicit 2D window, renormalized to sum 1.
    double wsum = 0.0;
    double win[kWin][kWin];
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            const double dy = i - kWin / 2;
            const double dx = j - kWin / 2;
            win[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            wsum += win[i][j];
        }
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) win[i][j] /= wsum;

    double total = 0.0;
    long count = 0;
    for (int y = 0; y + kWin <= h; ++y)
        for (int x = 0; x + kWin <= w; ++x) {
            double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    const double vx = px[static_cast<std::size_t>(y + i) * w + (x + j)];
                    const double vy = py[static_cast<std::size_t>(y + i) * w + (x + j)];
                    mx += win[i][j] * vx;
                    my += win[i][j] * vy;
                    xx += win[i][j] * vx * vx;
                    yy += win[i][j] * vy * vy;
                    xy += win[i][j] * vx * vy;
                }
            const double var_x = xx - mx * mx;
            const double var_y = yy - my * my;
            const double cov = xy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (var_x + var_y + c2));
            ++count;
        }
    return total / static_cast<double>(count);
}

std::vector<double> luma_ref(const Image8& img) {
    std::vector<double> out(img.pixel_count());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out[static_cast<std::size_t>(y) * img.width() + x] =
                0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
    return out;
}

}  // namespace

double ssim(const Image8& a, const Image8& b, SsimMode mode) {
    if (mode == SsimMode::Luma)
        return ssim_plane_ref(luma_ref(a), luma_ref(b), a.height(), a.width());
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> pa(a.pixel_count()), pb(b.pixel_count());
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                pa[static_cast<std::size_t>(y) * a.width() + x] = a.at(y, x, c);
                pb[static_cast<std::size_t>(y) * a.width() + x] = b.at(y, x, c);
            }
        acc += ssim_plane_ref(pa, pb, a.height(), a.width());
    }
    return acc / 3.0;
}

double mean_confidence(const DepthFrame& d) {
    long double acc = 0.0L;
    for (float v : d.confidence) acc += static_cast<long double>(v);
    return static_cast<double>(acc / static_cast<long double>(d.pixel_count()));
}

TensorF temporal_shift(const TensorF& in, ShiftDirection dir) {
    if (in.frames() == 1) return in;
    const int tc = in.frames() * in.channels();
    const int half = in.channels() / 2;
    const int s = dir == ShiftDirection::Forward ? half : -half;
    TensorF out(in.frames(), in.channels(), in.height(), in.width());
    for (int i = 0; i < tc; ++i) {
        const int j = ((i + s) % tc + tc) % tc;
        const int ti = i / in.channels(), ci = i % in.channels();
        const int tj = j / in.channels(), cj = j % in.channels();
        for (int y = 0; y < in.height(); ++y)
            for (int x = 0; x < in.width(); ++x) out.at(tj, cj, y, x) = in.at(ti, ci, y, x);
    }
    return out;
}

TensorF grouped_spatial_shift(const TensorF& in, const GssConfig& cfg) {
    TensorF out(in.frames(), in.channels(), in.height(), in.width(), 0.0f);
    int c0 = 0;
    for (const auto& g : cfg.groups) {
        for (int c = c0; c < c0 + g.channels; ++c)
            for (int t = 0; t < in.frames(); ++t)
                for (int y = 0; y < in.height(); ++y)
                    for (int x = 0; x < in.width(); ++x) {
                        const int sy = y - g.dy;
                        const int sx = x - g.dx;
                        if (sy >= 0 && sy < in.height() && sx >= 0 && sx < in.width())
                            out.at(t, c, y, x) = in.at(t, c, sy, sx);
                    }
        c0 += g.channels;
    }
    return out;
}

TensorF concat_channels(const TensorF& a, const TensorF& b) {
    TensorF out(a.frames(), a.channels() + b.channels(), a.height(), a.width());
    for (int t = 0; t < a.frames(); ++t)
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                for (int c = 0; c < a.channels(); ++c) out.at(t, c, y, x) = a.at(t, c, y, x);
                for (int c = 0; c < b.channels(); ++c)
                    out.at(t, a.channels() + c, y, x) = b.at(t, c, y, x);
            }
    return out;
}

TensorD conv1x1(const TensorF& in, const Conv1x1& w) { return conv1x1_d(to_double(in), w); }
TensorD dwconv3x3(const TensorF& in, const DwConv3x3& w) { return dwconv3x3_d(to_double(in), w); }
TensorD layer_norm(const TensorF& in, const LayerNormParams& p) {
    return layer_norm_d(to_double(in), p);
}
TensorD gelu_tensor(const TensorF& in) { return gelu_d(to_double(in)); }

std::vector<double> softmax_row(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

TensorD apply_qkv(const TensorF& in, const QkvProjection& proj) {
    return apply_qkv_d(to_double(in), proj);
}

TensorD cross_attention(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w) {
    return cross_attention_d(to_double(f_image), to_double(f_depth), w);
}

TensorD sft_modulate(const TensorF& f_image, const TensorF& condition, const DatWeights& w) {
    return sft_modulate_d(to_double(f_image), to_double(condition), w);
}

TensorD gdfn(const TensorF& f, const DatWeights& w) { return gdfn_d(to_double(f), w); }

TensorD dat_block(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w) {
    const TensorD fi = to_double(f_image);
    const TensorD aligned = cross_attention_d(fi, to_double(f_depth), w);
    return gdfn_d(sft_modulate_d(fi, aligned, w), w);
}

TensorD fuse_depth(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w,
                   bool use_gss, const GssConfig& gss_cfg) {
    if (!use_gss) return ref::dat_block(f_image, f_depth, w);
    const TensorF shifted = ref::grouped_spatial_shift(f_depth, gss_cfg);
    return ref::dat_block(f_image, ref::concat_channels(f_depth, shifted), w);
}

}  // namespace blurforge::ref
