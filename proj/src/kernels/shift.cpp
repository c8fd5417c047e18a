#include "blurforge/kernels/shift.hpp"

namespace blurforge {

TensorF temporal_shift(const TensorF& in, ShiftDirection dir) {
    if (in.channels() % 2 != 0) throw ConfigError("temporal_shift: channel count must be even");
    if (in.frames() == 1) return in;  // single-image adjustment: shift omitted

    const long long tc = static_cast<long long>(in.frames()) * in.channels();
    const long long plane = static_cast<long long>(in.height()) * in.width();
    const long long half = in.channels() / 2;
    const long long shift = dir == ShiftDirection::Forward ? half : tc - half;

    TensorF out(in.frames(), in.channels(), in.height(), in.width());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < tc; ++i) {
        const long long j = (i + shift) % tc;  // input slab i lands on output slab j
        const float* src = in.data() + i * plane;
        float* dst = out.data() + j * plane;
        for (long long p = 0; p < plane; ++p) dst[p] = src[p];
    }
    return out;
}

GssConfig GssConfig::grid9(int channels, int stride) {
    if (channels < 1) throw ConfigError("grid9: channels must be >= 1");
    GssConfig cfg;
    const int base = channels / 9;
    const int extra = channels % 9;
    int g = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            GssGroup group;
            group.channels = base + (g < extra ? 1 : 0);
            group.dx = dx * stride;
            group.dy = dy * stride;
            if (group.channels > 0) cfg.groups.push_back(group);
            ++g;
        }
    }
    return cfg;
}

int GssConfig::total_channels() const {
    int total = 0;
    for (const auto& g : groups) total += g.channels;
    return total;
}

TensorF grouped_spatial_shift(const TensorF& in, const GssConfig& cfg) {
    if (cfg.total_channels() != in.channels())
        throw ConfigError("grouped_spatial_shift: group channel counts must sum to " +
                          std::to_string(in.channels()));
    const int h = in.height();
    const int w = in.width();

    // Per-channel offset table.
    std::vector<int> dx(in.channels()), dy(in.channels());
    int c = 0;
    for (const auto& g : cfg.groups) {
        for (int i = 0; i < g.channels; ++i, ++c) {
            dx[c] = g.dx;
            dy[c] = g.dy;
        }
    }

    TensorF out(in.frames(), in.channels(), h, w, 0.0f);
    const long long slabs = static_cast<long long>(in.frames()) * in.channels();
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < slabs; ++s) {
        const int ch = static_cast<int>(s % in.channels());
        const float* src = in.data() + s * h * w;
        float* dst = out.data() + s * h * w;
        for (int y = 0; y < h; ++y) {
            const int sy = y - dy[ch];
            if (sy < 0 || sy >= h) continue;
            for (int x = 0; x < w; ++x) {
                const int sx = x - dx[ch];
                if (sx < 0 || sx >= w) continue;
                dst[static_cast<std::size_t>(y) * w + x] = src[static_cast<std::size_t>(sy) * w + sx];
            }
        }
    }
    return out;
}

std::pair<TensorF, TensorF> select_shift_half(const TensorF& in, ShiftDirection dir) {
    if (in.channels() % 2 != 0) throw ConfigError("select_shift_half: channel count must be even");
    const int half = in.channels() / 2;
    const int lo = dir == ShiftDirection::Forward ? 0 : half;

    TensorF selected(in.frames(), half, in.height(), in.width());
    TensorF rest(in.frames(), half, in.height(), in.width());
    const std::size_t plane = static_cast<std::size_t>(in.height()) * in.width();
    for (int t = 0; t < in.frames(); ++t) {
        for (int c = 0; c < half; ++c) {
            std::copy_n(in.frame_channel(t, lo + c), plane, selected.frame_channel(t, c));
            std::copy_n(in.frame_channel(t, (lo == 0 ? half : 0) + c), plane,
                        rest.frame_channel(t, c));
        }
    }
    return {std::move(selected), std::move(rest)};
}

TensorF concat_channels(const TensorF& a, const TensorF& b) {
    if (a.frames() != b.frames() || a.height() != b.height() || a.width() != b.width())
        throw InputError("concat_channels: frame/spatial dimensions differ");
    TensorF out(a.frames(), a.channels() + b.channels(), a.height(), a.width());
    const std::size_t plane = static_cast<std::size_t>(a.height()) * a.width();
    for (int t = 0; t < a.frames(); ++t) {
        for (int c = 0; c < a.channels(); ++c)
            std::copy_n(a.frame_channel(t, c), plane, out.frame_channel(t, c));
        for (int c = 0; c < b.channels(); ++c)
            std::copy_n(b.frame_channel(t, c), plane, out.frame_channel(t, a.channels() + c));
    }
    return out;
}

}  // namespace blurforge
