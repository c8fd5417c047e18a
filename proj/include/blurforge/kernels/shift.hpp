#pragma once

#include <utility>
#include <vector>

#include "blurforge/tensor.hpp"

namespace blurforge {

enum class ShiftDirection { Forward, Backward };

// Circular roll of the flattened (frames*channels) axis by +C/2 (Forward) or
// -C/2 (Backward); roll(+s) maps input index i to output index i+s mod T*C.
// A single-frame tensor is returned unchanged.
TensorF temporal_shift(const TensorF& in, ShiftDirection dir);

struct GssGroup {
    int channels = 0;
    int dx = 0;  // shift along width: out(y, x) = in(y, x - dx)
    int dy = 0;  // shift along height: out(y, x) = in(y - dy, x)
};

struct GssConfig {
    std::vector<GssGroup> groups;

    // Nine near-equal channel groups covering offsets {-d,0,+d} x {-d,0,+d}.
    static GssConfig grid9(int channels, int stride = 1);

    int total_channels() const;
};

// Per-group integer translation with zero fill; out-of-bounds content is
// discarded.
TensorF grouped_spatial_shift(const TensorF& in, const GssConfig& cfg);

// Forward selects channels [0, C/2), Backward [C/2, C); returns the selected
// block and the remainder in channel order.
std::pair<TensorF, TensorF> select_shift_half(const TensorF& in, ShiftDirection dir);

// Channel-axis concatenation, A first.
TensorF concat_channels(const TensorF& a, const TensorF& b);

}  // namespace blurforge
