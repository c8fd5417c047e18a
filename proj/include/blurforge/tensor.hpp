#pragma once

#include <cstddef>
#include <vector>

#include "blurforge/error.hpp"

namespace blurforge {

// Dense rank-4 feature array, frames x channels x height x width, row-major.
template <typename T>
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int frames, int channels, int height, int width, T fill = T{})
        : t_(frames), c_(channels), h_(height), w_(width),
          data_(static_cast<std::size_t>(frames) * channels * height * width, fill) {
        if (frames < 1 || channels < 1 || height < 1 || width < 1)
            throw InputError("Tensor4: all dimensions must be >= 1");
    }

    int frames() const { return t_; }
    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    std::size_t size() const { return data_.size(); }

    T& at(int t, int c, int y, int x) { return data_[offset(t, c, y, x)]; }
    T at(int t, int c, int y, int x) const { return data_[offset(t, c, y, x)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T* frame_channel(int t, int c) { return data_.data() + offset(t, c, 0, 0); }
    const T* frame_channel(int t, int c) const { return data_.data() + offset(t, c, 0, 0); }

    bool same_shape(const Tensor4& o) const {
        return t_ == o.t_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }
    bool operator==(const Tensor4& o) const = default;

    template <typename U>
    Tensor4<U> cast() const {
        Tensor4<U> out(t_, c_, h_, w_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
        return out;
    }

private:
    std::size_t offset(int t, int c, int y, int x) const {
        return ((static_cast<std::size_t>(t) * c_ + c) * h_ + y) * w_ + x;
    }

    int t_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<T> data_;
};

using TensorF = Tensor4<float>;
using TensorD = Tensor4<double>;

}  // namespace blurforge
