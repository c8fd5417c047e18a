#pragma once

#include <cstdint>
#include <vector>

#include "blurforge/error.hpp"

namespace blurforge {

// 8-bit CRF-encoded RGB frame, interleaved row-major.
class Image8 {
public:
    Image8() = default;
    Image8(int height, int width, std::uint8_t fill = 0)
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(height) * width * 3, fill) {
        if (height <= 0 || width <= 0) throw InputError("Image8: non-positive dimensions");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

    std::uint8_t& at(int y, int x, int c) { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }
    std::uint8_t at(int y, int x, int c) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }

    std::uint8_t* data() { return data_.data(); }
    const std::uint8_t* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool same_shape(const Image8& o) const { return height_ == o.height_ && width_ == o.width_; }
    bool operator==(const Image8& o) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

// Linear-color RGB frame (values nominally in [0,1]), double precision,
// interleaved row-major. Double keeps Eq-style window sums exact to the
// tolerances the tests assert.
class LinearImage {
public:
    LinearImage() = default;
    LinearImage(int height, int width, double fill = 0.0)
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(height) * width * 3, fill) {
        if (height <= 0 || width <= 0) throw InputError("LinearImage: non-positive dimensions");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

    double& at(int y, int x, int c) { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }
    double at(int y, int x, int c) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool same_shape(const LinearImage& o) const { return height_ == o.height_ && width_ == o.width_; }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Metric depth map (meters, 0 = no return) plus per-pixel confidence in [0,1].
struct DepthFrame {
    int height = 0;
    int width = 0;
    std::vector<float> depth;
    std::vector<float> confidence;

    DepthFrame() = default;
    DepthFrame(int h, int w)
        : height(h), width(w),
          depth(static_cast<std::size_t>(h) * w, 0.0f),
          confidence(static_cast<std::size_t>(h) * w, 0.0f) {
        if (h <= 0 || w <= 0) throw InputError("DepthFrame: non-positive dimensions");
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }

    void validate() const {
        if (depth.size() != pixel_count() || confidence.size() != pixel_count())
            throw InputError("DepthFrame: buffer sizes do not match dimensions");
        for (float d : depth)
            if (d < 0.0f) throw InputError("DepthFrame: negative depth");
        for (float c : confidence)
            if (c < 0.0f || c > 1.0f) throw InputError("DepthFrame: confidence outside [0,1]");
    }
};

// Plain 16-bit grayscale raster (depth PNGs store millimeters).
struct Gray16Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint16_t> data;
};

// Plain 8-bit grayscale raster (confidence PNGs map to [0,1] by /255).
struct Gray8Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;
};

}  // namespace blurforge
