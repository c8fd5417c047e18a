#pragma once

#include <string>

#include "blurforge/image.hpp"

namespace blurforge {

Image8 read_png_rgb8(const std::string& path);
void write_png_rgb8(const std::string& path, const Image8& img);

Gray16Image read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const Gray16Image& img);

Gray8Image read_png_gray8(const std::string& path);
void write_png_gray8(const std::string& path, const Gray8Image& img);

// Depth PNGs store millimeters in 16-bit gray; confidence PNGs store 8-bit
// gray mapped to [0,1] by /255.
DepthFrame read_depth_frame(const std::string& depth_path, const std::string& confidence_path);
void write_depth_frame(const std::string& depth_path, const std::string& confidence_path,
                       const DepthFrame& frame);

}  // namespace blurforge
