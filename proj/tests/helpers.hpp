#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "blurforge/crf.hpp"
#include "blurforge/image.hpp"
#include "blurforge/manifest.hpp"
#include "blurforge/png_io.hpp"
#include "blurforge/rng.hpp"

namespace blurforge::testing {

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("blurforge_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Identity inverse response: table[p] = p/255.
inline InverseCrf identity_inverse_crf() {
    InverseCrf inv;
    for (int c = 0; c < 3; ++c) {
        for (int p = 0; p < 256; ++p) inv.table[c][p] = static_cast<double>(p) / 255.0;
        inv.slope[c] = 1.0 / 255.0;
    }
    inv.validate();
    return inv;
}

// Log-exposure curve of a power-law response, anchored at code 128. Code 0 is
// extrapolated to keep the curve finite and monotonic.
inline CrfCurve gamma_crf_curve(double gamma_exp) {
    CrfCurve curve;
    curve.anchor_code = 128;
    for (int c = 0; c < 3; ++c) {
        curve.g[c].assign(256, 0.0);
        for (int z = 1; z < 256; ++z)
            curve.g[c][z] = gamma_exp * (std::log(static_cast<double>(z)) - std::log(128.0));
        curve.g[c][0] = curve.g[c][1] - (curve.g[c][2] - curve.g[c][1]);
    }
    curve.validate();
    return curve;
}

// Synthetic exposure stack from a known forward response. `encode_linear`
// maps a clamped linear value in [0,1] to [0,1] before 8-bit quantization.
template <typename EncodeFn>
ExposureStack synthetic_stack(const std::vector<double>& times, int size, EncodeFn&& encode_linear,
                              double irradiance_lo = 0.02, double irradiance_hi = 3.5) {
    ExposureStack stack;
    stack.exposure_times = times;
    const double log_lo = std::log(irradiance_lo);
    const double log_hi = std::log(irradiance_hi);
    for (double t : times) {
        Image8 img(size, size);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double frac =
                    static_cast<double>(y * size + x) / static_cast<double>(size * size - 1);
                const double irradiance = std::exp(log_lo + frac * (log_hi - log_lo));
                const double linear = std::min(1.0, std::max(0.0, irradiance * t));
                const double encoded = encode_linear(linear);
                const int code = static_cast<int>(std::lround(encoded * 255.0));
                const auto value = static_cast<std::uint8_t>(std::min(255, std::max(0, code)));
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = value;
            }
        }
        stack.images.push_back(std::move(img));
    }
    return stack;
}

inline ExposureStack linear_sensor_stack(const std::vector<double>& times, int size = 64) {
    return synthetic_stack(times, size, [](double v) { return v; });
}

inline ExposureStack gamma_sensor_stack(const std::vector<double>& times, double gamma_exp = 2.2,
                                        int size = 64) {
    return synthetic_stack(times, size,
                           [gamma_exp](double v) { return std::pow(v, 1.0 / gamma_exp); });
}

inline Image8 random_image(Rng& rng, int h, int w) {
    Image8 img(h, w);
    for (std::size_t i = 0; i < img.size(); ++i)
        img.data()[i] = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

inline LinearImage random_linear(Rng& rng, int h, int w) {
    LinearImage img(h, w);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
    return img;
}

// The bundled 9-frame synthetic fixture clip: a moving gradient pattern with
// ramped depth and varying confidence. Returns the manifest path.
inline std::filesystem::path write_fixture_clip(const std::filesystem::path& dir, int frames = 9,
                                                int height = 24, int width = 32) {
    std::filesystem::create_directories(dir / "frames");
    ManifestFile mf;
    ClipManifest clip;
    clip.clip_id = "fixture";
    clip.fps = 60.0;
    clip.split = "test";
    for (int i = 0; i < frames; ++i) {
        Image8 img(height, width);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const int moving = (x - 2 * i + 8 * width) % width;
                img.at(y, x, 0) = static_cast<std::uint8_t>((moving * 255) / width);
                img.at(y, x, 1) = static_cast<std::uint8_t>((y * 255) / height);
                img.at(y, x, 2) =
                    static_cast<std::uint8_t>(((x + y + i) * 255 / (height + width)) % 256);
            }
        DepthFrame d(height, width);
        for (std::size_t k = 0; k < d.pixel_count(); ++k) {
            d.depth[k] = 0.5f + 0.01f * static_cast<float>(k % 400);
            d.confidence[k] = static_cast<float>((k + i) % 256) / 255.0f;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "%08d", i);
        const std::string frame = (dir / "frames" / (std::string(name) + "_rgb.png")).string();
        const std::string depth = (dir / "frames" / (std::string(name) + "_d.png")).string();
        const std::string conf = (dir / "frames" / (std::string(name) + "_c.png")).string();
        write_png_rgb8(frame, img);
        write_depth_frame(depth, conf, d);
        clip.frames.push_back(frame);
        clip.depth.push_back(depth);
        clip.confidence.push_back(conf);
    }
    mf.clips.push_back(std::move(clip));
    const std::filesystem::path manifest = dir / "clips.json";
    save_manifest(manifest.string(), mf);
    return manifest;
}

inline std::filesystem::path write_fixture_attrs(const std::filesystem::path& dir) {
    const std::filesystem::path path = dir / "clip_attrs.json";
    std::ofstream(path) << R"({"schema":1,"clips":{"fixture":{"environment":"Indoors","motion":"CM"}}})";
    return path;
}

}  // namespace blurforge::testing
