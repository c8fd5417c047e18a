#pragma once

#include <cstdint>
#include <random>

namespace blurforge {

// Deterministic generator with explicit bit-to-float mapping so sequences are
// identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    double uniform(double lo = 0.0, double hi = 1.0) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    float uniform_float(float lo = 0.0f, float hi = 1.0f) {
        return static_cast<float>(uniform(lo, hi));
    }

    // Inclusive bounds.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace blurforge
