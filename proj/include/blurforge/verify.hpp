#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blurforge {

struct KernelCheck {
    std::string name;
    int cases = 0;
    double max_deviation = 0.0;
    double tolerance = 0.0;  // 0 means exact equality required
    bool pass = false;
};

struct KernelReport {
    std::uint64_t seed = 0;
    int cases = 0;
    std::vector<KernelCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Runs the randomized oracle suite over every kernel. `cases` scales the
// number of randomized instances (the attention oracle checks use cases/2).
KernelReport verify_kernels(std::uint64_t seed, int cases = 100);

void save_kernel_report(const std::string& path, const KernelReport& report);

}  // namespace blurforge
