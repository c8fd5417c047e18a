#pragma once

#include <array>
#include <string>
#include <vector>

#include "blurforge/image.hpp"

namespace blurforge {

enum class Proximity { Close, Mid, Far };

const char* to_string(Proximity p);
Proximity proximity_from_string(const std::string& s);

// Majority-pixel distance bin of the frame: (0,1.5] m Close, (1.5,4.5] m Mid,
// (4.5,inf) Far. Zero depth means no return and is excluded; ties go to the
// nearer bin by default.
Proximity proximity_label(const DepthFrame& d, bool tie_toward_near = true);

// Per-bin pixel counts behind proximity_label, nearest bin first.
std::array<std::size_t, 3> proximity_bin_counts(const DepthFrame& d);

// Arithmetic mean over all confidence pixels.
double mean_confidence(const DepthFrame& d);

// Frame counts by mean confidence; right-open bins [k*w, (k+1)*w), last bin
// closed. bin_width must divide 1 evenly.
std::vector<std::size_t> confidence_histogram(const std::vector<DepthFrame>& frames,
                                              double bin_width = 0.1);

// Bin index for a single mean-confidence value under the same binning.
int confidence_bin(double mean_conf, double bin_width);
int confidence_bin_count(double bin_width);

// Divides every depth map by the sequence-global maximum; the result peaks at
// exactly 1.
std::vector<std::vector<float>> normalize_depth(const std::vector<DepthFrame>& sequence);

}  // namespace blurforge
