#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blurforge/annotate.hpp"
#include "blurforge/manifest.hpp"

namespace blurforge {

// Key for one scored frame.
using FrameKey = std::pair<std::string, int>;  // (clip, index)

struct FrameAnnotation {
    Proximity proximity = Proximity::Close;
    double mean_confidence = 0.0;
};

// Frame-level computed annotations plus clip-level user-supplied attributes.
struct AnnotationSet {
    std::map<FrameKey, FrameAnnotation> frames;
    std::map<std::string, ClipAttributes> clips;

    std::optional<std::string> environment_of(const std::string& clip) const;
    std::optional<std::string> motion_of(const std::string& clip) const;
};

// annotations.json round-trip (schema 1, unknown fields rejected).
void save_annotations(const std::string& path, const AnnotationSet& set);
AnnotationSet load_annotations(const std::string& path);

}  // namespace blurforge
