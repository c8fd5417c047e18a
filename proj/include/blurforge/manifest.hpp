#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blurforge/error.hpp"

namespace blurforge {

// Ordered frame/depth/confidence references for one clip. Synthesis output
// manifests reuse this shape and fill in the optional fields.
struct ClipManifest {
    std::string clip_id;
    double fps = 0.0;
    std::vector<std::string> frames;
    std::vector<std::string> depth;
    std::vector<std::string> confidence;
    std::string split;  // train|val|test

    // Present only in regenerated (post-synthesis) manifests.
    std::vector<std::string> sharp;
    std::vector<long long> source_index;       // middle sample on the interpolated timeline
    std::vector<long long> gt_original_index;  // original frame paired with each sample

    void validate() const;
};

struct ManifestFile {
    std::vector<ClipManifest> clips;
};

// Strict loader: schema must be 1, unknown fields are rejected.
ManifestFile load_manifest(const std::string& path);
void save_manifest(const std::string& path, const ManifestFile& manifest);

// Clip-level user-supplied attributes (environment, motion).
struct ClipAttributes {
    std::string environment;  // Indoors|Outdoors
    std::string motion;       // CM|CM+MO
};

// clip_attrs.json: {"schema":1, "clips": {"<clip_id>": {"environment":..., "motion":...}}}
std::vector<std::pair<std::string, ClipAttributes>> load_clip_attributes(const std::string& path);

}  // namespace blurforge
