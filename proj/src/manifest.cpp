#include "blurforge/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace blurforge {

using nlohmann::json;

void ClipManifest::validate() const {
    if (clip_id.empty()) throw InputError("manifest: empty clip_id");
    if (!(fps > 0.0)) throw InputError("manifest: fps must be positive (clip " + clip_id + ")");
    if (frames.size() < 2) throw InputError("manifest: at least 2 frames required (clip " + clip_id + ")");
    if (depth.size() != frames.size() || confidence.size() != frames.size())
        throw InputError("manifest: frames/depth/confidence lengths differ (clip " + clip_id + ")");
    if (split != "train" && split != "val" && split != "test")
        throw InputError("manifest: split must be train|val|test (clip " + clip_id + ")");
    if (!sharp.empty() && sharp.size() != frames.size())
        throw InputError("manifest: sharp list length differs (clip " + clip_id + ")");
}

ManifestFile load_manifest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read manifest: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }

    static const std::set<std::string> top_keys = {"schema", "clips"};
    static const std::set<std::string> clip_keys = {
        "clip_id", "fps", "frames", "depth", "confidence", "split",
        "sharp", "source_index", "gt_original_index"};

    for (const auto& [key, _] : j.items())
        if (!top_keys.count(key)) throw InputError(path + ": unknown field '" + key + "'");
    if (j.value("schema", 0) != 1) throw InputError(path + ": unsupported or missing schema");

    ManifestFile mf;
    for (const auto& jc : j.at("clips")) {
        for (const auto& [key, _] : jc.items())
            if (!clip_keys.count(key)) throw InputError(path + ": unknown clip field '" + key + "'");
        ClipManifest c;
        c.clip_id = jc.at("clip_id").get<std::string>();
        c.fps = jc.at("fps").get<double>();
        c.frames = jc.at("frames").get<std::vector<std::string>>();
        c.depth = jc.at("depth").get<std::vector<std::string>>();
        c.confidence = jc.at("confidence").get<std::vector<std::string>>();
        c.split = jc.at("split").get<std::string>();
        if (jc.contains("sharp")) c.sharp = jc.at("sharp").get<std::vector<std::string>>();
        if (jc.contains("source_index"))
            c.source_index = jc.at("source_index").get<std::vector<long long>>();
        if (jc.contains("gt_original_index"))
            c.gt_original_index = jc.at("gt_original_index").get<std::vector<long long>>();
        c.validate();
        mf.clips.push_back(std::move(c));
    }
    return mf;
}

void save_manifest(const std::string& path, const ManifestFile& manifest) {
    json j;
    j["schema"] = 1;
    j["clips"] = json::array();
    for (const auto& c : manifest.clips) {
        json jc;
        jc["clip_id"] = c.clip_id;
        jc["fps"] = c.fps;
        jc["frames"] = c.frames;
        jc["depth"] = c.depth;
        jc["confidence"] = c.confidence;
        jc["split"] = c.split;
        if (!c.sharp.empty()) jc["sharp"] = c.sharp;
        if (!c.source_index.empty()) jc["source_index"] = c.source_index;
        if (!c.gt_original_index.empty()) jc["gt_original_index"] = c.gt_original_index;
        j["clips"].push_back(std::move(jc));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write manifest: " + path);
    f << j.dump(2) << '\n';
}

std::vector<std::pair<std::string, ClipAttributes>> load_clip_attributes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read attributes: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    for (const auto& [key, _] : j.items())
        if (key != "schema" && key != "clips") throw InputError(path + ": unknown field '" + key + "'");
    if (j.value("schema", 0) != 1) throw InputError(path + ": unsupported or missing schema");

    std::vector<std::pair<std::string, ClipAttributes>> out;
    for (const auto& [clip_id, ja] : j.at("clips").items()) {
        for (const auto& [key, _] : ja.items())
            if (key != "environment" && key != "motion")
                throw InputError(path + ": unknown attribute field '" + key + "'");
        ClipAttributes a;
        a.environment = ja.at("environment").get<std::string>();
        a.motion = ja.at("motion").get<std::string>();
        if (a.environment != "Indoors" && a.environment != "Outdoors")
            throw InputError(path + ": environment must be Indoors|Outdoors");
        if (a.motion != "CM" && a.motion != "CM+MO")
            throw InputError(path + ": motion must be CM|CM+MO");
        out.emplace_back(clip_id, std::move(a));
    }
    return out;
}

}  // namespace blurforge
