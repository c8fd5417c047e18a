#include "blurforge/annotations.hpp"

#include <fstream>

#include <json.hpp>

namespace blurforge {

using nlohmann::json;

std::optional<std::string> AnnotationSet::environment_of(const std::string& clip) const {
    auto it = clips.find(clip);
    if (it == clips.end()) return std::nullopt;
    return it->second.environment;
}

std::optional<std::string> AnnotationSet::motion_of(const std::string& clip) const {
    auto it = clips.find(clip);
    if (it == clips.end()) return std::nullopt;
    return it->second.motion;
}

void save_annotations(const std::string& path, const AnnotationSet& set) {
    json j;
    j["schema"] = 1;
    j["frames"] = json::array();
    for (const auto& [key, ann] : set.frames) {
        json jf;
        jf["clip"] = key.first;
        jf["index"] = key.second;
        jf["proximity"] = to_string(ann.proximity);
        jf["mean_confidence"] = ann.mean_confidence;
        j["frames"].push_back(std::move(jf));
    }
    j["clips"] = json::object();
    for (const auto& [clip, attrs] : set.clips) {
        j["clips"][clip] = {{"environment", attrs.environment}, {"motion", attrs.motion}};
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write annotations: " + path);
    f << j.dump(2) << '\n';
}

AnnotationSet load_annotations(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read annotations: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    for (const auto& [key, _] : j.items())
        if (key != "schema" && key != "frames" && key != "clips")
            throw InputError(path + ": unknown field '" + key + "'");
    if (j.value("schema", 0) != 1) throw InputError(path + ": unsupported or missing schema");

    AnnotationSet set;
    for (const auto& jf : j.at("frames")) {
        for (const auto& [key, _] : jf.items())
            if (key != "clip" && key != "index" && key != "proximity" && key != "mean_confidence")
                throw InputError(path + ": unknown frame field '" + key + "'");
        FrameAnnotation ann;
        ann.proximity = proximity_from_string(jf.at("proximity").get<std::string>());
        ann.mean_confidence = jf.at("mean_confidence").get<double>();
        set.frames[{jf.at("clip").get<std::string>(), jf.at("index").get<int>()}] = ann;
    }
    if (j.contains("clips")) {
        for (const auto& [clip, ja] : j.at("clips").items()) {
            ClipAttributes attrs;
            attrs.environment = ja.at("environment").get<std::string>();
            attrs.motion = ja.at("motion").get<std::string>();
            set.clips[clip] = std::move(attrs);
        }
    }
    return set;
}

}  // namespace blurforge
