#include "blurforge/kernels/dat.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace blurforge {

void QkvProjection::validate() const {
    pointwise.validate();
    depthwise.validate();
    if (pointwise.out_ch != depthwise.channels)
        throw ConfigError("qkv projection: pointwise/depthwise channel mismatch");
    if (!pointwise.bias.empty() || !depthwise.bias.empty())
        throw ConfigError("qkv projection: must be bias-free");
}

void SftMap::validate() const {
    first.validate();
    second.validate();
    if (first.out_ch != second.in_ch) throw ConfigError("sft map: layer channel mismatch");
}

void DatWeights::validate() const {
    if (heads < 1) throw ConfigError("dat: heads must be >= 1");
    if (c_image % heads != 0 || c_depth % heads != 0)
        throw ConfigError("dat: head count must divide both channel counts");
    if (log_alpha.size() != static_cast<std::size_t>(heads))
        throw ConfigError("dat: one alpha per head required");
    query.validate();
    key.validate();
    value.validate();
    if (query.pointwise.in_ch != c_image || query.pointwise.out_ch != c_image)
        throw ConfigError("dat: query projection must map c_image -> c_image");
    if (key.pointwise.in_ch != c_depth || key.pointwise.out_ch != c_depth)
        throw ConfigError("dat: key projection must map c_depth -> c_depth");
    if (value.pointwise.in_ch != c_depth || value.pointwise.out_ch != c_depth)
        throw ConfigError("dat: value projection must map c_depth -> c_depth");
    project.validate();
    if (project.in_ch != c_image || project.out_ch != c_image || !project.bias.empty())
        throw ConfigError("dat: output projection must be bias-free c_image -> c_image");
    sft_gamma.validate();
    sft_beta.validate();
    if (sft_gamma.first.in_ch != c_image || sft_gamma.second.out_ch != c_image ||
        sft_beta.first.in_ch != c_image || sft_beta.second.out_ch != c_image)
        throw ConfigError("dat: sft maps must map c_image -> c_image");
    if (norm.gamma.size() != static_cast<std::size_t>(c_image) ||
        norm.beta.size() != static_cast<std::size_t>(c_image))
        throw ConfigError("dat: layer-norm parameters must have c_image entries");
    if (expansion < 1) throw ConfigError("dat: expansion must be >= 1");
    const int hidden = expansion * c_image;
    gdfn_expand1.validate();
    gdfn_expand2.validate();
    gdfn_dw1.validate();
    gdfn_dw2.validate();
    gdfn_project.validate();
    if (gdfn_expand1.in_ch != c_image || gdfn_expand1.out_ch != hidden ||
        gdfn_expand2.in_ch != c_image || gdfn_expand2.out_ch != hidden ||
        gdfn_dw1.channels != hidden || gdfn_dw2.channels != hidden ||
        gdfn_project.in_ch != hidden || gdfn_project.out_ch != c_image)
        throw ConfigError("dat: gdfn weights disagree with expansion factor");
}

TensorF apply_qkv(const TensorF& in, const QkvProjection& proj) {
    return dwconv3x3(conv1x1(in, proj.pointwise), proj.depthwise);
}

namespace {

TensorF leaky_relu(const TensorF& in, float slope) {
    TensorF out(in.frames(), in.channels(), in.height(), in.width());
    const long long n = static_cast<long long>(in.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        const float v = in.data()[i];
        out.data()[i] = v >= 0.0f ? v : slope * v;
    }
    return out;
}

}  // namespace

TensorF apply_sft_map(const TensorF& in, const SftMap& map) {
    return conv1x1(leaky_relu(conv1x1(in, map.first), map.leaky_slope), map.second);
}

std::vector<std::vector<float>> attention_maps(const TensorF& f_image, const TensorF& f_depth,
                                               const DatWeights& w, int frame) {
    w.validate();
    if (f_image.height() != f_depth.height() || f_image.width() != f_depth.width() ||
        f_image.frames() != f_depth.frames())
        throw InputError("cross_attention: spatial/frame dimensions differ");
    if (f_image.channels() != w.c_image || f_depth.channels() != w.c_depth)
        throw ConfigError("cross_attention: channel counts disagree with weights");

    const TensorF q = apply_qkv(f_image, w.query);
    const TensorF k = apply_qkv(f_depth, w.key);

    const int hq = w.c_image / w.heads;
    const int hk = w.c_depth / w.heads;
    const long long plane = static_cast<long long>(f_image.height()) * f_image.width();

    std::vector<std::vector<float>> maps;
    for (int head = 0; head < w.heads; ++head) {
        const float alpha = std::exp(w.log_alpha[head]);
        std::vector<float> a(static_cast<std::size_t>(hq) * hk);
#pragma omp parallel for schedule(static) collapse(2)
        for (int i = 0; i < hq; ++i) {
            for (int j = 0; j < hk; ++j) {
                const float* qp = q.frame_channel(frame, head * hq + i);
                const float* kp = k.frame_channel(frame, head * hk + j);
                double dot = 0.0;
                for (long long p = 0; p < plane; ++p)
                    dot += static_cast<double>(qp[p]) * static_cast<double>(kp[p]);
                a[static_cast<std::size_t>(i) * hk + j] = static_cast<float>(dot / alpha);
            }
        }
        softmax_rows(a, hq, hk);
        maps.push_back(std::move(a));
    }
    return maps;
}

TensorF cross_attention(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w) {
    w.validate();
    if (f_image.height() != f_depth.height() || f_image.width() != f_depth.width() ||
        f_image.frames() != f_depth.frames())
        throw InputError("cross_attention: spatial/frame dimensions differ");
    if (f_image.channels() != w.c_image || f_depth.channels() != w.c_depth)
        throw ConfigError("cross_attention: channel counts disagree with weights");

    const TensorF v = apply_qkv(f_depth, w.value);
    const int hq = w.c_image / w.heads;
    const int hk = w.c_depth / w.heads;
    const long long plane = static_cast<long long>(f_image.height()) * f_image.width();

    TensorF y(f_image.frames(), w.c_image, f_image.height(), f_image.width());
    for (int t = 0; t < f_image.frames(); ++t) {
        const auto maps = attention_maps(f_image, f_depth, w, t);
        for (int head = 0; head < w.heads; ++head) {
            const std::vector<float>& a = maps[head];
#pragma omp parallel for schedule(static)
            for (int i = 0; i < hq; ++i) {
                float* dst = y.frame_channel(t, head * hq + i);
                for (long long p = 0; p < plane; ++p) dst[p] = 0.0f;
                for (int j = 0; j < hk; ++j) {
                    const float aij = a[static_cast<std::size_t>(i) * hk + j];
                    const float* vp = v.frame_channel(t, head * hk + j);
                    for (long long p = 0; p < plane; ++p) dst[p] += aij * vp[p];
                }
            }
        }
    }
    return conv1x1(y, w.project);
}

TensorF sft_modulate(const TensorF& f_image, const TensorF& condition, const DatWeights& w) {
    if (f_image.height() != condition.height() || f_image.width() != condition.width() ||
        f_image.frames() != condition.frames())
        throw InputError("sft_modulate: shape mismatch between features and condition");
    const TensorF gamma = apply_sft_map(condition, w.sft_gamma);
    const TensorF beta = apply_sft_map(condition, w.sft_beta);
    if (!gamma.same_shape(f_image) || !beta.same_shape(f_image))
        throw ConfigError("sft_modulate: predicted maps do not match feature shape");
    TensorF out(f_image.frames(), f_image.channels(), f_image.height(), f_image.width());
    const long long n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
        out.data()[i] = gamma.data()[i] * f_image.data()[i] + beta.data()[i];
    return out;
}

TensorF gdfn(const TensorF& f, const DatWeights& w) {
    if (f.channels() != w.c_image) throw ConfigError("gdfn: channel count disagrees with weights");
    const TensorF normed = layer_norm(f, w.norm);
    const TensorF gate = gelu(dwconv3x3(conv1x1(normed, w.gdfn_expand1), w.gdfn_dw1));
    const TensorF lane = dwconv3x3(conv1x1(normed, w.gdfn_expand2), w.gdfn_dw2);
    TensorF gated(gate.frames(), gate.channels(), gate.height(), gate.width());
    const long long n = static_cast<long long>(gated.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) gated.data()[i] = gate.data()[i] * lane.data()[i];
    TensorF out = conv1x1(gated, w.gdfn_project);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(out.size()); ++i)
        out.data()[i] += f.data()[i];
    return out;
}

TensorF dat_block(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w) {
    const TensorF aligned = cross_attention(f_image, f_depth, w);
    return gdfn(sft_modulate(f_image, aligned, w), w);
}

TensorF fuse_depth(const TensorF& f_image, const TensorF& f_depth, const DatWeights& w,
                   bool use_gss, const GssConfig& gss_cfg) {
    if (!use_gss) return dat_block(f_image, f_depth, w);
    const TensorF shifted = grouped_spatial_shift(f_depth, gss_cfg);
    return dat_block(f_image, concat_channels(f_depth, shifted), w);
}

namespace {

Conv1x1 random_conv1x1(Rng& rng, int in_ch, int out_ch, bool bias) {
    Conv1x1 c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.weight.resize(static_cast<std::size_t>(in_ch) * out_ch);
    for (auto& v : c.weight) v = rng.uniform_float(-0.5f, 0.5f);
    if (bias) {
        c.bias.resize(out_ch);
        for (auto& v : c.bias) v = rng.uniform_float(-0.2f, 0.2f);
    }
    return c;
}

DwConv3x3 random_dw3x3(Rng& rng, int channels, bool bias) {
    DwConv3x3 d;
    d.channels = channels;
    d.weight.resize(static_cast<std::size_t>(channels) * 9);
    for (auto& v : d.weight) v = rng.uniform_float(-0.3f, 0.3f);
    if (bias) {
        d.bias.resize(channels);
        for (auto& v : d.bias) v = rng.uniform_float(-0.1f, 0.1f);
    }
    return d;
}

}  // namespace

DatWeights random_dat_weights(Rng& rng, int c_image, int c_depth, int heads, int expansion) {
    DatWeights w;
    w.heads = heads;
    w.c_image = c_image;
    w.c_depth = c_depth;
    w.expansion = expansion;
    w.query = {random_conv1x1(rng, c_image, c_image, false), random_dw3x3(rng, c_image, false)};
    w.key = {random_conv1x1(rng, c_depth, c_depth, false), random_dw3x3(rng, c_depth, false)};
    w.value = {random_conv1x1(rng, c_depth, c_depth, false), random_dw3x3(rng, c_depth, false)};
    w.log_alpha.resize(heads);
    for (auto& v : w.log_alpha) v = rng.uniform_float(-0.5f, 0.5f);
    w.project = random_conv1x1(rng, c_image, c_image, false);
    w.sft_gamma = {random_conv1x1(rng, c_image, c_image, true),
                   random_conv1x1(rng, c_image, c_image, true), 0.1f};
    w.sft_beta = {random_conv1x1(rng, c_image, c_image, true),
                  random_conv1x1(rng, c_image, c_image, true), 0.1f};
    w.norm.gamma.resize(c_image);
    w.norm.beta.resize(c_image);
    for (auto& v : w.norm.gamma) v = rng.uniform_float(0.5f, 1.5f);
    for (auto& v : w.norm.beta) v = rng.uniform_float(-0.2f, 0.2f);
    const int hidden = expansion * c_image;
    w.gdfn_expand1 = random_conv1x1(rng, c_image, hidden, false);
    w.gdfn_dw1 = random_dw3x3(rng, hidden, false);
    w.gdfn_expand2 = random_conv1x1(rng, c_image, hidden, false);
    w.gdfn_dw2 = random_dw3x3(rng, hidden, false);
    w.gdfn_project = random_conv1x1(rng, hidden, c_image, false);
    w.validate();
    return w;
}

namespace {

using nlohmann::json;

json conv_to_json(const Conv1x1& c) {
    json j;
    j["in_ch"] = c.in_ch;
    j["out_ch"] = c.out_ch;
    j["weight"] = c.weight;
    j["bias"] = c.bias;
    return j;
}

Conv1x1 conv_from_json(const json& j) {
    Conv1x1 c;
    c.in_ch = j.at("in_ch").get<int>();
    c.out_ch = j.at("out_ch").get<int>();
    c.weight = j.at("weight").get<std::vector<float>>();
    c.bias = j.at("bias").get<std::vector<float>>();
    return c;
}

json dw_to_json(const DwConv3x3& d) {
    json j;
    j["channels"] = d.channels;
    j["weight"] = d.weight;
    j["bias"] = d.bias;
    return j;
}

DwConv3x3 dw_from_json(const json& j) {
    DwConv3x3 d;
    d.channels = j.at("channels").get<int>();
    d.weight = j.at("weight").get<std::vector<float>>();
    d.bias = j.at("bias").get<std::vector<float>>();
    return d;
}

json qkv_to_json(const QkvProjection& p) {
    return json{{"pointwise", conv_to_json(p.pointwise)}, {"depthwise", dw_to_json(p.depthwise)}};
}

QkvProjection qkv_from_json(const json& j) {
    return {conv_from_json(j.at("pointwise")), dw_from_json(j.at("depthwise"))};
}

json sft_to_json(const SftMap& m) {
    return json{{"first", conv_to_json(m.first)},
                {"second", conv_to_json(m.second)},
                {"leaky_slope", m.leaky_slope}};
}

SftMap sft_from_json(const json& j) {
    return {conv_from_json(j.at("first")), conv_from_json(j.at("second")),
            j.at("leaky_slope").get<float>()};
}

}  // namespace

void save_dat_weights(const std::string& path, const DatWeights& w) {
    json j;
    j["schema"] = 1;
    j["heads"] = w.heads;
    j["c_image"] = w.c_image;
    j["c_depth"] = w.c_depth;
    j["expansion"] = w.expansion;
    j["query"] = qkv_to_json(w.query);
    j["key"] = qkv_to_json(w.key);
    j["value"] = qkv_to_json(w.value);
    j["log_alpha"] = w.log_alpha;
    j["project"] = conv_to_json(w.project);
    j["sft_gamma"] = sft_to_json(w.sft_gamma);
    j["sft_beta"] = sft_to_json(w.sft_beta);
    j["norm"] = {{"gamma", w.norm.gamma}, {"beta", w.norm.beta}, {"eps", w.norm.eps}};
    j["gdfn_expand1"] = conv_to_json(w.gdfn_expand1);
    j["gdfn_dw1"] = dw_to_json(w.gdfn_dw1);
    j["gdfn_expand2"] = conv_to_json(w.gdfn_expand2);
    j["gdfn_dw2"] = dw_to_json(w.gdfn_dw2);
    j["gdfn_project"] = conv_to_json(w.gdfn_project);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write weights: " + path);
    f << j.dump(1) << '\n';
}

DatWeights load_dat_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read weights: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    if (j.value("schema", 0) != 1) throw InputError(path + ": unsupported schema");
    DatWeights w;
    w.heads = j.at("heads").get<int>();
    w.c_image = j.at("c_image").get<int>();
    w.c_depth = j.at("c_depth").get<int>();
    w.expansion = j.at("expansion").get<int>();
    w.query = qkv_from_json(j.at("query"));
    w.key = qkv_from_json(j.at("key"));
    w.value = qkv_from_json(j.at("value"));
    w.log_alpha = j.at("log_alpha").get<std::vector<float>>();
    w.project = conv_from_json(j.at("project"));
    w.sft_gamma = sft_from_json(j.at("sft_gamma"));
    w.sft_beta = sft_from_json(j.at("sft_beta"));
    w.norm.gamma = j.at("norm").at("gamma").get<std::vector<float>>();
    w.norm.beta = j.at("norm").at("beta").get<std::vector<float>>();
    w.norm.eps = j.at("norm").at("eps").get<float>();
    w.gdfn_expand1 = conv_from_json(j.at("gdfn_expand1"));
    w.gdfn_dw1 = dw_from_json(j.at("gdfn_dw1"));
    w.gdfn_expand2 = conv_from_json(j.at("gdfn_expand2"));
    w.gdfn_dw2 = dw_from_json(j.at("gdfn_dw2"));
    w.gdfn_project = conv_from_json(j.at("gdfn_project"));
    w.validate();
    return w;
}

}  // namespace blurforge
