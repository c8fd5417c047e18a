#include "blurforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "blurforge/ref.hpp"
#include "blurforge/version.hpp"

namespace blurforge {

namespace {

TensorF random_tensor(Rng& rng, int t, int c, int h, int w, float lo = -1.0f, float hi = 1.0f) {
    TensorF out(t, c, h, w);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform_float(lo, hi);
    return out;
}

double max_abs_diff(const TensorF& a, const TensorF& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return m;
}

// Relative deviation of the float result against the double oracle, scaled by
// the oracle's largest magnitude (floored to keep near-zero cases sane).
double rel_deviation(const TensorF& got, const TensorD& want) {
    double max_ref = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) max_ref = std::max(max_ref, std::abs(want.data()[i]));
    const double denom = std::max(max_ref, 1e-3);
    double dev = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i)
        dev = std::max(dev, std::abs(static_cast<double>(got.data()[i]) - want.data()[i]));
    return dev / denom;
}

// All-zero weights for a conv of the given shape.
Conv1x1 zero_conv(int in_ch, int out_ch, bool bias) {
    Conv1x1 c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.weight.assign(static_cast<std::size_t>(in_ch) * out_ch, 0.0f);
    if (bias) c.bias.assign(out_ch, 0.0f);
    return c;
}

// Depthwise kernel hitting only the center tap, so the projection stays
// pointwise (needed by the permutation-equivariance property).
DwConv3x3 center_tap_dw(int channels, float value = 1.0f) {
    DwConv3x3 d;
    d.channels = channels;
    d.weight.assign(static_cast<std::size_t>(channels) * 9, 0.0f);
    for (int c = 0; c < channels; ++c) d.weight[static_cast<std::size_t>(c) * 9 + 4] = value;
    return d;
}

struct CheckAccumulator {
    KernelCheck check;
    explicit CheckAccumulator(std::string name, double tolerance) {
        check.name = std::move(name);
        check.tolerance = tolerance;
    }
    void record(double deviation) {
        ++check.cases;
        check.max_deviation = std::max(check.max_deviation, deviation);
    }
    KernelCheck finish() {
        check.pass = check.tolerance == 0.0 ? check.max_deviation == 0.0
                                            : check.max_deviation <= check.tolerance;
        return check;
    }
};

}  // namespace

KernelReport verify_kernels(std::uint64_t seed, int cases) {
    if (cases < 1) throw InputError("verify_kernels: cases must be >= 1");
    KernelReport report;
    report.seed = seed;
    report.cases = cases;
    Rng rng(seed);

    // Temporal shift: forward-then-backward identity, oracle equality, T=1 no-op.
    {
        CheckAccumulator inverse("temporal_shift_forward_backward_identity", 0.0);
        CheckAccumulator oracle("temporal_shift_oracle_equality", 0.0);
        CheckAccumulator single("temporal_shift_single_frame_noop", 0.0);
        for (int i = 0; i < cases; ++i) {
            const int t = rng.uniform_int(1, 4);
            const int c = 2 * rng.uniform_int(1, 4);
            const int h = rng.uniform_int(1, 5);
            const int w = rng.uniform_int(1, 5);
            const TensorF f = random_tensor(rng, t, c, h, w);
            const TensorF fwd = temporal_shift(f, ShiftDirection::Forward);
            inverse.record(max_abs_diff(temporal_shift(fwd, ShiftDirection::Backward), f));
            oracle.record(max_abs_diff(fwd, ref::temporal_shift(f, ShiftDirection::Forward)));
            oracle.record(max_abs_diff(temporal_shift(f, ShiftDirection::Backward),
                                       ref::temporal_shift(f, ShiftDirection::Backward)));
            TensorF one = random_tensor(rng, 1, c, h, w);
            single.record(max_abs_diff(temporal_shift(one, ShiftDirection::Forward), one));
        }
        report.checks.push_back(inverse.finish());
        report.checks.push_back(oracle.finish());
        report.checks.push_back(single.finish());
    }

    // Grouped spatial shift: oracle equality, zero-offset identity, OOB zeroing.
    {
        CheckAccumulator oracle("grouped_spatial_shift_oracle_equality", 0.0);
        CheckAccumulator identity("grouped_spatial_shift_zero_offset_identity", 0.0);
        CheckAccumulator oob("grouped_spatial_shift_out_of_bounds_zero", 0.0);
        CheckAccumulator zeros("grouped_spatial_shift_zero_input", 0.0);
        for (int i = 0; i < cases; ++i) {
            const int t = rng.uniform_int(1, 3);
            const int h = rng.uniform_int(1, 6);
            const int w = rng.uniform_int(1, 6);
            const int n_groups = rng.uniform_int(1, 4);
            GssConfig cfg;
            int c = 0;
            for (int g = 0; g < n_groups; ++g) {
                GssGroup group;
                group.channels = rng.uniform_int(1, 3);
                group.dx = rng.uniform_int(-w, w);
                group.dy = rng.uniform_int(-h, h);
                cfg.groups.push_back(group);
                c += group.channels;
            }
            const TensorF f = random_tensor(rng, t, c, h, w);
            oracle.record(max_abs_diff(grouped_spatial_shift(f, cfg),
                                       ref::grouped_spatial_shift(f, cfg)));

            GssConfig zero_cfg;
            zero_cfg.groups.push_back({c, 0, 0});
            identity.record(max_abs_diff(grouped_spatial_shift(f, zero_cfg), f));

            GssConfig oob_cfg;
            oob_cfg.groups.push_back({c, w, h});  // full discard
            const TensorF shifted = grouped_spatial_shift(f, oob_cfg);
            double m = 0.0;
            for (std::size_t k = 0; k < shifted.size(); ++k)
                m = std::max(m, std::abs(static_cast<double>(shifted.data()[k])));
            oob.record(m);

            const TensorF z(t, c, h, w, 0.0f);
            const TensorF sz = grouped_spatial_shift(z, cfg);
            double mz = 0.0;
            for (std::size_t k = 0; k < sz.size(); ++k)
                mz = std::max(mz, std::abs(static_cast<double>(sz.data()[k])));
            zeros.record(mz);
        }
        report.checks.push_back(oracle.finish());
        report.checks.push_back(identity.finish());
        report.checks.push_back(oob.finish());
        report.checks.push_back(zeros.finish());
    }

    // Half selection and concatenation reconstruct the input.
    {
        CheckAccumulator recon("select_half_concat_reconstruction", 0.0);
        CheckAccumulator oracle("concat_channels_oracle_equality", 0.0);
        for (int i = 0; i < cases; ++i) {
            const int t = rng.uniform_int(1, 3);
            const int c = 2 * rng.uniform_int(1, 4);
            const int h = rng.uniform_int(1, 5);
            const int w = rng.uniform_int(1, 5);
            const TensorF f = random_tensor(rng, t, c, h, w);
            auto [sel_f, rest_f] = select_shift_half(f, ShiftDirection::Forward);
            recon.record(max_abs_diff(concat_channels(sel_f, rest_f), f));
            auto [sel_b, rest_b] = select_shift_half(f, ShiftDirection::Backward);
            recon.record(max_abs_diff(concat_channels(rest_b, sel_b), f));
            oracle.record(max_abs_diff(concat_channels(sel_f, rest_f),
                                       ref::concat_channels(sel_f, rest_f)));
        }
        report.checks.push_back(recon.finish());
        report.checks.push_back(oracle.finish());
    }

    // Primitive convolutions, layer norm and gelu against the double oracles.
    {
        CheckAccumulator conv("conv1x1_oracle", 1e-5);
        CheckAccumulator dw("dwconv3x3_oracle", 1e-5);
        CheckAccumulator ln("layer_norm_oracle", 1e-5);
        CheckAccumulator gl("gelu_oracle", 1e-5);
        for (int i = 0; i < std::max(1, cases / 2); ++i) {
            const int t = rng.uniform_int(1, 2);
            const int cin = rng.uniform_int(1, 4);
            const int cout = rng.uniform_int(1, 4);
            const int h = rng.uniform_int(1, 5);
            const int w = rng.uniform_int(1, 5);
            const TensorF f = random_tensor(rng, t, cin, h, w);

            Conv1x1 cw;
            cw.in_ch = cin;
            cw.out_ch = cout;
            cw.weight.resize(static_cast<std::size_t>(cin) * cout);
            for (auto& v : cw.weight) v = rng.uniform_float(-1.0f, 1.0f);
            if (rng.uniform_int(0, 1)) {
                cw.bias.resize(cout);
                for (auto& v : cw.bias) v = rng.uniform_float(-0.5f, 0.5f);
            }
            conv.record(rel_deviation(conv1x1(f, cw), ref::conv1x1(f, cw)));

            DwConv3x3 dww;
            dww.channels = cin;
            dww.weight.resize(static_cast<std::size_t>(cin) * 9);
            for (auto& v : dww.weight) v = rng.uniform_float(-1.0f, 1.0f);
            dw.record(rel_deviation(dwconv3x3(f, dww), ref::dwconv3x3(f, dww)));

            LayerNormParams lp;
            lp.gamma.resize(cin);
            lp.beta.resize(cin);
            for (auto& v : lp.gamma) v = rng.uniform_float(0.5f, 1.5f);
            for (auto& v : lp.beta) v = rng.uniform_float(-0.5f, 0.5f);
            ln.record(rel_deviation(layer_norm(f, lp), ref::layer_norm(f, lp)));

            gl.record(rel_deviation(gelu(f), ref::gelu_tensor(f)));
        }
        report.checks.push_back(conv.finish());
        report.checks.push_back(dw.finish());
        report.checks.push_back(ln.finish());
        report.checks.push_back(gl.finish());
    }

    // Cross-attention: row-stochastic maps, triple-loop oracle, uniform rows
    // under constant keys (and alpha invariance there), permutation
    // equivariance with pointwise projections.
    {
        CheckAccumulator rows("cross_attention_rows_sum_to_one", 1e-6);
        CheckAccumulator oracle("cross_attention_oracle", 1e-5);
        CheckAccumulator uniform("cross_attention_constant_key_uniform_rows", 1e-6);
        CheckAccumulator alpha_inv("cross_attention_alpha_invariance_uniform", 0.0);
        CheckAccumulator perm("cross_attention_permutation_equivariance", 1e-6);
        const int n = std::max(1, cases / 2);
        for (int i = 0; i < n; ++i) {
            const int heads = rng.uniform_int(1, 2);
            const int ci = heads * rng.uniform_int(1, 3);
            const int cd = heads * rng.uniform_int(1, 3);
            const int h = rng.uniform_int(1, 4);
            const int w = rng.uniform_int(1, 4);
            DatWeights dwts = random_dat_weights(rng, ci, cd, heads);
            const TensorF fi = random_tensor(rng, 1, ci, h, w);
            const TensorF fd = random_tensor(rng, 1, cd, h, w);

            for (const auto& a : attention_maps(fi, fd, dwts)) {
                const int hk = cd / heads;
                const int hq = ci / heads;
                for (int r = 0; r < hq; ++r) {
                    double sum = 0.0;
                    for (int j = 0; j < hk; ++j) sum += a[static_cast<std::size_t>(r) * hk + j];
                    rows.record(std::abs(sum - 1.0));
                }
            }
            oracle.record(rel_deviation(cross_attention(fi, fd, dwts),
                                        ref::cross_attention(fi, fd, dwts)));

            // Constant keys: every key plane identical -> uniform attention.
            DatWeights const_key = dwts;
            for (int oc = 0; oc < cd; ++oc)
                for (int ic = 0; ic < cd; ++ic)
                    const_key.key.pointwise.weight[static_cast<std::size_t>(oc) * cd + ic] =
                        const_key.key.pointwise.weight[static_cast<std::size_t>(ic)];
            const_key.key.depthwise = center_tap_dw(cd);
            const auto maps = attention_maps(fi, fd, const_key);
            for (const auto& a : maps) {
                const int hk = cd / heads;
                const double want = 1.0 / hk;
                for (float v : a) uniform.record(std::abs(static_cast<double>(v) - want));
            }
            DatWeights rescaled = const_key;
            for (auto& la : rescaled.log_alpha) la += 1.0f;
            const auto maps2 = attention_maps(fi, fd, rescaled);
            for (std::size_t mi = 0; mi < maps.size(); ++mi)
                for (std::size_t k = 0; k < maps[mi].size(); ++k)
                    alpha_inv.record(std::abs(static_cast<double>(maps[mi][k]) - maps2[mi][k]));

            // Joint spatial permutation with pointwise projections.
            DatWeights pointwise = dwts;
            pointwise.query.depthwise = center_tap_dw(ci);
            pointwise.key.depthwise = center_tap_dw(cd);
            pointwise.value.depthwise = center_tap_dw(cd);
            std::vector<int> p(static_cast<std::size_t>(h) * w);
            std::iota(p.begin(), p.end(), 0);
            for (std::size_t k = p.size(); k > 1; --k)
                std::swap(p[k - 1], p[rng.uniform_int(0, static_cast<int>(k) - 1)]);
            auto permute = [&](const TensorF& src) {
                TensorF dst(src.frames(), src.channels(), src.height(), src.width());
                for (int t = 0; t < src.frames(); ++t)
                    for (int c = 0; c < src.channels(); ++c) {
                        const float* s = src.frame_channel(t, c);
                        float* d = dst.frame_channel(t, c);
                        for (std::size_t k = 0; k < p.size(); ++k) d[p[k]] = s[k];
                    }
                return dst;
            };
            const TensorF out = cross_attention(fi, fd, pointwise);
            const TensorF out_perm = cross_attention(permute(fi), permute(fd), pointwise);
            perm.record(max_abs_diff(out_perm, permute(out)));
        }
        report.checks.push_back(rows.finish());
        report.checks.push_back(oracle.finish());
        report.checks.push_back(uniform.finish());
        report.checks.push_back(alpha_inv.finish());
        report.checks.push_back(perm.finish());
    }

    // SFT and GDFN: degenerate identities exact, oracles, composed block.
    {
        CheckAccumulator sft_id("sft_identity_degenerate_weights", 0.0);
        CheckAccumulator sft_or("sft_oracle", 1e-5);
        CheckAccumulator gdfn_id("gdfn_identity_degenerate_weights", 0.0);
        CheckAccumulator gdfn_or("gdfn_oracle", 1e-5);
        CheckAccumulator dat_or("dat_block_composed_oracle", 1e-5);
        CheckAccumulator fuse_or("fuse_depth_composed_oracle", 1e-5);
        const int n = std::max(1, cases / 2);
        for (int i = 0; i < n; ++i) {
            const int ci = rng.uniform_int(1, 3);
            const int cd = rng.uniform_int(1, 3);
            const int h = rng.uniform_int(1, 4);
            const int w = rng.uniform_int(1, 4);
            DatWeights dwts = random_dat_weights(rng, ci, cd);
            const TensorF fi = random_tensor(rng, 1, ci, h, w);
            const TensorF fd = random_tensor(rng, 1, cd, h, w);
            const TensorF cond = random_tensor(rng, 1, ci, h, w);

            // M_gamma == 1, M_beta == 0 -> identity.
            DatWeights identity = dwts;
            identity.sft_gamma.second = zero_conv(identity.sft_gamma.second.in_ch, ci, true);
            for (auto& b : identity.sft_gamma.second.bias) b = 1.0f;
            identity.sft_beta.second = zero_conv(identity.sft_beta.second.in_ch, ci, true);
            sft_id.record(max_abs_diff(sft_modulate(fi, cond, identity), fi));

            sft_or.record(rel_deviation(sft_modulate(fi, cond, dwts),
                                        ref::sft_modulate(fi, cond, dwts)));

            // Zero output projection -> residual identity; zero gate -> same.
            DatWeights zero_proj = dwts;
            zero_proj.gdfn_project = zero_conv(dwts.expansion * ci, ci, false);
            gdfn_id.record(max_abs_diff(gdfn(fi, zero_proj), fi));
            DatWeights zero_gate = dwts;
            zero_gate.gdfn_expand1 = zero_conv(ci, dwts.expansion * ci, false);
            zero_gate.gdfn_dw1 = center_tap_dw(dwts.expansion * ci, 0.0f);
            gdfn_id.record(max_abs_diff(gdfn(fi, zero_gate), fi));

            gdfn_or.record(rel_deviation(gdfn(fi, dwts), ref::gdfn(fi, dwts)));
            dat_or.record(rel_deviation(dat_block(fi, fd, dwts), ref::dat_block(fi, fd, dwts)));

            DatWeights wide = random_dat_weights(rng, ci, 2 * cd);
            const GssConfig gss = GssConfig::grid9(cd, 1);
            fuse_or.record(rel_deviation(fuse_depth(fi, fd, wide, true, gss),
                                         ref::fuse_depth(fi, fd, wide, true, gss)));
            fuse_or.record(rel_deviation(fuse_depth(fi, fd, dwts, false, {}),
                                         ref::dat_block(fi, fd, dwts)));
        }
        report.checks.push_back(sft_id.finish());
        report.checks.push_back(sft_or.finish());
        report.checks.push_back(gdfn_id.finish());
        report.checks.push_back(gdfn_or.finish());
        report.checks.push_back(dat_or.finish());
        report.checks.push_back(fuse_or.finish());
    }

    return report;
}

void save_kernel_report(const std::string& path, const KernelReport& report) {
    nlohmann::json j;
    j["schema"] = 1;
    j["tool_version"] = kVersion;
    j["seed"] = report.seed;
    j["cases"] = report.cases;
    j["pass"] = report.all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks) {
        j["checks"].push_back({{"name", c.name},
                               {"cases", c.cases},
                               {"max_deviation", c.max_deviation},
                               {"tolerance", c.tolerance},
                               {"pass", c.pass}});
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write report: " + path);
    f << j.dump(2) << '\n';
}

}  // namespace blurforge
