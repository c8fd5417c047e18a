#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "blurforge/ref.hpp"
#include "blurforge/verify.hpp"
#include "helpers.hpp"

using namespace blurforge;
using namespace blurforge::testing;

namespace {

TensorF tensor_from(std::initializer_list<float> values, int t, int c, int h, int w) {
    TensorF out(t, c, h, w);
    std::size_t i = 0;
    for (float v : values) out.data()[i++] = v;
    REQUIRE(i == out.size());
    return out;
}

double rel_dev(const TensorF& got, const TensorD& want) {
    double max_ref = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i)
        max_ref = std::max(max_ref, std::abs(want.data()[i]));
    for (std::size_t i = 0; i < want.size(); ++i)
        dev = std::max(dev, std::abs(static_cast<double>(got.data()[i]) - want.data()[i]));
    return dev / std::max(max_ref, 1e-3);
}

}  // namespace

TEST_CASE("temporal shift") {
    SUBCASE("worked 2x2 example: forward roll by one slab") {
        const TensorF f = tensor_from({1.0f, 2.0f, 3.0f, 4.0f}, 2, 2, 1, 1);  // [a,b | c,d]
        const TensorF fwd = temporal_shift(f, ShiftDirection::Forward);
        CHECK(fwd.at(0, 0, 0, 0) == 4.0f);  // [d,a | b,c]
        CHECK(fwd.at(0, 1, 0, 0) == 1.0f);
        CHECK(fwd.at(1, 0, 0, 0) == 2.0f);
        CHECK(fwd.at(1, 1, 0, 0) == 3.0f);
    }
    SUBCASE("forward then backward is the identity") {
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            TensorF f(rng.uniform_int(1, 4), 2 * rng.uniform_int(1, 4), rng.uniform_int(1, 5),
                      rng.uniform_int(1, 5));
            for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-2, 2);
            const TensorF round =
                temporal_shift(temporal_shift(f, ShiftDirection::Forward), ShiftDirection::Backward);
            CHECK(round == f);
        }
    }
    SUBCASE("single frame is returned unchanged") {
        Rng rng(2);
        TensorF f(1, 6, 3, 3);
        for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-2, 2);
        CHECK(temporal_shift(f, ShiftDirection::Forward) == f);
        CHECK(temporal_shift(f, ShiftDirection::Backward) == f);
    }
    SUBCASE("odd channel count is a configuration error") {
        const TensorF f(2, 3, 2, 2);
        CHECK_THROWS_AS(temporal_shift(f, ShiftDirection::Forward), ConfigError);
    }
    SUBCASE("matches the flatten-roll-reshape oracle") {
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            TensorF f(rng.uniform_int(1, 4), 2 * rng.uniform_int(1, 4), rng.uniform_int(1, 5),
                      rng.uniform_int(1, 5));
            for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-2, 2);
            CHECK(temporal_shift(f, ShiftDirection::Forward) ==
                  ref::temporal_shift(f, ShiftDirection::Forward));
            CHECK(temporal_shift(f, ShiftDirection::Backward) ==
                  ref::temporal_shift(f, ShiftDirection::Backward));
        }
    }
}

TEST_CASE("grouped spatial shift") {
    SUBCASE("column shift on a 3x3 grid") {
        TensorF f(1, 1, 3, 3);
        for (int i = 0; i < 9; ++i) f.data()[i] = static_cast<float>(i + 1);
        GssConfig cfg;
        cfg.groups.push_back({1, 1, 0});
        const TensorF out = grouped_spatial_shift(f, cfg);
        for (int y = 0; y < 3; ++y) {
            CHECK(out.at(0, 0, y, 0) == 0.0f);
            CHECK(out.at(0, 0, y, 1) == f.at(0, 0, y, 0));
            CHECK(out.at(0, 0, y, 2) == f.at(0, 0, y, 1));
        }
    }
    SUBCASE("zero offsets are the identity") {
        Rng rng(4);
        TensorF f(2, 5, 4, 4);
        for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-2, 2);
        GssConfig cfg;
        cfg.groups.push_back({5, 0, 0});
        CHECK(grouped_spatial_shift(f, cfg) == f);
    }
    SUBCASE("offset past the width empties the group") {
        TensorF f(1, 2, 3, 3, 1.0f);
        GssConfig cfg;
        cfg.groups.push_back({1, 3, 0});
        cfg.groups.push_back({1, 0, 0});
        const TensorF out = grouped_spatial_shift(f, cfg);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) {
                CHECK(out.at(0, 0, y, x) == 0.0f);
                CHECK(out.at(0, 1, y, x) == 1.0f);
            }
    }
    SUBCASE("group sum mismatch is a configuration error") {
        const TensorF f(1, 4, 2, 2);
        GssConfig cfg;
        cfg.groups.push_back({3, 1, 1});
        CHECK_THROWS_AS(grouped_spatial_shift(f, cfg), ConfigError);
    }
    SUBCASE("grid9 covers all channels and offsets") {
        const GssConfig cfg = GssConfig::grid9(18, 2);
        CHECK(cfg.total_channels() == 18);
        CHECK(cfg.groups.size() == 9);
        CHECK(cfg.groups[0].dx == -2);
        CHECK(cfg.groups[0].dy == -2);
        CHECK(cfg.groups[4].dx == 0);
        CHECK(cfg.groups[4].dy == 0);
    }
}

TEST_CASE("half selection and channel concatenation") {
    Rng rng(5);
    TensorF f(2, 4, 2, 2);
    for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-2, 2);

    auto [fwd_sel, fwd_rest] = select_shift_half(f, ShiftDirection::Forward);
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) {
                CHECK(fwd_sel.at(t, 0, y, x) == f.at(t, 0, y, x));
                CHECK(fwd_sel.at(t, 1, y, x) == f.at(t, 1, y, x));
            }
    CHECK(concat_channels(fwd_sel, fwd_rest) == f);

    auto [bwd_sel, bwd_rest] = select_shift_half(f, ShiftDirection::Backward);
    for (int t = 0; t < 2; ++t)
        CHECK(bwd_sel.at(t, 0, 0, 0) == f.at(t, 2, 0, 0));
    CHECK(concat_channels(bwd_rest, bwd_sel) == f);

    SUBCASE("concat recovers the first operand") {
        const TensorF zeros(2, 3, 2, 2, 0.0f);
        const TensorF joined = concat_channels(f, zeros);
        CHECK(joined.channels() == 7);
        for (int t = 0; t < 2; ++t)
            for (int c = 0; c < 4; ++c)
                for (int y = 0; y < 2; ++y)
                    for (int x = 0; x < 2; ++x) CHECK(joined.at(t, c, y, x) == f.at(t, c, y, x));
    }
    SUBCASE("odd channels rejected") {
        const TensorF odd(1, 3, 2, 2);
        CHECK_THROWS_AS(select_shift_half(odd, ShiftDirection::Forward), ConfigError);
    }
    SUBCASE("shape mismatch rejected") {
        const TensorF other(1, 2, 3, 2);
        CHECK_THROWS_AS(concat_channels(f, other), InputError);
    }
}

TEST_CASE("cross-attention spot checks") {
    Rng rng(6);
    const int ci = 2, cd = 2, h = 2, w = 2;
    DatWeights wts = random_dat_weights(rng, ci, cd, 1);
    TensorF fi(1, ci, h, w), fd(1, cd, h, w);
    for (std::size_t k = 0; k < fi.size(); ++k) fi.data()[k] = rng.uniform_float(-1, 1);
    for (std::size_t k = 0; k < fd.size(); ++k) fd.data()[k] = rng.uniform_float(-1, 1);

    SUBCASE("attention rows sum to one") {
        for (const auto& a : attention_maps(fi, fd, wts)) {
            for (int i = 0; i < ci; ++i) {
                double sum = 0.0;
                for (int j = 0; j < cd; ++j) sum += a[static_cast<std::size_t>(i) * cd + j];
                CHECK(std::abs(sum - 1.0) < 1e-6);
            }
        }
    }
    SUBCASE("identity-projection instance matches the brute-force oracle") {
        // Identity pointwise convs and center-tap depthwise kernels.
        DatWeights id = wts;
        auto identity_conv = [](int ch) {
            Conv1x1 c;
            c.in_ch = ch;
            c.out_ch = ch;
            c.weight.assign(static_cast<std::size_t>(ch) * ch, 0.0f);
            for (int i = 0; i < ch; ++i) c.weight[static_cast<std::size_t>(i) * ch + i] = 1.0f;
            return c;
        };
        auto center_dw = [](int ch) {
            DwConv3x3 d;
            d.channels = ch;
            d.weight.assign(static_cast<std::size_t>(ch) * 9, 0.0f);
            for (int c = 0; c < ch; ++c) d.weight[static_cast<std::size_t>(c) * 9 + 4] = 1.0f;
            return d;
        };
        id.query = {identity_conv(ci), center_dw(ci)};
        id.key = {identity_conv(cd), center_dw(cd)};
        id.value = {identity_conv(cd), center_dw(cd)};
        id.project = identity_conv(ci);
        id.log_alpha = {0.0f};  // alpha = 1

        const TensorF got = cross_attention(fi, fd, id);
        // Direct naive computation: A[i][j] = softmax_j(sum_p fi_i[p] fd_j[p]).
        std::vector<double> expect(got.size(), 0.0);
        for (int i = 0; i < ci; ++i) {
            std::vector<double> logits(cd, 0.0);
            for (int j = 0; j < cd; ++j)
                for (int p = 0; p < h * w; ++p)
                    logits[j] += static_cast<double>(fi.frame_channel(0, i)[p]) *
                                 static_cast<double>(fd.frame_channel(0, j)[p]);
            const auto row = ref::softmax_row(logits);
            for (int p = 0; p < h * w; ++p) {
                double acc = 0.0;
                for (int j = 0; j < cd; ++j)
                    acc += row[j] * static_cast<double>(fd.frame_channel(0, j)[p]);
                expect[static_cast<std::size_t>(i) * h * w + p] = acc;
            }
        }
        for (std::size_t k = 0; k < got.size(); ++k)
            CHECK(std::abs(static_cast<double>(got.data()[k]) - expect[k]) < 1e-5);
    }
    SUBCASE("random instance matches the triple-loop oracle") {
        CHECK(rel_dev(cross_attention(fi, fd, wts), ref::cross_attention(fi, fd, wts)) < 1e-5);
    }
    SUBCASE("constant keys: output replicates the per-pixel mean of the values") {
        DatWeights uniform = wts;
        auto identity_conv = [](int ch) {
            Conv1x1 c;
            c.in_ch = ch;
            c.out_ch = ch;
            c.weight.assign(static_cast<std::size_t>(ch) * ch, 0.0f);
            for (int i = 0; i < ch; ++i) c.weight[static_cast<std::size_t>(i) * ch + i] = 1.0f;
            return c;
        };
        auto center_dw = [](int ch) {
            DwConv3x3 d;
            d.channels = ch;
            d.weight.assign(static_cast<std::size_t>(ch) * 9, 0.0f);
            for (int c = 0; c < ch; ++c) d.weight[static_cast<std::size_t>(c) * 9 + 4] = 1.0f;
            return d;
        };
        uniform.query = {identity_conv(ci), center_dw(ci)};
        uniform.value = {identity_conv(cd), center_dw(cd)};
        uniform.project = identity_conv(ci);
        // Every key plane identical: zero pointwise weights, constant bias-free
        // depthwise output of zero; logits constant per row.
        uniform.key.pointwise.weight.assign(uniform.key.pointwise.weight.size(), 0.0f);
        uniform.key.depthwise = center_dw(cd);

        const TensorF out = cross_attention(fi, fd, uniform);
        for (int p = 0; p < h * w; ++p) {
            double mean = 0.0;
            for (int j = 0; j < cd; ++j) mean += fd.frame_channel(0, j)[p];
            mean /= cd;
            for (int i = 0; i < ci; ++i)
                CHECK(std::abs(out.frame_channel(0, i)[p] - mean) < 1e-6);
        }
    }
    SUBCASE("head divisibility is enforced") {
        CHECK_THROWS_AS(random_dat_weights(rng, 3, 2, 2), ConfigError);
    }
}

TEST_CASE("sft and gdfn spot checks") {
    Rng rng(7);
    const int ci = 2, h = 3, w = 3;
    DatWeights wts = random_dat_weights(rng, ci, 2);
    TensorF f(1, ci, h, w), cond(1, ci, h, w);
    for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] = rng.uniform_float(-1, 1);
    for (std::size_t k = 0; k < cond.size(); ++k) cond.data()[k] = rng.uniform_float(-1, 1);

    SUBCASE("constant-offset weights produce a constant output") {
        DatWeights constant = wts;
        constant.sft_gamma.second.weight.assign(constant.sft_gamma.second.weight.size(), 0.0f);
        constant.sft_gamma.second.bias.assign(ci, 0.0f);
        constant.sft_beta.second.weight.assign(constant.sft_beta.second.weight.size(), 0.0f);
        constant.sft_beta.second.bias.assign(ci, 2.5f);
        const TensorF out = sft_modulate(f, cond, constant);
        for (std::size_t k = 0; k < out.size(); ++k) CHECK(out.data()[k] == 2.5f);
    }
    SUBCASE("random weights match the per-pixel oracle") {
        CHECK(rel_dev(sft_modulate(f, cond, wts), ref::sft_modulate(f, cond, wts)) < 1e-5);
        CHECK(rel_dev(gdfn(f, wts), ref::gdfn(f, wts)) < 1e-5);
    }
    SUBCASE("composed block equals composed oracles") {
        TensorF fd(1, 2, h, w);
        for (std::size_t k = 0; k < fd.size(); ++k) fd.data()[k] = rng.uniform_float(-1, 1);
        CHECK(rel_dev(dat_block(f, fd, wts), ref::dat_block(f, fd, wts)) < 1e-5);
        CHECK(dat_block(f, fd, wts).same_shape(f));

        DatWeights wide = random_dat_weights(rng, ci, 4);
        const GssConfig gss = GssConfig::grid9(2, 1);
        CHECK(rel_dev(fuse_depth(f, fd, wide, true, gss), ref::fuse_depth(f, fd, wide, true, gss)) <
              1e-5);
        CHECK(fuse_depth(f, fd, wts, false) == dat_block(f, fd, wts));
    }
    SUBCASE("shape mismatch is rejected") {
        const TensorF bad(1, ci, h, w + 1);
        CHECK_THROWS_AS(sft_modulate(f, bad, wts), InputError);
    }
}

TEST_CASE("dat weight fixtures round-trip through json") {
    Rng rng(8);
    const DatWeights w = random_dat_weights(rng, 4, 2, 2, 3);
    const auto dir = scratch_dir("dat_weights");
    const std::string path = (dir / "weights.json").string();
    save_dat_weights(path, w);
    const DatWeights back = load_dat_weights(path);
    CHECK(back.heads == w.heads);
    CHECK(back.c_image == w.c_image);
    CHECK(back.expansion == w.expansion);
    CHECK(back.query.pointwise.weight == w.query.pointwise.weight);
    CHECK(back.gdfn_dw2.weight == w.gdfn_dw2.weight);
    CHECK(back.log_alpha == w.log_alpha);

    Rng rng2(9);
    TensorF fi(1, 4, 2, 2), fd(1, 2, 2, 2);
    for (std::size_t k = 0; k < fi.size(); ++k) fi.data()[k] = rng2.uniform_float(-1, 1);
    for (std::size_t k = 0; k < fd.size(); ++k) fd.data()[k] = rng2.uniform_float(-1, 1);
    CHECK(dat_block(fi, fd, back) == dat_block(fi, fd, w));
}

TEST_CASE("row softmax matches the double-precision oracle") {
    Rng rng(21);
    const int rows = 5, cols = 7;
    std::vector<float> m(rows * cols);
    for (auto& v : m) v = rng.uniform_float(-8.0f, 8.0f);
    std::vector<float> got = m;
    softmax_rows(got, rows, cols);
    for (int r = 0; r < rows; ++r) {
        std::vector<double> logits(cols);
        for (int j = 0; j < cols; ++j) logits[j] = m[static_cast<std::size_t>(r) * cols + j];
        const auto want = ref::softmax_row(logits);
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            CHECK(std::abs(static_cast<double>(got[static_cast<std::size_t>(r) * cols + j]) -
                           want[j]) < 1e-6);
            sum += got[static_cast<std::size_t>(r) * cols + j];
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }
    CHECK_THROWS_AS(softmax_rows(got, rows, cols + 1), ConfigError);
}

TEST_CASE("kernel outputs do not depend on the thread count") {
    Rng rng(12);
    const DatWeights w = random_dat_weights(rng, 4, 4, 2);
    TensorF fi(2, 4, 6, 7), fd(2, 4, 6, 7);
    for (std::size_t k = 0; k < fi.size(); ++k) fi.data()[k] = rng.uniform_float(-1, 1);
    for (std::size_t k = 0; k < fd.size(); ++k) fd.data()[k] = rng.uniform_float(-1, 1);

    const int before = omp_get_max_threads();
    omp_set_num_threads(1);
    const TensorF serial = dat_block(fi, fd, w);
    const TensorF shift_serial = temporal_shift(fi, ShiftDirection::Forward);
    omp_set_num_threads(std::max(2, before));
    const TensorF parallel = dat_block(fi, fd, w);
    const TensorF shift_parallel = temporal_shift(fi, ShiftDirection::Forward);
    omp_set_num_threads(before);

    CHECK(serial == parallel);
    CHECK(shift_serial == shift_parallel);
}

TEST_CASE("randomized verification suite passes end to end") {
    const KernelReport report = verify_kernels(20240917ULL, 24);
    for (const auto& c : report.checks) {
        INFO(c.name, " max_dev=", c.max_deviation, " tol=", c.tolerance);
        CHECK(c.pass);
    }
    CHECK(report.all_pass());

    // Same seed, same report.
    const KernelReport again = verify_kernels(20240917ULL, 24);
    REQUIRE(again.checks.size() == report.checks.size());
    for (std::size_t i = 0; i < report.checks.size(); ++i)
        CHECK(again.checks[i].max_deviation == report.checks[i].max_deviation);
}
