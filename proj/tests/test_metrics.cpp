#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "blurforge/metrics.hpp"
#include "blurforge/ref.hpp"
#include "helpers.hpp"

using namespace blurforge;
using namespace blurforge::testing;

TEST_CASE("psnr closed forms and oracle agreement") {
    Rng rng(3);
    const Image8 a = random_image(rng, 20, 24);

    SUBCASE("identical frames give the infinite sentinel") {
        CHECK(psnr_is_infinite(psnr(a, a)));
    }
    SUBCASE("constant difference of 16 gives 10*log10(255^2/256)") {
        Image8 b = a;
        Image8 c = a;
        for (std::size_t i = 0; i < b.size(); ++i) {
            b.data()[i] = static_cast<std::uint8_t>(std::min(239, static_cast<int>(a.data()[i])));
            c.data()[i] = static_cast<std::uint8_t>(b.data()[i] + 16);
        }
        const double want = 10.0 * std::log10(255.0 * 255.0 / 256.0);
        CHECK(psnr(b, c) == doctest::Approx(want).epsilon(1e-12));
        CHECK(std::abs(psnr(b, c) - 24.0486) < 1e-3);
    }
    SUBCASE("random pair matches the naive loop oracle") {
        const Image8 b = random_image(rng, 20, 24);
        CHECK(psnr(a, b) == doctest::Approx(ref::psnr(a, b)).epsilon(1e-12));
    }
    SUBCASE("symmetry and monotonicity in MSE") {
        const Image8 b = random_image(rng, 20, 24);
        CHECK(psnr(a, b) == psnr(b, a));
        Image8 worse = b;
        for (std::size_t i = 0; i < worse.size(); ++i)
            worse.data()[i] = static_cast<std::uint8_t>(
                std::clamp(static_cast<int>(worse.data()[i]) +
                               (worse.data()[i] >= a.data()[i] ? 40 : -40),
                           0, 255));
        CHECK(psnr(a, worse) < psnr(a, b));
    }
    SUBCASE("translation invariance under a common shift") {
        Image8 b(6, 12), shifted_a(6, 12), shifted_b(6, 12);
        Image8 base(6, 12);
        for (std::size_t i = 0; i < base.size(); ++i) {
            base.data()[i] = static_cast<std::uint8_t>(40 + (i % 150));
            b.data()[i] = static_cast<std::uint8_t>(base.data()[i] + 10);
            shifted_a.data()[i] = static_cast<std::uint8_t>(base.data()[i] + 30);
            shifted_b.data()[i] = static_cast<std::uint8_t>(b.data()[i] + 30);
        }
        CHECK(psnr(base, b) == psnr(shifted_a, shifted_b));
    }
    SUBCASE("dimension mismatch is rejected") {
        const Image8 small(12, 12);
        CHECK_THROWS_AS(psnr(a, small), InputError);
    }
}

TEST_CASE("ssim identities, oracle agreement, symmetry") {
    Rng rng(9);
    SUBCASE("ssim(a,a) is exactly 1") {
        const Image8 a = random_image(rng, 16, 16);
        CHECK(ssim(a, a) == 1.0);
        CHECK(ssim(a, a, SsimMode::PerChannelMean) == 1.0);
    }
    SUBCASE("agrees with the naive windowed-loop oracle on random 16x16 pairs") {
        for (int k = 0; k < 20; ++k) {
            const Image8 a = random_image(rng, 16, 16);
            const Image8 b = random_image(rng, 16, 16);
            CHECK(std::abs(ssim(a, b) - ref::ssim(a, b)) < 1e-7);
        }
    }
    SUBCASE("per-channel mode agrees with its oracle") {
        const Image8 a = random_image(rng, 16, 18);
        const Image8 b = random_image(rng, 16, 18);
        CHECK(std::abs(ssim(a, b, SsimMode::PerChannelMean) -
                       ref::ssim(a, b, SsimMode::PerChannelMean)) < 1e-7);
    }
    SUBCASE("symmetry") {
        const Image8 a = random_image(rng, 16, 16);
        const Image8 b = random_image(rng, 16, 16);
        CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-9);
    }
    SUBCASE("mid-gray against its inverse matches the oracle") {
        Image8 a(16, 16, 128);
        Image8 b(16, 16);
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 255 - 128;
        CHECK(ssim(a, b) == doctest::Approx(ref::ssim(a, b)).epsilon(1e-12));
    }
    SUBCASE("values stay within [-1, 1]") {
        for (int k = 0; k < 5; ++k) {
            const Image8 a = random_image(rng, 14, 14);
            const Image8 b = random_image(rng, 14, 14);
            const double v = ssim(a, b);
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    SUBCASE("images smaller than the window are rejected") {
        const Image8 a(8, 8);
        CHECK_THROWS_AS(ssim(a, a), InputError);
    }
}

namespace {

AnnotationSet make_annotations() {
    AnnotationSet set;
    set.clips["indoor_cm"] = {"Indoors", "CM"};
    set.clips["outdoor_mo"] = {"Outdoors", "CM+MO"};
    set.frames[{"indoor_cm", 0}] = {Proximity::Close, 0.75};
    set.frames[{"indoor_cm", 1}] = {Proximity::Mid, 0.42};
    set.frames[{"outdoor_mo", 0}] = {Proximity::Far, 0.55};
    set.frames[{"outdoor_mo", 1}] = {Proximity::Close, 0.83};
    return set;
}

}  // namespace

TEST_CASE("aggregation by attribute") {
    const AnnotationSet ann = make_annotations();

    SUBCASE("uniform metric value makes every slice mean equal") {
        std::vector<FramePairMetrics> ms = {{"indoor_cm", 0, 30.0, 0.9},
                                            {"indoor_cm", 1, 30.0, 0.9},
                                            {"outdoor_mo", 0, 30.0, 0.9},
                                            {"outdoor_mo", 1, 30.0, 0.9}};
        const SlicedReport rep = aggregate_by_attribute(ms, ann);
        CHECK(rep.overall.mean_psnr == 30.0);
        for (const auto& [cat, values] : rep.slices)
            for (const auto& [value, slice] : values) {
                CHECK(slice.mean_psnr == 30.0);
                CHECK(slice.mean_ssim == 0.9);
            }
        CHECK(rep.missing_annotations.empty());
    }
    SUBCASE("single frame per value reproduces that frame's metric") {
        std::vector<FramePairMetrics> ms = {{"indoor_cm", 0, 31.5, 0.91},
                                            {"outdoor_mo", 0, 28.25, 0.82}};
        const SlicedReport rep = aggregate_by_attribute(ms, ann);
        CHECK(rep.slices.at("environment").at("Indoors").mean_psnr == 31.5);
        CHECK(rep.slices.at("environment").at("Outdoors").mean_psnr == 28.25);
        CHECK(rep.slices.at("proximity").at("Close").mean_psnr == 31.5);
        CHECK(rep.slices.at("proximity").at("Far").mean_psnr == 28.25);
        CHECK(rep.slices.at("motion").at("CM").count == 1);
    }
    SUBCASE("synthetic mix matches hand-computed group means") {
        std::vector<FramePairMetrics> ms = {{"indoor_cm", 0, 30.0, 0.90},
                                            {"indoor_cm", 1, 34.0, 0.94},
                                            {"outdoor_mo", 0, 26.0, 0.80},
                                            {"outdoor_mo", 1, 28.0, 0.86}};
        const SlicedReport rep = aggregate_by_attribute(ms, ann);
        CHECK(rep.slices.at("environment").at("Indoors").mean_psnr == 32.0);
        CHECK(rep.slices.at("environment").at("Outdoors").mean_psnr == 27.0);
        CHECK(rep.slices.at("proximity").at("Close").mean_psnr == 29.0);  // frames 30 and 28
        CHECK(rep.overall.mean_psnr == doctest::Approx(29.5).epsilon(1e-12));

        // Overall equals the count-weighted mean of slice means per category.
        for (const auto& [cat, values] : rep.slices) {
            double weighted = 0.0;
            std::size_t count = 0;
            for (const auto& [value, slice] : values) {
                weighted += slice.mean_psnr * static_cast<double>(slice.psnr_finite_count);
                count += slice.psnr_finite_count;
            }
            CHECK(count == 4);
            CHECK(std::abs(weighted / count - rep.overall.mean_psnr) < 1e-12);
        }
    }
    SUBCASE("infinite psnr is excluded from means and counted") {
        std::vector<FramePairMetrics> ms = {
            {"indoor_cm", 0, std::numeric_limits<double>::infinity(), 1.0},
            {"indoor_cm", 1, 30.0, 0.9}};
        const SlicedReport rep = aggregate_by_attribute(ms, ann);
        CHECK(rep.overall.mean_psnr == 30.0);
        CHECK(rep.overall.count == 2);
        CHECK(rep.overall.psnr_finite_count == 1);
        CHECK(rep.psnr_infinite_count == 1);
    }
    SUBCASE("missing annotations are listed and excluded from slices") {
        std::vector<FramePairMetrics> ms = {{"indoor_cm", 0, 30.0, 0.9},
                                            {"mystery", 7, 20.0, 0.5}};
        const SlicedReport rep = aggregate_by_attribute(ms, ann);
        REQUIRE(rep.missing_annotations.size() == 1);
        CHECK(rep.missing_annotations[0] == FrameKey{"mystery", 7});
        CHECK(rep.slices.at("proximity").at("Close").count == 1);
        CHECK(rep.overall.count == 2);
    }
}

TEST_CASE("metric values do not depend on the thread count") {
    Rng rng(31);
    const Image8 a = random_image(rng, 24, 20);
    const Image8 b = random_image(rng, 24, 20);
    const int before = omp_get_max_threads();
    omp_set_num_threads(1);
    const double psnr1 = psnr(a, b);
    const double ssim1 = ssim(a, b);
    omp_set_num_threads(std::max(2, before));
    const double psnr2 = psnr(a, b);
    const double ssim2 = ssim(a, b);
    omp_set_num_threads(before);
    CHECK(psnr1 == psnr2);
    CHECK(ssim1 == ssim2);
}

TEST_CASE("confidence-binned gains") {
    ConfidenceMap conf;
    std::vector<FramePairMetrics> run_a, run_b;
    // Two frames per bin across [0,1).
    int idx = 0;
    for (int bin = 0; bin < 10; ++bin) {
        for (int k = 0; k < 2; ++k, ++idx) {
            const double c = bin * 0.1 + 0.05;
            conf[{"clip", idx}] = c;
            run_b.push_back({"clip", idx, 25.0 + bin, 0.8});
            run_a.push_back({"clip", idx, 25.0 + bin, 0.8});
        }
    }

    SUBCASE("identical runs give zero gain everywhere") {
        const ConfidenceGain g = gain_by_confidence(run_a, run_b, conf, 0.1);
        for (int bin = 0; bin < 10; ++bin) {
            CHECK(g.count[bin] == 2);
            CHECK(g.gain[bin] == 0.0);
        }
    }
    SUBCASE("uniform +1 dB appears in every bin") {
        auto shifted = run_a;
        for (auto& m : shifted) m.psnr += 1.0;
        const ConfidenceGain g = gain_by_confidence(shifted, run_b, conf, 0.1);
        for (int bin = 0; bin < 10; ++bin) CHECK(g.gain[bin] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("constructed per-bin offsets are recovered") {
        auto shifted = run_a;
        for (std::size_t i = 0; i < shifted.size(); ++i) {
            const double c = conf.at({"clip", static_cast<int>(i)});
            if (c >= 0.7 && c < 0.8) shifted[i].psnr += 0.3;
        }
        const ConfidenceGain g = gain_by_confidence(shifted, run_b, conf, 0.1);
        for (int bin = 0; bin < 10; ++bin) {
            if (bin == 7)
                CHECK(std::abs(g.gain[bin] - 0.3) < 1e-12);
            else
                CHECK(g.gain[bin] == 0.0);
        }
    }
    SUBCASE("infinite sentinels are excluded pairwise") {
        auto a2 = run_a;
        a2[0].psnr = std::numeric_limits<double>::infinity();
        const ConfidenceGain g = gain_by_confidence(a2, run_b, conf, 0.1);
        CHECK(g.count[0] == 1);
    }
    SUBCASE("coverage mismatch lists the missing keys") {
        auto a2 = run_a;
        a2.pop_back();
        CHECK_THROWS_WITH_AS(gain_by_confidence(a2, run_b, conf, 0.1),
                             doctest::Contains("(clip,19)"), InputError);
    }
}
