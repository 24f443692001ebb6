#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lumloss/dataset.hpp"

using namespace lumloss;

TEST(GenClean, Deterministic) {
    const auto a = gen_clean(7, 4, 32, 24);
    const auto b = gen_clean(7, 4, 32, 24);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a, b);
    const auto c = gen_clean(8, 4, 32, 24);
    EXPECT_NE(a[0], c[0]);
    EXPECT_EQ(a[0].height(), 32u);
    EXPECT_EQ(a[0].width(), 24u);
    EXPECT_EQ(a[0].channels(), 3u);
}

TEST(GenClean, PrefixStable) {
    // Image i depends only on (seed, i), not on count.
    const auto a = gen_clean(3, 2, 16, 16);
    const auto b = gen_clean(3, 5, 16, 16);
    EXPECT_EQ(a[0], b[0]);
    EXPECT_EQ(a[1], b[1]);
}

TEST(GenClean, EmptyAndBounds) {
    EXPECT_TRUE(gen_clean(1, 0, 16, 16).empty());
    EXPECT_THROW(gen_clean(1, 1, 15, 32), InvalidInput);
    EXPECT_THROW(gen_clean(1, 1, 32, 8), InvalidInput);
    for (const auto& img : gen_clean(2, 8, 20, 20)) {
        for (double v : img.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(GenClean, EveryChannelVaries) {
    for (const auto& img : gen_clean(11, 16, 32, 32)) {
        for (std::size_t c = 0; c < 3; ++c) {
            double sum = 0.0, sq = 0.0;
            const double n = static_cast<double>(img.height() * img.width());
            for (std::size_t y = 0; y < img.height(); ++y)
                for (std::size_t x = 0; x < img.width(); ++x) sum += img.at(y, x, c);
            const double mean = sum / n;
            for (std::size_t y = 0; y < img.height(); ++y)
                for (std::size_t x = 0; x < img.width(); ++x) sq += (img.at(y, x, c) - mean) * (img.at(y, x, c) - mean);
            EXPECT_GT(sq / n, 1e-3) << "channel " << c;
        }
    }
}

TEST(AddNoise, ZeroSigmaIsIdentity) {
    const Image img = gen_clean(1, 1, 16, 16)[0];
    EXPECT_EQ(add_noise(img, {0.0, 99}), img);
}

TEST(AddNoise, SampleStdMatches) {
    const Image flat(200, 200, 3, 0.5);
    const Image noisy = add_noise(flat, {25.0, 4});
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) sum += noisy[i] - flat[i];
    const double n = static_cast<double>(flat.size());
    const double mean = sum / n;
    for (std::size_t i = 0; i < flat.size(); ++i) sq += (noisy[i] - flat[i] - mean) * (noisy[i] - flat[i] - mean);
    const double sd = std::sqrt(sq / (n - 1));
    EXPECT_NEAR(sd, 25.0 / 255.0, 0.05 * 25.0 / 255.0);
    EXPECT_LT(std::abs(mean), 0.01);
    // Not clamped.
    EXPECT_LT(*std::min_element(noisy.data().begin(), noisy.data().end()), 0.5 - 3 * 25.0 / 255.0);
}

TEST(AddNoise, SeededAndValidated) {
    const Image img(16, 16, 3, 0.3);
    EXPECT_EQ(add_noise(img, {15.0, 5}), add_noise(img, {15.0, 5}));
    EXPECT_NE(add_noise(img, {15.0, 5}), add_noise(img, {15.0, 6}));
    EXPECT_THROW(add_noise(img, {-1.0, 5}), InvalidInput);
}

TEST(Crop, CopiesWindow) {
    const Image img = gen_clean(2, 1, 20, 18)[0];
    const Image c = crop(img, 3, 5, 4, 6);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 6; ++x)
            for (std::size_t ch = 0; ch < 3; ++ch) EXPECT_EQ(c.at(y, x, ch), img.at(y + 3, x + 5, ch));
    EXPECT_THROW(crop(img, 17, 0, 4, 4), InvalidInput);
}

TEST(BlindPatchStream, EmitsExactlyCount) {
    BlindTrainSpec spec{25.0, 8, 37, 3};
    auto stream = make_blind_batches(gen_clean(1, 3, 16, 16), spec);
    std::size_t n = 0;
    while (auto p = stream.next()) {
        EXPECT_EQ(p->noisy.height(), 8u);
        EXPECT_EQ(p->clean.width(), 8u);
        ++n;
    }
    EXPECT_EQ(n, 37u);
    EXPECT_FALSE(stream.next().has_value());
}

TEST(BlindPatchStream, SameSeedSameSequence) {
    BlindTrainSpec spec{25.0, 8, 20, 9};
    auto a = make_blind_batches(gen_clean(1, 3, 16, 16), spec);
    auto b = make_blind_batches(gen_clean(1, 3, 16, 16), spec);
    for (int i = 0; i < 20; ++i) {
        const auto pa = a.next();
        const auto pb = b.next();
        EXPECT_EQ(pa->noisy, pb->noisy);
        EXPECT_EQ(pa->clean, pb->clean);
    }
    spec.seed = 10;
    auto c = make_blind_batches(gen_clean(1, 3, 16, 16), spec);
    auto d = make_blind_batches(gen_clean(1, 3, 16, 16), BlindTrainSpec{25.0, 8, 20, 9});
    EXPECT_NE(c.next()->noisy, d.next()->noisy);
}

TEST(BlindPatchStream, Errors) {
    EXPECT_THROW(make_blind_batches(gen_clean(1, 2, 16, 16), BlindTrainSpec{25.0, 17, 1, 0}), InvalidInput);
    EXPECT_THROW(make_blind_batches({}, BlindTrainSpec{25.0, 8, 1, 0}), InvalidInput);
}

TEST(PatchSampler, SigmaIsUniform) {
    // Kolmogorov-Smirnov statistic against U(0, 55).
    const auto clean = gen_clean(1, 2, 16, 16);
    PatchSampler sampler(clean, BlindTrainSpec{55.0, 8, 1, 21});
    std::vector<double> s;
    for (int i = 0; i < 10000; ++i) s.push_back(sampler.draw().sigma_255 / 55.0);
    std::sort(s.begin(), s.end());
    double d = 0.0;
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - s[i]), std::abs(s[i] - static_cast<double>(i) / n)});
    }
    EXPECT_LT(d, 0.02);
    EXPECT_GE(s.front(), 0.0);
    EXPECT_LT(s.back(), 1.0);
}

TEST(PatchSampler, CropsStayInside) {
    const auto clean = gen_clean(4, 3, 20, 30);
    PatchSampler sampler(clean, BlindTrainSpec{25.0, 12, 1, 2});
    for (int i = 0; i < 2000; ++i) {
        const PatchDraw d = sampler.draw();
        ASSERT_LT(d.image, 3u);
        ASSERT_LE(d.y + 12, 20u);
        ASSERT_LE(d.x + 12, 30u);
    }
}
