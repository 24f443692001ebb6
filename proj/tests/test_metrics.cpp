#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lumloss/metrics.hpp"
#include "ssim_oracle.hpp"
#include "test_util.hpp"

using namespace lumloss;

TEST(Mse, Examples) {
    std::mt19937_64 gen(1);
    const Image a = test::random_image(gen, 4, 4, 3);
    EXPECT_EQ(mse(a, a), 0.0);
    Image b = a;
    for (double& v : b.data()) v += 0.1;
    EXPECT_NEAR(mse(a, b), 0.01, 1e-15);
    EXPECT_NEAR(mse(Image(1, 2, 1, std::vector<double>{0, 0}), Image(1, 2, 1, std::vector<double>{0.3, 0.4})), 0.125, 1e-15);
    EXPECT_THROW(mse(Image(2, 2, 3), Image(2, 2, 1)), InvalidInput);
}

TEST(Psnr, Examples) {
    const Image a(8, 8, 3, 0.2);
    EXPECT_NEAR(psnr(a, Image(8, 8, 3, 0.3)), 20.0, 1e-9);
    EXPECT_NEAR(psnr(a, Image(8, 8, 3, 0.21)), 40.0, 1e-9);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
    EXPECT_THROW(psnr(a, Image(4, 8, 3)), InvalidInput);
    EXPECT_NEAR(psnr(Image(2, 2, 1, 0.0), Image(2, 2, 1, 25.5), 255.0), 20.0, 1e-9);
}

TEST(Psnr, MonotoneInNestedPerturbations) {
    std::mt19937_64 gen(2);
    const Image base = test::random_image(gen, 8, 8, 3);
    const Image dir = test::random_image(gen, 8, 8, 3, -1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    double prev_mse = 0.0;
    for (int k = 1; k <= 40; ++k) {
        Image p = base;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += 0.01 * k * dir[i];
        const double m = mse(base, p);
        const double q = psnr(base, p);
        EXPECT_GT(m, prev_mse);
        EXPECT_LT(q, prev);
        prev = q;
        prev_mse = m;
    }
}

TEST(Ssim, IdenticalAndConstant) {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 20; ++t) {
        const Image a = test::random_image(gen, 16, 20, t % 2 ? 3 : 1);
        EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
    }
    EXPECT_EQ(ssim(Image(12, 12, 1, 0.5), Image(12, 12, 1, 0.5)), 1.0);
}

TEST(Ssim, MatchesBruteForceOracle) {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 5; ++t) {
        const Image a = test::random_image(gen, 16, 16, 1);
        const Image b = test::random_image(gen, 16, 16, 1);
        EXPECT_NEAR(ssim(a, b), test::brute_force_ssim(a, b), 1e-9);
    }
    const Image a = test::random_image(gen, 16, 18, 3);
    Image b = a;
    for (double& v : b.data()) v = 0.7 * v + 0.1;
    EXPECT_NEAR(ssim(a, b), test::brute_force_ssim(a, b), 1e-9);
}

TEST(Ssim, SymmetricAndBounded) {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 100; ++t) {
        const Image a = test::random_image(gen, 13, 15, 3);
        Image b = test::random_image(gen, 13, 15, 3);
        if (t % 3 == 0) {
            for (std::size_t i = 0; i < b.size(); ++i) b[i] = 1.0 - a[i];
        }
        const double s = ssim(a, b);
        EXPECT_EQ(s, ssim(b, a));
        EXPECT_EQ(mse(a, b), mse(b, a));
        EXPECT_GE(s, -1.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Ssim, Errors) {
    EXPECT_THROW(ssim(Image(10, 20, 1), Image(10, 20, 1)), InvalidInput);
    EXPECT_THROW(ssim(Image(20, 20, 1), Image(20, 20, 3)), InvalidInput);
    SsimParams even;
    even.window_size = 4;
    EXPECT_THROW(ssim(Image(20, 20, 1), Image(20, 20, 1), even), InvalidInput);
    SsimParams small;
    small.window_size = 3;
    EXPECT_NO_THROW(ssim(Image(3, 3, 1), Image(3, 3, 1), small));
    SsimParams zero;
    zero.k1 = 0.0;
    EXPECT_THROW(zero.validate(), InvalidInput);
}
