#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "lumloss/image.hpp"
#include "lumloss/image_io.hpp"
#include "test_util.hpp"

using namespace lumloss;

namespace {

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}

TEST(Grayscale, WhitePixelSumsAllWeights) {
    const Image px(1, 1, 3, std::vector<double>{1.0, 1.0, 1.0});
    EXPECT_NEAR(to_grayscale(px)[0], 0.9999, 1e-15);
}

TEST(Grayscale, BlackAndGreen) {
    EXPECT_EQ(to_grayscale(Image(1, 1, 3, std::vector<double>{0.0, 0.0, 0.0}))[0], 0.0);
    EXPECT_EQ(to_grayscale(Image(1, 1, 3, std::vector<double>{0.0, 1.0, 0.0}))[0], 0.5870);
}

TEST(Grayscale, DefaultWeights) {
    const LuminanceWeights w;
    EXPECT_EQ(w.w[0], 0.2989);
    EXPECT_EQ(w.w[1], 0.5870);
    EXPECT_EQ(w.w[2], 0.1140);
    EXPECT_THROW(LuminanceWeights(-0.1, 0.5, 0.5), InvalidInput);
}

TEST(Grayscale, RejectsSingleChannel) {
    EXPECT_THROW(to_grayscale(Image(2, 2, 1)), InvalidInput);
    EXPECT_THROW(grayscale_backward(Image(2, 2, 3)), InvalidInput);
}

TEST(Grayscale, BackwardSpreadsWeights) {
    const Image g = grayscale_backward(Image(1, 1, 1, std::vector<double>{1.0}));
    EXPECT_EQ(g[0], 0.2989);
    EXPECT_EQ(g[1], 0.5870);
    EXPECT_EQ(g[2], 0.1140);
    const Image g2 = grayscale_backward(Image(1, 1, 1, std::vector<double>{2.0}));
    EXPECT_NEAR(g2[0], 0.5978, 1e-15);
    EXPECT_NEAR(g2[1], 1.1740, 1e-15);
    EXPECT_NEAR(g2[2], 0.2280, 1e-15);
    const Image z = grayscale_backward(Image(3, 2, 1));
    for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(Grayscale, BackwardMatchesFiniteDifferences) {
    std::mt19937_64 gen(7);
    Image x = test::random_image(gen, 3, 4, 3);
    const Image u = test::random_image(gen, 3, 4, 1, -1.0, 1.0);
    const Image analytic = grayscale_backward(u);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double numeric = test::central_difference([&] { return dot(to_grayscale(x), u); }, x[i]);
        EXPECT_LT(test::rel_error(analytic[i], numeric), 1e-8);
    }
}

TEST(Grayscale, LinearityProperty) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Image x = test::random_image(gen, 5, 7, 3);
        const Image y = test::random_image(gen, 5, 7, 3);
        const double a = coef(gen), b = coef(gen);
        Image combo(5, 7, 3);
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * x[i] + b * y[i];
        const Image lhs = to_grayscale(combo);
        const Image gx = to_grayscale(x), gy = to_grayscale(y);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            EXPECT_NEAR(lhs[i], a * gx[i] + b * gy[i], 1e-12);
        }
    }
}

TEST(Grayscale, BackwardIsExactAdjoint) {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Image x = test::random_image(gen, 6, 5, 3, -2.0, 2.0);
        const Image u = test::random_image(gen, 6, 5, 1, -2.0, 2.0);
        EXPECT_NEAR(dot(to_grayscale(x), u), dot(x, grayscale_backward(u)), 1e-9);
    }
}

TEST(Clamp, ClampsToUnitInterval) {
    const Image out = clamp01(Image(1, 1, 3, std::vector<double>{1.5, -0.2, 0.5}));
    EXPECT_EQ(out[0], 1.0);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_EQ(out[2], 0.5);
}

TEST(ImageType, RejectsBadShapesAndValues) {
    EXPECT_THROW(Image(2, 2, 2), InvalidInput);
    EXPECT_THROW(Image(0, 2, 3), InvalidInput);
    EXPECT_THROW(Image(1, 1, 3, std::vector<double>{1.0, 2.0}), InvalidInput);
    EXPECT_THROW(Image(1, 1, 1, std::vector<double>{std::nan("")}), InvalidInput);
    EXPECT_NO_THROW(Tensor(2, 2, 16));
}

TEST(Ppm, NormalizesBytes) {
    std::string file = "P6\n1 1\n255\n";
    file += static_cast<char>(255);
    file += static_cast<char>(128);
    file += static_cast<char>(0);
    const Image img = decode_pnm(bytes_of(file));
    EXPECT_EQ(img.height(), 1u);
    EXPECT_EQ(img.channels(), 3u);
    EXPECT_EQ(img[0], 1.0);
    EXPECT_EQ(img[1], 128.0 / 255.0);
    EXPECT_NEAR(img[1], 0.50196, 1e-5);
    EXPECT_EQ(img[2], 0.0);
}

TEST(Ppm, HeaderWithComments) {
    std::string file = "P6 # comment\n# another\n2 1\n255\n";
    file.append(6, static_cast<char>(10));
    const Image img = decode_pnm(bytes_of(file));
    EXPECT_EQ(img.width(), 2u);
    EXPECT_EQ(img.height(), 1u);
}

TEST(Ppm, RoundTripIsBitExact) {
    std::mt19937_64 gen(21);
    std::uniform_int_distribution<int> dim(1, 17), byte(0, 255);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = dim(gen), h = dim(gen);
        std::string file = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
        for (int i = 0; i < w * h * 3; ++i) file += static_cast<char>(byte(gen));
        EXPECT_EQ(encode_pnm(decode_pnm(bytes_of(file))), file);
    }
}

TEST(Ppm, ErrorsNameTheOffset) {
    try {
        decode_pnm(bytes_of("P3\n1 1\n255\n"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset 0"), std::string::npos);
    }
    try {
        decode_pnm(bytes_of("P6\n1 1\n65535\n\x01\x02"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("maxval"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("byte offset 7"), std::string::npos);
    }
    try {
        decode_pnm(bytes_of("P6\n2 2\n255\nabc"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("byte offset 11"), std::string::npos);
    }
    EXPECT_THROW(decode_pnm(bytes_of("P6\nx 2\n255\n")), FormatError);
    EXPECT_THROW(decode_pnm(bytes_of("P6\n0 2\n255\n")), FormatError);
}

TEST(Ppm, SaveClampsOutOfRange) {
    const Image img(1, 1, 3, std::vector<double>{1.7, -0.3, 0.5});
    const std::string enc = encode_pnm(img);
    const Image back = decode_pnm(bytes_of(enc));
    EXPECT_EQ(back[0], 1.0);
    EXPECT_EQ(back[1], 0.0);
    EXPECT_EQ(back[2], 128.0 / 255.0);
}

TEST(Lumf, RoundTripsFloat32) {
    std::mt19937_64 gen(31);
    const Image img = test::random_image(gen, 4, 6, 3, -0.5, 1.5);
    const std::string enc = encode_lumf(img);
    EXPECT_EQ(enc.substr(0, 12), "LUMF1\n4 6 3\n");
    EXPECT_EQ(enc.size(), 12u + 4u * img.size());
    const Image back = decode_lumf(bytes_of(enc));
    for (std::size_t i = 0; i < img.size(); ++i) {
        EXPECT_EQ(back[i], static_cast<double>(static_cast<float>(img[i])));
    }
    // Values outside [0,1] survive: LUMF1 is the lossless intermediate.
    EXPECT_EQ(encode_lumf(back), enc);
}

TEST(Lumf, Errors) {
    EXPECT_THROW(decode_lumf(bytes_of("LUMF2\n1 1 1\n")), FormatError);
    EXPECT_THROW(decode_lumf(bytes_of("LUMF1\n1 1 2\n")), FormatError);
    try {
        decode_lumf(bytes_of("LUMF1\n2 2 1\n\x00\x00"));
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset 12"), std::string::npos);
    }
}

TEST(ImageFiles, SaveAndLoadByExtension) {
    const auto dir = std::filesystem::temp_directory_path() / "lumloss_test_image_files";
    std::filesystem::create_directories(dir);
    std::mt19937_64 gen(41);
    const Image img = test::random_image(gen, 5, 3, 3);
    save_image(img, dir / "a.lumf");
    save_image(img, dir / "a.ppm");
    const Image lumf = load_image(dir / "a.lumf");
    const Image ppm = load_image(dir / "a.ppm");
    EXPECT_TRUE(lumf.same_shape(img));
    EXPECT_TRUE(ppm.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) {
        EXPECT_NEAR(ppm[i], img[i], 0.5 / 255.0 + 1e-12);
    }
    const Image gray = to_grayscale(img);
    save_image(gray, dir / "g.ppm");
    EXPECT_EQ(load_image(dir / "g.ppm").channels(), 1u);
    EXPECT_THROW(load_image(dir / "missing.ppm"), FormatError);
    std::filesystem::remove_all(dir);
}
