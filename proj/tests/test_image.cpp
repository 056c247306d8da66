// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "ditmo/image.hpp"
#include "ditmo/image_io.hpp"

using namespace ditmo;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ditmo_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("sdr images reject values outside [0,1]") {
    CHECK_THROWS_AS(SdrImage(1, 1, Rgb{1.01f, 0, 0}), ConfigError);
    CHECK_THROWS_AS(SdrImage(1, 1, Rgb{-0.01f, 0, 0}), ConfigError);
    CHECK_THROWS_AS(SdrImage(2, 2, std::vector<Rgb>(3)), ConfigError);
    CHECK_NOTHROW(SdrImage(1, 1, Rgb{1, 1, 1}));
}

TEST_CASE("linear images accept radiance above one but not NaN or negatives") {
    CHECK_NOTHROW(LinearImage(1, 1, Rgb{1000.0f, 2.0f, 0.0f}));
    CHECK_THROWS_AS(LinearImage(1, 1, Rgb{std::nanf(""), 0, 0}), ConfigError);
    CHECK_THROWS_AS(LinearImage(1, 1, Rgb{-1e-3f, 0, 0}), ConfigError);
    CHECK_THROWS_AS(LinearImage(1, 1, Rgb{INFINITY, 0, 0}), ConfigError);
}

TEST_CASE("luminance uses Rec.709 weights") {
    CHECK(luminance(1, 0, 0) == doctest::Approx(0.2126));
    CHECK(luminance(0, 1, 0) == doctest::Approx(0.7152));
    CHECK(luminance(0, 0, 1) == doctest::Approx(0.0722));
    CHECK(luminance(Rgb{1, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("gamma response curve") {
    const auto crf = ResponseCurve::gamma(2.2);
    CHECK(crf.to_linear(0.5) == doctest::Approx(std::pow(0.5, 2.2)));
    CHECK(crf.to_display(crf.to_linear(0.37)) == doctest::Approx(0.37));
    CHECK(crf.to_linear(0.0) == 0.0);
    CHECK(crf.to_linear(1.0) == 1.0);
    CHECK_THROWS_AS(ResponseCurve::gamma(0.5), ConfigError);
    CHECK_THROWS_AS(ResponseCurve::gamma(5.0), ConfigError);
}

TEST_CASE("srgb response curve matches the piecewise definition") {
    const auto crf = ResponseCurve::srgb();
    CHECK(crf.to_linear(0.04) == doctest::Approx(0.04 / 12.92));
    CHECK(crf.to_linear(0.5) == doctest::Approx(std::pow((0.5 + 0.055) / 1.055, 2.4)));
    for (double v : {0.0, 0.01, 0.2, 0.8, 1.0}) CHECK(crf.to_display(crf.to_linear(v)) == doctest::Approx(v));
}

TEST_CASE("linearize then delinearize is the identity on 8-bit values") {
    std::vector<Rgb> px;
    for (int v = 0; v < 256; ++v) px.push_back(Rgb{v / 255.0f, v / 255.0f, v / 255.0f});
    const SdrImage img(256, 1, px);
    for (const auto& crf : {ResponseCurve::gamma(2.2), ResponseCurve::srgb()}) {
        const auto back = to_raster(delinearize(linearize(img, crf), crf));
        for (int v = 0; v < 256; ++v) CHECK(back.data[static_cast<std::size_t>(v) * 3] == v);
    }
}

TEST_CASE("delinearize refuses radiance above one") {
    CHECK_THROWS_AS(delinearize(LinearImage(1, 1, Rgb{1.5f, 0, 0}), ResponseCurve::gamma()), ConfigError);
}

TEST_CASE("scale_clamped multiplies and clips to [0,1]") {
    const auto out = scale_clamped(LinearImage(1, 1, Rgb{0.2f, 0.6f, 3.0f}), 2.0);
    CHECK(out[0].r == doctest::Approx(0.4f));
    CHECK(out[0].g == 1.0f);
    CHECK(out[0].b == 1.0f);
}

TEST_CASE("png encode and decode round trip") {
    Raster8 r{5, 3, 3, {}};
    for (std::size_t i = 0; i < 5 * 3 * 3; ++i) r.data.push_back(static_cast<std::uint8_t>(i * 17));
    const auto back = decode_image(encode_png(r), 3);
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.data == r.data);

    Raster8 gray{4, 2, 1, {0, 1, 2, 3, 4, 5, 6, 7}};
    CHECK(decode_image(encode_png(gray), 1).data == gray.data);
    // Gray decoded as RGB replicates the value.
    const auto rgb = decode_image(encode_png(gray), 3);
    CHECK(rgb.data[3] == 1);
    CHECK(rgb.data[4] == 1);
    CHECK(rgb.data[5] == 1);
}

TEST_CASE("read_ldr maps 8-bit values by v/255") {
    Raster8 r{2, 1, 3, {0, 128, 255, 10, 20, 30}};
    const auto path = scratch("ldr.png");
    write_png(path, r);
    const SdrImage img = read_ldr(path);
    CHECK(img[0].r == 0.0f);
    CHECK(img[0].g == 128.0f / 255.0f);
    CHECK(img[0].b == 1.0f);
    CHECK(img[1].r == 10.0f / 255.0f);
}

TEST_CASE("image decoding errors are classified") {
    CHECK_THROWS_AS(read_ldr(scratch("does-not-exist.png")), IoError);
    try {
        decode_image(bytes_of("GIF89a....."));
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(e.kind() == IoErrorKind::UnsupportedFormat);
    }
    auto png = encode_png(Raster8{4, 4, 3, std::vector<std::uint8_t>(48, 7)});
    png.resize(png.size() / 2);
    try {
        decode_image(png);
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(e.kind() == IoErrorKind::Corrupt);
    }
}

TEST_CASE("truncated jpeg is reported as corrupt") {
    std::vector<std::uint8_t> jpeg{0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10};
    try {
        decode_image(jpeg);
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(e.kind() == IoErrorKind::Corrupt);
    }
}

TEST_CASE("rgbe header bytes") {
    const LinearImage img(10, 3, Rgb{1, 1, 1});
    const auto bytes = encode_rgbe(img);
    const std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 3 +X 10\n";
    REQUIRE(bytes.size() > header.size());
    CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
}

TEST_CASE("rgbe constant image round trip") {
    for (std::size_t w : {1u, 7u, 8u, 100u}) {
        const LinearImage img(w, 2, Rgb{1, 1, 1});
        const auto back = decode_rgbe(encode_rgbe(img));
        REQUIRE(back.width() == w);
        for (const Rgb& p : back.pixels()) CHECK(std::abs(p.r - 1.0f) <= 0.005f);
    }
}

TEST_CASE("rgbe zero and tiny values decode to zero") {
    std::vector<Rgb> px(8, Rgb{0, 0, 0});
    px[3] = Rgb{1e-39f, 0, 0};
    px[5] = Rgb{0, 1e-45f, 0};
    const auto back = decode_rgbe(encode_rgbe(LinearImage(8, 1, px)));
    for (const Rgb& p : back.pixels()) CHECK(p == Rgb{0, 0, 0});
}

TEST_CASE("rgbe round trip keeps the max channel within 0.5% for random colors") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> e(-13.0, 13.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Rgb> px(64 * 9);
    for (auto& p : px) {
        const float m = static_cast<float>(std::exp2(e(rng)));
        p = Rgb{m, static_cast<float>(m * u(rng)), static_cast<float>(m * u(rng))};
    }
    const LinearImage img(64, 9, px);
    const auto back = decode_rgbe(encode_rgbe(img));
    for (std::size_t i = 0; i < px.size(); ++i) CHECK(std::abs(back[i].r / px[i].r - 1.0f) <= 0.005f);
}

TEST_CASE("rgbe decoder reads flat (non-rle) scanlines and rejects garbage") {
    // Width 4 forces flat scanlines.
    const LinearImage img(4, 2, Rgb{0.5f, 0.25f, 2.0f});
    const auto back = decode_rgbe(encode_rgbe(img));
    CHECK(back[5].b == doctest::Approx(2.0f).epsilon(0.005));
    CHECK_THROWS_AS(decode_rgbe(bytes_of("#?RADIANCE\nFORMAT=32-bit_rle_xyze\n\n-Y 1 +X 1\n")), IoError);
    CHECK_THROWS_AS(decode_rgbe(bytes_of("P6 1 1 255\n")), IoError);
    auto truncated = encode_rgbe(LinearImage(16, 4, Rgb{1, 2, 3}));
    truncated.resize(truncated.size() - 10);
    CHECK_THROWS_AS(decode_rgbe(truncated), IoError);
}

TEST_CASE("write_hdr and read_hdr through the filesystem") {
    const auto path = scratch("rt.hdr");
    const LinearImage img(33, 5, Rgb{123.0f, 0.01f, 7.0f});
    write_hdr(img, path);
    const auto back = read_hdr(path);
    CHECK(back.width() == 33);
    CHECK(back.height() == 5);
    CHECK(back[0].r == doctest::Approx(123.0f).epsilon(0.005));
}

TEST_CASE("base64 round trip and rejection of invalid text") {
    for (std::size_t n = 0; n < 10; ++n) {
        std::vector<std::uint8_t> data;
        for (std::size_t i = 0; i < n; ++i) data.push_back(static_cast<std::uint8_t>(i * 37 + 1));
        CHECK(base64_decode(base64_encode(data)) == data);
    }
    CHECK(base64_encode(bytes_of("Man")) == "TWFu");
    CHECK(base64_encode(bytes_of("Ma")) == "TWE=");
    CHECK_THROWS_AS(base64_decode("@@@@"), IoError);
}
