// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

namespace ditmo {

namespace {

bool channel_ok(SdrTag, float v) { return v >= 0.0f && v <= 1.0f; }
bool channel_ok(LinearTag, float v) { return std::isfinite(v) && v >= 0.0f; }

const char* domain_name(SdrTag) { return "[0,1]"; }
const char* domain_name(LinearTag) { return "finite and >= 0"; }

template <typename Tag>
void validate(std::size_t width, std::size_t height, const std::vector<Rgb>& pixels) {
    if (width == 0 || height == 0) {
        throw ConfigError("image dimensions must be positive");
    }
    if (pixels.size() != width * height) {
        std::ostringstream msg;
        msg << "pixel buffer holds " << pixels.size() << " entries, expected " << width << "x" << height;
        throw ConfigError(msg.str());
    }
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const Rgb& p = pixels[i];
        if (!channel_ok(Tag{}, p.r) || !channel_ok(Tag{}, p.g) || !channel_ok(Tag{}, p.b)) {
            std::ostringstream msg;
            msg << "pixel " << i << " = (" << p.r << ", " << p.g << ", " << p.b << ") is outside "
                << domain_name(Tag{});
            throw ConfigError(msg.str());
        }
    }
}

}  // namespace

template <typename Tag>
RgbImage<Tag>::RgbImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
    : m_width(width), m_height(height), m_pixels(std::move(pixels)) {
    validate<Tag>(m_width, m_height, m_pixels);
}

template <typename Tag>
RgbImage<Tag>::RgbImage(std::size_t width, std::size_t height, Rgb fill)
    : RgbImage(width, height, std::vector<Rgb>(width * height, fill)) {}

template class RgbImage<SdrTag>;
template class RgbImage<LinearTag>;

ResponseCurve ResponseCurve::gamma(double gamma) {
    if (!(gamma >= 1.0 && gamma <= 4.0)) {
        std::ostringstream msg;
        msg << "gamma " << gamma << " outside [1, 4]";
        throw ConfigError(msg.str());
    }
    return ResponseCurve(Kind::Gamma, gamma);
}

ResponseCurve ResponseCurve::srgb() { return ResponseCurve(Kind::Srgb, 2.4); }

double ResponseCurve::to_linear(double v) const noexcept {
    if (m_kind == Kind::Gamma) {
        return std::pow(v, m_gamma);
    }
    if (v <= 0.04045) {
        return v / 12.92;
    }
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double ResponseCurve::to_display(double v) const noexcept {
    if (m_kind == Kind::Gamma) {
        return std::pow(v, 1.0 / m_gamma);
    }
    if (v <= 0.0031308) {
        return v * 12.92;
    }
    return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

namespace {

template <typename Out, typename In, typename Fn>
RgbImage<Out> map_channels(const RgbImage<In>& img, Fn&& fn) {
    std::vector<Rgb> out(img.size());
    const auto in = img.pixels();
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = Rgb{fn(in[i].r), fn(in[i].g), fn(in[i].b)};
    }
    return RgbImage<Out>(img.width(), img.height(), std::move(out));
}

}  // namespace

LinearImage linearize(const SdrImage& img, const ResponseCurve& crf) {
    return map_channels<LinearTag>(img, [&](float v) {
        return std::clamp(static_cast<float>(crf.to_linear(v)), 0.0f, 1.0f);
    });
}

SdrImage delinearize(const LinearImage& img, const ResponseCurve& crf) {
    for (const Rgb& p : img.pixels()) {
        if (p.r > 1.0f || p.g > 1.0f || p.b > 1.0f) {
            throw ConfigError("delinearize: channel above 1; clamp the image first");
        }
    }
    return map_channels<SdrTag>(img, [&](float v) {
        return std::clamp(static_cast<float>(crf.to_display(v)), 0.0f, 1.0f);
    });
}

LinearImage scale_clamped(const LinearImage& img, double scale) {
    return map_channels<LinearTag>(img, [&](float v) {
        return static_cast<float>(std::clamp(static_cast<double>(v) * scale, 0.0, 1.0));
    });
}

}  // namespace ditmo
