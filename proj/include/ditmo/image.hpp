// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ditmo/error.hpp"

namespace ditmo {

struct Rgb {
    float r = 0.0f;
    float g = 0.0f;
    float b = 0.0f;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct SdrTag {};
struct LinearTag {};

/// Row-major RGB raster, immutable after construction. The tag selects the
/// value-domain invariant checked on construction:
///  - SdrTag: display-referred, every channel in [0,1]
///  - LinearTag: scene-referred, every channel finite and >= 0
template <typename Tag>
class RgbImage {
public:
    RgbImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels);
    RgbImage(std::size_t width, std::size_t height, Rgb fill);

    std::size_t width() const noexcept { return m_width; }
    std::size_t height() const noexcept { return m_height; }
    std::size_t size() const noexcept { return m_pixels.size(); }

    const Rgb& at(std::size_t x, std::size_t y) const { return m_pixels[y * m_width + x]; }
    const Rgb& operator[](std::size_t index) const { return m_pixels[index]; }
    std::span<const Rgb> pixels() const noexcept { return m_pixels; }

    /// Copy of the pixel buffer, for building a modified image.
    std::vector<Rgb> to_vector() const { return m_pixels; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t m_width;
    std::size_t m_height;
    std::vector<Rgb> m_pixels;
};

using SdrImage = RgbImage<SdrTag>;
using LinearImage = RgbImage<LinearTag>;
/// Radiance relative to the ev-0 exposure.
using HdrImage = LinearImage;

extern template class RgbImage<SdrTag>;
extern template class RgbImage<LinearTag>;

/// Rec. 709 relative luminance.
constexpr double luminance(double r, double g, double b) noexcept {
    return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

inline double luminance(const Rgb& c) noexcept {
    return luminance(static_cast<double>(c.r), static_cast<double>(c.g), static_cast<double>(c.b));
}

/// Camera response curve used to move between display and linear values.
class ResponseCurve {
public:
    enum class Kind { Gamma, Srgb };

    /// Throws ConfigError unless gamma is in [1, 4].
    static ResponseCurve gamma(double gamma = 2.2);
    static ResponseCurve srgb();

    Kind kind() const noexcept { return m_kind; }
    /// Exponent for Kind::Gamma; 2.4 (the power segment) for Kind::Srgb.
    double exponent() const noexcept { return m_gamma; }

    /// Display value in [0,1] to linear value in [0,1].
    double to_linear(double v) const noexcept;
    /// Inverse of to_linear on [0,1].
    double to_display(double v) const noexcept;

    friend bool operator==(const ResponseCurve&, const ResponseCurve&) = default;

private:
    ResponseCurve(Kind kind, double gamma) : m_kind(kind), m_gamma(gamma) {}

    Kind m_kind;
    double m_gamma;
};

LinearImage linearize(const SdrImage& img, const ResponseCurve& crf);

/// Throws ConfigError if any channel lies outside [0,1]; clamp first.
SdrImage delinearize(const LinearImage& img, const ResponseCurve& crf);

/// Channel-wise clamp to [0,1] after scaling by `scale`.
LinearImage scale_clamped(const LinearImage& img, double scale);

}  // namespace ditmo
