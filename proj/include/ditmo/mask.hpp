// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ditmo/image.hpp"
#include "ditmo/image_io.hpp"

namespace ditmo {

inline constexpr int kNumClasses = 9;

enum class SemanticClass : int {
    Sky = 0,
    Ground,
    Vegetation,
    Water,
    HumanSubject,
    NonHumanSubject,
    Cityscape,
    Indoor,
    Others,
};

/// Canonical lowercase names, indexed by class id.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{
    "sky", "ground", "vegetation", "water", "human-subject", "non-human subject", "cityscape", "indoor", "others",
};

std::string_view class_name(int class_id);
/// Accepts the canonical names; '_' may stand in for ' ' or '-'.
std::optional<int> class_from_name(std::string_view name);

/// Set of pixels on a width x height grid.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t width, std::size_t height, bool value = false);

    std::size_t width() const noexcept { return m_width; }
    std::size_t height() const noexcept { return m_height; }
    std::size_t size() const noexcept { return m_bits.size(); }

    bool test(std::size_t x, std::size_t y) const { return m_bits[y * m_width + x] != 0; }
    bool operator[](std::size_t index) const { return m_bits[index] != 0; }
    void set(std::size_t x, std::size_t y, bool value = true) { m_bits[y * m_width + x] = value ? 1 : 0; }
    void set(std::size_t index, bool value = true) { m_bits[index] = value ? 1 : 0; }

    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }
    /// True when every set pixel of *this is also set in `other`.
    bool subset_of(const BinaryMask& other) const;

    std::span<const std::uint8_t> bits() const noexcept { return m_bits; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t m_width = 0;
    std::size_t m_height = 0;
    std::vector<std::uint8_t> m_bits;
};

/// Disk structuring element { (dx,dy) : dx^2 + dy^2 <= r^2 }.
class DiskKernel {
public:
    explicit DiskKernel(int radius);

    int radius() const noexcept { return m_radius; }
    /// Half-width of the footprint on row offset dy, or -1 if the row is empty.
    int half_width(int dy) const noexcept;
    std::vector<std::pair<int, int>> offsets() const;

private:
    int m_radius;
    std::vector<int> m_half_widths;  // indexed by |dy|
};

/// Per-pixel alpha in [0,1].
class SoftMask {
public:
    SoftMask(std::size_t width, std::size_t height, std::vector<float> alpha);
    SoftMask(std::size_t width, std::size_t height, float fill = 0.0f);

    std::size_t width() const noexcept { return m_width; }
    std::size_t height() const noexcept { return m_height; }
    std::size_t size() const noexcept { return m_alpha.size(); }
    float at(std::size_t x, std::size_t y) const { return m_alpha[y * m_width + x]; }
    float operator[](std::size_t index) const { return m_alpha[index]; }
    std::span<const float> alpha() const noexcept { return m_alpha; }

private:
    std::size_t m_width;
    std::size_t m_height;
    std::vector<float> m_alpha;
};

/// Per-pixel soft weights over the nine coarse classes.
class SemanticLabeling {
public:
    using Weights = std::array<float, kNumClasses>;

    SemanticLabeling(std::size_t width, std::size_t height, std::vector<Weights> weights);

    /// One-hot expansion of a hard label map (values 0..8).
    static SemanticLabeling from_labels(std::size_t width, std::size_t height, std::span<const std::uint8_t> labels);
    /// Every pixel fully assigned to `class_id`.
    static SemanticLabeling uniform(std::size_t width, std::size_t height, int class_id);

    std::size_t width() const noexcept { return m_width; }
    std::size_t height() const noexcept { return m_height; }
    std::size_t size() const noexcept { return m_weights.size(); }
    const Weights& operator[](std::size_t index) const { return m_weights[index]; }
    float weight(std::size_t index, int class_id) const { return m_weights[index][class_id]; }

    /// argmax class per pixel (lowest id on ties).
    std::vector<std::uint8_t> hard_labels() const;

private:
    std::size_t m_width;
    std::size_t m_height;
    std::vector<Weights> m_weights;
};

inline constexpr double kDefaultSaturationThreshold = 250.0 / 255.0;
inline constexpr double kDefaultClassThreshold = 0.5;

/// Pixels whose max(R,G,B) >= threshold.
BinaryMask saturation_mask(const SdrImage& img, double threshold = kDefaultSaturationThreshold);

/// Pixels whose weight for `class_id` is >= threshold.
BinaryMask class_mask(const SemanticLabeling& labels, int class_id, double threshold = kDefaultClassThreshold);

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);
BinaryMask unite(const BinaryMask& a, const BinaryMask& b);

/// z is kept iff the disk translated to z lies inside the mask. Pixels outside
/// the frame count as background.
BinaryMask erode(const BinaryMask& m, const DiskKernel& d);
/// Union of disks centred on set pixels, cropped to the frame.
BinaryMask dilate(const BinaryMask& m, const DiskKernel& d);

/// Guided opening: dilate(erode(m, disk(alpha)), disk(beta)). Both radii in [1, 10].
BinaryMask inpaint_mask(const BinaryMask& m, int alpha, int beta);

/// alpha = clamp(0.5 + sd / (2 radius), 0, 1) for a signed distance sd.
double feather_alpha(double signed_distance, double radius) noexcept;

/// Signed Euclidean distance to the mask boundary, positive inside. A pixel
/// adjacent to the boundary sits half a pixel away from it, so |sd| >= 0.5 on
/// every pixel. +inf / -inf when the opposite set is empty.
std::vector<double> signed_distance(const BinaryMask& m);

/// Soft mask ramping across the boundary of `m` over `radius` pixels each side.
SoftMask feather(const BinaryMask& m, double radius);

/// 0/255 gray raster for debugging exports.
Raster8 mask_to_raster(const BinaryMask& m);
Raster8 soft_mask_to_raster(const SoftMask& m);
/// Pixels with value >= 128 are set.
BinaryMask mask_from_raster(const Raster8& raster);

}  // namespace ditmo
