// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/mask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace ditmo {

std::string_view class_name(int class_id) {
    if (class_id < 0 || class_id >= kNumClasses) {
        throw ConfigError("class id " + std::to_string(class_id) + " outside [0, 8]");
    }
    return kClassNames[class_id];
}

std::optional<int> class_from_name(std::string_view name) {
    auto normalize = [](std::string_view s) {
        std::string out(s);
        for (char& c : out) {
            if (c == '_' || c == '-') c = ' ';
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return out;
    };
    const std::string wanted = normalize(name);
    for (int i = 0; i < kNumClasses; ++i) {
        if (normalize(kClassNames[i]) == wanted) {
            return i;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool value)
    : m_width(width), m_height(height), m_bits(width * height, value ? 1 : 0) {}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(m_bits.begin(), m_bits.end(), std::uint8_t{1}));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
    if (m_width != other.m_width || m_height != other.m_height) {
        throw ConfigError("mask dimension mismatch");
    }
    for (std::size_t i = 0; i < m_bits.size(); ++i) {
        if (m_bits[i] && !other.m_bits[i]) return false;
    }
    return true;
}

DiskKernel::DiskKernel(int radius) : m_radius(radius) {
    if (radius < 1) {
        throw ConfigError("disk radius must be >= 1");
    }
    m_half_widths.resize(static_cast<std::size_t>(radius) + 1);
    const long r2 = static_cast<long>(radius) * radius;
    for (int dy = 0; dy <= radius; ++dy) {
        int hw = 0;
        while (static_cast<long>(hw + 1) * (hw + 1) + static_cast<long>(dy) * dy <= r2) ++hw;
        m_half_widths[dy] = hw;
    }
}

int DiskKernel::half_width(int dy) const noexcept {
    const int a = std::abs(dy);
    return a > m_radius ? -1 : m_half_widths[a];
}

std::vector<std::pair<int, int>> DiskKernel::offsets() const {
    std::vector<std::pair<int, int>> out;
    for (int dy = -m_radius; dy <= m_radius; ++dy) {
        const int hw = half_width(dy);
        for (int dx = -hw; dx <= hw; ++dx) out.emplace_back(dx, dy);
    }
    return out;
}

SoftMask::SoftMask(std::size_t width, std::size_t height, std::vector<float> alpha)
    : m_width(width), m_height(height), m_alpha(std::move(alpha)) {
    if (m_alpha.size() != width * height) {
        throw ConfigError("soft mask buffer size does not match dimensions");
    }
    for (float a : m_alpha) {
        if (!(a >= 0.0f && a <= 1.0f)) throw ConfigError("soft mask alpha outside [0,1]");
    }
}

SoftMask::SoftMask(std::size_t width, std::size_t height, float fill)
    : SoftMask(width, height, std::vector<float>(width * height, fill)) {}

SemanticLabeling::SemanticLabeling(std::size_t width, std::size_t height, std::vector<Weights> weights)
    : m_width(width), m_height(height), m_weights(std::move(weights)) {
    if (width == 0 || height == 0 || m_weights.size() != width * height) {
        throw ConfigError("labeling buffer size does not match dimensions");
    }
    for (const Weights& w : m_weights) {
        for (float v : w) {
            if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError("class weight outside [0,1]");
        }
    }
}

SemanticLabeling SemanticLabeling::from_labels(std::size_t width, std::size_t height,
                                               std::span<const std::uint8_t> labels) {
    if (labels.size() != width * height) {
        throw ConfigError("label map size does not match dimensions");
    }
    std::vector<Weights> weights(labels.size(), Weights{});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= kNumClasses) {
            throw ConfigError("label value " + std::to_string(labels[i]) + " outside [0, 8]");
        }
        weights[i][labels[i]] = 1.0f;
    }
    return SemanticLabeling(width, height, std::move(weights));
}

SemanticLabeling SemanticLabeling::uniform(std::size_t width, std::size_t height, int class_id) {
    class_name(class_id);
    Weights w{};
    w[class_id] = 1.0f;
    return SemanticLabeling(width, height, std::vector<Weights>(width * height, w));
}

std::vector<std::uint8_t> SemanticLabeling::hard_labels() const {
    std::vector<std::uint8_t> out(m_weights.size());
    for (std::size_t i = 0; i < m_weights.size(); ++i) {
        const auto& w = m_weights[i];
        out[i] = static_cast<std::uint8_t>(std::max_element(w.begin(), w.end()) - w.begin());
    }
    return out;
}

// ---------------------------------------------------------------------------

BinaryMask saturation_mask(const SdrImage& img, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("saturation threshold must be in (0, 1)");
    }
    BinaryMask out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Rgb& p = img[i];
        out.set(i, std::max({p.r, p.g, p.b}) >= threshold);
    }
    return out;
}

BinaryMask class_mask(const SemanticLabeling& labels, int class_id, double threshold) {
    class_name(class_id);
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("class threshold must be in (0, 1)");
    }
    BinaryMask out(labels.width(), labels.height());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.set(i, labels.weight(i, class_id) >= threshold);
    }
    return out;
}

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        std::ostringstream msg;
        msg << "mask dimension mismatch: " << a.width() << "x" << a.height() << " vs " << b.width() << "x"
            << b.height();
        throw ConfigError(msg.str());
    }
}

// Per-row prefix counts of set pixels: prefix[y*(w+1) + x] = count in [0, x).
std::vector<std::uint32_t> row_prefix(const BinaryMask& m) {
    const std::size_t w = m.width();
    std::vector<std::uint32_t> prefix((w + 1) * m.height(), 0);
    for (std::size_t y = 0; y < m.height(); ++y) {
        std::uint32_t* row = &prefix[y * (w + 1)];
        for (std::size_t x = 0; x < w; ++x) row[x + 1] = row[x] + (m.test(x, y) ? 1u : 0u);
    }
    return prefix;
}

}  // namespace

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a[i] && b[i]);
    return out;
}

BinaryMask unite(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a[i] || b[i]);
    return out;
}

BinaryMask erode(const BinaryMask& m, const DiskKernel& d) {
    const long w = static_cast<long>(m.width());
    const long h = static_cast<long>(m.height());
    const int r = d.radius();
    const auto prefix = row_prefix(m);
    BinaryMask out(m.width(), m.height());
    for (long y = 0; y < h; ++y) {
        if (y - r < 0 || y + r >= h) continue;
        for (long x = r; x + r < w; ++x) {
            if (!m.test(x, y)) continue;
            bool inside = true;
            for (int dy = -r; dy <= r && inside; ++dy) {
                const long hw = d.half_width(dy);
                const std::uint32_t* row = &prefix[(y + dy) * (w + 1)];
                inside = row[x + hw + 1] - row[x - hw] == static_cast<std::uint32_t>(2 * hw + 1);
            }
            out.set(x, y, inside);
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& m, const DiskKernel& d) {
    const long w = static_cast<long>(m.width());
    const long h = static_cast<long>(m.height());
    const int r = d.radius();
    const auto prefix = row_prefix(m);
    BinaryMask out(m.width(), m.height());
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                const long yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                const long hw = d.half_width(dy);
                const long lo = std::max(0L, x - hw);
                const long hi = std::min(w - 1, x + hw);
                const std::uint32_t* row = &prefix[yy * (w + 1)];
                hit = row[hi + 1] > row[lo];
            }
            out.set(x, y, hit);
        }
    }
    return out;
}

BinaryMask inpaint_mask(const BinaryMask& m, int alpha, int beta) {
    if (alpha < 1 || alpha > 10 || beta < 1 || beta > 10) {
        std::ostringstream msg;
        msg << "opening radii (" << alpha << ", " << beta << ") outside [1, 10]";
        throw ConfigError(msg.str());
    }
    return dilate(erode(m, DiskKernel(alpha)), DiskKernel(beta));
}

// ---------------------------------------------------------------------------

double feather_alpha(double signed_distance, double radius) noexcept {
    return std::clamp(0.5 + signed_distance / (2.0 * radius), 0.0, 1.0);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of a sampled function (Felzenszwalb & Huttenlocher).
// Infinite samples contribute no parabola.
void dt_1d(const double* f, double* out, std::size_t n, std::vector<int>& v, std::vector<double>& z) {
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = -1;
    auto intersect = [&](int q, int p) {
        return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    for (int q = 0; q < static_cast<int>(n); ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out, out + n, kInf);
        return;
    }
    int j = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const double qd = static_cast<double>(q);
        while (z[j + 1] < qd) ++j;
        const double dq = qd - v[j];
        out[q] = dq * dq + f[v[j]];
    }
}

// Squared Euclidean distance from each pixel to the nearest pixel where `seed` is true.
std::vector<double> squared_distance_to(const BinaryMask& m, bool seed) {
    const std::size_t w = m.width();
    const std::size_t h = m.height();
    std::vector<double> grid(w * h);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (m[i] == seed) ? 0.0 : kInf;

    std::vector<int> v;
    std::vector<double> z;
    std::vector<double> col(h), col_out(h), row_out(w);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) col[y] = grid[y * w + x];
        dt_1d(col.data(), col_out.data(), h, v, z);
        for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = col_out[y];
    }
    for (std::size_t y = 0; y < h; ++y) {
        dt_1d(&grid[y * w], row_out.data(), w, v, z);
        std::copy(row_out.begin(), row_out.end(), grid.begin() + static_cast<long>(y * w));
    }
    return grid;
}

}  // namespace

std::vector<double> signed_distance(const BinaryMask& m) {
    const auto to_background = squared_distance_to(m, false);
    const auto to_foreground = squared_distance_to(m, true);
    std::vector<double> sd(m.size());
    for (std::size_t i = 0; i < sd.size(); ++i) {
        sd[i] = m[i] ? std::sqrt(to_background[i]) - 0.5 : -(std::sqrt(to_foreground[i]) - 0.5);
    }
    return sd;
}

SoftMask feather(const BinaryMask& m, double radius) {
    if (!(radius >= 1.0)) {
        throw ConfigError("feather radius must be >= 1");
    }
    const auto sd = signed_distance(m);
    std::vector<float> alpha(sd.size());
    for (std::size_t i = 0; i < sd.size(); ++i) {
        alpha[i] = static_cast<float>(feather_alpha(sd[i], radius));
    }
    return SoftMask(m.width(), m.height(), std::move(alpha));
}

Raster8 mask_to_raster(const BinaryMask& m) {
    Raster8 out{m.width(), m.height(), 1, std::vector<std::uint8_t>(m.size())};
    for (std::size_t i = 0; i < m.size(); ++i) out.data[i] = m[i] ? 255 : 0;
    return out;
}

Raster8 soft_mask_to_raster(const SoftMask& m) {
    Raster8 out{m.width(), m.height(), 1, std::vector<std::uint8_t>(m.size())};
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.data[i] = static_cast<std::uint8_t>(std::lround(m[i] * 255.0f));
    }
    return out;
}

BinaryMask mask_from_raster(const Raster8& raster) {
    BinaryMask out(raster.width, raster.height);
    const int c = raster.channels;
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, raster.data[i * c] >= 128);
    return out;
}

}  // namespace ditmo
