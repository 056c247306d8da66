// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic LDR scenes with known clipped regions and their label maps.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ditmo/backend.hpp"
#include "ditmo/image.hpp"

namespace scenes {

struct Scene {
    ditmo::SdrImage image;
    std::vector<std::uint8_t> labels;
};

/// Sky on top with a blown-out core and an unclipped band above the horizon,
/// textured ground below, and optionally a water strip at the bottom whose
/// upper half reflects the clipped sky.
inline Scene clipped_sky(std::size_t w, std::size_t h, std::uint64_t seed, bool with_water = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t clip_end = h * 35 / 100;
    const std::size_t horizon = h * 45 / 100;
    const std::size_t shore = with_water ? h * 75 / 100 : h;

    std::vector<ditmo::Rgb> px(w * h);
    std::vector<std::uint8_t> labels(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const double fx = static_cast<double>(x) / static_cast<double>(w);
            const double wave = 0.5 + 0.5 * std::sin(6.2831853 * (3.0 * fx + 0.01 * static_cast<double>(y)));
            if (y < horizon) {
                labels[i] = 0;
                if (y < clip_end) {
                    px[i] = ditmo::Rgb{1.0f, 1.0f, 1.0f};
                } else {
                    const double t = static_cast<double>(y - clip_end) / static_cast<double>(horizon - clip_end);
                    const auto b = static_cast<float>(0.95 - 0.25 * t);
                    px[i] = ditmo::Rgb{b * 0.8f, b * 0.9f, b};
                }
            } else if (y < shore) {
                labels[i] = 1;
                const double base = 0.15 + 0.35 * wave + 0.15 * u(rng);
                px[i] = ditmo::Rgb{static_cast<float>(base * 0.9), static_cast<float>(base * 0.75),
                                   static_cast<float>(base * 0.5)};
            } else {
                labels[i] = 3;
                const std::size_t depth = y - shore;
                if (depth < (h - shore) / 2 && wave > 0.3) {
                    px[i] = ditmo::Rgb{1.0f, 1.0f, 1.0f};
                } else {
                    const auto b = static_cast<float>(0.2 + 0.4 * wave);
                    px[i] = ditmo::Rgb{b * 0.6f, b * 0.8f, b};
                }
            }
        }
    }
    return {ditmo::SdrImage(w, h, std::move(px)), std::move(labels)};
}

/// Mock backend whose segmentation returns a fixed label map.
class LabeledMock : public ditmo::MockBackend {
public:
    LabeledMock(std::size_t w, std::size_t h, std::vector<std::uint8_t> labels)
        : m_w(w), m_h(h), m_labels(std::move(labels)) {}

    ditmo::SemanticLabeling segment(const ditmo::SegmentRequest&) override {
        ++segment_calls;
        return ditmo::SemanticLabeling::from_labels(m_w, m_h, m_labels);
    }

    ditmo::SdrImage inpaint(const ditmo::InpaintRequest& req) override {
        prompts.push_back(req.prompt);
        return MockBackend::inpaint(req);
    }

    int segment_calls = 0;
    std::vector<std::string> prompts;

private:
    std::size_t m_w;
    std::size_t m_h;
    std::vector<std::uint8_t> m_labels;
};

}  // namespace scenes
