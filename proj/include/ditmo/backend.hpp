// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ditmo/image.hpp"
#include "ditmo/mask.hpp"

namespace ditmo {

struct InpaintRequest {
    SdrImage image;
    BinaryMask mask;  // set = fill
    std::string prompt;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless dimensions match and the mask is non-empty.
    void validate() const;
};

struct SegmentRequest {
    SdrImage image;
};

/// Generative inpainting and semantic segmentation behind one interface.
class Backend {
public:
    virtual ~Backend() = default;

    virtual SdrImage inpaint(const InpaintRequest& req) = 0;
    virtual SemanticLabeling segment(const SegmentRequest& req) = 0;
};

/// Deterministic stand-in for the model service.
///
/// Inpainting fills the mask with a smooth vertical gradient modulated by
/// low-frequency value noise. Every parameter is drawn from a 64-bit hash of
/// (prompt, seed), so the result is a pure function of the request and is
/// identical across platforms. Values are quantized to 8 bits, like a PNG
/// round trip, and never fall below `rho_min`.
///
/// Segmentation returns the sidecar label map when one is configured and
/// exists, otherwise "others" everywhere.
class MockBackend : public Backend {
public:
    struct Options {
        double rho_min = 0.05;
        std::optional<std::filesystem::path> labels_path;
    };

    MockBackend() : MockBackend(Options{}) {}
    explicit MockBackend(Options options);

    SdrImage inpaint(const InpaintRequest& req) override;
    SemanticLabeling segment(const SegmentRequest& req) override;

    const Options& options() const noexcept { return m_options; }

private:
    Options m_options;
};

/// 64-bit FNV-1a over the prompt bytes followed by the little-endian seed.
std::uint64_t request_hash(const std::string& prompt, std::uint64_t seed);

/// Reads an 8-bit label PNG (values 0..8) into a one-hot labeling.
SemanticLabeling read_label_map(const std::filesystem::path& path);

/// Client for the model service wire protocol:
///   POST /v1/segment {"image_png_b64"} -> {"labels_png_b64"}
///   POST /v1/inpaint {"image_png_b64","mask_png_b64","prompt","seed"} -> {"image_png_b64"}
/// Responses are validated (dimensions, label range, unmasked-pixel
/// preservation within 1/255); violations raise BackendError.
class HttpBackend : public Backend {
public:
    struct Options {
        std::string url;  // e.g. http://127.0.0.1:8000
        std::chrono::seconds timeout{120};
        int max_retries = 0;        // extra attempts on retryable errors
        bool retry_timeouts = true;
        bool retry_transport = true;
    };

    explicit HttpBackend(Options options);

    SdrImage inpaint(const InpaintRequest& req) override;
    SemanticLabeling segment(const SegmentRequest& req) override;

private:
    std::string post(const std::string& path, const std::string& body);

    Options m_options;
    std::string m_host;
    int m_port = 80;
};

/// Tolerance for pixels outside the inpainting mask, in [0,1] units.
inline constexpr double kUnmaskedTolerance = 1.0 / 255.0 + 1e-6;

/// Largest per-channel difference between `before` and `after` over pixels
/// outside `mask`.
double max_unmasked_change(const SdrImage& before, const SdrImage& after, const BinaryMask& mask);

}  // namespace ditmo
