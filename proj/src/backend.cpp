// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/backend.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "ditmo/image_io.hpp"

namespace ditmo {

const char* to_string(BackendErrorKind kind) {
    switch (kind) {
        case BackendErrorKind::Timeout: return "timeout";
        case BackendErrorKind::Transport: return "transport";
        case BackendErrorKind::DimensionMismatch: return "dimension_mismatch";
        case BackendErrorKind::MalformedResponse: return "malformed_response";
        case BackendErrorKind::Server: return "server";
    }
    return "unknown";
}

void InpaintRequest::validate() const {
    if (image.width() != mask.width() || image.height() != mask.height()) {
        throw ConfigError("inpaint request: mask dimensions differ from image");
    }
    if (mask.empty()) {
        throw ConfigError("inpaint request: mask is empty");
    }
}

double max_unmasked_change(const SdrImage& before, const SdrImage& after, const BinaryMask& mask) {
    double worst = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (mask[i]) continue;
        const Rgb& a = before[i];
        const Rgb& b = after[i];
        worst = std::max({worst, std::abs(double(a.r) - b.r), std::abs(double(a.g) - b.g),
                          std::abs(double(a.b) - b.b)});
    }
    return worst;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform in [0, 1) with 53 bits.
double unit(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

double lattice(std::uint64_t key, std::int64_t ix, std::int64_t iy) {
    std::uint64_t s = key ^ (static_cast<std::uint64_t>(ix) * 0xD6E8FEB86659FD93ull) ^
                      (static_cast<std::uint64_t>(iy) * 0xA0761D6478BD642Full);
    return 2.0 * unit(s) - 1.0;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

std::uint64_t request_hash(const std::string& prompt, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ull;
    };
    for (char c : prompt) mix(static_cast<std::uint8_t>(c));
    for (int k = 0; k < 8; ++k) mix(static_cast<std::uint8_t>(seed >> (8 * k)));
    return h;
}

SemanticLabeling read_label_map(const std::filesystem::path& path) {
    const auto raster = decode_image(read_file(path), 1);
    try {
        return SemanticLabeling::from_labels(raster.width, raster.height, raster.data);
    } catch (const ConfigError& e) {
        throw IoError(IoErrorKind::Corrupt, path.string() + ": " + e.what());
    }
}

MockBackend::MockBackend(Options options) : m_options(std::move(options)) {
    if (!(m_options.rho_min >= 0.05 && m_options.rho_min < 1.0)) {
        throw ConfigError("mock backend rho_min must be in [0.05, 1)");
    }
}

SdrImage MockBackend::inpaint(const InpaintRequest& req) {
    req.validate();
    std::uint64_t state = request_hash(req.prompt, req.seed);
    const double top = 0.65 + 0.35 * unit(state);
    const double bottom = 0.25 + 0.35 * unit(state);
    const std::array<double, 3> tint{0.55 + 0.45 * unit(state), 0.55 + 0.45 * unit(state),
                                     0.55 + 0.45 * unit(state)};
    const double amplitude = 0.1 + 0.2 * unit(state);
    const double cell = 16.0 + std::floor(32.0 * unit(state));
    const std::uint64_t noise_key = splitmix64(state);

    const std::size_t w = req.image.width();
    const std::size_t h = req.image.height();
    const long floor_level = static_cast<long>(std::ceil(m_options.rho_min * 255.0));
    auto quantize = [&](double v) {
        const long q = std::clamp(std::lround(v * 255.0), floor_level, 255L);
        return static_cast<float>(q) / 255.0f;
    };

    std::vector<Rgb> out = req.image.to_vector();
    for (std::size_t y = 0; y < h; ++y) {
        const double t = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
        const double ramp = top + (bottom - top) * t;
        const double fy = static_cast<double>(y) / cell;
        const auto iy = static_cast<std::int64_t>(std::floor(fy));
        const double sy = smoothstep(fy - static_cast<double>(iy));
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            if (!req.mask[i]) continue;
            const double fx = static_cast<double>(x) / cell;
            const auto ix = static_cast<std::int64_t>(std::floor(fx));
            const double sx = smoothstep(fx - static_cast<double>(ix));
            const double n0 = lattice(noise_key, ix, iy) + sx * (lattice(noise_key, ix + 1, iy) - lattice(noise_key, ix, iy));
            const double n1 = lattice(noise_key, ix, iy + 1) +
                              sx * (lattice(noise_key, ix + 1, iy + 1) - lattice(noise_key, ix, iy + 1));
            const double noise = n0 + sy * (n1 - n0);
            const double level = ramp * (1.0 + amplitude * noise);
            out[i] = Rgb{quantize(tint[0] * level), quantize(tint[1] * level), quantize(tint[2] * level)};
        }
    }
    return SdrImage(w, h, std::move(out));
}

SemanticLabeling MockBackend::segment(const SegmentRequest& req) {
    const auto& img = req.image;
    if (m_options.labels_path && std::filesystem::exists(*m_options.labels_path)) {
        auto labels = read_label_map(*m_options.labels_path);
        if (labels.width() != img.width() || labels.height() != img.height()) {
            throw BackendError(BackendErrorKind::DimensionMismatch,
                               "sidecar label map " + m_options.labels_path->string() + " does not match image size");
        }
        return labels;
    }
    return SemanticLabeling::uniform(img.width(), img.height(), static_cast<int>(SemanticClass::Others));
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(Options options) : m_options(std::move(options)) {
    static const std::regex pattern(R"(^http://([^/:]+)(?::(\d+))?/?$)");
    std::smatch match;
    if (!std::regex_match(m_options.url, match, pattern)) {
        throw ConfigError("backend URL must look like http://host[:port], got '" + m_options.url + "'");
    }
    m_host = match[1].str();
    m_port = match[2].matched ? std::stoi(match[2].str()) : 80;
    if (m_options.max_retries < 0) {
        throw ConfigError("max_retries must be >= 0");
    }
}

std::string HttpBackend::post(const std::string& path, const std::string& body) {
    for (int attempt = 0;; ++attempt) {
        try {
            httplib::Client client(m_host, m_port);
            client.set_connection_timeout(m_options.timeout);
            client.set_read_timeout(m_options.timeout);
            client.set_write_timeout(m_options.timeout);

            const auto started = std::chrono::steady_clock::now();
            auto res = client.Post(path, body, "application/json");
            if (!res) {
                const auto elapsed = std::chrono::steady_clock::now() - started;
                const auto err = res.error();
                const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                       (err == httplib::Error::Read && elapsed >= m_options.timeout);
                throw BackendError(timed_out ? BackendErrorKind::Timeout : BackendErrorKind::Transport,
                                   "POST " + path + ": " + httplib::to_string(err));
            }
            if (res->status != 200) {
                std::string message = res->body;
                try {
                    message = nlohmann::json::parse(res->body).at("error").get<std::string>();
                } catch (const nlohmann::json::exception&) {
                }
                const auto kind = res->status == 504 ? BackendErrorKind::Timeout : BackendErrorKind::Server;
                throw BackendError(kind, "POST " + path + " returned " + std::to_string(res->status) + ": " + message,
                                   res->status);
            }
            return res->body;
        } catch (const BackendError& e) {
            const bool retryable = (e.kind() == BackendErrorKind::Timeout && m_options.retry_timeouts) ||
                                   (e.kind() == BackendErrorKind::Transport && m_options.retry_transport);
            if (!retryable || attempt >= m_options.max_retries) throw;
        }
    }
}

namespace {

std::vector<std::uint8_t> field_bytes(const nlohmann::json& doc, const char* key) {
    try {
        return base64_decode(doc.at(key).get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendErrorKind::MalformedResponse, std::string("response lacks '") + key + "': " + e.what());
    } catch (const IoError& e) {
        throw BackendError(BackendErrorKind::MalformedResponse, std::string("'") + key + "': " + e.what());
    }
}

nlohmann::json parse_body(const std::string& body) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendErrorKind::MalformedResponse, std::string("response is not JSON: ") + e.what());
    }
}

Raster8 decode_payload(const std::vector<std::uint8_t>& bytes, int channels) {
    try {
        return decode_image(bytes, channels);
    } catch (const IoError& e) {
        throw BackendError(BackendErrorKind::MalformedResponse, std::string("response image: ") + e.what());
    }
}

void check_dims(const Raster8& r, const SdrImage& expected) {
    if (r.width != expected.width() || r.height != expected.height()) {
        std::ostringstream msg;
        msg << "response is " << r.width << "x" << r.height << ", request was " << expected.width() << "x"
            << expected.height();
        throw BackendError(BackendErrorKind::DimensionMismatch, msg.str());
    }
}

}  // namespace

SdrImage HttpBackend::inpaint(const InpaintRequest& req) {
    req.validate();
    nlohmann::json body;
    body["image_png_b64"] = base64_encode(encode_png(to_raster(req.image)));
    body["mask_png_b64"] = base64_encode(encode_png(mask_to_raster(req.mask)));
    body["prompt"] = req.prompt;
    body["seed"] = req.seed;

    const auto doc = parse_body(post("/v1/inpaint", body.dump()));
    const auto raster = decode_payload(field_bytes(doc, "image_png_b64"), 3);
    check_dims(raster, req.image);
    SdrImage out = to_sdr(raster);
    const double drift = max_unmasked_change(req.image, out, req.mask);
    if (drift > kUnmaskedTolerance) {
        throw BackendError(BackendErrorKind::MalformedResponse,
                           "response modified unmasked pixels by " + std::to_string(drift));
    }
    return out;
}

SemanticLabeling HttpBackend::segment(const SegmentRequest& req) {
    nlohmann::json body;
    body["image_png_b64"] = base64_encode(encode_png(to_raster(req.image)));
    const auto doc = parse_body(post("/v1/segment", body.dump()));
    const auto raster = decode_payload(field_bytes(doc, "labels_png_b64"), 1);
    check_dims(raster, req.image);
    for (std::uint8_t v : raster.data) {
        if (v >= kNumClasses) {
            throw BackendError(BackendErrorKind::MalformedResponse,
                               "label value " + std::to_string(v) + " outside [0, 8]");
        }
    }
    return SemanticLabeling::from_labels(raster.width, raster.height, raster.data);
}

}  // namespace ditmo
