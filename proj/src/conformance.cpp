// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/conformance.hpp"

#include <functional>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "ditmo/backend.hpp"
#include "ditmo/image_io.hpp"

namespace ditmo {

namespace {

// Sky over ground with a soft horizon, so real segmenters have something to find.
SdrImage probe_image(std::size_t w, std::size_t h) {
    std::vector<Rgb> px(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        const float t = static_cast<float>(y) / static_cast<float>(h - 1);
        for (std::size_t x = 0; x < w; ++x) {
            px[y * w + x] = y < h / 2 ? Rgb{0.45f + 0.3f * t, 0.65f + 0.3f * t, 1.0f}
                                      : Rgb{0.35f - 0.2f * t, 0.3f - 0.15f * t, 0.2f};
        }
    }
    return SdrImage(w, h, std::move(px));
}

BinaryMask probe_mask(std::size_t w, std::size_t h) {
    BinaryMask m(w, h);
    for (std::size_t y = h / 8; y < h / 2; ++y) {
        for (std::size_t x = w / 4; x < 3 * w / 4; ++x) m.set(x, y);
    }
    return m;
}

std::string b64_png(const Raster8& r) { return base64_encode(encode_png(r)); }

struct Endpoint {
    std::string host;
    int port = 80;
};

Endpoint parse_url(const std::string& url) {
    static const std::regex pattern(R"(^http://([^/:]+)(?::(\d+))?/?$)");
    std::smatch match;
    if (!std::regex_match(url, match, pattern)) {
        throw ConfigError("service URL must look like http://host[:port], got '" + url + "'");
    }
    return {match[1].str(), match[2].matched ? std::stoi(match[2].str()) : 80};
}

}  // namespace

std::vector<ConformanceCheck> run_conformance(const ConformanceOptions& options) {
    const Endpoint ep = parse_url(options.url);
    std::vector<ConformanceCheck> checks;
    auto check = [&](const std::string& name, const std::function<std::string()>& body) {
        ConformanceCheck c{name, false, {}};
        try {
            c.detail = body();
            c.passed = true;
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        checks.push_back(std::move(c));
    };
    auto raw_post = [&](const std::string& path, const std::string& payload) {
        httplib::Client client(ep.host, ep.port);
        client.set_read_timeout(options.timeout);
        client.set_write_timeout(options.timeout);
        auto res = client.Post(path, payload, "application/json");
        if (!res) throw std::runtime_error("POST " + path + ": " + httplib::to_string(res.error()));
        return *res;
    };
    auto expect_status = [&](const std::string& path, const std::string& payload, int status) {
        const auto res = raw_post(path, payload);
        if (res.status != status) {
            throw std::runtime_error("expected " + std::to_string(status) + ", got " + std::to_string(res.status));
        }
        const auto doc = nlohmann::json::parse(res.body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("error") || !doc["error"].is_string()) {
            throw std::runtime_error("error response lacks {\"error\": string}");
        }
        return std::to_string(status) + ": " + doc["error"].get<std::string>();
    };

    HttpBackend::Options bo;
    bo.url = options.url;
    bo.timeout = options.timeout;
    HttpBackend client(bo);
    const std::size_t w = 96;
    const std::size_t h = 64;
    const SdrImage image = probe_image(w, h);
    const BinaryMask mask = probe_mask(w, h);

    if (options.check_health) {
        check("health", [&] {
            httplib::Client c(ep.host, ep.port);
            c.set_read_timeout(options.timeout);
            auto res = c.Get("/v1/health");
            if (!res) throw std::runtime_error("GET /v1/health: " + httplib::to_string(res.error()));
            if (res->status != 200) throw std::runtime_error("status " + std::to_string(res->status));
            const auto doc = nlohmann::json::parse(res->body);
            if (doc.at("status").get<std::string>() != "ok" || !doc.at("models").is_object()) {
                throw std::runtime_error("body is not {\"status\":\"ok\",\"models\":{...}}");
            }
            return std::string("ok");
        });
    }
    // The client validates dimensions, label range and unmasked drift itself.
    check("segment: schema, dimensions, label range", [&] {
        const auto labels = client.segment(SegmentRequest{image});
        return std::to_string(labels.width()) + "x" + std::to_string(labels.height());
    });
    SdrImage first(1, 1, Rgb{});
    check("inpaint: schema, dimensions, unmasked pixels within 1/255", [&] {
        first = client.inpaint(InpaintRequest{image, mask, "clear blue sky", 7});
        return "max unmasked change " + std::to_string(max_unmasked_change(image, first, mask));
    });
    check("inpaint: same request twice is pixel-identical", [&] {
        const SdrImage second = client.inpaint(InpaintRequest{image, mask, "clear blue sky", 7});
        if (to_raster(first).data != to_raster(second).data) throw std::runtime_error("responses differ");
        return std::string("identical");
    });

    nlohmann::json good;
    good["image_png_b64"] = b64_png(to_raster(image));
    good["mask_png_b64"] = b64_png(mask_to_raster(mask));
    good["prompt"] = "clear blue sky";
    good["seed"] = 7;

    check("inpaint: malformed JSON -> 400", [&] { return expect_status("/v1/inpaint", "{not json", 400); });
    check("segment: missing field -> 400", [&] { return expect_status("/v1/segment", "{}", 400); });
    check("inpaint: empty prompt -> 400", [&] {
        auto body = good;
        body["prompt"] = "";
        return expect_status("/v1/inpaint", body.dump(), 400);
    });
    check("inpaint: mask size mismatch -> 400", [&] {
        auto body = good;
        body["mask_png_b64"] = b64_png(mask_to_raster(BinaryMask(w / 2, h / 2)));
        return expect_status("/v1/inpaint", body.dump(), 400);
    });
    check("segment: oversized image -> 413", [&] {
        const auto big_w = static_cast<std::size_t>(options.max_dimension) + 1;
        Raster8 big{big_w, 8, 3, std::vector<std::uint8_t>(big_w * 8 * 3, 128)};
        nlohmann::json body;
        body["image_png_b64"] = b64_png(big);
        return expect_status("/v1/segment", body.dump(), 413);
    });
    return checks;
}

}  // namespace ditmo
