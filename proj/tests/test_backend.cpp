// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "ditmo/backend.hpp"
#include "ditmo/conformance.hpp"
#include "ditmo/image_io.hpp"
#include "fake_service.hpp"

using namespace ditmo;

namespace {

SdrImage gray(std::size_t w, std::size_t h, float v) { return SdrImage(w, h, Rgb{v, v, v}); }

BinaryMask box(std::size_t w, std::size_t h) {
    BinaryMask m(w, h);
    for (std::size_t y = h / 4; y < h / 2; ++y) {
        for (std::size_t x = w / 4; x < 3 * w / 4; ++x) m.set(x, y);
    }
    return m;
}

BackendErrorKind inpaint_error(HttpBackend& client, const InpaintRequest& req) {
    try {
        client.inpaint(req);
    } catch (const BackendError& e) {
        return e.kind();
    }
    FAIL("expected a BackendError");
    return BackendErrorKind::Server;
}

BackendErrorKind segment_error(HttpBackend& client, const SegmentRequest& req) {
    try {
        client.segment(req);
    } catch (const BackendError& e) {
        return e.kind();
    }
    FAIL("expected a BackendError");
    return BackendErrorKind::Server;
}

HttpBackend client_for(const FakeService& service, int timeout_s = 5, int retries = 0) {
    HttpBackend::Options o;
    o.url = service.url();
    o.timeout = std::chrono::seconds(timeout_s);
    o.max_retries = retries;
    return HttpBackend(o);
}

}  // namespace

TEST_CASE("mock inpaint is deterministic and seeded by prompt and seed") {
    MockBackend mock;
    const InpaintRequest req{gray(64, 48, 0.3f), box(64, 48), "clear blue sky", 7};
    const auto a = mock.inpaint(req);
    const auto b = mock.inpaint(req);
    CHECK(a == b);
    auto other = req;
    other.seed = 8;
    CHECK_FALSE(mock.inpaint(other) == a);
    other = req;
    other.prompt = "cloudy sky";
    CHECK_FALSE(mock.inpaint(other) == a);
}

TEST_CASE("mock inpaint leaves unmasked pixels alone and respects rho_min") {
    for (double rho : {0.05, 0.3}) {
        MockBackend mock(MockBackend::Options{rho, std::nullopt});
        const InpaintRequest req{gray(80, 60, 0.3f), box(80, 60), "dark cave", 3};
        const auto out = mock.inpaint(req);
        CHECK(max_unmasked_change(req.image, out, req.mask) == 0.0);
        float lowest = 1.0f;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!req.mask[i]) continue;
            lowest = std::min({lowest, out[i].r, out[i].g, out[i].b});
        }
        CHECK(lowest >= static_cast<float>(rho) - 1e-6f);
    }
    CHECK_THROWS_AS(MockBackend(MockBackend::Options{0.01, std::nullopt}), ConfigError);
}

TEST_CASE("mock output is 8-bit quantized") {
    MockBackend mock;
    const auto mask = box(32, 32);
    const auto out = mock.inpaint({gray(32, 32, 0.5f), mask, "p", 1});
    const auto back = to_sdr(to_raster(out));
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask[i]) CHECK(back[i] == out[i]);
        else CHECK(out[i] == Rgb{0.5f, 0.5f, 0.5f});
    }
}

TEST_CASE("inpaint request validation") {
    MockBackend mock;
    CHECK_THROWS_AS(mock.inpaint({gray(8, 8, 0.5f), BinaryMask(8, 8), "p", 1}), ConfigError);
    CHECK_THROWS_AS(mock.inpaint({gray(8, 8, 0.5f), BinaryMask(4, 8, true), "p", 1}), ConfigError);
}

TEST_CASE("request hash is FNV-1a over prompt bytes then the seed") {
    // FNV-1a of the empty string followed by eight zero bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < 8; ++i) h = (h ^ 0u) * 0x100000001b3ULL;
    CHECK(request_hash("", 0) == h);
    CHECK(request_hash("a", 1) != request_hash("a", 2));
}

TEST_CASE("mock segmentation without sidecar is all 'others'") {
    MockBackend mock;
    const auto l = mock.segment({gray(5, 4, 0.5f)});
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(l.weight(i, 8) == 1.0f);
}

TEST_CASE("mock segmentation passes a sidecar label map through") {
    const auto dir = std::filesystem::temp_directory_path() / "ditmo_unit";
    std::filesystem::create_directories(dir);
    const auto path = dir / "img.labels.png";
    write_png(path, Raster8{3, 2, 1, {0, 3, 8, 1, 1, 2}});
    MockBackend mock(MockBackend::Options{0.05, path});
    const auto l = mock.segment({gray(3, 2, 0.5f)});
    CHECK(l.hard_labels() == std::vector<std::uint8_t>{0, 3, 8, 1, 1, 2});
    try {
        mock.segment({gray(4, 2, 0.5f)});
        FAIL("expected an error");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::DimensionMismatch);
    }
    write_png(path, Raster8{1, 1, 1, {12}});
    CHECK_THROWS(read_label_map(path));
}

TEST_CASE("http client URL validation") {
    CHECK_THROWS_AS(HttpBackend(HttpBackend::Options{"ftp://x", std::chrono::seconds(1)}), ConfigError);
    CHECK_THROWS_AS(HttpBackend(HttpBackend::Options{"http://host/path", std::chrono::seconds(1)}), ConfigError);
    CHECK_NOTHROW(HttpBackend(HttpBackend::Options{"http://127.0.0.1:9", std::chrono::seconds(1)}));
}

TEST_CASE("http segment and inpaint against a well-behaved service") {
    FakeService service;
    auto client = client_for(service);
    const SdrImage image = gray(40, 30, 0.4f);
    const auto labels = client.segment({image});
    CHECK(labels.width() == 40);
    CHECK(labels.height() == 30);
    CHECK(labels.hard_labels()[0] == 0);
    CHECK(labels.hard_labels().back() == 1);

    const InpaintRequest req{image, box(40, 30), "clear blue sky", 7};
    const auto out = client.inpaint(req);
    MockBackend mock;
    CHECK(out == mock.inpaint(req));
}

TEST_CASE("http client maps response faults to distinct error kinds") {
    FakeService service;
    auto client = client_for(service);
    const SdrImage image = gray(40, 30, 0.4f);
    const InpaintRequest req{image, box(40, 30), "clear blue sky", 7};

    service.set_fault(FakeService::Fault::ResizeImage);
    CHECK(inpaint_error(client, req) == BackendErrorKind::DimensionMismatch);
    CHECK(segment_error(client, {image}) == BackendErrorKind::DimensionMismatch);

    service.set_fault(FakeService::Fault::BadLabel);
    CHECK(segment_error(client, {image}) == BackendErrorKind::MalformedResponse);

    service.set_fault(FakeService::Fault::TouchUnmasked);
    CHECK(inpaint_error(client, req) == BackendErrorKind::MalformedResponse);

    service.set_fault(FakeService::Fault::NotJson);
    CHECK(inpaint_error(client, req) == BackendErrorKind::MalformedResponse);

    service.set_fault(FakeService::Fault::MissingField);
    CHECK(inpaint_error(client, req) == BackendErrorKind::MalformedResponse);

    service.set_fault(FakeService::Fault::BadBase64);
    CHECK(segment_error(client, {image}) == BackendErrorKind::MalformedResponse);

    service.set_fault(FakeService::Fault::GatewayTimeout);
    CHECK(inpaint_error(client, req) == BackendErrorKind::Timeout);

    service.set_fault(FakeService::Fault::ServerError);
    try {
        client.inpaint(req);
        FAIL("expected an error");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::Server);
        CHECK(e.status() == 500);
        CHECK(std::string(e.what()).find("model failure") != std::string::npos);
    }
}

TEST_CASE("http client reports 400 and 413 as server errors with status") {
    FakeService service(64);
    auto client = client_for(service);
    try {
        client.inpaint({gray(40, 30, 0.4f), box(40, 30), "", 7});
        FAIL("expected an error");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::Server);
        CHECK(e.status() == 400);
    }
    try {
        client.segment({gray(65, 10, 0.4f)});
        FAIL("expected an error");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::Server);
        CHECK(e.status() == 413);
    }
}

TEST_CASE("http client timeouts and transport failures") {
    FakeService service;
    service.slow_delay = std::chrono::milliseconds(2500);
    auto client = client_for(service, 1);
    service.set_fault(FakeService::Fault::Slow, 1);
    CHECK(segment_error(client, {gray(16, 16, 0.4f)}) == BackendErrorKind::Timeout);

    // Nothing listens on port 9 of the loopback interface.
    HttpBackend dead(HttpBackend::Options{"http://127.0.0.1:9", std::chrono::seconds(1)});
    CHECK(segment_error(dead, {gray(16, 16, 0.4f)}) == BackendErrorKind::Transport);
}

TEST_CASE("http client retries retryable errors") {
    FakeService service;
    auto client = client_for(service, 5, 2);
    service.set_fault(FakeService::Fault::GatewayTimeout, 2);
    CHECK_NOTHROW(client.segment({gray(16, 16, 0.4f)}));
    CHECK(service.requests() == 3);

    service.set_fault(FakeService::Fault::GatewayTimeout, 3);
    CHECK(segment_error(client, {gray(16, 16, 0.4f)}) == BackendErrorKind::Timeout);

    // Server errors are not retried.
    const int before = service.requests();
    service.set_fault(FakeService::Fault::ServerError, 1);
    CHECK(segment_error(client, {gray(16, 16, 0.4f)}) == BackendErrorKind::Server);
    CHECK(service.requests() == before + 1);
}

TEST_CASE("conformance suite passes against a conforming service") {
    FakeService service(256);
    ConformanceOptions o;
    o.url = service.url();
    o.timeout = std::chrono::seconds(5);
    o.max_dimension = 256;
    const auto checks = run_conformance(o);
    CHECK(checks.size() == 9);
    for (const auto& c : checks) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("conformance suite flags a service that alters unmasked pixels") {
    FakeService service(256);
    service.set_fault(FakeService::Fault::TouchUnmasked);
    ConformanceOptions o;
    o.url = service.url();
    o.max_dimension = 256;
    int failed = 0;
    for (const auto& c : run_conformance(o)) failed += c.passed ? 0 : 1;
    CHECK(failed >= 1);
}

TEST_CASE("conformance suite flags a service without a size limit") {
    FakeService service(4096);
    ConformanceOptions o;
    o.url = service.url();
    o.max_dimension = 256;
    const auto checks = run_conformance(o);
    CHECK_FALSE(checks.back().passed);
    CHECK(checks.back().name.find("413") != std::string::npos);
}
