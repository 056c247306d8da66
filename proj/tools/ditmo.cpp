// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: `ditmo run` reconstructs an HDR image from one LDR
// exposure, `ditmo graph build` derives the class ordering graph from a
// labelled HDR dataset.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ditmo/conformance.hpp"
#include "ditmo/image_io.hpp"
#include "ditmo/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kBackend = 3, kIo = 4, kInternal = 5 };

int report_error(const ditmo::Error& e, const char* kind) {
    std::cerr << "ditmo: " << kind;
    if (!e.stage().empty()) std::cerr << " in stage '" << e.stage() << "'";
    std::cerr << ": " << e.what() << "\n";
    return 0;
}

std::pair<int, std::string> parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ditmo::ConfigError("prompt override must look like <class>=<text>, got '" + text + "'");
    }
    const std::string name = text.substr(0, eq);
    const auto id = ditmo::class_from_name(name);
    if (!id) throw ditmo::ConfigError("unknown class '" + name + "' in prompt override");
    return {*id, text.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-image HDR reconstruction by semantic inpainting"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Reconstruct an HDR image from an 8-bit PNG/JPEG");
    std::string input, output, graph_path, backend = "mock", backend_url, config_path, debug_dir;
    std::uint64_t seed = 0;
    double sat_threshold = 0.0, percentile = 0.0;
    int alpha = 0, beta = 0, timeout = 0, retries = -1;
    std::vector<std::string> overrides;
    bool report_dr = false;
    run_cmd->add_option("--input,-i", input, "Input LDR image (PNG or JPEG)")->required();
    run_cmd->add_option("--output,-o", output, "Output Radiance .hdr path")->required();
    run_cmd->add_option("--graph", graph_path, "Ordered semantic graph JSON");
    run_cmd->add_option("--config", config_path, "Pipeline config JSON");
    run_cmd->add_option("--backend", backend, "Model backend")->check(CLI::IsMember({"mock", "http"}));
    run_cmd->add_option("--backend-url", backend_url, "Model service URL, e.g. http://127.0.0.1:8000");
    run_cmd->add_option("--backend-timeout", timeout, "Per-request timeout in seconds");
    run_cmd->add_option("--backend-retries", retries, "Extra attempts on timeouts and transport errors");
    run_cmd->add_option("--seed", seed, "Seed for prompt sampling and inpainting");
    run_cmd->add_option("--sat-threshold", sat_threshold, "Saturation threshold in (0, 1)");
    run_cmd->add_option("--exposure-percentile", percentile, "Exposure percentile in (0, 1]");
    run_cmd->add_option("--alpha", alpha, "Erosion radius used for every class");
    run_cmd->add_option("--beta", beta, "Dilation radius used for every class");
    run_cmd->add_option("--prompt-override", overrides, "<class>=<prompt>, repeatable");
    run_cmd->add_option("--dump-debug", debug_dir, "Write masks, patches and brackets here");
    run_cmd->add_flag("--report-dr", report_dr, "Print input/output dynamic range as a JSON line");

    // graph build
    auto* graph_cmd = app.add_subcommand("graph", "Ordered semantic graph tools");
    graph_cmd->require_subcommand(1);
    auto* build_cmd = graph_cmd->add_subcommand("build", "Build the graph from a labelled HDR dataset");
    std::string dataset, albedo, prompts, graph_out;
    bool segment_missing = false;
    build_cmd->add_option("--dataset", dataset, "Directory of .hdr files with <stem>.labels.png")
        ->required();
    build_cmd->add_option("--albedo", albedo, "Per-class albedo JSON");
    build_cmd->add_option("--prompts", prompts, "Per-class prompt templates JSON");
    build_cmd->add_option("--out", graph_out, "Output graph JSON")->required();
    build_cmd->add_option("--backend-url", backend_url, "Label images without a sidecar through this service");
    build_cmd->add_flag("--segment-missing", segment_missing, "Label images without a sidecar via the backend");

    // conformance
    auto* conf_cmd = app.add_subcommand("conformance", "Check a model service against the wire protocol");
    std::string conf_url;
    int max_dimension = 2048;
    bool skip_health = false;
    conf_cmd->add_option("--url", conf_url, "Service URL, e.g. http://127.0.0.1:8000")->required();
    conf_cmd->add_option("--max-dimension", max_dimension, "The service's image size limit")->check(CLI::PositiveNumber);
    conf_cmd->add_option("--timeout", timeout, "Per-request timeout in seconds");
    conf_cmd->add_flag("--skip-health", skip_health, "Do not probe GET /v1/health");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run_cmd) {
            ditmo::PipelineConfig config;
            if (!config_path.empty()) {
                const auto bytes = ditmo::read_file(config_path);
                config = ditmo::config_from_json(std::string(bytes.begin(), bytes.end()));
            }
            if (run_cmd->count("--backend")) {
                config.backend = backend == "http" ? ditmo::PipelineConfig::BackendKind::Http
                                                   : ditmo::PipelineConfig::BackendKind::Mock;
            }
            if (!backend_url.empty()) config.backend_url = backend_url;
            if (run_cmd->count("--backend-timeout")) config.backend_timeout_s = timeout;
            if (run_cmd->count("--backend-retries")) config.backend_retries = retries;
            if (run_cmd->count("--seed")) config.seed = seed;
            if (run_cmd->count("--sat-threshold")) config.saturation_threshold = sat_threshold;
            if (run_cmd->count("--exposure-percentile")) config.exposure_percentile = percentile;
            if (run_cmd->count("--alpha") || run_cmd->count("--beta")) {
                ditmo::OpeningRadii r = config.radii_override.value_or(config.default_radii);
                if (run_cmd->count("--alpha")) r.alpha = alpha;
                if (run_cmd->count("--beta")) r.beta = beta;
                config.radii_override = r;
            }
            for (const auto& o : overrides) {
                const auto [id, text] = parse_override(o);
                config.prompt_overrides[id] = text;
            }
            if (!graph_path.empty()) config.graph_path = graph_path;

            std::optional<std::filesystem::path> debug;
            if (!debug_dir.empty()) debug = debug_dir;
            const auto files = ditmo::run(input, output, config, debug);
            if (report_dr) {
                const auto bytes = ditmo::read_file(files.manifest);
                const auto manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
                nlohmann::ordered_json line;
                line["input_dr"] = manifest["dynamic_range"]["input"];
                line["output_dr"] = manifest["dynamic_range"]["output"];
                std::cout << line.dump() << std::endl;
            }
            return kOk;
        }

        if (*conf_cmd) {
            ditmo::ConformanceOptions co;
            co.url = conf_url;
            co.max_dimension = max_dimension;
            co.check_health = !skip_health;
            if (timeout > 0) co.timeout = std::chrono::seconds(timeout);
            int failed = 0;
            for (const auto& c : ditmo::run_conformance(co)) {
                std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
                failed += c.passed ? 0 : 1;
            }
            return failed == 0 ? kOk : kBackend;
        }

        ditmo::GraphBuildOptions options;
        options.dataset_dir = dataset;
        if (!albedo.empty()) options.albedo_path = albedo;
        if (!prompts.empty()) options.prompts_path = prompts;
        options.out_path = graph_out;
        options.warn = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
        std::unique_ptr<ditmo::Backend> segmenter;
        if (segment_missing) {
            ditmo::PipelineConfig config;
            if (!backend_url.empty()) {
                config.backend = ditmo::PipelineConfig::BackendKind::Http;
                config.backend_url = backend_url;
            }
            segmenter = ditmo::make_backend(config);
            options.segmenter = segmenter.get();
        }
        const auto graph = ditmo::graph_build(options);
        for (const auto& e : graph.edges()) {
            std::printf("%s -> %s  weight=%.6g  count=%d\n", ditmo::class_name(e.from).data(),
                        ditmo::class_name(e.to).data(), e.weight, e.count);
        }
        return kOk;
    } catch (const ditmo::ConfigError& e) {
        report_error(e, "configuration error");
        return kConfig;
    } catch (const ditmo::ValidationError& e) {
        report_error(e, "validation error");
        return kConfig;
    } catch (const ditmo::BackendError& e) {
        report_error(e, (std::string("backend error (") + ditmo::to_string(e.kind()) + ")").c_str());
        return kBackend;
    } catch (const ditmo::IoError& e) {
        report_error(e, "I/O error");
        return kIo;
    } catch (const ditmo::Error& e) {
        report_error(e, "error");
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "ditmo: " << e.what() << "\n";
        return kInternal;
    }
}
