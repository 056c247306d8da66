// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ditmo/image_io.hpp"

namespace ditmo {

using ordered_json = nlohmann::ordered_json;

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    } catch (const std::bad_alloc&) {
        throw;
    } catch (const std::exception& e) {
        Error wrapped(e.what());
        wrapped.set_stage(stage);
        throw wrapped;
    }
}

void check_radii(const OpeningRadii& r, const char* what) {
    if (r.alpha < 1 || r.alpha > 10 || r.beta < 1 || r.beta > 10) {
        throw ConfigError(std::string(what) + " must have alpha and beta in [1, 10]");
    }
}

std::string name_of(int class_id) { return std::string(class_name(class_id)); }

int class_id_of(const std::string& name) {
    const auto id = class_from_name(name);
    if (!id) throw ConfigError("unknown class '" + name + "'");
    return *id;
}

}  // namespace

// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (!(saturation_threshold > 0.0 && saturation_threshold < 1.0)) {
        throw ConfigError("saturation threshold must be in (0, 1)");
    }
    if (!(class_threshold > 0.0 && class_threshold < 1.0)) {
        throw ConfigError("class threshold must be in (0, 1)");
    }
    check_radii(default_radii, "default radii");
    check_radii(high_frequency_radii, "high-frequency radii");
    if (radii_override) check_radii(*radii_override, "radii override");
    for (const auto& [a, b] : high_frequency_pairs) {
        class_name(a);
        class_name(b);
    }
    if (!(refine_radius >= 1.0) || !(composite_radius >= 1.0)) {
        throw ConfigError("feather radii must be >= 1");
    }
    if (!(exposure_percentile > 0.0 && exposure_percentile <= 1.0)) {
        throw ConfigError("exposure percentile must be in (0, 1]");
    }
    if (!(bracket_merge_tolerance >= 0.0)) {
        throw ConfigError("bracket merge tolerance must be >= 0");
    }
    if (backend == BackendKind::Http && backend_url.empty()) {
        throw ConfigError("the http backend needs a backend URL");
    }
    if (backend_timeout_s <= 0 || backend_retries < 0) {
        throw ConfigError("backend timeout must be positive and retries non-negative");
    }
    if (!(mock_rho_min >= 0.05 && mock_rho_min < 1.0)) {
        throw ConfigError("mock rho_min must be in [0.05, 1)");
    }
    for (const auto& [id, text] : prompt_overrides) {
        class_name(id);
        if (text.empty()) throw ConfigError("prompt override for '" + name_of(id) + "' is empty");
    }
}

OpeningRadii PipelineConfig::radii_for(int class_id, const std::vector<int>& neighbours) const {
    if (radii_override) return *radii_override;
    for (int n : neighbours) {
        for (const auto& [a, b] : high_frequency_pairs) {
            if ((a == class_id && b == n) || (b == class_id && a == n)) return high_frequency_radii;
        }
    }
    return default_radii;
}

std::string config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["saturation_threshold"] = c.saturation_threshold;
    j["class_threshold"] = c.class_threshold;
    j["default_radii"] = {c.default_radii.alpha, c.default_radii.beta};
    j["high_frequency_radii"] = {c.high_frequency_radii.alpha, c.high_frequency_radii.beta};
    j["high_frequency_pairs"] = ordered_json::array();
    for (const auto& [a, b] : c.high_frequency_pairs) j["high_frequency_pairs"].push_back({name_of(a), name_of(b)});
    j["radii_override"] = c.radii_override ? ordered_json{c.radii_override->alpha, c.radii_override->beta}
                                           : ordered_json(nullptr);
    j["refine_radius"] = c.refine_radius;
    j["composite_radius"] = c.composite_radius;
    j["min_region_pixels"] = c.min_region_pixels;
    j["exposure_percentile"] = c.exposure_percentile;
    j["bracket_merge_tolerance"] = c.bracket_merge_tolerance;
    j["crf"] = c.crf.kind() == ResponseCurve::Kind::Srgb ? ordered_json{{"kind", "srgb"}}
                                                         : ordered_json{{"kind", "gamma"}, {"gamma", c.crf.exponent()}};
    j["merge_weight"] = c.merge_weight == WeightFunction::Kind::Triangle ? "triangle" : "parabolic";
    j["backend"] = c.backend == PipelineConfig::BackendKind::Mock ? "mock" : "http";
    j["backend_url"] = c.backend_url;
    j["backend_timeout_s"] = c.backend_timeout_s;
    j["backend_retries"] = c.backend_retries;
    j["mock_rho_min"] = c.mock_rho_min;
    j["seed"] = c.seed;
    j["prompt_overrides"] = ordered_json::object();
    for (const auto& [id, text] : c.prompt_overrides) j["prompt_overrides"][name_of(id)] = text;
    j["graph_path"] = c.graph_path ? ordered_json(c.graph_path->string()) : ordered_json(nullptr);
    return j.dump(2);
}

PipelineConfig config_from_json(const std::string& text) {
    PipelineConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        auto radii = [](const nlohmann::json& v) { return OpeningRadii{v.at(0).get<int>(), v.at(1).get<int>()}; };
        for (const auto& [key, v] : j.items()) {
            if (key == "saturation_threshold") c.saturation_threshold = v.get<double>();
            else if (key == "class_threshold") c.class_threshold = v.get<double>();
            else if (key == "default_radii") c.default_radii = radii(v);
            else if (key == "high_frequency_radii") c.high_frequency_radii = radii(v);
            else if (key == "high_frequency_pairs") {
                c.high_frequency_pairs.clear();
                for (const auto& p : v) {
                    c.high_frequency_pairs.emplace_back(class_id_of(p.at(0).get<std::string>()),
                                                        class_id_of(p.at(1).get<std::string>()));
                }
            } else if (key == "radii_override") {
                if (v.is_null()) c.radii_override.reset();
                else c.radii_override = radii(v);
            } else if (key == "refine_radius") c.refine_radius = v.get<double>();
            else if (key == "composite_radius") c.composite_radius = v.get<double>();
            else if (key == "min_region_pixels") c.min_region_pixels = v.get<std::size_t>();
            else if (key == "exposure_percentile") c.exposure_percentile = v.get<double>();
            else if (key == "bracket_merge_tolerance") c.bracket_merge_tolerance = v.get<double>();
            else if (key == "crf") {
                const auto kind = v.at("kind").get<std::string>();
                if (kind == "srgb") c.crf = ResponseCurve::srgb();
                else if (kind == "gamma") c.crf = ResponseCurve::gamma(v.value("gamma", 2.2));
                else throw ConfigError("unknown crf kind '" + kind + "'");
            } else if (key == "merge_weight") {
                const auto kind = v.get<std::string>();
                if (kind == "triangle") c.merge_weight = WeightFunction::Kind::Triangle;
                else if (kind == "parabolic") c.merge_weight = WeightFunction::Kind::Parabolic;
                else throw ConfigError("unknown merge weight '" + kind + "'");
            } else if (key == "backend") {
                const auto kind = v.get<std::string>();
                if (kind == "mock") c.backend = PipelineConfig::BackendKind::Mock;
                else if (kind == "http") c.backend = PipelineConfig::BackendKind::Http;
                else throw ConfigError("unknown backend '" + kind + "'");
            } else if (key == "backend_url") c.backend_url = v.get<std::string>();
            else if (key == "backend_timeout_s") c.backend_timeout_s = v.get<int>();
            else if (key == "backend_retries") c.backend_retries = v.get<int>();
            else if (key == "mock_rho_min") c.mock_rho_min = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "prompt_overrides") {
                c.prompt_overrides.clear();
                for (const auto& [name, p] : v.items()) c.prompt_overrides[class_id_of(name)] = p.get<std::string>();
            } else if (key == "graph_path") {
                if (v.is_null()) c.graph_path.reset();
                else c.graph_path = v.get<std::string>();
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------

namespace {

// Classes labelled on pixels that touch `seg` from outside (4-neighbourhood).
std::vector<int> neighbouring_classes(const BinaryMask& seg, const std::vector<std::uint8_t>& hard, int self) {
    const BinaryMask ring = dilate(seg, DiskKernel(1));
    std::set<int> found;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        if (ring[i] && !seg[i] && hard[i] != self) found.insert(hard[i]);
    }
    return {found.begin(), found.end()};
}

}  // namespace

RunOutput run_pipeline(const SdrImage& input, const PipelineConfig& config, Backend& backend,
                       const OrderedSemanticGraph& graph) {
    staged("config", [&] { config.validate(); });
    const std::size_t w = input.width();
    const std::size_t h = input.height();

    const SemanticLabeling labels = staged("segment", [&] {
        auto l = backend.segment(SegmentRequest{input});
        if (l.width() != w || l.height() != h) {
            throw BackendError(BackendErrorKind::DimensionMismatch, "segmentation changed the image size");
        }
        return l;
    });

    RunReport report;
    report.width = w;
    report.height = h;
    struct Candidate {
        BinaryMask inpaint;
        BinaryMask region;
    };
    std::map<int, Candidate> candidates;
    const BinaryMask sat = staged("mask", [&] {
        const BinaryMask s = saturation_mask(input, config.saturation_threshold);
        const auto hard = labels.hard_labels();
        for (int c = 0; c < kNumClasses; ++c) {
            const BinaryMask seg = class_mask(labels, c, config.class_threshold);
            const BinaryMask clipped = intersect(s, seg);
            if (clipped.empty()) continue;
            ClassReport cr;
            cr.class_id = c;
            cr.clipped_pixels = clipped.count();
            cr.radii = config.radii_for(c, neighbouring_classes(seg, hard, c));
            BinaryMask opened = inpaint_mask(clipped, cr.radii.alpha, cr.radii.beta);
            BinaryMask region = intersect(opened, s);
            cr.inpaint_mask_pixels = opened.count();
            cr.region_pixels = region.count();
            if (cr.region_pixels >= config.min_region_pixels) {
                candidates.emplace(c, Candidate{std::move(opened), std::move(region)});
            }
            report.classes.push_back(std::move(cr));
        }
        return s;
    });
    report.saturated_pixels = sat.count();

    std::set<int> present;
    for (const auto& [c, _] : candidates) present.insert(c);
    report.order = staged("order", [&] { return inpaint_order(graph, present); });

    std::vector<ClassJob> jobs;
    staged("prompt", [&] {
        std::vector<std::string> history;
        for (int c : report.order) {
            const auto it = config.prompt_overrides.find(c);
            const auto override_prompt = it == config.prompt_overrides.end() ? std::nullopt
                                                                             : std::optional<std::string>(it->second);
            std::string prompt = sample_prompt(graph, c, config.seed, history, override_prompt);
            history.push_back(prompt);
            const Candidate& cand = candidates.at(c);
            jobs.push_back({c, prompt, cand.inpaint, cand.region, composite_guide(cand.region, config.composite_radius)});
        }
    });

    StackOptions options;
    options.percentile = config.exposure_percentile;
    options.crf = config.crf;
    options.merge_tolerance = config.bracket_merge_tolerance;
    options.seed = config.seed;
    StackResult stack = staged("inpaint", [&] { return build_stack(input, jobs, backend, options); });

    const WeightFunction weight = config.merge_weight == WeightFunction::Kind::Triangle ? WeightFunction::triangle()
                                                                                        : WeightFunction::parabolic();
    HdrImage hdr = staged("merge", [&] { return merge(stack.stack, weight); });

    for (const auto& outcome : stack.outcomes) {
        for (auto& cr : report.classes) {
            if (cr.class_id != outcome.class_id) continue;
            cr.inpainted = true;
            cr.prompt = outcome.prompt;
            cr.estimate = outcome.estimate;
            cr.bracket_ev = outcome.bracket_ev;
        }
    }
    for (const auto& b : stack.stack.brackets()) report.brackets.emplace_back(b.ev, b.sources);

    const LinearImage linear_input = linearize(input, config.crf);
    report.input_dynamic_range = staged("report", [&] {
        bool any = std::any_of(linear_input.pixels().begin(), linear_input.pixels().end(),
                               [](const Rgb& p) { return luminance(p) > 0.0; });
        return any ? dynamic_range(linear_input) : 0.0;
    });
    report.output_dynamic_range = staged("report", [&] {
        bool any = std::any_of(hdr.pixels().begin(), hdr.pixels().end(), [](const Rgb& p) { return luminance(p) > 0.0; });
        return any ? dynamic_range(hdr) : 0.0;
    });

    std::vector<float> alpha(w * h, 0.0f);
    std::map<int, BinaryMask> regions;
    for (const auto& job : jobs) {
        for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = std::max(alpha[i], job.guide[i]);
        regions.emplace(job.class_id, job.region);
    }

    return RunOutput{std::move(hdr),
                     std::move(report),
                     SoftMask(w, h, std::move(alpha)),
                     sat,
                     stack.stack.brackets(),
                     std::move(stack.outcomes),
                     std::move(regions)};
}

std::string report_to_json(const RunReport& report, const PipelineConfig& config) {
    ordered_json j;
    j["width"] = report.width;
    j["height"] = report.height;
    j["seed"] = config.seed;
    j["exposure_percentile"] = config.exposure_percentile;
    j["saturated_pixels"] = report.saturated_pixels;
    j["order"] = ordered_json::array();
    for (int c : report.order) j["order"].push_back(name_of(c));
    j["classes"] = ordered_json::array();
    for (const auto& cr : report.classes) {
        ordered_json c;
        c["class"] = name_of(cr.class_id);
        c["id"] = cr.class_id;
        c["clipped_pixels"] = cr.clipped_pixels;
        c["inpaint_mask_pixels"] = cr.inpaint_mask_pixels;
        c["region_pixels"] = cr.region_pixels;
        c["alpha"] = cr.radii.alpha;
        c["beta"] = cr.radii.beta;
        c["inpainted"] = cr.inpainted;
        if (cr.inpainted) {
            c["prompt"] = cr.prompt;
            c["ev_estimate"] = cr.estimate->ev;
            c["reference_luminance"] = cr.estimate->reference;
            c["bracket_ev"] = *cr.bracket_ev;
            c["patch"] = "patch_" + std::to_string(cr.class_id) + ".png";
            c["region"] = "region_" + std::to_string(cr.class_id) + ".png";
        }
        j["classes"].push_back(std::move(c));
    }
    j["brackets"] = ordered_json::array();
    for (const auto& [ev, sources] : report.brackets) {
        j["brackets"].push_back({{"ev", ev}, {"classes", sources}});
    }
    j["dynamic_range"] = {{"input", report.input_dynamic_range}, {"output", report.output_dynamic_range}};
    return j.dump(2) + "\n";
}

void dump_debug(const RunOutput& out, const PipelineConfig& config, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(IoErrorKind::WriteFailed, "cannot create " + dir.string() + ": " + ec.message());

    write_png(dir / "saturation.png", mask_to_raster(out.saturation));
    write_png(dir / "composite_alpha.png", soft_mask_to_raster(out.composite_alpha));
    for (const auto& [c, region] : out.regions) {
        const std::string id = std::to_string(c);
        write_png(dir / ("region_" + id + ".png"), mask_to_raster(region));
        write_png(dir / ("refined_" + id + ".png"), soft_mask_to_raster(feather(region, config.refine_radius)));
    }
    for (const auto& o : out.outcomes) {
        write_png(dir / ("patch_" + std::to_string(o.class_id) + ".png"), to_raster(o.content));
    }
    ordered_json manifest;
    manifest["brackets"] = ordered_json::array();
    for (std::size_t k = 0; k < out.brackets.size(); ++k) {
        const auto& b = out.brackets[k];
        const std::string file = "bracket_" + std::to_string(k) + ".png";
        write_png(dir / file, to_raster(delinearize(b.image, config.crf)));
        manifest["brackets"].push_back({{"ev", b.ev}, {"classes", b.sources}, {"file", file}});
    }
    const std::string text = manifest.dump(2) + "\n";
    write_file(dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::unique_ptr<Backend> make_backend(const PipelineConfig& config,
                                      const std::optional<std::filesystem::path>& input_path) {
    if (config.backend == PipelineConfig::BackendKind::Http) {
        HttpBackend::Options o;
        o.url = config.backend_url;
        o.timeout = std::chrono::seconds(config.backend_timeout_s);
        o.max_retries = config.backend_retries;
        return std::make_unique<HttpBackend>(o);
    }
    MockBackend::Options o;
    o.rho_min = config.mock_rho_min;
    if (input_path) {
        o.labels_path = input_path->parent_path() / (input_path->stem().string() + ".labels.png");
    }
    return std::make_unique<MockBackend>(o);
}

OrderedSemanticGraph load_pipeline_graph(const PipelineConfig& config) {
    if (config.graph_path) return load_graph(*config.graph_path);
    return make_graph(default_prompts());
}

RunFiles run(const std::filesystem::path& input_path, const std::filesystem::path& output_path,
             const PipelineConfig& config, std::optional<std::filesystem::path> debug_dir, Backend* backend) {
    staged("config", [&] { config.validate(); });
    const SdrImage input = staged("read", [&] { return read_ldr(input_path); });
    const OrderedSemanticGraph graph = staged("graph", [&] { return load_pipeline_graph(config); });
    std::unique_ptr<Backend> owned;
    if (!backend) {
        owned = staged("backend", [&] { return make_backend(config, input_path); });
        backend = owned.get();
    }
    const RunOutput out = run_pipeline(input, config, *backend, graph);

    RunFiles files{output_path, output_path};
    files.manifest.replace_extension(".manifest.json");
    staged("write", [&] {
        const auto hdr_tmp = std::filesystem::path(files.hdr.string() + ".tmp");
        const auto manifest_tmp = std::filesystem::path(files.manifest.string() + ".tmp");
        try {
            write_hdr(out.hdr, hdr_tmp);
            const std::string text = report_to_json(out.report, config);
            write_file(manifest_tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
            std::filesystem::rename(hdr_tmp, files.hdr);
            std::filesystem::rename(manifest_tmp, files.manifest);
        } catch (const std::filesystem::filesystem_error& e) {
            std::error_code ec;
            std::filesystem::remove(hdr_tmp, ec);
            std::filesystem::remove(manifest_tmp, ec);
            throw IoError(IoErrorKind::WriteFailed, e.what());
        } catch (...) {
            std::error_code ec;
            std::filesystem::remove(hdr_tmp, ec);
            std::filesystem::remove(manifest_tmp, ec);
            throw;
        }
    });
    if (debug_dir) staged("debug", [&] { dump_debug(out, config, *debug_dir); });
    return files;
}

// ---------------------------------------------------------------------------

SdrImage tonemap_for_labeling(const LinearImage& hdr) {
    double log_sum = 0.0;
    for (const Rgb& p : hdr.pixels()) log_sum += std::log(1e-6 + luminance(p));
    const double log_avg = std::exp(log_sum / static_cast<double>(hdr.size()));
    const double key = 0.18 / log_avg;
    std::vector<Rgb> out(hdr.size());
    for (std::size_t i = 0; i < hdr.size(); ++i) {
        const Rgb& p = hdr[i];
        const double l = luminance(p);
        const double scaled = key * l;
        const double ratio = l > 0.0 ? (scaled / (1.0 + scaled)) / l : 0.0;
        auto encode = [&](float v) {
            return static_cast<float>(std::pow(std::clamp(v * ratio, 0.0, 1.0), 1.0 / 2.2));
        };
        out[i] = Rgb{encode(p.r), encode(p.g), encode(p.b)};
    }
    return SdrImage(hdr.width(), hdr.height(), std::move(out));
}

OrderedSemanticGraph graph_build(const GraphBuildOptions& options) {
    auto warn = [&](const std::string& msg) {
        if (options.warn) options.warn(msg);
    };
    std::error_code ec;
    if (!std::filesystem::is_directory(options.dataset_dir, ec)) {
        throw IoError(IoErrorKind::Unreadable, "dataset directory " + options.dataset_dir.string() + " not found");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(options.dataset_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".hdr") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw ConfigError("dataset " + options.dataset_dir.string() + " contains no .hdr files");
    }

    std::vector<DatasetEntry> dataset;
    for (const auto& file : files) {
        try {
            LinearImage hdr = read_hdr(file);
            const auto sidecar = file.parent_path() / (file.stem().string() + ".labels.png");
            std::optional<SemanticLabeling> labels;
            if (std::filesystem::exists(sidecar)) {
                labels = read_label_map(sidecar);
            } else if (options.segmenter) {
                labels = options.segmenter->segment(SegmentRequest{tonemap_for_labeling(hdr)});
            } else {
                warn("skipping " + file.string() + ": no label sidecar " + sidecar.filename().string());
                continue;
            }
            if (labels->width() != hdr.width() || labels->height() != hdr.height()) {
                warn("skipping " + file.string() + ": label map size differs from image");
                continue;
            }
            dataset.push_back({std::move(hdr), std::move(*labels)});
        } catch (const Error& e) {
            warn("skipping " + file.string() + ": " + e.what());
        }
    }
    if (dataset.empty()) {
        throw ConfigError("no usable dataset entries in " + options.dataset_dir.string());
    }
    const AlbedoTable albedo = options.albedo_path ? AlbedoTable::from_json_file(*options.albedo_path) : AlbedoTable{};
    const PromptConfig prompts = options.prompts_path ? prompts_from_json_file(*options.prompts_path) : default_prompts();
    OrderedSemanticGraph graph = build_graph(dataset, albedo, prompts);
    save_graph(graph, options.out_path);
    return graph;
}

}  // namespace ditmo
