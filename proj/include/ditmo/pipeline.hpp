// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ditmo/backend.hpp"
#include "ditmo/exposure.hpp"
#include "ditmo/image.hpp"
#include "ditmo/mask.hpp"
#include "ditmo/merge.hpp"
#include "ditmo/semgraph.hpp"

namespace ditmo {

struct OpeningRadii {
    int alpha = 3;  // erosion disk
    int beta = 2;   // dilation disk

    friend bool operator==(const OpeningRadii&, const OpeningRadii&) = default;
};

struct PipelineConfig {
    enum class BackendKind { Mock, Http };

    double saturation_threshold = kDefaultSaturationThreshold;
    double class_threshold = kDefaultClassThreshold;

    // Opening radii. Classes bordering a high-frequency partner use
    // `high_frequency_radii`; `radii_override` forces one pair for every class.
    OpeningRadii default_radii{3, 2};
    OpeningRadii high_frequency_radii{10, 5};
    std::vector<std::pair<int, int>> high_frequency_pairs{{0, 2}, {0, 1}, {6, 2}};
    std::optional<OpeningRadii> radii_override;

    double refine_radius = 2.0;
    double composite_radius = kCompositeFeatherRadius;
    std::size_t min_region_pixels = 16;

    double exposure_percentile = kDefaultExposurePercentile;
    double bracket_merge_tolerance = kBracketMergeTolerance;
    ResponseCurve crf = ResponseCurve::gamma(2.2);
    WeightFunction::Kind merge_weight = WeightFunction::Kind::Triangle;

    BackendKind backend = BackendKind::Mock;
    std::string backend_url;
    int backend_timeout_s = 120;
    int backend_retries = 0;
    double mock_rho_min = 0.05;

    std::uint64_t seed = 0;
    std::map<int, std::string> prompt_overrides;
    std::optional<std::filesystem::path> graph_path;

    /// Throws ConfigError when a parameter is outside its documented range.
    void validate() const;
    /// Opening radii for `class_id` given the classes adjacent to it.
    OpeningRadii radii_for(int class_id, const std::vector<int>& neighbours) const;
};

std::string config_to_json(const PipelineConfig& config);
/// Starts from defaults; keys present in the JSON override them.
PipelineConfig config_from_json(const std::string& text);

struct ClassReport {
    int class_id = 0;
    std::size_t clipped_pixels = 0;       // saturation ∩ class mask
    std::size_t inpaint_mask_pixels = 0;  // after the guided opening
    std::size_t region_pixels = 0;        // opening ∩ saturation
    OpeningRadii radii;
    bool inpainted = false;
    std::string prompt;
    std::optional<ExposureEstimate> estimate;
    std::optional<double> bracket_ev;
};

struct RunReport {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t saturated_pixels = 0;
    std::vector<int> order;
    std::vector<ClassReport> classes;  // every class with clipped pixels
    std::vector<std::pair<double, std::vector<std::string>>> brackets;
    double input_dynamic_range = 0.0;
    double output_dynamic_range = 0.0;
};

struct RunOutput {
    HdrImage hdr;
    RunReport report;
    SoftMask composite_alpha;  // pixelwise max over every class guide
    BinaryMask saturation;
    std::vector<Bracket> brackets;
    std::vector<ClassOutcome> outcomes;
    std::map<int, BinaryMask> regions;  // composited region per inpainted class
};

/// Executes the full reconstruction on an in-memory image.
RunOutput run_pipeline(const SdrImage& input, const PipelineConfig& config, Backend& backend,
                       const OrderedSemanticGraph& graph);

std::string report_to_json(const RunReport& report, const PipelineConfig& config);

/// Writes masks, guides, patches, brackets and a bracket manifest into `dir`.
void dump_debug(const RunOutput& out, const PipelineConfig& config, const std::filesystem::path& dir);

/// Backend selected by the config. For the mock, segmentation reads a sidecar
/// `<input stem>.labels.png` next to `input_path` when one exists.
std::unique_ptr<Backend> make_backend(const PipelineConfig& config,
                                      const std::optional<std::filesystem::path>& input_path = std::nullopt);

/// Graph from config.graph_path, or the built-in edge-free graph with default prompts.
OrderedSemanticGraph load_pipeline_graph(const PipelineConfig& config);

struct RunFiles {
    std::filesystem::path hdr;
    std::filesystem::path manifest;
};

/// read -> segment -> masks -> order -> inpaint/expose/composite -> merge -> write.
/// The .hdr and manifest are written via temporary files and renamed only on
/// success. Errors carry the failing stage in Error::stage().
RunFiles run(const std::filesystem::path& input_path, const std::filesystem::path& output_path,
             const PipelineConfig& config, std::optional<std::filesystem::path> debug_dir = std::nullopt,
             Backend* backend = nullptr);

/// Global photographic operator used to label HDR dataset images.
SdrImage tonemap_for_labeling(const LinearImage& hdr);

struct GraphBuildOptions {
    std::filesystem::path dataset_dir;
    std::optional<std::filesystem::path> albedo_path;
    std::optional<std::filesystem::path> prompts_path;
    std::filesystem::path out_path;
    Backend* segmenter = nullptr;  // labels images lacking a sidecar, if set
    std::function<void(const std::string&)> warn;
};

/// Reads every *.hdr in the directory (sorted by name) with its
/// `<stem>.labels.png` sidecar, builds the graph and saves it. Unreadable
/// entries are skipped with a warning; ConfigError if nothing usable remains.
OrderedSemanticGraph graph_build(const GraphBuildOptions& options);

}  // namespace ditmo
