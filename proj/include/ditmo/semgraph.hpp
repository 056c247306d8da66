// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ditmo/image.hpp"
#include "ditmo/mask.hpp"

namespace ditmo {

/// Per-class albedo in (0, 1]; defaults to 1 everywhere.
class AlbedoTable {
public:
    AlbedoTable();
    explicit AlbedoTable(const std::array<double, kNumClasses>& values);

    double operator[](int class_id) const { return m_values.at(static_cast<std::size_t>(class_id)); }
    const std::array<double, kNumClasses>& values() const noexcept { return m_values; }

    /// JSON object keyed by class name; missing classes keep 1.0.
    static AlbedoTable from_json_file(const std::filesystem::path& path);

private:
    std::array<double, kNumClasses> m_values;
};

struct VertexPotential {
    int class_id = 0;
    double value = 0.0;
    bool present = false;
};

/// Label-weighted mean of albedo-scaled luminance for one class of one HDR image.
VertexPotential vertex_potential(const LinearImage& hdr, const SemanticLabeling& labels, const AlbedoTable& albedo,
                                 int class_id);

/// One directed, weighted edge; weight is the potential difference from -> to.
struct GraphEdge {
    int from = 0;
    int to = 0;
    double weight = 0.0;
    int count = 1;

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Pairwise potential differences for every pair of non-zero vertices of one
/// image, oriented from the larger potential to the smaller. Equal potentials
/// produce a zero-weight edge from the lower class id to the higher.
std::vector<GraphEdge> image_graph(const LinearImage& hdr, const SemanticLabeling& labels, const AlbedoTable& albedo);

/// Same, from precomputed potentials.
std::vector<GraphEdge> image_graph(const std::array<VertexPotential, kNumClasses>& potentials);

/// Prompt sets keyed by class id.
using PromptConfig = std::map<int, std::vector<std::string>>;

/// JSON object keyed by class name, each value a list of prompt templates.
PromptConfig prompts_from_json_file(const std::filesystem::path& path);
/// A small built-in prompt set covering every class.
PromptConfig default_prompts();

struct GraphVertex {
    int id = 0;
    std::string name;
    std::vector<std::string> prompts;

    friend bool operator==(const GraphVertex&, const GraphVertex&) = default;
};

/// DAG over the nine classes. Edge direction points from the class that is
/// typically brighter to the one that is typically darker.
class OrderedSemanticGraph {
public:
    /// Validates the invariants and throws ValidationError on violation:
    /// nine vertices with ids 0..8, non-empty prompt templates with at most one
    /// '#', positive finite weights, count >= 1, one edge per unordered pair, acyclic.
    OrderedSemanticGraph(std::vector<GraphVertex> vertices, std::vector<GraphEdge> edges);

    const std::vector<GraphVertex>& vertices() const noexcept { return m_vertices; }
    /// Sorted by (from, to).
    const std::vector<GraphEdge>& edges() const noexcept { return m_edges; }
    const GraphVertex& vertex(int class_id) const { return m_vertices.at(static_cast<std::size_t>(class_id)); }
    std::optional<GraphEdge> edge(int from, int to) const;

    friend bool operator==(const OrderedSemanticGraph&, const OrderedSemanticGraph&) = default;

private:
    std::vector<GraphVertex> m_vertices;
    std::vector<GraphEdge> m_edges;
};

struct DatasetEntry {
    LinearImage hdr;
    SemanticLabeling labels;
};

/// Averages signed pair differences over the images where both classes are
/// present. Pairs whose mean is exactly zero get no edge. If the averaged
/// edges form a cycle, the lightest edge on it is dropped until the graph is
/// acyclic. Every class present in the dataset must have prompts.
OrderedSemanticGraph build_graph(const std::vector<DatasetEntry>& dataset, const AlbedoTable& albedo,
                                 const PromptConfig& prompts);

/// Edge-free graph carrying `prompts`.
OrderedSemanticGraph make_graph(const PromptConfig& prompts, std::vector<GraphEdge> edges = {});

/// Net dominance of `v` over the restricted graph: outgoing minus incoming weight.
double dominance_score(const OrderedSemanticGraph& g, const std::set<int>& present, int v);

/// Inpainting order over `present`. Returns the permutation that maximizes the
/// total weight of edges pointing forward; among optimal permutations, the one
/// that is lexicographically smallest by (descending dominance score, ascending id).
std::vector<int> inpaint_order(const OrderedSemanticGraph& g, const std::set<int>& present);

/// Total weight of restricted edges that point forward in `order`.
double forward_weight(const OrderedSemanticGraph& g, const std::vector<int>& order);

/// Picks one of the vertex's prompt templates with a generator seeded by
/// (seed, class_id) and substitutes '#' with the latest history entry. An
/// override bypasses sampling but still gets wildcard substitution.
std::string sample_prompt(const OrderedSemanticGraph& g, int class_id, std::uint64_t seed,
                          const std::vector<std::string>& history,
                          const std::optional<std::string>& override_prompt = std::nullopt);

/// Replaces the first '#' with `fill`; an empty fill also collapses the doubled
/// spaces it leaves behind and trims the ends.
std::string substitute_wildcard(const std::string& tmpl, const std::string& fill);

std::string graph_to_json(const OrderedSemanticGraph& g);
OrderedSemanticGraph graph_from_json(const std::string& text);
void save_graph(const OrderedSemanticGraph& g, const std::filesystem::path& path);
OrderedSemanticGraph load_graph(const std::filesystem::path& path);

}  // namespace ditmo
