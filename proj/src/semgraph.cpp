// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/semgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ditmo/image_io.hpp"

namespace ditmo {

using ordered_json = nlohmann::ordered_json;

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

int require_class(const std::string& name, const std::filesystem::path& source) {
    const auto id = class_from_name(name);
    if (!id) {
        throw ConfigError(source.string() + ": unknown class '" + name + "'");
    }
    return *id;
}

}  // namespace

AlbedoTable::AlbedoTable() { m_values.fill(1.0); }

AlbedoTable::AlbedoTable(const std::array<double, kNumClasses>& values) : m_values(values) {
    for (double a : m_values) {
        if (!(a > 0.0 && a <= 1.0)) {
            throw ConfigError("albedo values must lie in (0, 1]");
        }
    }
}

AlbedoTable AlbedoTable::from_json_file(const std::filesystem::path& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_object()) {
        throw ConfigError(path.string() + ": albedo config must be a JSON object keyed by class name");
    }
    std::array<double, kNumClasses> values;
    values.fill(1.0);
    for (const auto& [name, value] : doc.items()) {
        if (!value.is_number()) {
            throw ConfigError(path.string() + ": albedo for '" + name + "' is not a number");
        }
        values[static_cast<std::size_t>(require_class(name, path))] = value.get<double>();
    }
    return AlbedoTable(values);
}

// ---------------------------------------------------------------------------

VertexPotential vertex_potential(const LinearImage& hdr, const SemanticLabeling& labels, const AlbedoTable& albedo,
                                 int class_id) {
    class_name(class_id);
    if (hdr.width() != labels.width() || hdr.height() != labels.height()) {
        throw ConfigError("vertex_potential: image and labeling dimensions differ");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < hdr.size(); ++i) {
        const double w = labels.weight(i, class_id);
        num += w * luminance(hdr[i]);
        den += w;
    }
    if (den <= 0.0) {
        return {class_id, 0.0, false};
    }
    return {class_id, albedo[class_id] * num / den, true};
}

std::vector<GraphEdge> image_graph(const std::array<VertexPotential, kNumClasses>& potentials) {
    std::vector<GraphEdge> edges;
    for (int i = 0; i < kNumClasses; ++i) {
        for (int j = i + 1; j < kNumClasses; ++j) {
            const auto& vi = potentials[i];
            const auto& vj = potentials[j];
            if (!vi.present || !vj.present || vi.value == 0.0 || vj.value == 0.0) continue;
            const double diff = vi.value - vj.value;
            if (diff >= 0.0) {
                edges.push_back({i, j, diff, 1});
            } else {
                edges.push_back({j, i, -diff, 1});
            }
        }
    }
    return edges;
}

std::vector<GraphEdge> image_graph(const LinearImage& hdr, const SemanticLabeling& labels, const AlbedoTable& albedo) {
    std::array<VertexPotential, kNumClasses> potentials;
    for (int c = 0; c < kNumClasses; ++c) potentials[c] = vertex_potential(hdr, labels, albedo, c);
    return image_graph(potentials);
}

// ---------------------------------------------------------------------------

PromptConfig prompts_from_json_file(const std::filesystem::path& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_object()) {
        throw ConfigError(path.string() + ": prompt config must be a JSON object keyed by class name");
    }
    PromptConfig out;
    for (const auto& [name, list] : doc.items()) {
        const int id = require_class(name, path);
        if (!list.is_array()) {
            throw ConfigError(path.string() + ": prompts for '" + name + "' must be a list");
        }
        for (const auto& p : list) {
            if (!p.is_string()) throw ConfigError(path.string() + ": prompt entries must be strings");
            out[id].push_back(p.get<std::string>());
        }
    }
    return out;
}

PromptConfig default_prompts() {
    return {
        {0, {"clear blue sky", "cloudy sky", "blue sky with clouds"}},
        {1, {"paved ground", "cobblestone street", "sandy ground"}},
        {2, {"green foliage", "trees with leaves"}},
        {3, {"water reflecting #", "calm water surface"}},
        {4, {"person in bright light"}},
        {5, {"animal in sunlight"}},
        {6, {"city buildings", "building facade with windows"}},
        {7, {"indoor ceiling light", "window with view outside"}},
        {8, {"bright light source", "detailed texture"}},
    };
}

// ---------------------------------------------------------------------------

namespace {

void validation_fail(const std::string& what) { throw ValidationError("semantic graph: " + what); }

// Returns the vertices of one directed cycle, or an empty vector if acyclic.
std::vector<int> find_cycle(const std::vector<GraphEdge>& edges) {
    std::array<std::vector<int>, kNumClasses> adj;
    for (const auto& e : edges) adj[e.from].push_back(e.to);
    std::array<int, kNumClasses> state{};  // 0 unvisited, 1 on stack, 2 done
    std::array<int, kNumClasses> parent{};
    parent.fill(-1);
    std::vector<int> cycle;

    auto dfs = [&](auto&& self, int v) -> bool {
        state[v] = 1;
        for (int u : adj[v]) {
            if (state[u] == 1) {
                cycle.push_back(u);
                for (int w = v; w != u; w = parent[w]) cycle.push_back(w);
                std::reverse(cycle.begin() + 1, cycle.end());
                return true;
            }
            if (state[u] == 0) {
                parent[u] = v;
                if (self(self, u)) return true;
            }
        }
        state[v] = 2;
        return false;
    };
    for (int v = 0; v < kNumClasses; ++v) {
        if (state[v] == 0 && dfs(dfs, v)) return cycle;
    }
    return {};
}

}  // namespace

OrderedSemanticGraph::OrderedSemanticGraph(std::vector<GraphVertex> vertices, std::vector<GraphEdge> edges)
    : m_vertices(std::move(vertices)), m_edges(std::move(edges)) {
    if (m_vertices.size() != kNumClasses) {
        validation_fail("expected 9 vertices, got " + std::to_string(m_vertices.size()));
    }
    for (int i = 0; i < kNumClasses; ++i) {
        const auto& v = m_vertices[i];
        if (v.id != i) validation_fail("vertex " + std::to_string(i) + " has id " + std::to_string(v.id));
        if (v.name != kClassNames[i]) validation_fail("vertex " + std::to_string(i) + " is named '" + v.name + "'");
        for (const auto& p : v.prompts) {
            if (p.empty()) validation_fail("empty prompt on vertex '" + v.name + "'");
            if (std::count(p.begin(), p.end(), '#') > 1) {
                validation_fail("prompt '" + p + "' has more than one wildcard");
            }
        }
    }
    std::set<std::pair<int, int>> pairs;
    for (const auto& e : m_edges) {
        if (e.from < 0 || e.from >= kNumClasses || e.to < 0 || e.to >= kNumClasses) {
            validation_fail("edge endpoint out of range");
        }
        if (e.from == e.to) validation_fail("self-loop on class " + std::to_string(e.from));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            validation_fail("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " has non-positive weight");
        }
        if (e.count < 1) validation_fail("edge sample count must be >= 1");
        if (!pairs.emplace(std::min(e.from, e.to), std::max(e.from, e.to)).second) {
            validation_fail("duplicate edge for pair " + std::to_string(e.from) + "," + std::to_string(e.to));
        }
    }
    if (!find_cycle(m_edges).empty()) validation_fail("cycle detected");
    std::sort(m_edges.begin(), m_edges.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
}

std::optional<GraphEdge> OrderedSemanticGraph::edge(int from, int to) const {
    for (const auto& e : m_edges) {
        if (e.from == from && e.to == to) return e;
    }
    return std::nullopt;
}

OrderedSemanticGraph make_graph(const PromptConfig& prompts, std::vector<GraphEdge> edges) {
    std::vector<GraphVertex> vertices;
    for (int i = 0; i < kNumClasses; ++i) {
        const auto it = prompts.find(i);
        vertices.push_back({i, std::string(kClassNames[i]), it == prompts.end() ? std::vector<std::string>{}
                                                                                   : it->second});
    }
    return OrderedSemanticGraph(std::move(vertices), std::move(edges));
}

OrderedSemanticGraph build_graph(const std::vector<DatasetEntry>& dataset, const AlbedoTable& albedo,
                                 const PromptConfig& prompts) {
    if (dataset.empty()) {
        throw ConfigError("build_graph: dataset is empty");
    }
    std::array<std::array<double, kNumClasses>, kNumClasses> sum{};
    std::array<std::array<int, kNumClasses>, kNumClasses> count{};
    std::array<bool, kNumClasses> seen{};
    for (const auto& entry : dataset) {
        for (int c = 0; c < kNumClasses; ++c) {
            if (vertex_potential(entry.hdr, entry.labels, albedo, c).present) seen[c] = true;
        }
        for (const auto& e : image_graph(entry.hdr, entry.labels, albedo)) {
            const int lo = std::min(e.from, e.to);
            const int hi = std::max(e.from, e.to);
            sum[lo][hi] += e.from == lo ? e.weight : -e.weight;
            count[lo][hi] += 1;
        }
    }
    for (int c = 0; c < kNumClasses; ++c) {
        const auto it = prompts.find(c);
        if (seen[c] && (it == prompts.end() || it->second.empty())) {
            throw ConfigError("build_graph: no prompts configured for present class '" +
                              std::string(kClassNames[c]) + "'");
        }
    }

    std::vector<GraphEdge> edges;
    for (int lo = 0; lo < kNumClasses; ++lo) {
        for (int hi = lo + 1; hi < kNumClasses; ++hi) {
            if (count[lo][hi] == 0) continue;
            const double mean = sum[lo][hi] / count[lo][hi];
            if (mean > 0.0) {
                edges.push_back({lo, hi, mean, count[lo][hi]});
            } else if (mean < 0.0) {
                edges.push_back({hi, lo, -mean, count[lo][hi]});
            }
        }
    }
    // Pairs averaged over different image subsets can disagree transitively.
    for (auto cycle = find_cycle(edges); !cycle.empty(); cycle = find_cycle(edges)) {
        auto lightest = edges.end();
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const int from = cycle[k];
            const int to = cycle[(k + 1) % cycle.size()];
            auto it = std::find_if(edges.begin(), edges.end(),
                                   [&](const GraphEdge& e) { return e.from == from && e.to == to; });
            if (lightest == edges.end() || it->weight < lightest->weight ||
                (it->weight == lightest->weight && std::tie(it->from, it->to) < std::tie(lightest->from, lightest->to))) {
                lightest = it;
            }
        }
        edges.erase(lightest);
    }
    return make_graph(prompts, std::move(edges));
}

// ---------------------------------------------------------------------------

double dominance_score(const OrderedSemanticGraph& g, const std::set<int>& present, int v) {
    double score = 0.0;
    for (const auto& e : g.edges()) {
        if (!present.count(e.from) || !present.count(e.to)) continue;
        if (e.from == v) score += e.weight;
        if (e.to == v) score -= e.weight;
    }
    return score;
}

double forward_weight(const OrderedSemanticGraph& g, const std::vector<int>& order) {
    std::array<int, kNumClasses> position;
    position.fill(-1);
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = static_cast<int>(k);
    double total = 0.0;
    for (const auto& e : g.edges()) {
        if (position[e.from] >= 0 && position[e.to] >= 0 && position[e.from] < position[e.to]) total += e.weight;
    }
    return total;
}

std::vector<int> inpaint_order(const OrderedSemanticGraph& g, const std::set<int>& present) {
    for (int c : present) class_name(c);
    // Candidates in tie-break order: higher dominance first, then lower id.
    std::vector<int> items(present.begin(), present.end());
    std::vector<double> score(items.size());
    for (std::size_t k = 0; k < items.size(); ++k) score[k] = dominance_score(g, present, items[k]);
    std::vector<std::size_t> by_key(items.size());
    for (std::size_t k = 0; k < by_key.size(); ++k) by_key[k] = k;
    std::stable_sort(by_key.begin(), by_key.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return items[a] < items[b];
    });

    const std::size_t n = items.size();
    std::vector<std::vector<double>> weight(n, std::vector<double>(n, 0.0));
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            if (const auto e = g.edge(items[a], items[b])) {
                weight[a][b] = e->weight;
                total += e->weight;
            }
        }
    }

    // best[S] = max forward weight achievable when the vertices in S are placed last.
    const std::size_t full = (std::size_t{1} << n) - 1;
    std::vector<double> best(full + 1, 0.0);
    auto gain = [&](std::size_t v, std::size_t set) {
        double s = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            if ((set >> u & 1) && u != v) s += weight[v][u];
        }
        return s;
    };
    for (std::size_t set = 1; set <= full; ++set) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            if (set >> v & 1) m = std::max(m, gain(v, set) + best[set & ~(std::size_t{1} << v)]);
        }
        best[set] = m;
    }

    const double eps = 1e-9 * (1.0 + total);
    std::vector<int> order;
    std::size_t remaining = full;
    while (remaining != 0) {
        for (std::size_t v : by_key) {
            if (!(remaining >> v & 1)) continue;
            const std::size_t rest = remaining & ~(std::size_t{1} << v);
            if (gain(v, remaining) + best[rest] >= best[remaining] - eps) {
                order.push_back(items[v]);
                remaining = rest;
                break;
            }
        }
    }
    return order;
}

// ---------------------------------------------------------------------------

std::string substitute_wildcard(const std::string& tmpl, const std::string& fill) {
    const auto pos = tmpl.find('#');
    if (pos == std::string::npos) return tmpl;
    std::string out = tmpl.substr(0, pos) + fill + tmpl.substr(pos + 1);
    if (fill.empty()) {
        std::string collapsed;
        for (char c : out) {
            if (c == ' ' && !collapsed.empty() && collapsed.back() == ' ') continue;
            collapsed.push_back(c);
        }
        const auto first = collapsed.find_first_not_of(' ');
        if (first == std::string::npos) return {};
        const auto last = collapsed.find_last_not_of(' ');
        out = collapsed.substr(first, last - first + 1);
    }
    return out;
}

std::string sample_prompt(const OrderedSemanticGraph& g, int class_id, std::uint64_t seed,
                          const std::vector<std::string>& history, const std::optional<std::string>& override_prompt) {
    class_name(class_id);
    const std::string latest = history.empty() ? std::string{} : history.back();
    if (override_prompt) {
        return substitute_wildcard(*override_prompt, latest);
    }
    const auto& prompts = g.vertex(class_id).prompts;
    if (prompts.empty()) {
        throw ConfigError("no prompts stored for class '" + std::string(kClassNames[class_id]) + "'");
    }
    // mt19937_64's output sequence is fixed by the standard, unlike the distributions.
    std::mt19937_64 gen(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(class_id + 1)));
    const std::size_t pick = static_cast<std::size_t>(gen() % prompts.size());
    return substitute_wildcard(prompts[pick], latest);
}

// ---------------------------------------------------------------------------

std::string graph_to_json(const OrderedSemanticGraph& g) {
    ordered_json doc;
    doc["version"] = 1;
    doc["classes"] = ordered_json::array();
    for (const auto& v : g.vertices()) {
        ordered_json c;
        c["id"] = v.id;
        c["name"] = v.name;
        c["prompts"] = v.prompts;
        doc["classes"].push_back(std::move(c));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& e : g.edges()) {
        ordered_json j;
        j["from"] = e.from;
        j["to"] = e.to;
        j["weight"] = e.weight;
        j["count"] = e.count;
        doc["edges"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

OrderedSemanticGraph graph_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("semantic graph: invalid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.at("version").get<int>() != 1) {
            validation_fail("unsupported or missing version");
        }
        std::vector<GraphVertex> vertices;
        for (const auto& c : doc.at("classes")) {
            vertices.push_back({c.at("id").get<int>(), c.at("name").get<std::string>(),
                                c.at("prompts").get<std::vector<std::string>>()});
        }
        std::sort(vertices.begin(), vertices.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        std::vector<GraphEdge> edges;
        for (const auto& e : doc.at("edges")) {
            if (!e.at("count").is_number_integer()) validation_fail("edge count must be an integer");
            edges.push_back({e.at("from").get<int>(), e.at("to").get<int>(), e.at("weight").get<double>(),
                             e.at("count").get<int>()});
        }
        return OrderedSemanticGraph(std::move(vertices), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("semantic graph: schema violation: ") + e.what());
    }
}

void save_graph(const OrderedSemanticGraph& g, const std::filesystem::path& path) {
    const std::string text = graph_to_json(g);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

OrderedSemanticGraph load_graph(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return graph_from_json(std::string(bytes.begin(), bytes.end()));
}

}  // namespace ditmo
