// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, obviously-correct reference implementations used by the unit tests
// and the acceptance suite. None of these call into the code under test
// beyond plain data accessors.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "ditmo/mask.hpp"
#include "ditmo/semgraph.hpp"

namespace oracle {

using ditmo::BinaryMask;

inline bool in_disk(int dx, int dy, int r) { return dx * dx + dy * dy <= r * r; }

/// z is kept iff every footprint pixel lies inside the frame and inside m.
inline BinaryMask erode(const BinaryMask& m, int r) {
    const int w = static_cast<int>(m.width());
    const int h = static_cast<int>(m.height());
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool keep = true;
            for (int dy = -r; dy <= r && keep; ++dy) {
                for (int dx = -r; dx <= r && keep; ++dx) {
                    if (!in_disk(dx, dy, r)) continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    keep = sx >= 0 && sy >= 0 && sx < w && sy < h && m.test(sx, sy);
                }
            }
            if (keep) out.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
        }
    }
    return out;
}

/// z is set iff some in-frame footprint pixel is in m.
inline BinaryMask dilate(const BinaryMask& m, int r) {
    const int w = static_cast<int>(m.width());
    const int h = static_cast<int>(m.height());
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    if (!in_disk(dx, dy, r)) continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    hit = sx >= 0 && sy >= 0 && sx < w && sy < h && m.test(sx, sy);
                }
            }
            if (hit) out.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
        }
    }
    return out;
}

inline BinaryMask open(const BinaryMask& m, int alpha, int beta) { return dilate(erode(m, alpha), beta); }

/// Masks up to 64 pixels wide stored as one 64-bit word per row (bit x).
/// Erosion and dilation are computed straight from the Minkowski
/// definitions: AND / OR over the disk offsets of the shifted mask, with
/// everything outside the frame reading as background.
class RowMask {
public:
    RowMask(std::size_t w, std::size_t h) : m_w(w), m_rows(h, 0) {}

    static RowMask from(const BinaryMask& m) {
        RowMask r(m.width(), m.height());
        for (std::size_t y = 0; y < m.height(); ++y) {
            for (std::size_t x = 0; x < m.width(); ++x) {
                if (m.test(x, y)) r.m_rows[y] |= std::uint64_t{1} << x;
            }
        }
        return r;
    }

    BinaryMask to_mask() const {
        BinaryMask m(m_w, m_rows.size());
        for (std::size_t y = 0; y < m_rows.size(); ++y) {
            for (std::size_t x = 0; x < m_w; ++x) {
                if ((m_rows[y] >> x) & 1u) m.set(x, y);
            }
        }
        return m;
    }

    RowMask erode(int r) const { return combine(r, true); }
    RowMask dilate(int r) const { return combine(r, false); }
    RowMask open(int alpha, int beta) const { return erode(alpha).dilate(beta); }

    friend bool operator==(const RowMask&, const RowMask&) = default;

private:
    // Bit x of the result is bit x+dx of row y+dy, or 0 outside the frame.
    std::uint64_t shifted(int y, int dx) const {
        if (y < 0 || y >= static_cast<int>(m_rows.size())) return 0;
        const std::uint64_t row = m_rows[static_cast<std::size_t>(y)];
        if (dx >= 64 || dx <= -64) return 0;
        return dx >= 0 ? row >> dx : (row << -dx) & full();
    }

    std::uint64_t full() const { return m_w >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_w) - 1; }

    RowMask combine(int r, bool all) const {
        RowMask out(m_w, m_rows.size());
        for (int y = 0; y < static_cast<int>(m_rows.size()); ++y) {
            std::uint64_t acc = all ? full() : 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    if (!in_disk(dx, dy, r)) continue;
                    if (all) acc &= shifted(y + dy, dx);
                    else acc |= shifted(y + dy, dx);
                }
            }
            out.m_rows[static_cast<std::size_t>(y)] = acc;
        }
        return out;
    }

    std::size_t m_w;
    std::vector<std::uint64_t> m_rows;
};

/// Mixture of i.i.d. noise and unions of disks and rectangles, so both
/// speckle and solid regions show up.
inline BinaryMask random_mask(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    BinaryMask m(w, h);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int style = static_cast<int>(rng() % 3);
    if (style == 0) {
        const double p = u(rng);
        for (std::size_t i = 0; i < m.size(); ++i) m.set(i, u(rng) < p);
        return m;
    }
    const int shapes = 1 + static_cast<int>(rng() % 8);
    for (int s = 0; s < shapes; ++s) {
        const double cx = u(rng) * static_cast<double>(w);
        const double cy = u(rng) * static_cast<double>(h);
        const double rx = 1.0 + u(rng) * static_cast<double>(w) / 2.5;
        const double ry = style == 1 ? rx : 1.0 + u(rng) * static_cast<double>(h) / 2.5;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                const bool hit = style == 1 ? dx * dx + dy * dy <= rx * rx : std::abs(dx) <= rx && std::abs(dy) <= ry;
                if (hit) m.set(x, y);
            }
        }
    }
    if (style == 2) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (u(rng) < 0.03) m.set(i, !m[i]);
        }
    }
    return m;
}

/// Value at 0-based rank min(ceil(p*n), n-1) of the fully sorted list.
inline double sorted_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
    return v[std::min(k, v.size() - 1)];
}

inline double edge_weight(const ditmo::OrderedSemanticGraph& g, int from, int to) {
    for (const auto& e : g.edges()) {
        if (e.from == from && e.to == to) return e.weight;
    }
    return 0.0;
}

inline double forward_weight(const ditmo::OrderedSemanticGraph& g, const std::vector<int>& order) {
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) total += edge_weight(g, order[i], order[j]);
    }
    return total;
}

inline double score(const ditmo::OrderedSemanticGraph& g, const std::set<int>& present, int v) {
    double s = 0.0;
    for (int u : present) s += edge_weight(g, v, u) - edge_weight(g, u, v);
    return s;
}

/// Exhaustive search over permutations visited in lexicographic order of
/// (descending score, ascending id); the first permutation reaching the
/// maximum forward weight wins.
inline std::vector<int> brute_order(const ditmo::OrderedSemanticGraph& g, const std::set<int>& present) {
    std::vector<int> perm(present.begin(), present.end());
    if (perm.empty()) return perm;
    std::vector<double> key(ditmo::kNumClasses, 0.0);
    double total = 0.0;
    for (const auto& e : g.edges()) {
        if (present.count(e.from) && present.count(e.to)) total += e.weight;
    }
    for (int v : perm) key[static_cast<std::size_t>(v)] = score(g, present, v);
    auto less = [&](int a, int b) {
        if (key[static_cast<std::size_t>(a)] != key[static_cast<std::size_t>(b)]) {
            return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
        }
        return a < b;
    };
    std::sort(perm.begin(), perm.end(), less);
    const double eps = 1e-9 * (1.0 + total);
    std::vector<int> best = perm;
    double best_weight = oracle::forward_weight(g, perm);
    while (std::next_permutation(perm.begin(), perm.end(), less)) {
        const double fw = oracle::forward_weight(g, perm);
        if (fw > best_weight + eps) {
            best_weight = fw;
            best = perm;
        }
    }
    return best;
}

/// Random DAG over the nine classes: a hidden ranking decides edge direction,
/// each pair gets an edge with probability `density`. Integer weights make
/// ties common.
inline ditmo::OrderedSemanticGraph random_graph(std::mt19937_64& rng, double density, bool integer_weights) {
    std::vector<int> rank(ditmo::kNumClasses);
    for (int i = 0; i < ditmo::kNumClasses; ++i) rank[static_cast<std::size_t>(i)] = i;
    std::shuffle(rank.begin(), rank.end(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ditmo::GraphEdge> edges;
    for (int a = 0; a < ditmo::kNumClasses; ++a) {
        for (int b = a + 1; b < ditmo::kNumClasses; ++b) {
            if (u(rng) >= density) continue;
            const bool forward = rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
            const double w = integer_weights ? static_cast<double>(1 + rng() % 3) : 0.01 + 4.0 * u(rng);
            edges.push_back({forward ? a : b, forward ? b : a, w, 1 + static_cast<int>(rng() % 5)});
        }
    }
    return ditmo::make_graph(ditmo::default_prompts(), std::move(edges));
}

}  // namespace oracle
