// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/merge.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ditmo {

WeightFunction::WeightFunction(Kind kind, double eps_lo, double eps_hi)
    : m_kind(kind), m_eps_lo(eps_lo), m_eps_hi(eps_hi) {
    if (!(eps_lo > 0.0 && eps_lo < 0.5 && eps_hi > 0.0 && eps_hi < 0.5)) {
        throw ConfigError("weight clip guards must lie in (0, 0.5)");
    }
}

WeightFunction WeightFunction::triangle(double eps_lo, double eps_hi) { return {Kind::Triangle, eps_lo, eps_hi}; }

WeightFunction WeightFunction::parabolic(double eps_lo, double eps_hi) { return {Kind::Parabolic, eps_lo, eps_hi}; }

double WeightFunction::operator()(double z) const noexcept {
    if (z < m_eps_lo || z > 1.0 - m_eps_hi) return 0.0;
    return m_kind == Kind::Triangle ? std::min(z, 1.0 - z) : z * (1.0 - z);
}

double triangle_weight(double z, double eps_lo, double eps_hi) noexcept {
    if (z < eps_lo || z > 1.0 - eps_hi) return 0.0;
    return std::min(z, 1.0 - z);
}

namespace {

// `value(k, i, c)` is channel c of pixel i in bracket k; brackets are ordered
// by descending ev, so the summation order is fixed.
template <typename Value>
HdrImage merge_values(std::size_t w, std::size_t h, const std::vector<double>& evs, const WeightFunction& weight,
                      Value value) {
    const std::size_t n = evs.size();
    std::vector<double> inv_dt;
    for (double ev : evs) inv_dt.push_back(std::exp2(-ev));

    std::vector<Rgb> out(w * h);
    for (std::size_t i = 0; i < out.size(); ++i) {
        float result[3];
        for (int c = 0; c < 3; ++c) {
            double num = 0.0;
            double den = 0.0;
            bool all_high = true;
            for (std::size_t k = 0; k < n; ++k) {
                const double z = value(k, i, c);
                const double wz = weight(z);
                num += wz * z * inv_dt[k];
                den += wz;
                all_high = all_high && z >= 0.5;
            }
            double e = 0.0;
            if (den > 0.0) {
                e = num / den;
            } else if (all_high) {
                e = value(n - 1, i, c) * inv_dt[n - 1];
            } else {
                e = value(0, i, c) * inv_dt[0];
            }
            result[c] = static_cast<float>(e);
        }
        out[i] = Rgb{result[0], result[1], result[2]};
    }
    return HdrImage(w, h, std::move(out));
}

}  // namespace

HdrImage merge(std::span<const Bracket> brackets, const WeightFunction& weight) {
    if (brackets.empty()) {
        throw ConfigError("merge: bracket stack is empty");
    }
    std::vector<const Bracket*> sorted;
    for (const auto& b : brackets) sorted.push_back(&b);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Bracket* a, const Bracket* b) { return a->ev > b->ev; });

    const std::size_t w = sorted.front()->image.width();
    const std::size_t h = sorted.front()->image.height();
    std::vector<double> evs;
    for (const Bracket* b : sorted) {
        if (b->image.width() != w || b->image.height() != h) {
            throw ConfigError("merge: bracket dimensions differ");
        }
        evs.push_back(b->ev);
    }
    return merge_values(w, h, evs, weight, [&](std::size_t k, std::size_t i, int c) -> double {
        const Rgb& p = sorted[k]->image[i];
        return c == 0 ? p.r : (c == 1 ? p.g : p.b);
    });
}

HdrImage merge(const BracketStack& stack, const WeightFunction& weight) {
    const auto planes = stack.render_exact();
    return merge_values(stack.base().width(), stack.base().height(), stack.evs(), weight,
                        [&](std::size_t k, std::size_t i, int c) { return planes[k][i * 3 + c]; });
}

double dynamic_range(const LinearImage& img) {
    std::vector<double> lum;
    lum.reserve(img.size());
    for (const Rgb& p : img.pixels()) {
        const double l = luminance(p);
        if (l > 0.0) lum.push_back(l);
    }
    if (lum.empty()) {
        throw ConfigError("dynamic_range: image has no pixel with positive luminance");
    }
    const std::size_t n = lum.size();
    auto rank = [n](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        return std::clamp<std::size_t>(r, 1, n) - 1;
    };
    const std::size_t lo = rank(0.001);
    const std::size_t hi = rank(0.999);
    std::nth_element(lum.begin(), lum.begin() + static_cast<long>(lo), lum.end());
    const double low = lum[lo];
    std::nth_element(lum.begin(), lum.begin() + static_cast<long>(hi), lum.end());
    const double high = lum[hi];
    return std::log2(high / low);
}

}  // namespace ditmo
