// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "ditmo/exposure.hpp"
#include "ditmo/image.hpp"

namespace ditmo {

/// Hat weighting over normalized pixel values. Zero below eps_lo and above
/// 1 - eps_hi, peaked at 0.5.
class WeightFunction {
public:
    enum class Kind { Triangle, Parabolic };

    static WeightFunction triangle(double eps_lo = 0.005, double eps_hi = 0.005);
    static WeightFunction parabolic(double eps_lo = 0.005, double eps_hi = 0.005);

    Kind kind() const noexcept { return m_kind; }
    double eps_lo() const noexcept { return m_eps_lo; }
    double eps_hi() const noexcept { return m_eps_hi; }

    double operator()(double z) const noexcept;

private:
    WeightFunction(Kind kind, double eps_lo, double eps_hi);

    Kind m_kind;
    double m_eps_lo;
    double m_eps_hi;
};

/// min(z, 1 - z) inside the guards, 0 outside.
double triangle_weight(double z, double eps_lo = 0.005, double eps_hi = 0.005) noexcept;

/// Per-channel weighted average of exposure-normalized bracket values:
///   E = sum_b w(z_b) z_b / 2^ev_b  /  sum_b w(z_b)
/// When every weight is zero, the darkest bracket is used if all z_b >= 0.5,
/// the brightest otherwise.
HdrImage merge(std::span<const Bracket> brackets, const WeightFunction& weight = WeightFunction::triangle());

/// Same weighting over the stack's brackets, read at double precision before
/// they are rounded to float. Pixels that no patch touches come back as the
/// stack's base values exactly.
HdrImage merge(const BracketStack& stack, const WeightFunction& weight = WeightFunction::triangle());

/// log2(L_99.9 / L_0.1) over pixels with positive luminance (nearest-rank
/// percentiles). Throws ConfigError if no pixel has positive luminance.
double dynamic_range(const LinearImage& img);

}  // namespace ditmo
