// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ditmo/backend.hpp"
#include "ditmo/image.hpp"
#include "ditmo/mask.hpp"

namespace ditmo {

inline constexpr double kDefaultExposurePercentile = 0.02;
inline constexpr double kMinEv = -10.0;
inline constexpr double kBracketMergeTolerance = 0.25;
inline constexpr double kCompositeFeatherRadius = 10.0;

struct ExposureEstimate {
    double ev = 0.0;              // stops, in [kMinEv, 0]
    double percentile = kDefaultExposurePercentile;
    double reference = 1.0;       // linear luminance the ev was derived from
};

/// 0-based index of the p-quantile from the bottom of n ascending samples:
/// min(ceil(p·n), n - 1).
std::size_t quantile_index(std::size_t n, double p);

/// ev = log2 of the p-quantile luminance, clamped to [kMinEv, 0]. Throws
/// ConfigError on an empty set, a non-positive luminance, or p outside (0, 1].
ExposureEstimate exposure_from_luminances(std::vector<double> luminances, double p = kDefaultExposurePercentile);

/// Linearizes the region's pixels with `crf` and estimates from their luminance.
ExposureEstimate estimate_exposure(const SdrImage& content, const BinaryMask& region,
                                   double p = kDefaultExposurePercentile,
                                   const ResponseCurve& crf = ResponseCurve::gamma());

/// Inpainted content to composite through a soft guide. `ev` is the bracket the
/// content is well exposed in; other brackets receive it re-exposed by 2^(ev_b - ev).
struct Patch {
    std::string tag;
    SdrImage content;
    SoftMask guide;
    double ev = 0.0;
};

struct Bracket {
    double ev = 0.0;
    LinearImage image;                 // channels in [0,1]
    std::vector<std::string> sources;  // tags of patches whose own ev is this bracket's
};

/// clamp(base · 2^ev) with every patch blended in order:
/// out = (1 - a)·out + a·clamp(linearize(content) · 2^(ev - patch.ev)).
Bracket synthesize_bracket(const LinearImage& base_linear, double ev, std::span<const Patch> patches,
                           const ResponseCurve& crf = ResponseCurve::gamma());

/// Virtual exposure stack: the linearized input at ev 0 plus darker brackets,
/// each rendered from the shared base and the ordered patch list.
class BracketStack {
public:
    explicit BracketStack(LinearImage base_linear, ResponseCurve crf = ResponseCurve::gamma());

    /// Base first, then strictly decreasing ev.
    const std::vector<Bracket>& brackets() const noexcept { return m_brackets; }
    const std::vector<Patch>& patches() const noexcept { return m_patches; }
    const LinearImage& base() const noexcept { return m_base; }
    const ResponseCurve& crf() const noexcept { return m_crf; }
    std::vector<double> evs() const;

    /// Index of the bracket within `tolerance` stops of `ev` (nearest wins).
    std::optional<std::size_t> find(double ev, double tolerance = 0.0) const;

    /// Returns the ev of an existing bracket within `tolerance`, or inserts a new
    /// bracket at `ev` (carrying every patch added so far) and returns `ev`.
    double add_bracket(double ev, double tolerance = kBracketMergeTolerance);

    /// Adds `patch`, or replaces the patch with the same tag, and re-renders
    /// every bracket. Throws ConfigError if patch.ev is not one of the stack's evs.
    void add_patch(Patch patch);

    /// Bracket values before rounding to float, one interleaved RGB plane per
    /// bracket in `brackets()` order.
    std::vector<std::vector<double>> render_exact() const;

private:
    void render();

    LinearImage m_base;
    ResponseCurve m_crf;
    std::vector<Patch> m_patches;
    std::vector<Bracket> m_brackets;
};

/// Composites `patch` into its own bracket and re-exposes it into every other one.
BracketStack propagate(const BracketStack& stack, Patch patch);

/// One class to inpaint, in graph order.
struct ClassJob {
    int class_id = 0;
    std::string prompt;
    BinaryMask inpaint_mask;  // pixels handed to the backend
    BinaryMask region;        // clipped pixels that receive content
    SoftMask guide;           // composite alpha, zero outside `region`
};

struct StackOptions {
    double percentile = kDefaultExposurePercentile;
    ResponseCurve crf = ResponseCurve::gamma();
    double merge_tolerance = kBracketMergeTolerance;
    std::uint64_t seed = 0;
};

struct ClassOutcome {
    int class_id = 0;
    std::string prompt;
    ExposureEstimate estimate;
    double bracket_ev = 0.0;  // after snapping to an existing bracket
    SdrImage content;         // backend output
};

struct StackResult {
    BracketStack stack;
    std::vector<ClassOutcome> outcomes;
};

/// Inpaints each class in order, estimates its exposure, and composites it into
/// the stack. The first class is inpainted on the input itself; later classes
/// on the SDR rendering of the darkest bracket built so far.
StackResult build_stack(const SdrImage& input, const std::vector<ClassJob>& jobs, Backend& backend,
                        const StackOptions& options = {});

/// Soft composite guide for a clipped region: the feathered region, zeroed outside it.
SoftMask composite_guide(const BinaryMask& region, double radius = kCompositeFeatherRadius);

}  // namespace ditmo
