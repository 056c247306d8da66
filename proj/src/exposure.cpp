// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ditmo {

std::size_t quantile_index(std::size_t n, double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return std::min(k, n - 1);
}

ExposureEstimate exposure_from_luminances(std::vector<double> luminances, double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw ConfigError("exposure percentile must be in (0, 1]");
    }
    if (luminances.empty()) {
        throw ConfigError("exposure estimation: region is empty");
    }
    for (double l : luminances) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw ConfigError("exposure estimation: region contains a non-positive luminance");
        }
    }
    const std::size_t k = quantile_index(luminances.size(), p);
    std::nth_element(luminances.begin(), luminances.begin() + static_cast<long>(k), luminances.end());
    const double reference = luminances[k];
    return {std::clamp(std::log2(reference), kMinEv, 0.0), p, reference};
}

ExposureEstimate estimate_exposure(const SdrImage& content, const BinaryMask& region, double p,
                                   const ResponseCurve& crf) {
    if (content.width() != region.width() || content.height() != region.height()) {
        throw ConfigError("estimate_exposure: region dimensions differ from content");
    }
    std::vector<double> lum;
    lum.reserve(region.count());
    for (std::size_t i = 0; i < content.size(); ++i) {
        if (!region[i]) continue;
        const Rgb& c = content[i];
        lum.push_back(luminance(crf.to_linear(c.r), crf.to_linear(c.g), crf.to_linear(c.b)));
    }
    return exposure_from_luminances(std::move(lum), p);
}

// ---------------------------------------------------------------------------

namespace {

void check_patch(const LinearImage& base, const Patch& patch) {
    if (patch.content.width() != base.width() || patch.content.height() != base.height() ||
        patch.guide.width() != base.width() || patch.guide.height() != base.height()) {
        throw ConfigError("patch '" + patch.tag + "' dimensions differ from the base image");
    }
}

// Interleaved RGB in double. `linear` holds linearize(patch.content) for each patch.
std::vector<double> render_values(const LinearImage& base, double ev, std::span<const Patch> patches,
                                  std::span<const LinearImage> linear) {
    const double gain = std::exp2(ev);
    std::vector<double> out(base.size() * 3);
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Rgb& p = base[i];
        out[i * 3 + 0] = std::clamp(p.r * gain, 0.0, 1.0);
        out[i * 3 + 1] = std::clamp(p.g * gain, 0.0, 1.0);
        out[i * 3 + 2] = std::clamp(p.b * gain, 0.0, 1.0);
    }
    for (std::size_t k = 0; k < patches.size(); ++k) {
        const Patch& patch = patches[k];
        const double exposure = std::exp2(ev - patch.ev);
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double a = patch.guide[i];
            if (a <= 0.0) continue;
            const Rgb& c = linear[k][i];
            const double v[3] = {c.r * exposure, c.g * exposure, c.b * exposure};
            for (int ch = 0; ch < 3; ++ch) {
                out[i * 3 + ch] = (1.0 - a) * out[i * 3 + ch] + a * std::clamp(v[ch], 0.0, 1.0);
            }
        }
    }
    return out;
}

Bracket render_bracket(const LinearImage& base, double ev, std::span<const Patch> patches,
                       std::span<const LinearImage> linear) {
    const std::vector<double> out = render_values(base, ev, patches, linear);
    Bracket bracket{ev, LinearImage(1, 1, Rgb{}), {}};
    for (const Patch& patch : patches) {
        if (patch.ev == ev) bracket.sources.push_back(patch.tag);
    }
    std::vector<Rgb> px(base.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = Rgb{static_cast<float>(out[i * 3]), static_cast<float>(out[i * 3 + 1]),
                    static_cast<float>(out[i * 3 + 2])};
    }
    bracket.image = LinearImage(base.width(), base.height(), std::move(px));
    return bracket;
}

std::vector<LinearImage> linearize_patches(std::span<const Patch> patches, const ResponseCurve& crf) {
    std::vector<LinearImage> linear;
    linear.reserve(patches.size());
    for (const Patch& p : patches) linear.push_back(linearize(p.content, crf));
    return linear;
}

}  // namespace

Bracket synthesize_bracket(const LinearImage& base_linear, double ev, std::span<const Patch> patches,
                           const ResponseCurve& crf) {
    for (const Patch& p : patches) check_patch(base_linear, p);
    return render_bracket(base_linear, ev, patches, linearize_patches(patches, crf));
}

BracketStack::BracketStack(LinearImage base_linear, ResponseCurve crf)
    : m_base(std::move(base_linear)), m_crf(crf) {
    m_brackets.push_back(render_bracket(m_base, 0.0, {}, {}));
}

std::vector<double> BracketStack::evs() const {
    std::vector<double> out;
    for (const auto& b : m_brackets) out.push_back(b.ev);
    return out;
}

std::optional<std::size_t> BracketStack::find(double ev, double tolerance) const {
    std::optional<std::size_t> best;
    double best_distance = 0.0;
    for (std::size_t k = 0; k < m_brackets.size(); ++k) {
        const double d = std::abs(m_brackets[k].ev - ev);
        if (d <= tolerance && (!best || d < best_distance)) {
            best = k;
            best_distance = d;
        }
    }
    return best;
}

double BracketStack::add_bracket(double ev, double tolerance) {
    if (!std::isfinite(ev) || ev > 0.0) {
        throw ConfigError("bracket ev must be finite and <= 0");
    }
    if (const auto k = find(ev, tolerance)) {
        return m_brackets[*k].ev;
    }
    m_brackets.push_back({ev, m_base, {}});
    std::sort(m_brackets.begin(), m_brackets.end(), [](const Bracket& a, const Bracket& b) { return a.ev > b.ev; });
    render();
    return ev;
}

void BracketStack::add_patch(Patch patch) {
    check_patch(m_base, patch);
    if (!find(patch.ev)) {
        std::ostringstream msg;
        msg << "patch '" << patch.tag << "' targets ev " << patch.ev << ", which is not in the stack";
        throw ConfigError(msg.str());
    }
    auto same = std::find_if(m_patches.begin(), m_patches.end(), [&](const Patch& p) { return p.tag == patch.tag; });
    if (same != m_patches.end()) {
        *same = std::move(patch);
    } else {
        m_patches.push_back(std::move(patch));
    }
    render();
}

void BracketStack::render() {
    const auto linear = linearize_patches(m_patches, m_crf);
    for (auto& b : m_brackets) b = render_bracket(m_base, b.ev, m_patches, linear);
}

std::vector<std::vector<double>> BracketStack::render_exact() const {
    const auto linear = linearize_patches(m_patches, m_crf);
    std::vector<std::vector<double>> out;
    for (const auto& b : m_brackets) out.push_back(render_values(m_base, b.ev, m_patches, linear));
    return out;
}

BracketStack propagate(const BracketStack& stack, Patch patch) {
    BracketStack out = stack;
    out.add_patch(std::move(patch));
    return out;
}

// ---------------------------------------------------------------------------

SoftMask composite_guide(const BinaryMask& region, double radius) {
    const SoftMask soft = feather(region, radius);
    std::vector<float> alpha(region.size(), 0.0f);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (region[i]) alpha[i] = soft[i];
    }
    return SoftMask(region.width(), region.height(), std::move(alpha));
}

StackResult build_stack(const SdrImage& input, const std::vector<ClassJob>& jobs, Backend& backend,
                        const StackOptions& options) {
    StackResult result{BracketStack(linearize(input, options.crf), options.crf), {}};
    BracketStack& stack = result.stack;
    std::vector<std::string> seen;

    for (const ClassJob& job : jobs) {
        const std::string tag(class_name(job.class_id));
        if (std::find(seen.begin(), seen.end(), tag) != seen.end()) {
            throw ConfigError("class '" + tag + "' appears twice in the inpainting order");
        }
        seen.push_back(tag);

        const SdrImage working =
            result.outcomes.empty() ? input : delinearize(stack.brackets().back().image, options.crf);
        InpaintRequest req{working, job.inpaint_mask, job.prompt, options.seed};
        SdrImage content = backend.inpaint(req);
        if (content.width() != input.width() || content.height() != input.height()) {
            throw BackendError(BackendErrorKind::DimensionMismatch, "backend returned a resized image");
        }

        const ExposureEstimate estimate = estimate_exposure(content, job.region, options.percentile, options.crf);
        const double ev = stack.add_bracket(estimate.ev, options.merge_tolerance);
        stack.add_patch(Patch{tag, content, job.guide, ev});
        result.outcomes.push_back({job.class_id, job.prompt, estimate, ev, std::move(content)});
    }
    return result;
}

}  // namespace ditmo
