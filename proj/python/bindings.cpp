// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <set>

#include "ditmo/error.hpp"
#include "ditmo/exposure.hpp"
#include "ditmo/image_io.hpp"
#include "ditmo/mask.hpp"
#include "ditmo/merge.hpp"
#include "ditmo/pipeline.hpp"
#include "ditmo/semgraph.hpp"

namespace py = pybind11;
using namespace ditmo;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

std::vector<Rgb> rgb_pixels(const FloatArray& a, std::size_t& w, std::size_t& h) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ConfigError("expected an (H, W, 3) array");
    h = static_cast<std::size_t>(a.shape(0));
    w = static_cast<std::size_t>(a.shape(1));
    std::vector<Rgb> px(w * h);
    const float* d = a.data();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = Rgb{d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return px;
}

template <class Tag>
RgbImage<Tag> to_image(const FloatArray& a) {
    std::size_t w = 0, h = 0;
    auto px = rgb_pixels(a, w, h);
    return RgbImage<Tag>(w, h, std::move(px));
}

template <class Tag>
FloatArray to_array(const RgbImage<Tag>& img) {
    FloatArray out({img.height(), img.width(), std::size_t{3}});
    float* d = out.mutable_data();
    for (std::size_t i = 0; i < img.size(); ++i) {
        d[3 * i] = img[i].r;
        d[3 * i + 1] = img[i].g;
        d[3 * i + 2] = img[i].b;
    }
    return out;
}

BinaryMask to_mask(const BoolArray& a) {
    if (a.ndim() != 2) throw ConfigError("expected an (H, W) mask");
    BinaryMask m(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    const bool* d = a.data();
    for (std::size_t i = 0; i < m.size(); ++i) m.set(i, d[i]);
    return m;
}

BoolArray to_array(const BinaryMask& m) {
    BoolArray out({m.height(), m.width()});
    bool* d = out.mutable_data();
    for (std::size_t i = 0; i < m.size(); ++i) d[i] = m[i];
    return out;
}

// Mock inpainting with segmentation taken from a caller-supplied label map.
class LabelMapBackend : public MockBackend {
public:
    LabelMapBackend(MockBackend::Options options, SemanticLabeling labels)
        : MockBackend(std::move(options)), m_labels(std::move(labels)) {}

    SemanticLabeling segment(const SegmentRequest&) override { return m_labels; }

private:
    SemanticLabeling m_labels;
};

PipelineConfig parse_config(const std::optional<std::string>& json) {
    return json ? config_from_json(*json) : PipelineConfig{};
}

}  // namespace

PYBIND11_MODULE(_ditmo, m) {
    m.doc() = "Semantic-graph guided inverse tone mapping";

    static py::exception<Error> error(m, "Error");
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
    static py::exception<IoError> io_error(m, "IoError", error.ptr());
    static py::exception<BackendError> backend_error(m, "BackendError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            validation_error(e.what());
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const IoError& e) {
            io_error(e.what());
        } catch (const BackendError& e) {
            backend_error(e.what());
        } catch (const Error& e) {
            error(e.what());
        }
    });

    m.attr("NUM_CLASSES") = kNumClasses;
    m.def("class_name", [](int id) { return std::string(class_name(id)); });
    m.def("class_from_name", &class_from_name, py::arg("name"));

    m.def("saturation_mask", [](const FloatArray& img, double threshold) {
        return to_array(saturation_mask(to_image<SdrTag>(img), threshold));
    }, py::arg("image"), py::arg("threshold") = kDefaultSaturationThreshold);
    m.def("erode", [](const BoolArray& mask, int r) { return to_array(erode(to_mask(mask), DiskKernel(r))); },
          py::arg("mask"), py::arg("radius"));
    m.def("dilate", [](const BoolArray& mask, int r) { return to_array(dilate(to_mask(mask), DiskKernel(r))); },
          py::arg("mask"), py::arg("radius"));
    m.def("inpaint_mask", [](const BoolArray& mask, int alpha, int beta) {
        return to_array(inpaint_mask(to_mask(mask), alpha, beta));
    }, py::arg("mask"), py::arg("alpha"), py::arg("beta"));

    m.def("linearize", [](const FloatArray& img, double gamma) {
        return to_array(linearize(to_image<SdrTag>(img), ResponseCurve::gamma(gamma)));
    }, py::arg("image"), py::arg("gamma") = 2.2);
    m.def("exposure_from_luminances", [](std::vector<double> lum, double p) {
        const auto e = exposure_from_luminances(std::move(lum), p);
        return py::make_tuple(e.ev, e.reference);
    }, py::arg("luminances"), py::arg("percentile") = kDefaultExposurePercentile,
       "Returns (ev, reference luminance).");

    m.def("merge", [](const std::vector<std::pair<double, FloatArray>>& brackets) {
        std::vector<Bracket> stack;
        for (const auto& [ev, img] : brackets) stack.push_back({ev, to_image<LinearTag>(img), {}});
        return to_array(merge(stack));
    }, py::arg("brackets"), "Merges [(ev, (H, W, 3) array), ...] with the triangle weight.");
    m.def("dynamic_range", [](const FloatArray& img) { return dynamic_range(to_image<LinearTag>(img)); },
          py::arg("image"));

    m.def("read_hdr", [](const std::filesystem::path& p) { return to_array(read_hdr(p)); }, py::arg("path"));
    m.def("write_hdr", [](const std::filesystem::path& p, const FloatArray& img) {
        write_hdr(to_image<LinearTag>(img), p);
    }, py::arg("path"), py::arg("image"));

    m.def("default_graph_json", [] { return graph_to_json(make_graph(default_prompts())); });
    m.def("inpaint_order", [](const std::string& graph_json, const std::set<int>& present) {
        return inpaint_order(graph_from_json(graph_json), present);
    }, py::arg("graph_json"), py::arg("present"));
    m.def("sample_prompt", [](const std::string& graph_json, int class_id, std::uint64_t seed,
                              const std::vector<std::string>& history, const std::optional<std::string>& override_prompt) {
        return sample_prompt(graph_from_json(graph_json), class_id, seed, history, override_prompt);
    }, py::arg("graph_json"), py::arg("class_id"), py::arg("seed") = 0,
       py::arg("history") = std::vector<std::string>{}, py::arg("override") = std::nullopt);

    m.def("default_config_json", [] { return config_to_json(PipelineConfig{}); });
    m.def("run_pipeline", [](const FloatArray& image, const LabelArray& labels, const std::optional<std::string>& config_json,
                             const std::optional<std::string>& graph_json) {
        const auto input = to_image<SdrTag>(image);
        if (labels.ndim() != 2 || static_cast<std::size_t>(labels.shape(0)) != input.height() ||
            static_cast<std::size_t>(labels.shape(1)) != input.width()) {
            throw ConfigError("labels must be an (H, W) array matching the image");
        }
        const auto config = parse_config(config_json);
        const auto graph = graph_json ? graph_from_json(*graph_json) : load_pipeline_graph(config);
        LabelMapBackend backend(
            MockBackend::Options{config.mock_rho_min, std::nullopt},
            SemanticLabeling::from_labels(input.width(), input.height(),
                                          std::span<const std::uint8_t>(labels.data(), labels.size())));
        std::optional<RunOutput> out;
        {
            py::gil_scoped_release release;
            out.emplace(run_pipeline(input, config, backend, graph));
        }
        return py::make_tuple(to_array(out->hdr), report_to_json(out->report, config));
    }, py::arg("image"), py::arg("labels"), py::arg("config_json") = std::nullopt, py::arg("graph_json") = std::nullopt,
       "Runs the pipeline with the mock backend and a fixed label map. Returns (hdr, report json).");
    m.def("run", [](const std::filesystem::path& input, const std::filesystem::path& output,
                    const std::optional<std::string>& config_json, std::optional<std::filesystem::path> debug_dir) {
        const auto config = parse_config(config_json);
        py::gil_scoped_release release;
        const auto files = run(input, output, config, std::move(debug_dir));
        return std::make_pair(files.hdr, files.manifest);
    }, py::arg("input"), py::arg("output"), py::arg("config_json") = std::nullopt, py::arg("debug_dir") = std::nullopt);
}
