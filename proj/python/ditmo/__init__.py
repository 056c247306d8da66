# Copyright (C) 2026 The ditmo Authors
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the ditmo inverse tone mapping core."""

from ._ditmo import (
    NUM_CLASSES,
    BackendError,
    ConfigError,
    Error,
    IoError,
    ValidationError,
    class_from_name,
    class_name,
    default_config_json,
    default_graph_json,
    dilate,
    dynamic_range,
    erode,
    exposure_from_luminances,
    inpaint_mask,
    inpaint_order,
    linearize,
    merge,
    read_hdr,
    run,
    run_pipeline,
    sample_prompt,
    saturation_mask,
    write_hdr,
)

__version__ = "0.1.0"

__all__ = [
    "NUM_CLASSES",
    "BackendError",
    "ConfigError",
    "Error",
    "IoError",
    "ValidationError",
    "class_from_name",
    "class_name",
    "default_config_json",
    "default_graph_json",
    "dilate",
    "dynamic_range",
    "erode",
    "exposure_from_luminances",
    "inpaint_mask",
    "inpaint_order",
    "linearize",
    "merge",
    "read_hdr",
    "run",
    "run_pipeline",
    "sample_prompt",
    "saturation_mask",
    "write_hdr",
]
