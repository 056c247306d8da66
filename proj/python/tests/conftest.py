# Copyright (C) 2026 The ditmo Authors
# SPDX-License-Identifier: Apache-2.0

import os
import shutil

import numpy as np
import pytest


def sky_scene(w=96, h=72, water=False):
    """Clipped sky over textured ground; returns (image float32 HxWx3, labels uint8 HxW)."""
    img = np.zeros((h, w, 3), np.float32)
    labels = np.ones((h, w), np.uint8)
    horizon = h * 45 // 100
    clip_end = h * 35 // 100
    shore = h * 75 // 100 if water else h
    x = np.arange(w) / w
    rng = np.random.default_rng(1)
    for y in range(h):
        wave = 0.5 + 0.5 * np.sin(2 * np.pi * (3 * x + 0.01 * y))
        if y < horizon:
            labels[y] = 0
            if y < clip_end:
                img[y] = 1.0
            else:
                b = 0.95 - 0.25 * (y - clip_end) / (horizon - clip_end)
                img[y] = [b * 0.8, b * 0.9, b]
        elif y < shore:
            base = 0.15 + 0.35 * wave + 0.15 * rng.random(w)
            img[y] = np.stack([base * 0.9, base * 0.75, base * 0.5], axis=1)
        else:
            labels[y] = 3
            b = 0.2 + 0.4 * wave
            row = np.stack([b * 0.6, b * 0.8, b], axis=1)
            if y - shore < (h - shore) // 2:
                row[wave > 0.3] = 1.0
            img[y] = row
    # Quantize like an 8-bit file would be.
    return np.round(img * 255) / 255, labels


@pytest.fixture
def scene():
    return sky_scene()


@pytest.fixture
def cli():
    path = os.environ.get("DITMO_CLI") or shutil.which("ditmo")
    if not path:
        pytest.skip("ditmo executable not available (set DITMO_CLI)")
    return path
