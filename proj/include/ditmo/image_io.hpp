// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ditmo/image.hpp"

namespace ditmo {

/// Interleaved 8-bit raster, 1 (gray) or 3 (RGB) channels.
struct Raster8 {
    std::size_t width = 0;
    std::size_t height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;
};

/// Decodes an in-memory 8-bit PNG or baseline JPEG into `channels` (1 or 3)
/// channels. Alpha is dropped. 16-bit PNGs are rejected as UnsupportedFormat.
Raster8 decode_image(std::span<const std::uint8_t> bytes, int channels = 3);

std::vector<std::uint8_t> encode_png(const Raster8& raster);

/// v/255 per channel; gray rasters are replicated to RGB.
SdrImage to_sdr(const Raster8& raster);
/// round(255·v) per channel.
Raster8 to_raster(const SdrImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Reads an 8-bit PNG or baseline JPEG. No linearization is applied.
SdrImage read_ldr(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster8& raster);

/// Radiance RGBE (.hdr). Scanlines are run-length encoded when the width is
/// in [8, 32767] and written flat otherwise.
std::vector<std::uint8_t> encode_rgbe(const LinearImage& img);
LinearImage decode_rgbe(std::span<const std::uint8_t> bytes);

void write_hdr(const LinearImage& img, const std::filesystem::path& path);
LinearImage read_hdr(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws IoError(Corrupt) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace ditmo
