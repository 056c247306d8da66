// Copyright (C) 2026 The ditmo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ditmo/image_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <jpeglib.h>
#include <openssl/evp.h>
#include <png.h>

namespace ditmo {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::array<std::uint8_t, 8> magic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return b.size() >= magic.size() && std::equal(magic.begin(), magic.end(), b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

Raster8 decode_png(std::span<const std::uint8_t> bytes, int channels) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw IoError(IoErrorKind::Corrupt, std::string("PNG decode failed: ") + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw IoError(IoErrorKind::UnsupportedFormat, "16-bit PNG input is not supported");
    }
    const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    int decoded_channels = channels;
    if (channels == 1) {
        image.format = has_alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
        decoded_channels = has_alpha ? 2 : 1;
    } else {
        image.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
        decoded_channels = has_alpha ? 4 : 3;
    }
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(IoErrorKind::Corrupt, "PNG decode failed: " + msg);
    }

    Raster8 out;
    out.width = image.width;
    out.height = image.height;
    out.channels = channels;
    if (decoded_channels == channels) {
        out.data = std::move(buffer);
        return out;
    }
    const std::size_t n = out.width * out.height;
    out.data.resize(n * channels);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(&buffer[i * decoded_channels], channels, &out.data[i * channels]);
    }
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Raster8 decode_jpeg(std::span<const std::uint8_t> bytes, int channels) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.message[0] = '\0';

    Raster8 out;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError(IoErrorKind::Corrupt, std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    out.width = cinfo.output_width;
    out.height = cinfo.output_height;
    out.channels = channels;
    out.data.resize(out.width * out.height * channels);
    const std::size_t stride = out.width * channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = &out.data[cinfo.output_scanline * stride];
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

}  // namespace

Raster8 decode_image(std::span<const std::uint8_t> bytes, int channels) {
    if (channels != 1 && channels != 3) {
        throw ConfigError("decode_image: channels must be 1 or 3");
    }
    if (is_png(bytes)) {
        return decode_png(bytes, channels);
    }
    if (is_jpeg(bytes)) {
        return decode_jpeg(bytes, channels);
    }
    throw IoError(IoErrorKind::UnsupportedFormat, "input is neither PNG nor JPEG");
}

std::vector<std::uint8_t> encode_png(const Raster8& raster) {
    if (raster.channels != 1 && raster.channels != 3) {
        throw ConfigError("encode_png: channels must be 1 or 3");
    }
    if (raster.data.size() != raster.width * raster.height * raster.channels) {
        throw ConfigError("encode_png: buffer size does not match dimensions");
    }
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width);
    image.height = static_cast<png_uint_32>(raster.height);
    image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.data.data(), 0, nullptr)) {
        throw IoError(IoErrorKind::WriteFailed, std::string("PNG encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data.data(), 0, nullptr)) {
        throw IoError(IoErrorKind::WriteFailed, std::string("PNG encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

SdrImage to_sdr(const Raster8& raster) {
    const std::size_t n = raster.width * raster.height;
    std::vector<Rgb> px(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (raster.channels == 1) {
            const float v = raster.data[i] / 255.0f;
            px[i] = {v, v, v};
        } else {
            const std::uint8_t* p = &raster.data[i * 3];
            px[i] = {p[0] / 255.0f, p[1] / 255.0f, p[2] / 255.0f};
        }
    }
    return SdrImage(raster.width, raster.height, std::move(px));
}

Raster8 to_raster(const SdrImage& img) {
    Raster8 out{img.width(), img.height(), 3, {}};
    out.data.resize(img.size() * 3);
    auto quantize = [](float v) { return static_cast<std::uint8_t>(std::lround(v * 255.0f)); };
    for (std::size_t i = 0; i < img.size(); ++i) {
        out.data[i * 3 + 0] = quantize(img[i].r);
        out.data[i * 3 + 1] = quantize(img[i].g);
        out.data[i * 3 + 2] = quantize(img[i].b);
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(IoErrorKind::Unreadable, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError(IoErrorKind::Unreadable, "read error on " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(IoErrorKind::WriteFailed, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw IoError(IoErrorKind::WriteFailed, "write error on " + path.string());
    }
}

SdrImage read_ldr(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return to_sdr(decode_image(bytes, 3));
    } catch (IoError& e) {
        throw IoError(e.kind(), path.string() + ": " + e.what());
    }
}

void write_png(const std::filesystem::path& path, const Raster8& raster) {
    write_file(path, encode_png(raster));
}

// ---------------------------------------------------------------------------
// Radiance RGBE

namespace {

using Rgbe = std::array<std::uint8_t, 4>;

Rgbe to_rgbe(const Rgb& c) {
    const double r = c.r, g = c.g, b = c.b;
    const double v = std::max({r, g, b});
    if (v < 1e-38) {
        return {0, 0, 0, 0};
    }
    int e = 0;
    std::frexp(v, &e);
    // Round to nearest; if the largest mantissa rounds up to 256, bump the exponent.
    double scale = std::ldexp(1.0, 8 - e);
    if (std::lround(v * scale) > 255) {
        ++e;
        scale = std::ldexp(1.0, 8 - e);
    }
    if (e + 128 > 255) {
        return {255, 255, 255, 255};
    }
    if (e + 128 < 1) {
        return {0, 0, 0, 0};
    }
    auto m = [&](double x) { return static_cast<std::uint8_t>(std::min<long>(255, std::lround(x * scale))); };
    return {m(r), m(g), m(b), static_cast<std::uint8_t>(e + 128)};
}

Rgb from_rgbe(const std::uint8_t* p) {
    if (p[3] == 0) {
        return {};
    }
    const double f = std::ldexp(1.0, static_cast<int>(p[3]) - (128 + 8));
    return {static_cast<float>(p[0] * f), static_cast<float>(p[1] * f), static_cast<float>(p[2] * f)};
}

// New-style run-length encoding of one component plane.
void rle_component(const std::uint8_t* data, std::size_t n, std::vector<std::uint8_t>& out) {
    constexpr std::size_t min_run = 4;
    std::size_t cur = 0;
    while (cur < n) {
        std::size_t beg_run = cur;
        std::size_t run_count = 0;
        std::size_t old_run_count = 0;
        // Find the next run of at least min_run identical bytes.
        while (run_count < min_run && beg_run < n) {
            beg_run += run_count;
            old_run_count = run_count;
            run_count = 1;
            while (beg_run + run_count < n && run_count < 127 && data[beg_run] == data[beg_run + run_count]) {
                ++run_count;
            }
        }
        // A short run right before the long one is cheaper as a run.
        if (old_run_count > 1 && old_run_count == beg_run - cur) {
            out.push_back(static_cast<std::uint8_t>(128 + old_run_count));
            out.push_back(data[cur]);
            cur = beg_run;
        }
        // Literal bytes up to the start of the run.
        while (cur < beg_run) {
            std::size_t nonrun = std::min<std::size_t>(beg_run - cur, 128);
            out.push_back(static_cast<std::uint8_t>(nonrun));
            out.insert(out.end(), data + cur, data + cur + nonrun);
            cur += nonrun;
        }
        if (run_count >= min_run) {
            out.push_back(static_cast<std::uint8_t>(128 + run_count));
            out.push_back(data[beg_run]);
            cur += run_count;
        }
    }
}

IoError corrupt(const std::string& what) { return IoError(IoErrorKind::Corrupt, "RGBE: " + what); }

}  // namespace

std::vector<std::uint8_t> encode_rgbe(const LinearImage& img) {
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    std::ostringstream header;
    header << "#?RADIANCE\n"
           << "FORMAT=32-bit_rle_rgbe\n"
           << "\n"
           << "-Y " << h << " +X " << w << "\n";
    const std::string head = header.str();
    std::vector<std::uint8_t> out(head.begin(), head.end());
    out.reserve(head.size() + w * h * 4);

    const bool rle = w >= 8 && w <= 32767;
    std::vector<std::uint8_t> plane(w);
    std::vector<Rgbe> line(w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            line[x] = to_rgbe(img.at(x, y));
        }
        if (!rle) {
            for (const Rgbe& p : line) {
                out.insert(out.end(), p.begin(), p.end());
            }
            continue;
        }
        out.push_back(2);
        out.push_back(2);
        out.push_back(static_cast<std::uint8_t>(w >> 8));
        out.push_back(static_cast<std::uint8_t>(w & 0xff));
        for (int c = 0; c < 4; ++c) {
            for (std::size_t x = 0; x < w; ++x) {
                plane[x] = line[x][c];
            }
            rle_component(plane.data(), w, out);
        }
    }
    return out;
}

LinearImage decode_rgbe(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() {
        std::string line;
        while (pos < bytes.size() && bytes[pos] != '\n') {
            line.push_back(static_cast<char>(bytes[pos++]));
        }
        if (pos >= bytes.size()) {
            throw corrupt("truncated header");
        }
        ++pos;
        return line;
    };

    std::string line = next_line();
    if (line.rfind("#?", 0) != 0) {
        throw IoError(IoErrorKind::UnsupportedFormat, "RGBE: missing #? magic");
    }
    bool format_ok = true;
    while (!(line = next_line()).empty()) {
        if (line.rfind("FORMAT=", 0) == 0 && line != "FORMAT=32-bit_rle_rgbe") {
            format_ok = false;
        }
    }
    if (!format_ok) {
        throw IoError(IoErrorKind::UnsupportedFormat, "RGBE: only 32-bit_rle_rgbe is supported");
    }
    line = next_line();
    std::size_t h = 0, w = 0;
    {
        std::istringstream res(line);
        std::string ytag, xtag;
        if (!(res >> ytag >> h >> xtag >> w) || ytag != "-Y" || xtag != "+X" || w == 0 || h == 0) {
            throw IoError(IoErrorKind::UnsupportedFormat, "RGBE: unsupported resolution line '" + line + "'");
        }
    }

    std::vector<Rgb> px(w * h);
    std::vector<std::uint8_t> scan(w * 4);
    for (std::size_t y = 0; y < h; ++y) {
        const bool rle = w >= 8 && w <= 32767 && pos + 4 <= bytes.size() && bytes[pos] == 2 &&
                         bytes[pos + 1] == 2 && (bytes[pos + 2] & 0x80) == 0;
        if (!rle) {
            if (pos + w * 4 > bytes.size()) {
                throw corrupt("truncated pixel data");
            }
            for (std::size_t x = 0; x < w; ++x) {
                px[y * w + x] = from_rgbe(&bytes[pos + x * 4]);
            }
            pos += w * 4;
            continue;
        }
        if ((static_cast<std::size_t>(bytes[pos + 2]) << 8 | bytes[pos + 3]) != w) {
            throw corrupt("scanline width mismatch");
        }
        pos += 4;
        for (int c = 0; c < 4; ++c) {
            std::size_t x = 0;
            while (x < w) {
                if (pos >= bytes.size()) {
                    throw corrupt("truncated scanline");
                }
                std::size_t count = bytes[pos++];
                if (count > 128) {
                    count -= 128;
                    if (count == 0 || x + count > w || pos >= bytes.size()) {
                        throw corrupt("bad run");
                    }
                    const std::uint8_t v = bytes[pos++];
                    for (std::size_t k = 0; k < count; ++k) {
                        scan[(x++) * 4 + c] = v;
                    }
                } else {
                    if (count == 0 || x + count > w || pos + count > bytes.size()) {
                        throw corrupt("bad literal run");
                    }
                    for (std::size_t k = 0; k < count; ++k) {
                        scan[(x++) * 4 + c] = bytes[pos++];
                    }
                }
            }
        }
        for (std::size_t x = 0; x < w; ++x) {
            px[y * w + x] = from_rgbe(&scan[x * 4]);
        }
    }
    return LinearImage(w, h, std::move(px));
}

void write_hdr(const LinearImage& img, const std::filesystem::path& path) {
    write_file(path, encode_rgbe(img));
}

LinearImage read_hdr(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_rgbe(bytes);
    } catch (IoError& e) {
        throw IoError(e.kind(), path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw IoError(IoErrorKind::Corrupt, "base64 length is not a multiple of 4");
    }
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) {
        throw IoError(IoErrorKind::Corrupt, "malformed base64 payload");
    }
    // EVP_DecodeBlock does not account for padding.
    std::size_t size = static_cast<std::size_t>(n);
    if (!text.empty() && text.back() == '=') --size;
    if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
    out.resize(size);
    return out;
}

}  // namespace ditmo
