// Copyright 2026 The eqdisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eqdisc/errors.hpp"

namespace eqdisc {

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// Grayscale frame with intensities in [0,1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pix;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0) : width(w), height(h), pix(std::size_t(w) * h, fill) {}

    double at(int x, int y) const { return pix[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return pix[std::size_t(y) * width + x]; }
    std::size_t size() const { return pix.size(); }
};

/// 8-bit single-channel frame (masks, ground truth, raw gray).
struct ByteImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pix;

    ByteImage() = default;
    ByteImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pix(std::size_t(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return pix[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pix[std::size_t(y) * width + x]; }
    std::size_t size() const { return pix.size(); }
};

/// 8-bit RGB frame (diff visualizations), interleaved.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pix;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pix(std::size_t(w) * h * 3, 0) {}

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        std::uint8_t* p = &pix[(std::size_t(y) * width + x) * 3];
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

/// Reads a PNG, JPEG or PGM/PPM file as 8-bit grayscale. Color inputs are
/// converted with luma weights 0.299/0.587/0.114.
ByteImage read_image_gray8(const std::filesystem::path& path);

void write_png_gray8(const std::filesystem::path& path, const ByteImage& img);
void write_png_rgb8(const std::filesystem::path& path, const RgbImage& img);
void write_pgm(const std::filesystem::path& path, const ByteImage& img);
void write_jpeg_gray8(const std::filesystem::path& path, const ByteImage& img, int quality = 95);

inline GrayImage to_unit(const ByteImage& b) {
    GrayImage g(b.width, b.height);
    for (std::size_t i = 0; i < b.pix.size(); ++i) g.pix[i] = b.pix[i] / 255.0;
    return g;
}

inline ByteImage to_bytes(const GrayImage& g) {
    ByteImage b(g.width, g.height);
    for (std::size_t i = 0; i < g.pix.size(); ++i) {
        double v = g.pix[i] * 255.0 + 0.5;
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        b.pix[i] = static_cast<std::uint8_t>(v);
    }
    return b;
}

/// Box-filter (area-average) resample with fractional pixel coverage.
GrayImage downscale_area(const GrayImage& src, int new_w, int new_h);

/// Nearest-neighbor resample; keeps label values intact (ground truth).
ByteImage downscale_nearest(const ByteImage& src, int new_w, int new_h);

}  // namespace eqdisc
