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
#include <vector>

#include "eqdisc/errors.hpp"
#include "eqdisc/expr.hpp"
#include "eqdisc/image.hpp"

// Generalized local binary patterns: the threshold comparison of each circle
// sample Z against the center C is an arbitrary equation over {Z, C, a}. Bit
// p is 1 iff the equation value is finite and >= 0, so the original
// comparison is "Z - C" and the flat-region-stabilized variant is
// "Z - C + a".
namespace eqdisc::lbp {

class OutOfInterior : public Error {
public:
    using Error::Error;
};

class BinCountMismatch : public Error {
public:
    using Error::Error;
};

class Unnormalized : public Error {
public:
    using Error::Error;
};

/// Histogram window footprint. The square window is the cache-friendly
/// default; the circular one keeps pixels within Euclidean distance
/// region_radius of the center.
enum class WindowShape : std::uint8_t { Square, Circle };

struct LbpConfig {
    int neighbors = 8;        // P; code fits 32 bits, so P <= 24
    double radius = 1.0;      // R, pixels
    double offset = 0.01;     // a
    int region_radius = 4;    // histogram window half-width
    WindowShape window = WindowShape::Square;

    bool operator==(const LbpConfig&) const = default;
};

struct Histogram {
    std::vector<double> bins;  // 2^P entries
    bool normalized = false;

    int bin_count() const { return static_cast<int>(bins.size()); }
};

/// Precomputed circle sampling pattern for one (P, R). Samples at angles
/// 2*pi*p/P, p = 0 at angle 0, counter-clockwise; off-grid positions use
/// bilinear interpolation, grid-exact ones read the pixel directly.
class LbpKernel {
public:
    LbpKernel(int neighbors, double radius);

    int margin() const { return margin_; }
    int neighbors() const { return neighbors_; }

    std::uint32_t code_at(const GrayImage& img, int x, int y, const expr::CompiledEquation& eq,
                          double offset) const;

private:
    struct Sample {
        bool exact;
        int ix, iy;          // exact case
        int x0, y0;          // bilinear base offset
        double w00, w10, w01, w11;
    };
    int neighbors_;
    int margin_;
    std::vector<Sample> samples_;
};

/// Per-frame LBP codes over the valid interior (margin = ceil(R) on every
/// side); outside the interior the stored code is 0 and must not be read.
struct CodeImage {
    int width = 0;
    int height = 0;
    int margin = 0;
    std::vector<std::uint32_t> codes;

    std::uint32_t at(int x, int y) const { return codes[std::size_t(y) * width + x]; }
};

std::uint32_t lbp_code(const GrayImage& img, int x, int y, const expr::Equation& eq,
                       const LbpConfig& cfg);

CodeImage compute_codes(const GrayImage& img, const expr::CompiledEquation& eq,
                        const LbpConfig& cfg, int threads = 1);

/// Normalized histogram of codes over the square window of half-width
/// region_radius centered at (x, y).
Histogram region_histogram(const GrayImage& img, int x, int y, const expr::Equation& eq,
                           const LbpConfig& cfg);

Histogram region_histogram(const CodeImage& codes, int x, int y, const LbpConfig& cfg,
                           bool normalize = true);

/// Histogram intersection sum_j min(h1_j, h2_j) in [0, 1] for normalized
/// inputs.
double intersection(const Histogram& h1, const Histogram& h2);

}  // namespace eqdisc::lbp
