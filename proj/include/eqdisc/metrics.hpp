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

#include "eqdisc/errors.hpp"
#include "eqdisc/image.hpp"

namespace eqdisc::metrics {

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Change-detection ground-truth label encoding.
inline constexpr std::uint8_t kGtForeground = 255;
inline constexpr std::uint8_t kGtBackground = 0;
inline constexpr std::uint8_t kGtHardShadow = 50;
inline constexpr std::uint8_t kGtOutsideRoi = 85;
inline constexpr std::uint8_t kGtUnknown = 170;

/// How hard-shadow pixels (label 50) are scored.
enum class ShadowPolicy { Negative, Ignored };

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t ignored = 0;

    Confusion& operator+=(const Confusion& o) {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        ignored += o.ignored;
        return *this;
    }
    std::uint64_t total() const { return tp + tn + fp + fn + ignored; }
    bool operator==(const Confusion&) const = default;
};

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

/// Adds one frame's pixel counts to c. Mask pixels are foreground iff
/// nonzero. Labels 85 and 170 (and any value outside the known set) are
/// ignored.
Confusion accumulate(const ByteImage& mask, const ByteImage& gt, Confusion c = {},
                     ShadowPolicy shadow = ShadowPolicy::Negative);

/// precision = tp/(tp+fp), recall = tp/(tp+fn), F = 2PR/(P+R); 0/0 is 0.
Scores scores(const Confusion& c);

double fscore(double precision, double recall);

/// TP white, TN black, FP red, FN green, ignored gray.
RgbImage render_diff(const ByteImage& mask, const ByteImage& gt,
                     ShadowPolicy shadow = ShadowPolicy::Negative);

}  // namespace eqdisc::metrics
