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

#include "eqdisc/metrics.hpp"

namespace eqdisc::metrics {

namespace {

enum class GtClass { Positive, Negative, Ignored };

GtClass classify(std::uint8_t label, ShadowPolicy shadow) {
    switch (label) {
        case kGtForeground: return GtClass::Positive;
        case kGtBackground: return GtClass::Negative;
        case kGtHardShadow:
            return shadow == ShadowPolicy::Negative ? GtClass::Negative : GtClass::Ignored;
        default: return GtClass::Ignored;
    }
}

void check_dims(const ByteImage& a, const ByteImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("mask and ground truth dimensions differ");
}

}  // namespace

Confusion accumulate(const ByteImage& mask, const ByteImage& gt, Confusion c, ShadowPolicy shadow) {
    check_dims(mask, gt);
    for (std::size_t i = 0; i < mask.pix.size(); ++i) {
        const bool fg = mask.pix[i] != 0;
        switch (classify(gt.pix[i], shadow)) {
            case GtClass::Positive: fg ? ++c.tp : ++c.fn; break;
            case GtClass::Negative: fg ? ++c.fp : ++c.tn; break;
            case GtClass::Ignored: ++c.ignored; break;
        }
    }
    return c;
}

double fscore(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

Scores scores(const Confusion& c) {
    Scores s;
    s.precision = (c.tp + c.fp) > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    s.recall = (c.tp + c.fn) > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    s.fscore = fscore(s.precision, s.recall);
    return s;
}

RgbImage render_diff(const ByteImage& mask, const ByteImage& gt, ShadowPolicy shadow) {
    check_dims(mask, gt);
    RgbImage out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const bool fg = mask.at(x, y) != 0;
            switch (classify(gt.at(x, y), shadow)) {
                case GtClass::Positive:
                    fg ? out.set(x, y, 255, 255, 255) : out.set(x, y, 0, 255, 0);
                    break;
                case GtClass::Negative:
                    fg ? out.set(x, y, 255, 0, 0) : out.set(x, y, 0, 0, 0);
                    break;
                case GtClass::Ignored:
                    out.set(x, y, 128, 128, 128);
                    break;
            }
        }
    }
    return out;
}

}  // namespace eqdisc::metrics
