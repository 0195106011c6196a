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

#include <span>
#include <string>
#include <vector>

#include "eqdisc/bgs_params.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/expr.hpp"
#include "eqdisc/image.hpp"
#include "eqdisc/lbp.hpp"
#include "eqdisc/records.hpp"

// Texture background subtraction: every modeled pixel keeps K weighted LBP
// histograms. The frame histogram is matched against the model by histogram
// intersection; persistent (high-weight) histograms are treated as
// background. Histograms are ordered by descending weight after every update
// and the smallest prefix whose weight mass exceeds background_mass forms
// the background set.
namespace eqdisc::bgs {

class EmptySequence : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyScoringRange : public Error {
public:
    using Error::Error;
};

/// Foreground masks use 0 = background, 1 = foreground. PNG export maps
/// foreground to 255.
using ForegroundMask = ByteImage;

class SceneModel {
public:
    /// Seeds every pixel's slots from the first frame's histogram (weight 1
    /// on slot 1) and runs the update through the remaining bootstrap frames
    /// without emitting masks.
    static SceneModel init(std::span<const GrayImage> bootstrap_frames, const expr::Equation& eq,
                           const lbp::LbpConfig& cfg, const BgsParams& params);

    /// Advances the model by exactly one frame and returns its mask. Border
    /// pixels outside the valid interior are labeled background. Pixel
    /// updates are independent, so any thread count produces the identical
    /// mask.
    ForegroundMask process_frame(const GrayImage& frame, int threads = 1);

    int width() const { return width_; }
    int height() const { return height_; }
    int margin() const { return margin_; }

    /// Weights of one pixel's slots, descending (test hook).
    std::vector<double> pixel_weights(int x, int y) const;
    /// One slot's histogram (test hook).
    std::vector<double> pixel_histogram(int x, int y, int slot) const;

private:
    SceneModel() = default;

    void update_all(const GrayImage& frame, ForegroundMask* mask, int threads);
    std::uint8_t update_pixel(std::size_t model_index, const lbp::CodeImage& codes, int x, int y);

    int width_ = 0, height_ = 0, margin_ = 0;
    int grid_w_ = 0, grid_h_ = 0;  // modeled pixel grid (stride applied)
    lbp::LbpConfig cfg_;
    BgsParams params_;
    std::vector<expr::CompiledEquation> eq_;  // single compiled equation
    std::size_t bins_ = 0;
    std::vector<double> hists_;    // [pixel][slot][bin]
    std::vector<double> weights_;  // [pixel][slot]
};

/// Runs bootstrap + scoring for one candidate equation. The first
/// max(5, frames/10) frames bootstrap the model and are excluded from
/// scoring (override with bootstrap_frames >= 0). frame_first is the index
/// label of frames[0] used for provenance only.
struct EvalOptions {
    int threads = 1;
    int bootstrap_frames = -1;  // -1: max(5, n/10)
    int frame_first = 0;
    std::uint64_t seed = 0;
    std::string scene_name;
    metrics::ShadowPolicy shadow = metrics::ShadowPolicy::Negative;
};

int default_bootstrap_count(std::size_t frame_count);

dataset::EvalRecord evaluate_equation(const expr::Equation& eq, std::span<const GrayImage> frames,
                                      std::span<const ByteImage> gts, const lbp::LbpConfig& cfg,
                                      const BgsParams& params, const EvalOptions& opts = {});

/// Same as evaluate_equation but also returns the scored masks (CLI export).
dataset::EvalRecord evaluate_equation_with_masks(const expr::Equation& eq,
                                                 std::span<const GrayImage> frames,
                                                 std::span<const ByteImage> gts,
                                                 const lbp::LbpConfig& cfg, const BgsParams& params,
                                                 const EvalOptions& opts,
                                                 std::vector<ForegroundMask>* masks);

}  // namespace eqdisc::bgs
