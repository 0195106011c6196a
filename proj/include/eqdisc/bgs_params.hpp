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

namespace eqdisc::bgs {

/// Texture background-model parameters. Every evaluation records the values
/// it ran with.
struct BgsParams {
    int slots = 3;                     // K histograms per pixel
    double match_threshold = 0.65;     // T_P: below this the frame histogram is unmatched
    double background_mass = 0.7;      // T_B: weight mass covered by background slots
    double histogram_lr = 0.01;        // alpha_b
    double weight_lr = 0.01;           // alpha_w
    int stride = 1;                    // grid step for modeled pixels
    double replacement_weight = 0.01;  // weight of a freshly inserted histogram

    bool operator==(const BgsParams&) const = default;
};

}  // namespace eqdisc::bgs
