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

#include "eqdisc/rng.hpp"
#include "eqdisc/vae.hpp"
#include "gru.hpp"

namespace eqdisc::vae {

struct VaeModel::Impl {
    VaeConfig cfg;

    Tensor embedding;
    std::vector<detail::Gru> enc;  // [layer * dirs + dir]
    Tensor w_mu, b_mu, w_logvar, b_logvar;
    Tensor w_z2h, b_z2h;
    std::vector<detail::Gru> dec;
    Tensor w_out, b_out;

    explicit Impl(const VaeConfig& cfg);

    static int dirs(int layers) { return layers > 1 ? 2 : 1; }

    std::vector<ParamRef> parameters();
    void check_tokens(std::span<const int> tokens) const;
    detail::Seq embed(std::span<const int> tokens) const;

    VaeModel::EncodeResult encode(std::span<const int> tokens,
                                  std::span<const double> noise) const;
    /// Forward (and optionally backward) pass of one sequence. dropout_rng
    /// null disables dropout.
    VaeModel::SeqLoss run(std::span<const int> tokens, std::span<const double> noise,
                          bool do_backward, Rng* dropout_rng);
    std::string decode_greedy(std::span<const double> z, double temperature, Rng* rng) const;
};

}  // namespace eqdisc::vae
