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

#include <vector>

#include "eqdisc/rng.hpp"
#include "eqdisc/vae.hpp"

namespace eqdisc::vae::detail {

using Seq = std::vector<std::vector<double>>;  // T x dim

// Single-direction gated recurrent layer. Gate layout stacks the reset,
// update and candidate blocks [r; z; n] in one 3H x in (resp. 3H x H)
// matrix. Cell equations (sigmoid gates, tanh candidate):
//   r_t = sig(W_ir x_t + b_ir + W_hr h_{t-1} + b_hr)
//   z_t = sig(W_iz x_t + b_iz + W_hz h_{t-1} + b_hz)
//   n_t = tanh(W_in x_t + b_in + r_t . (W_hn h_{t-1} + b_hn))
//   h_t = (1 - z_t) . n_t + z_t . h_{t-1}
struct Gru {
    int in = 0;
    int hidden = 0;
    Tensor w_ih, w_hh, b_ih, b_hh;

    void init(int input_size, int hidden_size, Rng& rng);

    struct Cache {
        Seq x, hprev, r, z, n, ghn;  // ghn = W_hn h_{t-1} + b_hn
    };

    /// hs[t] is the hidden state after consuming xs[t]. h0 may be null for a
    /// zero initial state. cache may be null for inference.
    void forward(const Seq& xs, const double* h0, Seq& hs, Cache* cache) const;

    /// One step for autoregressive decoding.
    void step(const double* x, const double* hprev, double* hout) const;

    /// Backprop through time. dhs holds the upstream gradient on each output
    /// state; gradients are accumulated into the tensors' .g buffers, dxs is
    /// assigned and dh0 receives the gradient on the initial state.
    void backward(const Cache& cache, const Seq& dhs, Seq& dxs, std::vector<double>& dh0);
};

}  // namespace eqdisc::vae::detail
