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

#include "gru.hpp"

#include <cmath>

#include "eqdisc/kernels.hpp"

namespace eqdisc::vae::detail {

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor make_tensor(int rows, int cols, double bound, Rng& rng) {
    Tensor t;
    t.rows = rows;
    t.cols = cols;
    t.v.resize(std::size_t(rows) * cols);
    t.g.assign(t.v.size(), 0.0);
    for (auto& x : t.v) x = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

void Gru::init(int input_size, int hidden_size, Rng& rng) {
    in = input_size;
    hidden = hidden_size;
    const double bound = 1.0 / std::sqrt(double(hidden_size));
    w_ih = make_tensor(3 * hidden, in, bound, rng);
    w_hh = make_tensor(3 * hidden, hidden, bound, rng);
    b_ih = make_tensor(3 * hidden, 1, bound, rng);
    b_hh = make_tensor(3 * hidden, 1, bound, rng);
}

void Gru::forward(const Seq& xs, const double* h0, Seq& hs, Cache* cache) const {
    const std::size_t T = xs.size();
    const int H = hidden;
    hs.assign(T, std::vector<double>(H, 0.0));
    if (cache) {
        cache->x = xs;
        cache->hprev.assign(T, std::vector<double>(H, 0.0));
        cache->r.assign(T, std::vector<double>(H, 0.0));
        cache->z.assign(T, std::vector<double>(H, 0.0));
        cache->n.assign(T, std::vector<double>(H, 0.0));
        cache->ghn.assign(T, std::vector<double>(H, 0.0));
    }

    std::vector<double> hprev(H, 0.0);
    if (h0) hprev.assign(h0, h0 + H);
    std::vector<double> gi(3 * H), gh(3 * H);

    for (std::size_t t = 0; t < T; ++t) {
        kernels::matvec(w_ih.v.data(), xs[t].data(), gi.data(), 3 * H, in);
        kernels::matvec(w_hh.v.data(), hprev.data(), gh.data(), 3 * H, H);
        for (int j = 0; j < 3 * H; ++j) {
            gi[j] += b_ih.v[j];
            gh[j] += b_hh.v[j];
        }
        std::vector<double>& h = hs[t];
        for (int j = 0; j < H; ++j) {
            const double r = sig(gi[j] + gh[j]);
            const double z = sig(gi[H + j] + gh[H + j]);
            const double n = std::tanh(gi[2 * H + j] + r * gh[2 * H + j]);
            h[j] = (1.0 - z) * n + z * hprev[j];
            if (cache) {
                cache->hprev[t][j] = hprev[j];
                cache->r[t][j] = r;
                cache->z[t][j] = z;
                cache->n[t][j] = n;
                cache->ghn[t][j] = gh[2 * H + j];
            }
        }
        hprev = h;
    }
}

void Gru::step(const double* x, const double* hprev, double* hout) const {
    const int H = hidden;
    std::vector<double> gi(3 * H), gh(3 * H);
    kernels::matvec(w_ih.v.data(), x, gi.data(), 3 * H, in);
    kernels::matvec(w_hh.v.data(), hprev, gh.data(), 3 * H, H);
    for (int j = 0; j < 3 * H; ++j) {
        gi[j] += b_ih.v[j];
        gh[j] += b_hh.v[j];
    }
    for (int j = 0; j < H; ++j) {
        const double r = sig(gi[j] + gh[j]);
        const double z = sig(gi[H + j] + gh[H + j]);
        const double n = std::tanh(gi[2 * H + j] + r * gh[2 * H + j]);
        hout[j] = (1.0 - z) * n + z * hprev[j];
    }
}

void Gru::backward(const Cache& cache, const Seq& dhs, Seq& dxs, std::vector<double>& dh0) {
    const std::size_t T = cache.x.size();
    const int H = hidden;
    dxs.assign(T, std::vector<double>(in, 0.0));
    dh0.assign(H, 0.0);

    std::vector<double> carry(H, 0.0);  // gradient flowing into h_t from t+1
    std::vector<double> dgi(3 * H), dgh(3 * H), dh(H);

    for (std::size_t ti = T; ti-- > 0;) {
        for (int j = 0; j < H; ++j) dh[j] = dhs[ti][j] + carry[j];
        const auto& r = cache.r[ti];
        const auto& z = cache.z[ti];
        const auto& n = cache.n[ti];
        const auto& ghn = cache.ghn[ti];
        const auto& hprev = cache.hprev[ti];

        for (int j = 0; j < H; ++j) {
            const double dn = dh[j] * (1.0 - z[j]);
            const double dz = dh[j] * (hprev[j] - n[j]);
            carry[j] = dh[j] * z[j];

            const double dan = dn * (1.0 - n[j] * n[j]);  // pre-tanh
            const double dghn = dan * r[j];
            const double dr = dan * ghn[j];
            const double dar = dr * r[j] * (1.0 - r[j]);      // pre-sigmoid r
            const double daz = dz * z[j] * (1.0 - z[j]);      // pre-sigmoid z

            dgi[j] = dar;
            dgi[H + j] = daz;
            dgi[2 * H + j] = dan;
            dgh[j] = dar;
            dgh[H + j] = daz;
            dgh[2 * H + j] = dghn;
        }

        kernels::ger_acc(w_ih.g.data(), dgi.data(), cache.x[ti].data(), 3 * H, in);
        kernels::ger_acc(w_hh.g.data(), dgh.data(), hprev.data(), 3 * H, H);
        for (int j = 0; j < 3 * H; ++j) {
            b_ih.g[j] += dgi[j];
            b_hh.g[j] += dgh[j];
        }
        kernels::matvec_t_acc(w_ih.v.data(), dgi.data(), dxs[ti].data(), 3 * H, in);
        kernels::matvec_t_acc(w_hh.v.data(), dgh.data(), carry.data(), 3 * H, H);
    }
    dh0 = carry;
}

}  // namespace eqdisc::vae::detail
