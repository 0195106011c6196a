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

#include "eqdisc/vae.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "eqdisc/expr.hpp"
#include "eqdisc/kernels.hpp"
#include "gru.hpp"
#include "vae_impl.hpp"

namespace eqdisc::vae {

using detail::Gru;
using detail::Seq;

namespace {

constexpr char kAlphabet[] = {'Z', 'C', 'a', 'o', '(', ')', ' '};

int char_to_token(char c) {
    for (int i = 0; i < 7; ++i)
        if (kAlphabet[i] == c) return 3 + i;
    return -1;
}

Tensor make_tensor(int rows, int cols, double bound, Rng& rng) {
    Tensor t;
    t.rows = rows;
    t.cols = cols;
    t.v.resize(std::size_t(rows) * cols);
    t.g.assign(t.v.size(), 0.0);
    for (auto& x : t.v) x = rng.uniform(-bound, bound);
    return t;
}

void softmax_inplace(std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

}  // namespace

std::string_view optimizer_name(Optimizer o) {
    switch (o) {
        case Optimizer::Adam: return "adam";
        case Optimizer::Adadelta: return "adadelta";
        default: return "rmsprop";
    }
}

std::vector<int> tokenize(std::string_view text) {
    std::vector<int> out;
    out.reserve(text.size() + 2);
    out.push_back(kSos);
    for (char c : text) {
        const int id = char_to_token(c);
        if (id < 0) throw UnknownToken(std::string("character '") + c + "' is not in the vocabulary");
        out.push_back(id);
    }
    out.push_back(kEos);
    return out;
}

std::string detokenize(std::span<const int> tokens) {
    std::string out;
    for (int id : tokens)
        if (id >= 3 && id < kVocabSize) out += kAlphabet[id - 3];
    return out;
}

void VaeConfig::check() const {
    if (enc_hidden <= 0 || dec_hidden <= 0 || enc_layers <= 0 || dec_layers <= 0 ||
        latent_dim <= 0 || max_len < 2 || embed_dim <= 0 || n_batch <= 0)
        throw InvalidConfig("all model dimensions must be positive");
    if (enc_dropout < 0 || enc_dropout >= 1 || dec_dropout < 0 || dec_dropout >= 1)
        throw InvalidConfig("dropout rates must lie in [0, 1)");
    if (learning_rate <= 0) throw InvalidConfig("learning rate must be positive");
}

double kl_divergence(std::span<const double> mu, std::span<const double> sigma) {
    if (mu.size() != sigma.size()) throw Error("mu and sigma dimensions differ");
    double acc = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        if (!(sigma[j] > 0.0)) throw NonPositiveSigma("sigma must be positive");
        const double s2 = sigma[j] * sigma[j];
        acc += 1.0 + std::log(s2) - mu[j] * mu[j] - s2;
    }
    return -0.5 * acc;
}

// ---- Impl ----

VaeModel::Impl::Impl(const VaeConfig& cfg) : cfg(cfg) {
    cfg.check();
    Rng rng = Rng(cfg.seed).fork(0x696e6974ULL);  // "init"

    embedding = make_tensor(kVocabSize, cfg.embed_dim, 0.1, rng);

    const int edirs = dirs(cfg.enc_layers);
    enc.resize(std::size_t(cfg.enc_layers) * edirs);
    for (int l = 0; l < cfg.enc_layers; ++l) {
        const int in = l == 0 ? cfg.embed_dim : cfg.enc_hidden * edirs;
        for (int d = 0; d < edirs; ++d) enc[std::size_t(l) * edirs + d].init(in, cfg.enc_hidden, rng);
    }

    const int enc_feat = cfg.enc_layers * edirs * cfg.enc_hidden;
    const double head_bound = 1.0 / std::sqrt(double(enc_feat));
    w_mu = make_tensor(cfg.latent_dim, enc_feat, head_bound, rng);
    b_mu = make_tensor(cfg.latent_dim, 1, head_bound, rng);
    w_logvar = make_tensor(cfg.latent_dim, enc_feat, head_bound, rng);
    b_logvar = make_tensor(cfg.latent_dim, 1, head_bound, rng);

    const int ddirs = dirs(cfg.dec_layers);
    const int h0_dim = cfg.dec_layers * ddirs * cfg.dec_hidden;
    const double z_bound = 1.0 / std::sqrt(double(cfg.latent_dim));
    w_z2h = make_tensor(h0_dim, cfg.latent_dim, z_bound, rng);
    b_z2h = make_tensor(h0_dim, 1, z_bound, rng);

    dec.resize(std::size_t(cfg.dec_layers) * ddirs);
    for (int l = 0; l < cfg.dec_layers; ++l) {
        const int in = l == 0 ? cfg.embed_dim + cfg.latent_dim : cfg.dec_hidden * ddirs;
        for (int d = 0; d < ddirs; ++d) dec[std::size_t(l) * ddirs + d].init(in, cfg.dec_hidden, rng);
    }

    const int dec_feat = cfg.dec_hidden * ddirs;
    w_out = make_tensor(kVocabSize, dec_feat, 1.0 / std::sqrt(double(dec_feat)), rng);
    b_out = make_tensor(kVocabSize, 1, 1.0 / std::sqrt(double(dec_feat)), rng);
}

std::vector<ParamRef> VaeModel::Impl::parameters() {
    std::vector<ParamRef> out;
    out.push_back({"embedding", &embedding});
    const int edirs = dirs(cfg.enc_layers);
    for (int l = 0; l < cfg.enc_layers; ++l) {
        for (int d = 0; d < edirs; ++d) {
            const std::string base =
                "enc." + std::to_string(l) + (d == 0 ? ".f" : ".b");
            Gru& g = enc[std::size_t(l) * edirs + d];
            out.push_back({base + ".w_ih", &g.w_ih});
            out.push_back({base + ".w_hh", &g.w_hh});
            out.push_back({base + ".b_ih", &g.b_ih});
            out.push_back({base + ".b_hh", &g.b_hh});
        }
    }
    out.push_back({"latent.w_mu", &w_mu});
    out.push_back({"latent.b_mu", &b_mu});
    out.push_back({"latent.w_logvar", &w_logvar});
    out.push_back({"latent.b_logvar", &b_logvar});
    out.push_back({"latent.w_z2h", &w_z2h});
    out.push_back({"latent.b_z2h", &b_z2h});
    const int ddirs = dirs(cfg.dec_layers);
    for (int l = 0; l < cfg.dec_layers; ++l) {
        for (int d = 0; d < ddirs; ++d) {
            const std::string base =
                "dec." + std::to_string(l) + (d == 0 ? ".f" : ".b");
            Gru& g = dec[std::size_t(l) * ddirs + d];
            out.push_back({base + ".w_ih", &g.w_ih});
            out.push_back({base + ".w_hh", &g.w_hh});
            out.push_back({base + ".b_ih", &g.b_ih});
            out.push_back({base + ".b_hh", &g.b_hh});
        }
    }
    out.push_back({"out.w", &w_out});
    out.push_back({"out.b", &b_out});
    return out;
}

namespace {

struct LayerPass {
    Gru::Cache fwd, bwd;
    Seq mask;  // inverted-dropout mask on the layer output (empty: none)
};

struct StackResult {
    Seq features;                 // top-layer output, T x hidden*dirs
    std::vector<double> finals;   // concat of per-layer/dir final states
    std::vector<LayerPass> caches;
};

// Runs a (bi)directional stack. h0_all supplies per-layer/dir initial states
// (layer-major, direction-minor) or is empty for zeros. dropout_rng == null
// disables dropout.
StackResult run_stack(const std::vector<Gru>& layers, int n_layers, int hidden, const Seq& inputs,
                      std::span<const double> h0_all, double dropout, Rng* dropout_rng,
                      bool want_cache) {
    const int ndirs = n_layers > 1 ? 2 : 1;
    const std::size_t T = inputs.size();
    StackResult res;
    if (want_cache) res.caches.resize(n_layers);

    Seq layer_in = inputs;
    for (int l = 0; l < n_layers; ++l) {
        const Gru& gf = layers[std::size_t(l) * ndirs];
        Gru::Cache* cf = want_cache ? &res.caches[l].fwd : nullptr;

        const double* h0f = h0_all.empty() ? nullptr : h0_all.data() + (l * ndirs) * hidden;
        Seq hf;
        gf.forward(layer_in, h0f, hf, cf);

        Seq out(T, std::vector<double>(std::size_t(hidden) * ndirs, 0.0));
        Seq hb;
        if (ndirs == 2) {
            Seq rev(T);
            for (std::size_t t = 0; t < T; ++t) rev[t] = layer_in[T - 1 - t];
            const Gru& gb = layers[std::size_t(l) * ndirs + 1];
            Gru::Cache* cb = want_cache ? &res.caches[l].bwd : nullptr;
            const double* h0b = h0_all.empty() ? nullptr : h0_all.data() + (l * ndirs + 1) * hidden;
            gb.forward(rev, h0b, hb, cb);
        }
        for (std::size_t t = 0; t < T; ++t) {
            std::copy(hf[t].begin(), hf[t].end(), out[t].begin());
            if (ndirs == 2)
                std::copy(hb[T - 1 - t].begin(), hb[T - 1 - t].end(), out[t].begin() + hidden);
        }

        // Final states (raw, pre-dropout).
        res.finals.insert(res.finals.end(), hf.back().begin(), hf.back().end());
        if (ndirs == 2) res.finals.insert(res.finals.end(), hb.back().begin(), hb.back().end());

        // Inter-layer dropout (inverted scaling), never after the last layer.
        if (l < n_layers - 1 && dropout > 0.0 && dropout_rng) {
            Seq mask(T, std::vector<double>(out[0].size(), 0.0));
            const double keep = 1.0 - dropout;
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t k = 0; k < out[t].size(); ++k) {
                    mask[t][k] = dropout_rng->uniform() < dropout ? 0.0 : 1.0 / keep;
                    out[t][k] *= mask[t][k];
                }
            if (want_cache) res.caches[l].mask = std::move(mask);
        }
        layer_in = std::move(out);
    }
    res.features = std::move(layer_in);
    return res;
}

// Backward through the stack. d_features is the gradient on the top-layer
// output; d_finals (may be empty) adds gradients on the per-layer final
// states. Returns the gradient on the stack input; d_h0_all (sized on
// entry or empty) receives initial-state gradients.
Seq stack_backward(std::vector<Gru>& layers, int n_layers, int hidden,
                   std::vector<LayerPass>& caches, Seq d_features,
                   std::span<const double> d_finals, std::vector<double>* d_h0_all) {
    const int ndirs = n_layers > 1 ? 2 : 1;
    const std::size_t T = d_features.size();

    Seq dlayer = std::move(d_features);
    for (int l = n_layers - 1; l >= 0; --l) {
        // Undo the inter-layer dropout applied to this layer's output.
        if (!caches[l].mask.empty())
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t k = 0; k < dlayer[t].size(); ++k)
                    dlayer[t][k] *= caches[l].mask[t][k];

        Seq dhf(T, std::vector<double>(hidden, 0.0));
        Seq dhb(T, std::vector<double>(hidden, 0.0));
        for (std::size_t t = 0; t < T; ++t) {
            for (int j = 0; j < hidden; ++j) dhf[t][j] = dlayer[t][j];
            if (ndirs == 2)
                for (int j = 0; j < hidden; ++j) dhb[T - 1 - t][j] = dlayer[t][hidden + j];
        }
        if (!d_finals.empty()) {
            const double* df = d_finals.data() + (std::size_t(l) * ndirs) * hidden;
            for (int j = 0; j < hidden; ++j) dhf[T - 1][j] += df[j];
            if (ndirs == 2) {
                const double* db = d_finals.data() + (std::size_t(l) * ndirs + 1) * hidden;
                for (int j = 0; j < hidden; ++j) dhb[T - 1][j] += db[j];
            }
        }

        Seq dxf, dxb;
        std::vector<double> dh0f, dh0b;
        layers[std::size_t(l) * ndirs].backward(caches[l].fwd, dhf, dxf, dh0f);
        if (ndirs == 2) layers[std::size_t(l) * ndirs + 1].backward(caches[l].bwd, dhb, dxb, dh0b);

        if (d_h0_all && !d_h0_all->empty()) {
            double* base = d_h0_all->data() + (std::size_t(l) * ndirs) * hidden;
            for (int j = 0; j < hidden; ++j) base[j] += dh0f[j];
            if (ndirs == 2) {
                double* bb = d_h0_all->data() + (std::size_t(l) * ndirs + 1) * hidden;
                for (int j = 0; j < hidden; ++j) bb[j] += dh0b[j];
            }
        }

        Seq dprev(T, std::vector<double>(dxf[0].size(), 0.0));
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t k = 0; k < dprev[t].size(); ++k) dprev[t][k] = dxf[t][k];
            if (ndirs == 2)
                for (std::size_t k = 0; k < dprev[t].size(); ++k) dprev[t][k] += dxb[T - 1 - t][k];
        }
        dlayer = std::move(dprev);
    }
    return dlayer;
}

}  // namespace

void VaeModel::Impl::check_tokens(std::span<const int> tokens) const {
    if (static_cast<int>(tokens.size()) > cfg.max_len)
        throw SequenceTooLong("sequence of " + std::to_string(tokens.size()) +
                              " tokens exceeds max_len " + std::to_string(cfg.max_len));
    if (tokens.size() < 2) throw Error("sequence must contain at least SOS and EOS");
    for (int id : tokens)
        if (id < 0 || id >= kVocabSize) throw UnknownToken("token id out of range");
}

Seq VaeModel::Impl::embed(std::span<const int> tokens) const {
    Seq out(tokens.size(), std::vector<double>(cfg.embed_dim, 0.0));
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const double* row = embedding.v.data() + std::size_t(tokens[t]) * cfg.embed_dim;
        std::copy(row, row + cfg.embed_dim, out[t].begin());
    }
    return out;
}

VaeModel::EncodeResult VaeModel::Impl::encode(std::span<const int> tokens,
                                              std::span<const double> noise) const {
    check_tokens(tokens);
    if (static_cast<int>(noise.size()) != cfg.latent_dim)
        throw Error("noise dimension must equal latent_dim");

    const Seq inputs = embed(tokens);
    StackResult enc_pass = run_stack(enc, cfg.enc_layers, cfg.enc_hidden, inputs, {}, 0.0, nullptr,
                                     /*want_cache=*/false);

    VaeModel::EncodeResult res;
    res.mu.resize(cfg.latent_dim);
    res.sigma.resize(cfg.latent_dim);
    res.z.resize(cfg.latent_dim);
    std::vector<double> logvar(cfg.latent_dim);
    kernels::matvec(w_mu.v.data(), enc_pass.finals.data(), res.mu.data(), cfg.latent_dim,
                    w_mu.cols);
    kernels::matvec(w_logvar.v.data(), enc_pass.finals.data(), logvar.data(), cfg.latent_dim,
                    w_logvar.cols);
    for (int j = 0; j < cfg.latent_dim; ++j) {
        res.mu[j] += b_mu.v[j];
        logvar[j] += b_logvar.v[j];
        res.sigma[j] = std::exp(0.5 * logvar[j]);
        res.z[j] = noise[j] * res.sigma[j] + res.mu[j];
    }
    return res;
}

VaeModel::SeqLoss VaeModel::Impl::run(std::span<const int> tokens, std::span<const double> noise,
                                      bool do_backward, Rng* dropout_rng) {
    check_tokens(tokens);
    if (static_cast<int>(noise.size()) != cfg.latent_dim)
        throw Error("noise dimension must equal latent_dim");

    const int L = cfg.latent_dim;
    const std::size_t T = tokens.size();
    const std::size_t dec_T = T - 1;

    // ---- Encoder ----
    const Seq enc_in = embed(tokens);
    StackResult ep = run_stack(enc, cfg.enc_layers, cfg.enc_hidden, enc_in, {}, cfg.enc_dropout,
                               dropout_rng, do_backward);

    std::vector<double> mu(L), logvar(L), sigma(L), z(L);
    kernels::matvec(w_mu.v.data(), ep.finals.data(), mu.data(), L, w_mu.cols);
    kernels::matvec(w_logvar.v.data(), ep.finals.data(), logvar.data(), L, w_logvar.cols);
    double kl = 0.0;
    for (int j = 0; j < L; ++j) {
        mu[j] += b_mu.v[j];
        logvar[j] += b_logvar.v[j];
        sigma[j] = std::exp(0.5 * logvar[j]);
        z[j] = noise[j] * sigma[j] + mu[j];
        kl += 1.0 + logvar[j] - mu[j] * mu[j] - sigma[j] * sigma[j];
    }
    kl *= -0.5;

    // ---- Decoder (teacher forced) ----
    const int ddirs = dirs(cfg.dec_layers);
    const int h0_dim = cfg.dec_layers * ddirs * cfg.dec_hidden;
    std::vector<double> h0_pre(h0_dim), h0(h0_dim);
    kernels::matvec(w_z2h.v.data(), z.data(), h0_pre.data(), h0_dim, L);
    for (int j = 0; j < h0_dim; ++j) {
        h0_pre[j] += b_z2h.v[j];
        h0[j] = std::tanh(h0_pre[j]);
    }

    Seq dec_in(dec_T, std::vector<double>(cfg.embed_dim + L, 0.0));
    for (std::size_t t = 0; t < dec_T; ++t) {
        const double* row = embedding.v.data() + std::size_t(tokens[t]) * cfg.embed_dim;
        std::copy(row, row + cfg.embed_dim, dec_in[t].begin());
        std::copy(z.begin(), z.end(), dec_in[t].begin() + cfg.embed_dim);
    }

    StackResult dp = run_stack(dec, cfg.dec_layers, cfg.dec_hidden, dec_in, h0, cfg.dec_dropout,
                               dropout_rng, do_backward);

    // ---- Output projection + cross entropy ----
    double recon = 0.0;
    Seq dfeat;
    if (do_backward) dfeat.assign(dec_T, std::vector<double>(w_out.cols, 0.0));
    std::vector<double> logits(kVocabSize);
    for (std::size_t t = 0; t < dec_T; ++t) {
        kernels::matvec(w_out.v.data(), dp.features[t].data(), logits.data(), kVocabSize,
                        w_out.cols);
        for (int v = 0; v < kVocabSize; ++v) logits[v] += b_out.v[v];
        const int target = tokens[t + 1];
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        double lse = 0.0;
        for (double v : logits) lse += std::exp(v - mx);
        lse = mx + std::log(lse);
        recon += lse - logits[target];

        if (do_backward) {
            // d(CE)/d(logit) = softmax - onehot
            std::vector<double> dlogit(kVocabSize);
            for (int v = 0; v < kVocabSize; ++v) dlogit[v] = std::exp(logits[v] - lse);
            dlogit[target] -= 1.0;
            kernels::ger_acc(w_out.g.data(), dlogit.data(), dp.features[t].data(), kVocabSize,
                             w_out.cols);
            for (int v = 0; v < kVocabSize; ++v) b_out.g[v] += dlogit[v];
            kernels::matvec_t_acc(w_out.v.data(), dlogit.data(), dfeat[t].data(), kVocabSize,
                                  w_out.cols);
        }
    }

    VaeModel::SeqLoss out;
    out.recon = recon;
    out.kl = kl;
    if (!do_backward) return out;

    // ---- Backward ----
    std::vector<double> dh0_all(h0_dim, 0.0);
    Seq d_dec_in = stack_backward(dec, cfg.dec_layers, cfg.dec_hidden, dp.caches,
                                  std::move(dfeat), {}, &dh0_all);

    std::vector<double> dz(L, 0.0);
    for (std::size_t t = 0; t < dec_T; ++t) {
        double* erow = embedding.g.data() + std::size_t(tokens[t]) * cfg.embed_dim;
        for (int k = 0; k < cfg.embed_dim; ++k) erow[k] += d_dec_in[t][k];
        for (int j = 0; j < L; ++j) dz[j] += d_dec_in[t][cfg.embed_dim + j];
    }

    // h0 = tanh(w_z2h z + b_z2h)
    std::vector<double> da(h0_dim);
    for (int j = 0; j < h0_dim; ++j) da[j] = dh0_all[j] * (1.0 - h0[j] * h0[j]);
    kernels::ger_acc(w_z2h.g.data(), da.data(), z.data(), h0_dim, L);
    for (int j = 0; j < h0_dim; ++j) b_z2h.g[j] += da[j];
    kernels::matvec_t_acc(w_z2h.v.data(), da.data(), dz.data(), h0_dim, L);

    // z = mu + noise . exp(logvar / 2); KL adds mu and (sigma^2 - 1)/2 terms.
    std::vector<double> dmu(L), dlogvar(L);
    for (int j = 0; j < L; ++j) {
        dmu[j] = dz[j] + mu[j];
        dlogvar[j] = dz[j] * 0.5 * noise[j] * sigma[j] + 0.5 * (sigma[j] * sigma[j] - 1.0);
    }

    std::vector<double> dfinals(ep.finals.size(), 0.0);
    kernels::ger_acc(w_mu.g.data(), dmu.data(), ep.finals.data(), L, w_mu.cols);
    kernels::ger_acc(w_logvar.g.data(), dlogvar.data(), ep.finals.data(), L, w_logvar.cols);
    for (int j = 0; j < L; ++j) {
        b_mu.g[j] += dmu[j];
        b_logvar.g[j] += dlogvar[j];
    }
    kernels::matvec_t_acc(w_mu.v.data(), dmu.data(), dfinals.data(), L, w_mu.cols);
    kernels::matvec_t_acc(w_logvar.v.data(), dlogvar.data(), dfinals.data(), L, w_logvar.cols);

    const int edirs = dirs(cfg.enc_layers);
    Seq d_enc_top(T, std::vector<double>(std::size_t(cfg.enc_hidden) * edirs, 0.0));
    Seq d_enc_in = stack_backward(enc, cfg.enc_layers, cfg.enc_hidden, ep.caches,
                                  std::move(d_enc_top), dfinals, nullptr);
    for (std::size_t t = 0; t < T; ++t) {
        double* erow = embedding.g.data() + std::size_t(tokens[t]) * cfg.embed_dim;
        for (int k = 0; k < cfg.embed_dim; ++k) erow[k] += d_enc_in[t][k];
    }
    return out;
}

std::string VaeModel::Impl::decode_greedy(std::span<const double> z, double temperature,
                                          Rng* rng) const {
    if (static_cast<int>(z.size()) != cfg.latent_dim) throw Error("latent dimension mismatch");
    const int ddirs = dirs(cfg.dec_layers);
    const int H = cfg.dec_hidden;
    const int h0_dim = cfg.dec_layers * ddirs * H;

    std::vector<double> h0(h0_dim);
    kernels::matvec(w_z2h.v.data(), z.data(), h0.data(), h0_dim, cfg.latent_dim);
    for (int j = 0; j < h0_dim; ++j) h0[j] = std::tanh(h0[j] + b_z2h.v[j]);

    // Forward-direction states only: autoregressive decoding is causal, so a
    // bidirectional decoder contributes zeros for its backward features.
    std::vector<std::vector<double>> h(cfg.dec_layers);
    for (int l = 0; l < cfg.dec_layers; ++l)
        h[l].assign(h0.begin() + std::size_t(l) * ddirs * H, h0.begin() + std::size_t(l) * ddirs * H + H);

    std::string out;
    int prev = kSos;
    std::vector<double> input(cfg.embed_dim + cfg.latent_dim);
    std::vector<double> next_in(std::size_t(H) * ddirs, 0.0);
    std::vector<double> logits(kVocabSize);
    const int max_chars = cfg.max_len - 2;
    for (int step = 0; step < max_chars; ++step) {
        const double* row = embedding.v.data() + std::size_t(prev) * cfg.embed_dim;
        std::copy(row, row + cfg.embed_dim, input.begin());
        std::copy(z.begin(), z.end(), input.begin() + cfg.embed_dim);

        const double* layer_in = input.data();
        for (int l = 0; l < cfg.dec_layers; ++l) {
            std::vector<double> hnew(H);
            dec[std::size_t(l) * ddirs].step(layer_in, h[l].data(), hnew.data());
            h[l] = std::move(hnew);
            std::fill(next_in.begin(), next_in.end(), 0.0);
            std::copy(h[l].begin(), h[l].end(), next_in.begin());
            layer_in = next_in.data();
        }

        kernels::matvec(w_out.v.data(), layer_in, logits.data(), kVocabSize, w_out.cols);
        for (int v = 0; v < kVocabSize; ++v) logits[v] += b_out.v[v];

        int next;
        if (temperature > 0.0 && rng) {
            for (double& v : logits) v /= temperature;
            softmax_inplace(logits);
            double u = rng->uniform();
            next = kVocabSize - 1;
            for (int v = 0; v < kVocabSize; ++v) {
                if (u < logits[v]) {
                    next = v;
                    break;
                }
                u -= logits[v];
            }
        } else {
            next = 0;
            for (int v = 1; v < kVocabSize; ++v)
                if (logits[v] > logits[next]) next = v;
        }
        if (next == kEos || next == kSos || next == kPad) break;
        out += kAlphabet[next - 3];
        prev = next;
    }
    return out;
}

// ---- VaeModel facade ----

VaeModel::VaeModel(const VaeConfig& cfg) : cfg_(cfg), impl_(std::make_unique<Impl>(cfg)) {}
VaeModel::VaeModel(const VaeModel& other) : cfg_(other.cfg_), impl_(std::make_unique<Impl>(*other.impl_)) {}
VaeModel& VaeModel::operator=(const VaeModel& other) {
    if (this != &other) {
        cfg_ = other.cfg_;
        impl_ = std::make_unique<Impl>(*other.impl_);
    }
    return *this;
}
VaeModel::VaeModel(VaeModel&&) noexcept = default;
VaeModel& VaeModel::operator=(VaeModel&&) noexcept = default;
VaeModel::~VaeModel() = default;

VaeModel::EncodeResult VaeModel::encode(std::span<const int> tokens,
                                        std::span<const double> noise) const {
    return impl_->encode(tokens, noise);
}

VaeModel::EncodeResult VaeModel::encode_text(std::string_view text,
                                             std::span<const double> noise) const {
    const std::vector<int> tokens = tokenize(text);
    return impl_->encode(tokens, noise);
}

std::string VaeModel::decode_greedy(std::span<const double> z) const {
    return impl_->decode_greedy(z, 0.0, nullptr);
}

std::vector<std::string> VaeModel::sample(int count, std::uint64_t seed,
                                          double temperature) const {
    if (count < 1) throw Error("sample count must be positive");
    Rng rng(seed);
    std::vector<std::string> out;
    out.reserve(count);
    std::vector<double> z(cfg_.latent_dim);
    for (int i = 0; i < count; ++i) {
        for (auto& v : z) v = rng.normal();
        out.push_back(impl_->decode_greedy(z, temperature, &rng));
    }
    return out;
}

VaeModel::SeqLoss VaeModel::loss(std::span<const int> tokens,
                                 std::span<const double> noise) const {
    // Forward-only: no gradient buffer is touched and dropout is off.
    return const_cast<Impl*>(impl_.get())->run(tokens, noise, /*do_backward=*/false, nullptr);
}

VaeModel::SeqLoss VaeModel::loss_backward(std::span<const int> tokens,
                                          std::span<const double> noise) {
    return impl_->run(tokens, noise, /*do_backward=*/true, nullptr);
}

void VaeModel::zero_grad() {
    for (auto& p : impl_->parameters()) std::fill(p.tensor->g.begin(), p.tensor->g.end(), 0.0);
}

std::vector<ParamRef> VaeModel::parameters() { return impl_->parameters(); }

std::size_t VaeModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : const_cast<Impl*>(impl_.get())->parameters()) n += p.tensor->size();
    return n;
}

int uve(const std::vector<std::string>& samples, const std::vector<std::string>& corpus) {
    std::unordered_set<std::string> corpus_set(corpus.begin(), corpus.end());
    std::unordered_set<std::string> seen;
    int count = 0;
    for (const auto& s : samples) {
        if (!seen.insert(s).second) continue;
        if (!expr::validate(s)) continue;
        if (corpus_set.count(s)) continue;
        // Compare canonicalized, matching how corpus entries are stored.
        if (corpus_set.count(expr::parse_structure(s).text())) continue;
        ++count;
    }
    return count;
}

}  // namespace eqdisc::vae
