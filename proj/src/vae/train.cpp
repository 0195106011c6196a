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

#include <algorithm>
#include <cmath>
#include <limits>

#include "eqdisc/kernels.hpp"
#include "vae_impl.hpp"

namespace eqdisc::vae {

namespace {

// Per-tensor optimizer state; the update rules follow the standard published
// forms of each algorithm.
struct OptimizerState {
    std::vector<std::vector<double>> m1;  // Adam first moment / Adadelta E[dx^2]
    std::vector<std::vector<double>> m2;  // squared-gradient accumulator
    long step = 0;
};

constexpr double kRmsDecay = 0.99;
constexpr double kRmsEps = 1e-8;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kAdadeltaRho = 0.9;
constexpr double kAdadeltaEps = 1e-6;

void optimizer_step(std::vector<ParamRef>& params, OptimizerState& state, Optimizer opt,
                    double lr, double grad_scale, double grad_clip) {
    if (state.m2.empty()) {
        state.m1.resize(params.size());
        state.m2.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m1[i].assign(params[i].tensor->size(), 0.0);
            state.m2[i].assign(params[i].tensor->size(), 0.0);
        }
    }
    ++state.step;

    double clip_scale = 1.0;
    if (grad_clip > 0) {
        double sq = 0.0;
        for (auto& p : params) {
            const auto& g = p.tensor->g;
            sq += kernels::dot(g.data(), g.data(), g.size()) * grad_scale * grad_scale;
        }
        const double norm = std::sqrt(sq);
        if (norm > grad_clip) clip_scale = grad_clip / norm;
    }
    const double scale = grad_scale * clip_scale;

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& t = *params[i].tensor;
        std::vector<double>& m1 = state.m1[i];
        std::vector<double>& m2 = state.m2[i];
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double g = t.g[k] * scale;
            switch (opt) {
                case Optimizer::RMSprop: {
                    m2[k] = kRmsDecay * m2[k] + (1.0 - kRmsDecay) * g * g;
                    t.v[k] -= lr * g / (std::sqrt(m2[k]) + kRmsEps);
                    break;
                }
                case Optimizer::Adam: {
                    m1[k] = kAdamBeta1 * m1[k] + (1.0 - kAdamBeta1) * g;
                    m2[k] = kAdamBeta2 * m2[k] + (1.0 - kAdamBeta2) * g * g;
                    const double mhat = m1[k] / (1.0 - std::pow(kAdamBeta1, double(state.step)));
                    const double vhat = m2[k] / (1.0 - std::pow(kAdamBeta2, double(state.step)));
                    t.v[k] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
                    break;
                }
                case Optimizer::Adadelta: {
                    m2[k] = kAdadeltaRho * m2[k] + (1.0 - kAdadeltaRho) * g * g;
                    const double dx = -std::sqrt(m1[k] + kAdadeltaEps) /
                                      std::sqrt(m2[k] + kAdadeltaEps) * g;
                    m1[k] = kAdadeltaRho * m1[k] + (1.0 - kAdadeltaRho) * dx * dx;
                    t.v[k] += lr * dx;
                    break;
                }
            }
        }
    }
}

std::vector<std::vector<double>> snapshot_params(std::vector<ParamRef>& params) {
    std::vector<std::vector<double>> snap;
    snap.reserve(params.size());
    for (auto& p : params) snap.push_back(p.tensor->v);
    return snap;
}

void restore_params(std::vector<ParamRef>& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor->v = snap[i];
}

}  // namespace

std::pair<VaeModel, TrainReport> train(const VaeConfig& cfg, const std::vector<std::string>& corpus,
                                       const TrainOptions& opts) {
    cfg.check();
    if (corpus.empty()) throw CorpusEmpty("training corpus is empty");

    std::vector<std::vector<int>> sequences;
    sequences.reserve(corpus.size());
    for (const auto& s : corpus) {
        sequences.push_back(tokenize(s));
        if (static_cast<int>(sequences.back().size()) > cfg.max_len)
            throw SequenceTooLong("corpus string exceeds max_len: " + s);
    }

    VaeModel model(cfg);
    std::vector<ParamRef> params = model.parameters();
    OptimizerState opt_state;

    Rng rng = Rng(cfg.seed).fork(0x747261696eULL);  // "train"
    const int max_epochs = std::min(opts.max_epochs, 150);

    TrainReport report;
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_snapshot = snapshot_params(params);
    int bad_epochs = 0;

    std::vector<std::size_t> order(sequences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> noise(cfg.latent_dim);

    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        // Fisher-Yates shuffle from the training stream.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);

        double epoch_recon = 0.0, epoch_kl = 0.0;
        std::size_t done = 0;
        while (done < order.size()) {
            const std::size_t batch = std::min<std::size_t>(cfg.n_batch, order.size() - done);
            model.zero_grad();
            for (std::size_t b = 0; b < batch; ++b) {
                const auto& tokens = sequences[order[done + b]];
                for (auto& v : noise) v = rng.normal();
                const VaeModel::SeqLoss l =
                    model.impl_->run(tokens, noise, /*do_backward=*/true, &rng);
                epoch_recon += l.recon;
                epoch_kl += l.kl;
            }
            optimizer_step(params, opt_state, cfg.optimizer, cfg.learning_rate, 1.0 / double(batch),
                           opts.grad_clip);
            done += batch;
        }

        EpochStats stats;
        stats.recon = epoch_recon / double(sequences.size());
        stats.kl = epoch_kl / double(sequences.size());
        stats.total = stats.recon + stats.kl;
        if (!std::isfinite(stats.total))
            throw NonFiniteLoss(epoch, "training loss became non-finite at epoch " +
                                           std::to_string(epoch));
        if (opts.uve_samples > 0 && opts.uve_every > 0 && epoch % opts.uve_every == 0) {
            const auto samples =
                model.sample(opts.uve_samples, Rng(cfg.seed).fork(0x757665ULL + epoch).seed());
            stats.uve = uve(samples, corpus);
        }
        report.epochs.push_back(stats);
        report.early_stop_epoch = epoch;

        if (stats.total < best_total - opts.min_delta) {
            best_total = stats.total;
            report.best_epoch = epoch;
            best_snapshot = snapshot_params(params);
            bad_epochs = 0;
        } else if (++bad_epochs >= opts.patience) {
            break;
        }
    }

    restore_params(params, best_snapshot);
    const EpochStats& best = report.epochs[report.best_epoch - 1];
    report.final_recon = best.recon;
    report.final_kl = best.kl;
    report.final_total = best.total;
    if (opts.uve_samples > 0) {
        const auto samples = model.sample(opts.uve_samples, Rng(cfg.seed).fork(0x757665ULL).seed());
        report.final_uve = uve(samples, corpus);
    }
    return {std::move(model), std::move(report)};
}

}  // namespace eqdisc::vae
