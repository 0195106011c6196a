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

#include "eqdisc/bgs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "eqdisc/kernels.hpp"
#include "eqdisc/metrics.hpp"

namespace eqdisc::bgs {

namespace {

void check_params(const BgsParams& p) {
    if (p.slots < 2) throw Error("model needs at least 2 histogram slots");
    if (p.match_threshold <= 0 || p.match_threshold >= 1 ||
        p.background_mass <= 0 || p.background_mass >= 1 ||
        p.histogram_lr <= 0 || p.histogram_lr >= 1 || p.weight_lr <= 0 || p.weight_lr >= 1)
        throw Error("thresholds and learning rates must lie in (0, 1)");
    if (p.stride < 1) throw Error("stride must be positive");
}

}  // namespace

SceneModel SceneModel::init(std::span<const GrayImage> bootstrap_frames, const expr::Equation& eq,
                            const lbp::LbpConfig& cfg, const BgsParams& params) {
    if (bootstrap_frames.empty()) throw EmptySequence("bootstrap needs at least one frame");
    check_params(params);

    SceneModel m;
    m.width_ = bootstrap_frames[0].width;
    m.height_ = bootstrap_frames[0].height;
    m.cfg_ = cfg;
    m.params_ = params;
    m.eq_.emplace_back(eq);
    m.margin_ = static_cast<int>(std::ceil(cfg.radius)) + cfg.region_radius;
    m.bins_ = std::size_t{1} << cfg.neighbors;

    const int innerw = m.width_ - 2 * m.margin_;
    const int innerh = m.height_ - 2 * m.margin_;
    if (innerw <= 0 || innerh <= 0) throw Error("frame too small for the histogram window");
    m.grid_w_ = (innerw + params.stride - 1) / params.stride;
    m.grid_h_ = (innerh + params.stride - 1) / params.stride;

    const std::size_t npix = std::size_t(m.grid_w_) * m.grid_h_;
    m.hists_.assign(npix * params.slots * m.bins_, 0.0);
    m.weights_.assign(npix * params.slots, 0.0);

    // Slot 1 takes the first frame's histogram at full weight; the remaining
    // slots stay empty (a zero histogram cannot win a match) until a
    // no-match replacement fills them.
    const lbp::CodeImage codes = lbp::compute_codes(bootstrap_frames[0], m.eq_[0], cfg);
    for (int gy = 0; gy < m.grid_h_; ++gy) {
        for (int gx = 0; gx < m.grid_w_; ++gx) {
            const int x = m.margin_ + gx * params.stride;
            const int y = m.margin_ + gy * params.stride;
            const lbp::Histogram h = lbp::region_histogram(codes, x, y, cfg);
            const std::size_t pi = std::size_t(gy) * m.grid_w_ + gx;
            std::copy(h.bins.begin(), h.bins.end(), m.hists_.begin() + pi * params.slots * m.bins_);
            m.weights_[pi * params.slots] = 1.0;
        }
    }

    for (std::size_t f = 1; f < bootstrap_frames.size(); ++f) {
        if (bootstrap_frames[f].width != m.width_ || bootstrap_frames[f].height != m.height_)
            throw DimensionMismatch("bootstrap frame dimensions differ");
        m.update_all(bootstrap_frames[f], nullptr, 1);
    }
    return m;
}

std::uint8_t SceneModel::update_pixel(std::size_t model_index, const lbp::CodeImage& codes, int x,
                                      int y) {
    const int K = params_.slots;
    double* w = &weights_[model_index * K];
    double* hist_base = &hists_[model_index * K * bins_];

    const lbp::Histogram h = lbp::region_histogram(codes, x, y, cfg_);

    int best = 0;
    double best_val = -1.0;
    for (int s = 0; s < K; ++s) {
        const double v =
            kernels::sum_min(h.bins.data(), hist_base + std::size_t(s) * bins_, bins_);
        if (v > best_val) {
            best_val = v;
            best = s;
        }
    }

    bool matched_background = false;
    int matched_slot;
    if (best_val < params_.match_threshold) {
        // No match: the least persistent histogram is replaced by the frame
        // histogram at a small weight.
        int lowest = 0;
        for (int s = 1; s < K; ++s)
            if (w[s] < w[lowest]) lowest = s;
        std::copy(h.bins.begin(), h.bins.end(), hist_base + std::size_t(lowest) * bins_);
        w[lowest] = params_.replacement_weight;
        matched_slot = lowest;
    } else {
        double* m = hist_base + std::size_t(best) * bins_;
        kernels::axpby(params_.histogram_lr, h.bins.data(), 1.0 - params_.histogram_lr, m, bins_);
        for (int s = 0; s < K; ++s)
            w[s] = (1.0 - params_.weight_lr) * w[s] + (s == best ? params_.weight_lr : 0.0);
        matched_slot = best;
    }

    // Renormalize and order slots by descending weight (stable on ties).
    const double total = kernels::sum(w, K);
    if (total > 0) kernels::scale(w, 1.0 / total, K);

    int order[32];
    std::iota(order, order + K, 0);
    std::stable_sort(order, order + K, [&](int a, int b) { return w[a] > w[b]; });

    bool needs_permute = false;
    for (int s = 0; s < K; ++s)
        if (order[s] != s) needs_permute = true;
    int matched_pos = matched_slot;
    if (needs_permute) {
        double wtmp[32];
        std::vector<double> htmp(std::size_t(K) * bins_);
        for (int s = 0; s < K; ++s) {
            wtmp[s] = w[order[s]];
            std::copy(hist_base + std::size_t(order[s]) * bins_,
                      hist_base + std::size_t(order[s] + 1) * bins_,
                      htmp.begin() + std::size_t(s) * bins_);
            if (order[s] == matched_slot) matched_pos = s;
        }
        std::copy(wtmp, wtmp + K, w);
        std::copy(htmp.begin(), htmp.end(), hist_base);
    }

    if (best_val >= params_.match_threshold) {
        // Background slots: smallest prefix whose weight mass exceeds the
        // threshold. The matched slot is background iff it is in the prefix.
        double mass = 0.0;
        for (int s = 0; s < K; ++s) {
            mass += w[s];
            if (mass > params_.background_mass) {
                matched_background = matched_pos <= s;
                break;
            }
        }
    }
    return matched_background ? 0 : 1;
}

void SceneModel::update_all(const GrayImage& frame, ForegroundMask* mask, int threads) {
    const lbp::CodeImage codes = lbp::compute_codes(frame, eq_[0], cfg_, threads);

    auto work = [&](int gy0, int gy1) {
        for (int gy = gy0; gy < gy1; ++gy) {
            for (int gx = 0; gx < grid_w_; ++gx) {
                const int x = margin_ + gx * params_.stride;
                const int y = margin_ + gy * params_.stride;
                const std::uint8_t label =
                    update_pixel(std::size_t(gy) * grid_w_ + gx, codes, x, y);
                if (mask) {
                    // The label covers the stride block anchored at (x, y).
                    const int xe = std::min(x + params_.stride, width_ - margin_);
                    const int ye = std::min(y + params_.stride, height_ - margin_);
                    for (int my = y; my < ye; ++my)
                        for (int mx = x; mx < xe; ++mx) mask->at(mx, my) = label;
                }
            }
        }
    };

    if (threads <= 1) {
        work(0, grid_h_);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (grid_h_ + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int a = t * chunk, b = std::min(grid_h_, a + chunk);
            if (a >= b) break;
            pool.emplace_back(work, a, b);
        }
        for (auto& th : pool) th.join();
    }
}

ForegroundMask SceneModel::process_frame(const GrayImage& frame, int threads) {
    if (frame.width != width_ || frame.height != height_)
        throw DimensionMismatch("frame dimensions do not match the model");
    ForegroundMask mask(width_, height_, 0);  // borders stay background
    update_all(frame, &mask, threads);
    return mask;
}

std::vector<double> SceneModel::pixel_weights(int x, int y) const {
    const int gx = (x - margin_) / params_.stride;
    const int gy = (y - margin_) / params_.stride;
    const std::size_t pi = std::size_t(gy) * grid_w_ + gx;
    return {weights_.begin() + pi * params_.slots, weights_.begin() + (pi + 1) * params_.slots};
}

std::vector<double> SceneModel::pixel_histogram(int x, int y, int slot) const {
    const int gx = (x - margin_) / params_.stride;
    const int gy = (y - margin_) / params_.stride;
    const std::size_t pi = std::size_t(gy) * grid_w_ + gx;
    const double* base = &hists_[(pi * params_.slots + slot) * bins_];
    return {base, base + bins_};
}

int default_bootstrap_count(std::size_t frame_count) {
    return std::max<int>(5, static_cast<int>(frame_count / 10));
}

dataset::EvalRecord evaluate_equation_with_masks(const expr::Equation& eq,
                                                 std::span<const GrayImage> frames,
                                                 std::span<const ByteImage> gts,
                                                 const lbp::LbpConfig& cfg, const BgsParams& params,
                                                 const EvalOptions& opts,
                                                 std::vector<ForegroundMask>* masks) {
    const auto t0 = std::chrono::steady_clock::now();
    if (frames.size() != gts.size())
        throw DimensionMismatch("frame and ground-truth counts differ");
    if (frames.empty()) throw EmptySequence("no frames");

    const int bootstrap = opts.bootstrap_frames >= 0 ? opts.bootstrap_frames
                                                     : default_bootstrap_count(frames.size());
    if (static_cast<std::size_t>(bootstrap) >= frames.size())
        throw EmptyScoringRange("bootstrap consumes every frame; nothing to score");

    SceneModel model = SceneModel::init(frames.subspan(0, std::max(bootstrap, 1)), eq, cfg, params);

    metrics::Confusion confusion;
    for (std::size_t f = bootstrap; f < frames.size(); ++f) {
        ForegroundMask mask = model.process_frame(frames[f], opts.threads);
        confusion = metrics::accumulate(mask, gts[f], confusion, opts.shadow);
        if (masks) masks->push_back(std::move(mask));
    }

    dataset::EvalRecord rec;
    rec.scene = opts.scene_name;
    rec.equation = eq.text();
    rec.structure = eq.structure_text();
    rec.operator_vector = eq.operators().ops;
    rec.lbp = cfg;
    rec.bgs = params;
    rec.confusion = confusion;
    const metrics::Scores s = metrics::scores(confusion);
    rec.precision = s.precision;
    rec.recall = s.recall;
    rec.fscore = s.fscore;
    rec.seed = opts.seed;
    rec.frame_first = opts.frame_first;
    rec.frame_last = opts.frame_first + static_cast<int>(frames.size()) - 1;
    rec.scored_frames = static_cast<int>(frames.size()) - bootstrap;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

dataset::EvalRecord evaluate_equation(const expr::Equation& eq, std::span<const GrayImage> frames,
                                      std::span<const ByteImage> gts, const lbp::LbpConfig& cfg,
                                      const BgsParams& params, const EvalOptions& opts) {
    return evaluate_equation_with_masks(eq, frames, gts, cfg, params, opts, nullptr);
}

}  // namespace eqdisc::bgs
