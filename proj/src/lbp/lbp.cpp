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

#include "eqdisc/lbp.hpp"

#include <cmath>
#include <thread>

#include "eqdisc/kernels.hpp"

namespace eqdisc::lbp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_config(const LbpConfig& cfg) {
    if (cfg.neighbors < 1 || cfg.neighbors > 24)
        throw Error("neighbor count must be in [1, 24]");
    if (cfg.radius <= 0) throw Error("radius must be positive");
    if (cfg.region_radius < 0) throw Error("region radius must be non-negative");
}

}  // namespace

LbpKernel::LbpKernel(int neighbors, double radius) : neighbors_(neighbors) {
    margin_ = static_cast<int>(std::ceil(radius));
    samples_.resize(neighbors);
    for (int p = 0; p < neighbors; ++p) {
        const double theta = 2.0 * kPi * p / neighbors;
        // Counter-clockwise with image y pointing down.
        const double dx = radius * std::cos(theta);
        const double dy = -radius * std::sin(theta);
        Sample& s = samples_[p];
        const double rx = std::round(dx), ry = std::round(dy);
        if (std::abs(dx - rx) < 1e-9 && std::abs(dy - ry) < 1e-9) {
            s.exact = true;
            s.ix = static_cast<int>(rx);
            s.iy = static_cast<int>(ry);
        } else {
            s.exact = false;
            const double fx = std::floor(dx), fy = std::floor(dy);
            s.x0 = static_cast<int>(fx);
            s.y0 = static_cast<int>(fy);
            const double tx = dx - fx, ty = dy - fy;
            s.w00 = (1.0 - tx) * (1.0 - ty);
            s.w10 = tx * (1.0 - ty);
            s.w01 = (1.0 - tx) * ty;
            s.w11 = tx * ty;
        }
    }
}

std::uint32_t LbpKernel::code_at(const GrayImage& img, int x, int y,
                                 const expr::CompiledEquation& eq, double offset) const {
    const double center = img.at(x, y);
    std::uint32_t code = 0;
    for (int p = 0; p < neighbors_; ++p) {
        const Sample& s = samples_[p];
        double z;
        if (s.exact) {
            z = img.at(x + s.ix, y + s.iy);
        } else {
            const int bx = x + s.x0, by = y + s.y0;
            z = s.w00 * img.at(bx, by) + s.w10 * img.at(bx + 1, by) +
                s.w01 * img.at(bx, by + 1) + s.w11 * img.at(bx + 1, by + 1);
        }
        const double u = eq.eval(z, center, offset);
        // Non-finite thresholds (division blowups) always give bit 0.
        if (std::isfinite(u) && u >= 0.0) code |= std::uint32_t{1} << p;
    }
    return code;
}

std::uint32_t lbp_code(const GrayImage& img, int x, int y, const expr::Equation& eq,
                       const LbpConfig& cfg) {
    check_config(cfg);
    LbpKernel kernel(cfg.neighbors, cfg.radius);
    const int m = kernel.margin();
    if (x < m || y < m || x >= img.width - m || y >= img.height - m)
        throw OutOfInterior("pixel (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside valid interior");
    return kernel.code_at(img, x, y, expr::CompiledEquation(eq), cfg.offset);
}

CodeImage compute_codes(const GrayImage& img, const expr::CompiledEquation& eq,
                        const LbpConfig& cfg, int threads) {
    check_config(cfg);
    LbpKernel kernel(cfg.neighbors, cfg.radius);
    CodeImage out;
    out.width = img.width;
    out.height = img.height;
    out.margin = kernel.margin();
    out.codes.assign(img.size(), 0);

    const int m = out.margin;
    const int y0 = m, y1 = img.height - m;
    if (y1 <= y0) return out;

    auto work = [&](int ya, int yb) {
        for (int y = ya; y < yb; ++y)
            for (int x = m; x < img.width - m; ++x)
                out.codes[std::size_t(y) * img.width + x] = kernel.code_at(img, x, y, eq, cfg.offset);
    };

    if (threads <= 1) {
        work(y0, y1);
    } else {
        std::vector<std::thread> pool;
        const int rows = y1 - y0;
        const int chunk = (rows + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int ya = y0 + t * chunk;
            const int yb = std::min(y1, ya + chunk);
            if (ya >= yb) break;
            pool.emplace_back(work, ya, yb);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

Histogram region_histogram(const CodeImage& codes, int x, int y, const LbpConfig& cfg,
                           bool normalize) {
    const int r = cfg.region_radius;
    const int m = codes.margin + r;
    if (x < m || y < m || x >= codes.width - m || y >= codes.height - m)
        throw OutOfInterior("window at (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside valid interior");
    Histogram h;
    h.bins.assign(std::size_t{1} << cfg.neighbors, 0.0);
    double total = 0.0;
    for (int wy = y - r; wy <= y + r; ++wy) {
        for (int wx = x - r; wx <= x + r; ++wx) {
            if (cfg.window == WindowShape::Circle) {
                const int dx = wx - x, dy = wy - y;
                if (dx * dx + dy * dy > r * r) continue;
            }
            h.bins[codes.at(wx, wy)] += 1.0;
            total += 1.0;
        }
    }
    if (normalize && total > 0) {
        kernels::scale(h.bins.data(), 1.0 / total, h.bins.size());
        h.normalized = true;
    }
    return h;
}

Histogram region_histogram(const GrayImage& img, int x, int y, const expr::Equation& eq,
                           const LbpConfig& cfg) {
    check_config(cfg);
    const CodeImage codes = compute_codes(img, expr::CompiledEquation(eq), cfg);
    return region_histogram(codes, x, y, cfg, /*normalize=*/true);
}

double intersection(const Histogram& h1, const Histogram& h2) {
    if (h1.bins.size() != h2.bins.size())
        throw BinCountMismatch("histograms have different bin counts");
    if (!h1.normalized || !h2.normalized)
        throw Unnormalized("intersection requires normalized histograms");
    return kernels::sum_min(h1.bins.data(), h2.bins.data(), h1.bins.size());
}

}  // namespace eqdisc::lbp
