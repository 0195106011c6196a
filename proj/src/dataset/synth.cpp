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

#include <cstdio>
#include <fstream>

#include "eqdisc/dataset.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc::dataset {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Static per-pixel texture in [40, 215]: high-frequency, so neighboring
// pixels give diverse LBP codes and the window histograms are far from the
// flat square's all-ones code.
std::uint8_t texture_value(int x, int y, std::uint64_t seed) {
    const std::uint64_t h =
        mix(seed ^ (std::uint64_t(std::uint32_t(x)) << 32 | std::uint32_t(y)));
    return static_cast<std::uint8_t>(40 + (h % 176));
}

struct SquarePos {
    int x, y;
    bool visible;
};

// Reflecting trajectory on the integer grid; exactly reproducible.
SquarePos square_at(const SynthConfig& cfg, int frame) {
    if (frame < cfg.appear_frame) return {0, 0, false};
    const int lo_x = cfg.wall_margin, hi_x = cfg.width - cfg.wall_margin - cfg.square;
    const int lo_y = cfg.wall_margin, hi_y = cfg.height - cfg.wall_margin - cfg.square;
    const int t = frame - cfg.appear_frame;

    auto reflect = [](int start, int v, int t, int lo, int hi) {
        if (hi <= lo) return lo;
        const int span = hi - lo;
        int p = (start - lo) + v * t;
        const int period = 2 * span;
        p = ((p % period) + period) % period;
        return lo + (p <= span ? p : period - p);
    };
    return {reflect(cfg.start_x, cfg.speed_x, t, lo_x, hi_x),
            reflect(cfg.start_y, cfg.speed_y, t, lo_y, hi_y), true};
}

}  // namespace

FrameSequence make_synthetic_scene(const SynthConfig& cfg) {
    if (cfg.width <= 0 || cfg.height <= 0 || cfg.frames <= 0 || cfg.square <= 0)
        throw DataError("synthetic scene dimensions must be positive");
    if (cfg.square + 2 * cfg.wall_margin > cfg.width ||
        cfg.square + 2 * cfg.wall_margin > cfg.height)
        throw DataError("square does not fit inside the wall margins");

    FrameSequence seq;
    seq.name = "synth";
    seq.first_index = 0;

    ByteImage background(cfg.width, cfg.height);
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) background.at(x, y) = texture_value(x, y, cfg.seed);

    for (int f = 0; f < cfg.frames; ++f) {
        ByteImage frame = background;
        ByteImage gt(cfg.width, cfg.height, 0);
        const SquarePos pos = square_at(cfg, f);
        if (pos.visible) {
            // Boundary halo labeled unknown (170), following the usual
            // change-detection annotation convention for motion edges.
            const int b = cfg.unknown_band;
            for (int y = std::max(0, pos.y - b);
                 y < std::min(cfg.height, pos.y + cfg.square + b); ++y)
                for (int x = std::max(0, pos.x - b);
                     x < std::min(cfg.width, pos.x + cfg.square + b); ++x)
                    gt.at(x, y) = 170;
            for (int y = pos.y; y < pos.y + cfg.square; ++y) {
                for (int x = pos.x; x < pos.x + cfg.square; ++x) {
                    frame.at(x, y) = cfg.square_value;
                    gt.at(x, y) = 255;
                }
            }
        }
        seq.frames.push_back(to_unit(frame));
        seq.gts.push_back(std::move(gt));
    }
    return seq;
}

void write_scene(const FrameSequence& seq, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "input");
    fs::create_directories(dir / "groundtruth");
    char name[32];
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const int index = seq.first_index + static_cast<int>(i);
        std::snprintf(name, sizeof name, "in%06d.png", index);
        write_png_gray8(dir / "input" / name, to_bytes(seq.frames[i]));
        std::snprintf(name, sizeof name, "gt%06d.png", index);
        write_png_gray8(dir / "groundtruth" / name, seq.gts[i]);
    }
    std::ofstream roi(dir / "temporalROI.txt");
    roi << seq.first_index << ' ' << seq.first_index + static_cast<int>(seq.frames.size()) - 1
        << '\n';
}

}  // namespace eqdisc::dataset
