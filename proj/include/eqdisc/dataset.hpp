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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqdisc/errors.hpp"
#include "eqdisc/image.hpp"

// Scene ingestion for the standard change-detection layout:
//   <root>/<scene>/input/in%06d.jpg  (or .png/.pgm)
//   <root>/<scene>/groundtruth/gt%06d.png
//   <root>/<scene>/temporalROI.txt   ("first last", optional)
namespace eqdisc::dataset {

class MissingDirectory : public DataError {
public:
    using DataError::DataError;
};

class IndexGap : public DataError {
public:
    using DataError::DataError;
};

class ResolutionMismatch : public DataError {
public:
    using DataError::DataError;
};

class OverlappingRanges : public Error {
public:
    using Error::Error;
};

/// Frame index range, inclusive on both ends.
struct FrameRange {
    int first = 0;
    int last = 0;
    int count() const { return last - first + 1; }
};

struct Scene {
    std::string name;
    std::vector<std::filesystem::path> inputs;  // aligned by frame index
    std::vector<std::filesystem::path> gts;
    int first_index = 0;  // frame number of inputs[0]
    FrameRange roi{};     // temporal region of interest (absolute indices)
    int width = 0;
    int height = 0;
    std::optional<std::pair<int, int>> downscale;
    std::vector<std::string> warnings;

    std::size_t frame_count() const { return inputs.size(); }
    GrayImage load_frame(std::size_t i) const;
    ByteImage load_gt(std::size_t i) const;
};

Scene load_scene(const std::filesystem::path& root, const std::string& name,
                 std::optional<FrameRange> frame_range = std::nullopt,
                 std::optional<std::pair<int, int>> downscale = std::nullopt);

/// Two views of the same files with disjoint frame ranges; the unseen view
/// holds up to unseen_count frames immediately after the seen range.
std::pair<Scene, Scene> split_unseen(const Scene& scene, FrameRange seen_range, int unseen_count);

/// In-memory frame sequence: the unit discover/evaluate operate on.
struct FrameSequence {
    std::string name;
    std::vector<GrayImage> frames;
    std::vector<ByteImage> gts;
    int first_index = 0;
};

FrameSequence load_sequence(const Scene& scene);

// ---- Synthetic scene ----
//
// A flat bright square translating over a static high-frequency texture,
// with analytic ground truth. The square appears after the bootstrap frames
// so the background model is seeded object-free. Intensities are quantized
// to 8 bits, making the on-disk copy identical to the in-memory one.
struct SynthConfig {
    int width = 96;
    int height = 72;
    int frames = 40;
    int square = 20;        // side length, pixels
    int appear_frame = 5;   // first frame containing the square
    int start_x = 12;
    int start_y = 12;
    int speed_x = 2;        // pixels per frame, reflects at the walls
    int speed_y = 1;
    int wall_margin = 6;
    int unknown_band = 2;   // boundary halo labeled unknown, as in real truth
    std::uint64_t seed = 1234;
    std::uint8_t square_value = 250;
};

FrameSequence make_synthetic_scene(const SynthConfig& cfg = {});

/// Writes a frame sequence in the standard scene layout (PNG frames).
void write_scene(const FrameSequence& seq, const std::filesystem::path& dir);

}  // namespace eqdisc::dataset
