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
#include <cctype>
#include <fstream>
#include <map>

#include "eqdisc/dataset.hpp"

namespace eqdisc::dataset {

namespace fs = std::filesystem;

namespace {

// Collects "<prefix>NNNNNN.<ext>" files, keyed by frame index.
std::map<int, fs::path> index_files(const fs::path& dir, const std::string& prefix) {
    if (!fs::is_directory(dir)) throw MissingDirectory("missing directory " + dir.string());
    std::map<int, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string stem = entry.path().stem().string();
        if (stem.size() <= prefix.size() || stem.compare(0, prefix.size(), prefix) != 0) continue;
        const std::string digits = stem.substr(prefix.size());
        if (!std::all_of(digits.begin(), digits.end(),
                         [](unsigned char c) { return std::isdigit(c); }))
            continue;
        const std::string ext = entry.path().extension().string();
        if (ext != ".jpg" && ext != ".jpeg" && ext != ".png" && ext != ".pgm" && ext != ".ppm")
            continue;
        out[std::stoi(digits)] = entry.path();
    }
    if (out.empty()) throw MissingDirectory("no indexed frames under " + dir.string());
    return out;
}

std::optional<FrameRange> read_temporal_roi(const fs::path& scene_dir) {
    std::ifstream in(scene_dir / "temporalROI.txt");
    if (!in) return std::nullopt;
    FrameRange r;
    if (!(in >> r.first >> r.last)) return std::nullopt;
    return r;
}

}  // namespace

GrayImage Scene::load_frame(std::size_t i) const {
    GrayImage img = to_unit(read_image_gray8(inputs.at(i)));
    if (downscale) img = downscale_area(img, downscale->first, downscale->second);
    const int expect_w = downscale ? downscale->first : width;
    const int expect_h = downscale ? downscale->second : height;
    if (width != 0 && (img.width != expect_w || img.height != expect_h))
        throw ResolutionMismatch("frame " + inputs.at(i).string() + " has unexpected resolution");
    return img;
}

ByteImage Scene::load_gt(std::size_t i) const {
    ByteImage img = read_image_gray8(gts.at(i));
    if (downscale) img = downscale_nearest(img, downscale->first, downscale->second);
    return img;
}

Scene load_scene(const fs::path& root, const std::string& name,
                 std::optional<FrameRange> frame_range,
                 std::optional<std::pair<int, int>> downscale) {
    const fs::path scene_dir = root / name;
    if (!fs::is_directory(scene_dir))
        throw MissingDirectory("missing scene directory " + scene_dir.string());

    auto input_files = index_files(scene_dir / "input", "in");
    auto gt_files = index_files(scene_dir / "groundtruth", "gt");

    Scene scene;
    scene.name = name;
    scene.downscale = downscale;

    const int avail_first = input_files.begin()->first;
    const int avail_last = input_files.rbegin()->first;
    const auto roi = read_temporal_roi(scene_dir);
    scene.roi = roi.value_or(FrameRange{avail_first, avail_last});

    FrameRange range = frame_range.value_or(scene.roi);
    const FrameRange requested = range;
    range.first = std::max({range.first, scene.roi.first, avail_first});
    range.last = std::min({range.last, scene.roi.last, avail_last});
    if (range.first > range.last)
        throw DataError("frame range [" + std::to_string(requested.first) + ", " +
                        std::to_string(requested.last) + "] is empty after clipping");
    if (range.first != requested.first || range.last != requested.last)
        scene.warnings.push_back("frame range clipped to [" + std::to_string(range.first) + ", " +
                                 std::to_string(range.last) + "]");

    for (int i = range.first; i <= range.last; ++i) {
        const auto fin = input_files.find(i);
        const auto fgt = gt_files.find(i);
        if (fin == input_files.end() || fgt == gt_files.end())
            throw IndexGap("missing frame index " + std::to_string(i) + " in scene " + name);
        scene.inputs.push_back(fin->second);
        scene.gts.push_back(fgt->second);
    }
    scene.first_index = range.first;

    const ByteImage probe = read_image_gray8(scene.inputs.front());
    scene.width = probe.width;
    scene.height = probe.height;
    return scene;
}

std::pair<Scene, Scene> split_unseen(const Scene& scene, FrameRange seen_range, int unseen_count) {
    const FrameRange unseen_range{seen_range.last + 1, seen_range.last + unseen_count};
    if (unseen_count > 0 && unseen_range.first <= seen_range.last)
        throw OverlappingRanges("seen and unseen ranges overlap");

    auto view = [&](FrameRange r, const char* suffix) {
        Scene v;
        v.name = scene.name + suffix;
        v.first_index = r.first;
        v.roi = scene.roi;
        v.width = scene.width;
        v.height = scene.height;
        v.downscale = scene.downscale;
        for (int i = r.first; i <= r.last; ++i) {
            const std::size_t k = static_cast<std::size_t>(i - scene.first_index);
            if (i < scene.first_index || k >= scene.inputs.size())
                throw IndexGap("frame " + std::to_string(i) + " outside the loaded scene");
            v.inputs.push_back(scene.inputs[k]);
            v.gts.push_back(scene.gts[k]);
        }
        return v;
    };

    Scene seen = view(seen_range, "");
    Scene unseen;
    if (unseen_count > 0) {
        unseen = view(unseen_range, "-unseen");
    } else {
        unseen.name = scene.name + "-unseen";
        unseen.first_index = unseen_range.first;
        unseen.roi = scene.roi;
        unseen.width = scene.width;
        unseen.height = scene.height;
        unseen.downscale = scene.downscale;
    }
    return {std::move(seen), std::move(unseen)};
}

FrameSequence load_sequence(const Scene& scene) {
    FrameSequence seq;
    seq.name = scene.name;
    seq.first_index = scene.first_index;
    seq.frames.reserve(scene.frame_count());
    seq.gts.reserve(scene.frame_count());
    for (std::size_t i = 0; i < scene.frame_count(); ++i) {
        seq.frames.push_back(scene.load_frame(i));
        seq.gts.push_back(scene.load_gt(i));
    }
    return seq;
}

}  // namespace eqdisc::dataset
