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

#include "eqdisc/records.hpp"

#include <fstream>

#include "json.hpp"

namespace eqdisc::dataset {

namespace {

using nlohmann::json;

json lbp_to_json(const lbp::LbpConfig& c) {
    return {{"neighbors", c.neighbors},
            {"radius", c.radius},
            {"offset", c.offset},
            {"region_radius", c.region_radius},
            {"window", c.window == lbp::WindowShape::Circle ? "circle" : "square"}};
}

lbp::LbpConfig lbp_from_json(const json& j) {
    lbp::LbpConfig c;
    c.neighbors = j.at("neighbors");
    c.radius = j.at("radius");
    c.offset = j.at("offset");
    c.region_radius = j.at("region_radius");
    c.window = j.value("window", "square") == std::string("circle") ? lbp::WindowShape::Circle
                                                                    : lbp::WindowShape::Square;
    return c;
}

json bgs_to_json(const bgs::BgsParams& p) {
    return {{"slots", p.slots},
            {"match_threshold", p.match_threshold},
            {"background_mass", p.background_mass},
            {"histogram_lr", p.histogram_lr},
            {"weight_lr", p.weight_lr},
            {"stride", p.stride},
            {"replacement_weight", p.replacement_weight}};
}

bgs::BgsParams bgs_from_json(const json& j) {
    bgs::BgsParams p;
    p.slots = j.at("slots");
    p.match_threshold = j.at("match_threshold");
    p.background_mass = j.at("background_mass");
    p.histogram_lr = j.at("histogram_lr");
    p.weight_lr = j.at("weight_lr");
    p.stride = j.at("stride");
    p.replacement_weight = j.at("replacement_weight");
    return p;
}

}  // namespace

std::string record_to_json(const EvalRecord& r) {
    json j;
    j["schema"] = EvalRecord::kSchemaVersion;
    j["scene"] = r.scene;
    j["equation"] = r.equation;
    j["structure"] = r.structure;
    j["operator_vector"] = r.operator_vector;
    j["lbp"] = lbp_to_json(r.lbp);
    j["bgs"] = bgs_to_json(r.bgs);
    j["confusion"] = {{"tp", r.confusion.tp},
                      {"tn", r.confusion.tn},
                      {"fp", r.confusion.fp},
                      {"fn", r.confusion.fn},
                      {"ignored", r.confusion.ignored}};
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["fscore"] = r.fscore;
    j["wall_seconds"] = r.wall_seconds;
    j["seed"] = r.seed;
    j["frame_first"] = r.frame_first;
    j["frame_last"] = r.frame_last;
    j["scored_frames"] = r.scored_frames;
    j["error"] = r.error;
    return j.dump();
}

EvalRecord record_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed record: ") + e.what());
    }
    const int schema = j.value("schema", -1);
    if (schema != EvalRecord::kSchemaVersion)
        throw SchemaVersionMismatch("record schema " + std::to_string(schema) +
                                    " != " + std::to_string(EvalRecord::kSchemaVersion));
    EvalRecord r;
    r.scene = j.at("scene");
    r.equation = j.at("equation");
    r.structure = j.at("structure");
    r.operator_vector = j.at("operator_vector").get<std::vector<std::uint8_t>>();
    r.lbp = lbp_from_json(j.at("lbp"));
    r.bgs = bgs_from_json(j.at("bgs"));
    const json& c = j.at("confusion");
    r.confusion.tp = c.at("tp");
    r.confusion.tn = c.at("tn");
    r.confusion.fp = c.at("fp");
    r.confusion.fn = c.at("fn");
    r.confusion.ignored = c.at("ignored");
    r.precision = j.at("precision");
    r.recall = j.at("recall");
    r.fscore = j.at("fscore");
    r.wall_seconds = j.at("wall_seconds");
    r.seed = j.at("seed");
    r.frame_first = j.at("frame_first");
    r.frame_last = j.at("frame_last");
    r.scored_frames = j.at("scored_frames");
    r.error = j.value("error", std::string());
    return r;
}

void persist_records(std::span<const EvalRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write records file " + path.string());
    for (const auto& r : records) out << record_to_json(r) << '\n';
    if (!out) throw IoError("failed writing records file " + path.string());
}

std::vector<EvalRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file " + path.string());
    std::vector<EvalRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(line));
    }
    return out;
}

}  // namespace eqdisc::dataset
