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
#include <span>
#include <string>
#include <vector>

#include "eqdisc/bgs_params.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/lbp.hpp"
#include "eqdisc/metrics.hpp"

namespace eqdisc::dataset {

class SchemaVersionMismatch : public DataError {
public:
    using DataError::DataError;
};

/// One scored candidate equation: the full provenance needed to reproduce
/// the evaluation plus its confusion counts and scores.
struct EvalRecord {
    static constexpr int kSchemaVersion = 1;

    std::string scene;
    std::string equation;
    std::string structure;
    std::vector<std::uint8_t> operator_vector;
    lbp::LbpConfig lbp;
    bgs::BgsParams bgs;
    metrics::Confusion confusion;
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    int frame_first = 0;
    int frame_last = 0;
    int scored_frames = 0;
    std::string error;  // non-empty when the evaluation failed

    bool operator==(const EvalRecord&) const = default;
};

/// JSON-lines, one record per line. Floats round-trip exactly.
void persist_records(std::span<const EvalRecord> records, const std::filesystem::path& path);
std::vector<EvalRecord> load_records(const std::filesystem::path& path);

std::string record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const std::string& line);

}  // namespace eqdisc::dataset
