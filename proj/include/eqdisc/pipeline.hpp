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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eqdisc/bgs.hpp"
#include "eqdisc/dataset.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/mocmaes.hpp"
#include "eqdisc/records.hpp"
#include "eqdisc/vae.hpp"

// End-to-end orchestration: tune the generator on the structure corpus,
// sample candidate structures, search operator assignments per structure and
// score every candidate against a scene. Candidate evaluations are
// independent jobs dispatched to an in-process worker pool; results are
// gathered by candidate index, so any worker count yields identical output.
namespace eqdisc::pipeline {

class NoValidStructures : public Error {
public:
    using Error::Error;
};

class EmptyRecords : public DataError {
public:
    using DataError::DataError;
};

/// Categorical hyperparameter choice lists for the generator tuner.
struct VaeSearchSpace {
    std::vector<int> enc_hidden{125, 256, 512};
    std::vector<int> dec_hidden{512, 800};
    std::vector<int> enc_layers{1, 2, 4, 6};
    std::vector<int> dec_layers{1, 2, 4, 6};
    std::vector<double> enc_dropout{0.01, 0.02, 0.01, 0.1, 0.2};
    std::vector<double> dec_dropout{0.01, 0.02, 0.01, 0.1, 0.2};
    std::vector<int> n_batch{32, 64, 512};
    std::vector<double> learning_rate{0.001, 0.005};
    std::vector<vae::Optimizer> optimizers{vae::Optimizer::Adam, vae::Optimizer::Adadelta,
                                           vae::Optimizer::RMSprop};

    static constexpr std::size_t kDims = 9;
    std::vector<std::size_t> sizes() const;
    vae::VaeConfig decode(const std::vector<double>& x, int latent_dim, int max_len,
                          std::uint64_t seed) const;
};

enum class ObjectiveMode { PrecisionRecall, FScore };

struct RunConfig {
    VaeSearchSpace space;
    int vae_budget = 6;             // L: total configurations trained
    int structure_count = 4;        // K: candidate structures per run
    std::uint64_t mutation_cap = 1024;
    int train_epochs = 150;
    int uve_samples = 100;
    int workers = 1;
    std::uint64_t seed = 0;
    int latent_dim = 16;
    ObjectiveMode objective = ObjectiveMode::PrecisionRecall;
    lbp::LbpConfig lbp;
    bgs::BgsParams bgs;
    /// When non-empty these structures are searched instead of sampling
    /// from the generator.
    std::vector<std::string> seed_structures;
};

struct CandidateTrace {
    std::size_t index = 0;
    vae::VaeConfig config;
    double recon = 0.0;
    double kl = 0.0;
    int uve = -1;
    std::string error;  // non-empty when training failed
};

struct TuneResult {
    vae::VaeModel model;
    vae::VaeConfig config;
    std::size_t best_index = 0;
    std::vector<CandidateTrace> candidates;
};

/// Proposes up to L configurations with the evolution strategy (objectives:
/// final reconstruction loss and final KL), trains each on the corpus, and
/// returns the model with the highest Unseen & Valid Equations count.
TuneResult tune_vae(const RunConfig& cfg, const std::vector<std::string>& corpus);

struct DiscoverResult {
    std::vector<dataset::EvalRecord> records;  // canonical candidate order
    std::size_t best_index = 0;
    /// Per-generation strategy trace (JSON lines), one entry per generation
    /// of each strategy-driven structure search.
    std::vector<std::string> strategy_trace;

    const dataset::EvalRecord& best() const { return records[best_index]; }
};

/// Searches operator assignments for each candidate structure and scores
/// every equation on the scene. Exhaustive when the structure's mutation
/// space fits the cap, strategy-driven otherwise. model may be null when
/// cfg.seed_structures is non-empty.
DiscoverResult discover(const RunConfig& cfg, const vae::VaeModel* model,
                        const std::vector<std::string>& corpus,
                        const dataset::FrameSequence& scene);

/// Renders per-scene score tables plus a best-equation summary from
/// persisted records. Returns the list of files written.
std::vector<std::filesystem::path> write_report(const std::vector<dataset::EvalRecord>& records,
                                                const std::filesystem::path& out_dir);

/// Runs fn(0..n-1) on a bounded pool; results must be written to
/// preallocated slots. Exceptions propagate after all jobs finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal rendering of a double (deterministic).
std::string format_double(double v);

}  // namespace eqdisc::pipeline
