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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eqdisc/errors.hpp"

// Character-level recurrent variational autoencoder over the 10-symbol
// equation alphabet. The encoder is a (bi)directional gated-recurrent stack
// whose final hidden states feed affine heads for the posterior mean and
// log-variance; the decoder is a gated-recurrent stack conditioned on the
// latent vector through its initial hidden state and through concatenation
// onto every input embedding. All math is double precision; checkpoints
// store parameters as little-endian 32-bit floats.
namespace eqdisc::vae {

class UnknownToken : public Error {
public:
    using Error::Error;
};

class SequenceTooLong : public Error {
public:
    using Error::Error;
};

class NonPositiveSigma : public Error {
public:
    using Error::Error;
};

class CorpusEmpty : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(int epoch, const std::string& what) : Error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

// ---- Vocabulary ----

inline constexpr int kPad = 0;
inline constexpr int kSos = 1;
inline constexpr int kEos = 2;
inline constexpr int kVocabSize = 10;  // PAD, SOS, EOS, Z, C, a, o, (, ), space

/// Token ids including SOS/EOS framing. Throws UnknownToken.
std::vector<int> tokenize(std::string_view text);

/// Characters only; framing and PAD are skipped.
std::string detokenize(std::span<const int> tokens);

// ---- Configuration ----

enum class Optimizer { Adam, Adadelta, RMSprop };

std::string_view optimizer_name(Optimizer o);

struct VaeConfig {
    int enc_hidden = 64;
    int dec_hidden = 64;
    int enc_layers = 1;
    int dec_layers = 1;
    double enc_dropout = 0.0;
    double dec_dropout = 0.0;
    int n_batch = 32;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::RMSprop;
    int latent_dim = 16;
    int max_len = 64;  // maximum token count including SOS/EOS
    std::uint64_t seed = 0;
    int embed_dim = 16;

    // More than one recurrent layer switches the stack to bidirectional.
    bool enc_bidirectional() const { return enc_layers > 1; }
    bool dec_bidirectional() const { return dec_layers > 1; }

    void check() const;  // throws InvalidConfig
    bool operator==(const VaeConfig&) const = default;
};

// ---- Parameters ----

struct Tensor {
    std::vector<double> v;  // values, row-major
    std::vector<double> g;  // gradient accumulator
    int rows = 0;
    int cols = 0;

    std::size_t size() const { return v.size(); }
};

struct ParamRef {
    std::string name;
    Tensor* tensor;
};

/// -1/2 sum_j (1 + log sigma_j^2 - mu_j^2 - sigma_j^2); zero iff mu = 0 and
/// sigma = 1. Throws NonPositiveSigma.
double kl_divergence(std::span<const double> mu, std::span<const double> sigma);

// ---- Model ----

namespace detail {
struct Gru;
}

class VaeModel {
public:
    explicit VaeModel(const VaeConfig& cfg);  // deterministic init from cfg.seed
    VaeModel(const VaeModel&);
    VaeModel& operator=(const VaeModel&);
    VaeModel(VaeModel&&) noexcept;
    VaeModel& operator=(VaeModel&&) noexcept;
    ~VaeModel();

    const VaeConfig& config() const { return cfg_; }

    struct EncodeResult {
        std::vector<double> z, mu, sigma;
    };

    /// Deterministic encoder pass; z = noise * sigma + mu elementwise, so a
    /// zero noise vector returns the posterior mean.
    EncodeResult encode(std::span<const int> tokens, std::span<const double> noise) const;
    EncodeResult encode_text(std::string_view text, std::span<const double> noise) const;

    /// Greedy-argmax autoregressive decode of one latent vector.
    std::string decode_greedy(std::span<const double> z) const;

    /// Draws z ~ N(0, I) per sample and decodes until EOS or the length
    /// limit. temperature 0 decodes greedily; > 0 samples the softmax.
    std::vector<std::string> sample(int count, std::uint64_t seed, double temperature = 0.0) const;

    struct SeqLoss {
        double recon = 0.0;
        double kl = 0.0;
        double total() const { return recon + kl; }
    };

    /// Forward-only loss of one sequence under a fixed reparameterization
    /// noise vector (used by training and the finite-difference check).
    SeqLoss loss(std::span<const int> tokens, std::span<const double> noise) const;

    /// Forward + backward; adds this sequence's gradient into every
    /// tensor's accumulator.
    SeqLoss loss_backward(std::span<const int> tokens, std::span<const double> noise);

    void zero_grad();

    /// Every parameter tensor in declared (checkpoint) order.
    std::vector<ParamRef> parameters();
    std::size_t parameter_count() const;

private:
    friend void save_checkpoint(const VaeModel&, const std::filesystem::path&);
    friend VaeModel load_checkpoint(const std::filesystem::path&);
    friend std::pair<VaeModel, struct TrainReport> train(const VaeConfig&,
                                                         const std::vector<std::string>&,
                                                         const struct TrainOptions&);
    struct Impl;
    VaeConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

// ---- Training ----

struct TrainOptions {
    int max_epochs = 150;   // clamped to 150
    int patience = 10;      // early stop after this many non-improving epochs
    double min_delta = 1e-4;
    double grad_clip = 5.0;  // global gradient-norm clip, <= 0 disables
    int uve_samples = 100;   // samples for the UVE measure (0 disables)
    int uve_every = 0;       // compute UVE every k epochs (0: final only)
};

struct EpochStats {
    double recon = 0.0;
    double kl = 0.0;
    double total = 0.0;
    int uve = -1;  // -1 when not computed this epoch
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int early_stop_epoch = 0;  // last epoch run (1-based)
    int best_epoch = 0;        // epoch whose parameters were kept
    double final_recon = 0.0;
    double final_kl = 0.0;
    double final_total = 0.0;
    int final_uve = -1;
};

/// Trains a fresh model on the corpus. The model with the best total loss is
/// returned. Throws CorpusEmpty, SequenceTooLong and NonFiniteLoss.
std::pair<VaeModel, TrainReport> train(const VaeConfig& cfg,
                                       const std::vector<std::string>& corpus,
                                       const TrainOptions& opts = {});

/// Number of Unseen & Valid Equations: deduplicated samples that are
/// grammatically valid structures and absent from the corpus.
int uve(const std::vector<std::string>& samples, const std::vector<std::string>& corpus);

// ---- Checkpoints ----

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace eqdisc::vae
