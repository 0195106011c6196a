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

// Checkpoint layout (all integers and floats little-endian):
//   magic "EQDVAE" (6 bytes), format version u16
//   config block: i32 enc_hidden, dec_hidden, enc_layers, dec_layers;
//     f64 enc_dropout, dec_dropout; i32 n_batch; f64 learning_rate;
//     u8 optimizer; i32 latent_dim, max_len, embed_dim; u64 seed
//   u32 tensor count, then per tensor: u32 rows, u32 cols, f32 values
//   in declared parameter order.

#include <cstring>
#include <fstream>

#include "vae_impl.hpp"

namespace eqdisc::vae {

namespace {

constexpr char kMagic[6] = {'E', 'Q', 'D', 'V', 'A', 'E'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    return value;
}

}  // namespace

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());

    out.write(kMagic, sizeof kMagic);
    put<std::uint16_t>(out, kVersion);

    const VaeConfig& c = model.config();
    put<std::int32_t>(out, c.enc_hidden);
    put<std::int32_t>(out, c.dec_hidden);
    put<std::int32_t>(out, c.enc_layers);
    put<std::int32_t>(out, c.dec_layers);
    put<double>(out, c.enc_dropout);
    put<double>(out, c.dec_dropout);
    put<std::int32_t>(out, c.n_batch);
    put<double>(out, c.learning_rate);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(c.optimizer));
    put<std::int32_t>(out, c.latent_dim);
    put<std::int32_t>(out, c.max_len);
    put<std::int32_t>(out, c.embed_dim);
    put<std::uint64_t>(out, c.seed);

    auto params = model.impl_->parameters();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    std::vector<float> buf;
    for (const auto& p : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor->rows));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor->cols));
        buf.resize(p.tensor->size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(p.tensor->v[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
    }
    if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

VaeModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());

    char magic[6];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointError("bad checkpoint magic in " + path.string());
    const auto version = get<std::uint16_t>(in);
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

    VaeConfig c;
    c.enc_hidden = get<std::int32_t>(in);
    c.dec_hidden = get<std::int32_t>(in);
    c.enc_layers = get<std::int32_t>(in);
    c.dec_layers = get<std::int32_t>(in);
    c.enc_dropout = get<double>(in);
    c.dec_dropout = get<double>(in);
    c.n_batch = get<std::int32_t>(in);
    c.learning_rate = get<double>(in);
    c.optimizer = static_cast<Optimizer>(get<std::uint8_t>(in));
    c.latent_dim = get<std::int32_t>(in);
    c.max_len = get<std::int32_t>(in);
    c.embed_dim = get<std::int32_t>(in);
    c.seed = get<std::uint64_t>(in);
    if (!in) throw CheckpointError("truncated checkpoint header in " + path.string());

    VaeModel model(c);
    auto params = model.impl_->parameters();
    const auto count = get<std::uint32_t>(in);
    if (count != params.size())
        throw CheckpointError("checkpoint tensor count does not match the configuration");
    std::vector<float> buf;
    for (auto& p : params) {
        const auto rows = get<std::uint32_t>(in);
        const auto cols = get<std::uint32_t>(in);
        if (rows != static_cast<std::uint32_t>(p.tensor->rows) ||
            cols != static_cast<std::uint32_t>(p.tensor->cols))
            throw CheckpointError("checkpoint tensor shape mismatch for " + p.name);
        buf.resize(p.tensor->size());
        in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
        if (!in) throw CheckpointError("truncated checkpoint " + path.string());
        for (std::size_t i = 0; i < buf.size(); ++i) p.tensor->v[i] = buf[i];
    }
    return model;
}

}  // namespace eqdisc::vae
