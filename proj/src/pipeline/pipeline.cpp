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

#include "eqdisc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "eqdisc/expr.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc::pipeline {

namespace {

constexpr double kWorstObjective = 1e9;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) { return Rng(seed).fork(tag).seed(); }

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(count);
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string format_double(double v) { return nlohmann::json(v).dump(); }

// ---- Search space ----

std::vector<std::size_t> VaeSearchSpace::sizes() const {
    return {enc_hidden.size(), dec_hidden.size(),  enc_layers.size(),
            dec_layers.size(), enc_dropout.size(), dec_dropout.size(),
            n_batch.size(),    learning_rate.size(), optimizers.size()};
}

vae::VaeConfig VaeSearchSpace::decode(const std::vector<double>& x, int latent_dim, int max_len,
                                      std::uint64_t seed) const {
    const auto bins = mocmaes::encode_categorical(sizes(), x);
    vae::VaeConfig c;
    c.enc_hidden = enc_hidden[bins[0]];
    c.dec_hidden = dec_hidden[bins[1]];
    c.enc_layers = enc_layers[bins[2]];
    c.dec_layers = dec_layers[bins[3]];
    c.enc_dropout = enc_dropout[bins[4]];
    c.dec_dropout = dec_dropout[bins[5]];
    c.n_batch = n_batch[bins[6]];
    c.learning_rate = learning_rate[bins[7]];
    c.optimizer = optimizers[bins[8]];
    c.latent_dim = latent_dim;
    c.max_len = max_len;
    c.seed = seed;
    return c;
}

// ---- Generator tuning ----

TuneResult tune_vae(const RunConfig& cfg, const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw vae::CorpusEmpty("structure corpus is empty");
    if (cfg.vae_budget < 1) throw Error("generator budget must be at least 1");

    int max_tokens = 0;
    for (const auto& s : corpus)
        max_tokens = std::max<int>(max_tokens, static_cast<int>(s.size()) + 2);
    const int max_len = max_tokens + 8;  // allow samples a bit longer than the corpus

    const std::size_t dims = VaeSearchSpace::kDims;
    Rng rng = Rng(cfg.seed).fork(0x74756e65ULL);  // "tune"

    vae::TrainOptions topts;
    topts.max_epochs = cfg.train_epochs;
    topts.uve_samples = 0;  // sampled separately below with a per-candidate seed

    TuneResult result{vae::VaeModel(vae::VaeConfig{.enc_hidden = 1,
                                                   .dec_hidden = 1,
                                                   .latent_dim = 1,
                                                   .max_len = 2,
                                                   .embed_dim = 1}),
                      {},
                      0,
                      {}};
    bool have_best = false;
    int best_uve = -1;

    // Evaluates one configuration: train, then count unseen-valid samples.
    auto evaluate = [&](std::size_t index, const std::vector<double>& x, CandidateTrace& trace,
                        mocmaes::Point& objectives, std::optional<vae::VaeModel>& model_out) {
        trace.index = index;
        trace.config = cfg.space.decode(x, cfg.latent_dim, max_len, mix_seed(cfg.seed, index));
        try {
            auto [model, report] = vae::train(trace.config, corpus, topts);
            trace.recon = report.final_recon;
            trace.kl = report.final_kl;
            if (cfg.uve_samples > 0) {
                const auto samples =
                    model.sample(cfg.uve_samples, mix_seed(cfg.seed, 0xabcd0000ULL + index));
                trace.uve = vae::uve(samples, corpus);
            } else {
                trace.uve = 0;
            }
            objectives = {report.final_recon, report.final_kl};
            model_out.emplace(std::move(model));
        } catch (const std::exception& e) {
            trace.error = e.what();
            trace.uve = -1;
            objectives = {kWorstObjective, kWorstObjective};
        }
    };

    const std::size_t mu = std::min<std::size_t>(3, cfg.vae_budget);
    std::size_t budget_left = cfg.vae_budget;
    std::size_t candidate_index = 0;

    const auto sp = mocmaes::StrategyParams::defaults(dims);
    std::vector<mocmaes::Individual> parents;

    auto run_batch = [&](const std::vector<std::vector<double>>& xs, std::vector<mocmaes::Point>& fs) {
        const std::size_t n = xs.size();
        std::vector<CandidateTrace> traces(n);
        std::vector<std::optional<vae::VaeModel>> models(n);
        fs.assign(n, {});
        const std::size_t base = candidate_index;
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            evaluate(base + i, xs[i], traces[i], fs[i], models[i]);
        });
        candidate_index += n;
        for (std::size_t i = 0; i < n; ++i) {
            result.candidates.push_back(traces[i]);
            if (models[i] && traces[i].uve > best_uve) {
                best_uve = traces[i].uve;
                result.model = std::move(*models[i]);
                result.config = traces[i].config;
                result.best_index = traces[i].index;
                have_best = true;
            }
        }
        budget_left -= n;
    };

    // Initial parents.
    {
        std::vector<std::vector<double>> xs;
        const std::size_t n0 = std::min(mu, budget_left);
        for (std::size_t i = 0; i < n0; ++i) {
            std::vector<double> x(dims);
            for (auto& v : x) v = rng.uniform();
            xs.push_back(std::move(x));
        }
        std::vector<mocmaes::Point> fs;
        run_batch(xs, fs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            auto ind = mocmaes::Individual::make(xs[i], 0.25, sp);
            ind.f = fs[i];
            parents.push_back(std::move(ind));
        }
    }

    if (!parents.empty() && budget_left > 0) {
        mocmaes::Population pop(std::move(parents), sp);
        while (budget_left >= pop.size()) {
            auto offspring = pop.ask(rng);
            std::vector<std::vector<double>> xs;
            xs.reserve(offspring.size());
            for (const auto& o : offspring) xs.push_back(o.x);
            std::vector<mocmaes::Point> fs;
            run_batch(xs, fs);
            pop.tell(std::move(offspring), fs);
        }
        // Spend any remainder on a final partial proposal batch; it feeds
        // candidate selection but no longer updates the strategy.
        if (budget_left > 0) {
            const auto offspring = pop.ask(rng);
            std::vector<std::vector<double>> xs;
            for (std::size_t i = 0; i < budget_left; ++i) xs.push_back(offspring[i].x);
            std::vector<mocmaes::Point> fs;
            run_batch(xs, fs);
        }
    }

    if (!have_best)
        throw Error("every candidate configuration failed to train");
    return result;
}

// ---- Equation discovery ----

namespace {

std::vector<std::string> pick_structures(const RunConfig& cfg, const vae::VaeModel* model,
                                         const std::vector<std::string>& corpus) {
    if (!cfg.seed_structures.empty()) {
        std::vector<std::string> out;
        for (const auto& s : cfg.seed_structures) out.push_back(expr::parse_structure(s).text());
        return out;
    }
    if (!model) throw Error("discover needs a trained generator or seed structures");

    std::unordered_set<std::string> corpus_set(corpus.begin(), corpus.end());
    std::unordered_set<std::string> chosen_set;
    std::vector<std::string> chosen;
    const int per_round = std::max(8, 2 * cfg.structure_count);
    const int max_rounds = 32;
    for (int round = 0; round < max_rounds && static_cast<int>(chosen.size()) < cfg.structure_count;
         ++round) {
        const auto samples =
            model->sample(per_round, mix_seed(cfg.seed, 0x5a5a0000ULL + round));
        for (const auto& s : samples) {
            if (static_cast<int>(chosen.size()) >= cfg.structure_count) break;
            if (!expr::validate(s)) continue;
            const std::string canon = expr::parse_structure(s).text();
            if (corpus_set.count(canon) || chosen_set.count(canon)) continue;
            chosen_set.insert(canon);
            chosen.push_back(canon);
        }
    }
    if (chosen.empty())
        throw NoValidStructures("the generator produced no valid unseen structures");
    return chosen;
}

mocmaes::Point objectives_for(const dataset::EvalRecord& rec, ObjectiveMode mode) {
    if (!rec.error.empty()) return {1.0, 1.0};
    if (mode == ObjectiveMode::FScore) return {1.0 - rec.fscore, 1.0 - rec.fscore};
    return {1.0 - rec.precision, 1.0 - rec.recall};
}

struct StructureSearch {
    const RunConfig& cfg;
    const dataset::FrameSequence& scene;
    const expr::EquationStructure structure;
    std::vector<dataset::EvalRecord>& records;  // global record list
    std::vector<std::string>& trace;            // strategy trace JSON lines

    std::unordered_map<std::string, std::size_t> memo;  // opvec key -> record index

    static std::string key_of(const expr::OperatorVector& v) {
        return std::string(v.ops.begin(), v.ops.end());
    }

    dataset::EvalRecord evaluate_one(const expr::Equation& eq) const {
        bgs::EvalOptions opts;
        opts.threads = 1;  // parallelism lives at the candidate level
        opts.frame_first = scene.first_index;
        opts.seed = cfg.seed;
        opts.scene_name = scene.name;
        try {
            return bgs::evaluate_equation(eq, scene.frames, scene.gts, cfg.lbp, cfg.bgs, opts);
        } catch (const std::exception& e) {
            dataset::EvalRecord rec;
            rec.scene = scene.name;
            rec.equation = eq.text();
            rec.structure = eq.structure_text();
            rec.operator_vector = eq.operators().ops;
            rec.lbp = cfg.lbp;
            rec.bgs = cfg.bgs;
            rec.seed = cfg.seed;
            rec.error = e.what();
            return rec;
        }
    }

    /// Evaluates the given operator vectors (deduplicated), appends records
    /// and returns the objective vector per input.
    std::vector<mocmaes::Point> evaluate_batch(const std::vector<expr::OperatorVector>& vectors) {
        std::vector<std::size_t> fresh;  // positions needing a new evaluation
        std::vector<expr::Equation> eqs;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const std::string key = key_of(vectors[i]);
            if (memo.count(key)) continue;
            memo.emplace(key, records.size() + fresh.size());
            fresh.push_back(i);
            eqs.push_back(expr::apply_operators(structure, vectors[i]));
        }
        std::vector<dataset::EvalRecord> batch(fresh.size());
        parallel_for(fresh.size(), cfg.workers,
                     [&](std::size_t i) { batch[i] = evaluate_one(eqs[i]); });
        for (auto& rec : batch) records.push_back(std::move(rec));
        std::vector<mocmaes::Point> out;
        out.reserve(vectors.size());
        for (const auto& v : vectors)
            out.push_back(objectives_for(records[memo.at(key_of(v))], cfg.objective));
        return out;
    }

    std::size_t unique_evaluations() const { return memo.size(); }

    void run(Rng& rng) {
        const std::uint64_t space = structure.mutation_space_size();
        if (space <= cfg.mutation_cap) {
            // Exhaustive: every operator assignment in canonical order.
            std::vector<expr::OperatorVector> all;
            for (const auto& eq : expr::enumerate_mutations(structure, cfg.mutation_cap))
                all.push_back(eq.operators());
            evaluate_batch(all);
            return;
        }

        // Strategy-driven search over operator codes mapped from [0,1]^n.
        const std::size_t n = structure.placeholder_count();
        std::vector<std::size_t> radices(n);
        for (std::size_t i = 0; i < n; ++i) radices[i] = structure.slot_is_unary(i) ? 2 : 4;

        auto to_vector = [&](const std::vector<double>& x) {
            const auto bins = mocmaes::encode_categorical(radices, x);
            expr::OperatorVector v;
            v.ops.assign(bins.begin(), bins.end());
            return v;
        };

        const auto sp = mocmaes::StrategyParams::defaults(n);
        const std::size_t mu = std::min<std::size_t>(8, std::max<std::uint64_t>(1, cfg.mutation_cap / 4));

        std::vector<std::vector<double>> xs;
        std::vector<expr::OperatorVector> vecs;
        for (std::size_t i = 0; i < mu; ++i) {
            std::vector<double> x(n);
            for (auto& v : x) v = rng.uniform();
            vecs.push_back(to_vector(x));
            xs.push_back(std::move(x));
        }
        auto fs = evaluate_batch(vecs);

        std::vector<mocmaes::Individual> parents;
        for (std::size_t i = 0; i < mu; ++i) {
            auto ind = mocmaes::Individual::make(xs[i], 0.3, sp);
            ind.f = fs[i];
            parents.push_back(std::move(ind));
        }
        mocmaes::Population pop(std::move(parents), sp);
        pop.enable_trace();

        bool exhausted = false;
        while (!exhausted && unique_evaluations() < cfg.mutation_cap) {
            auto offspring = pop.ask(rng);
            std::vector<expr::OperatorVector> ovecs;
            ovecs.reserve(offspring.size());
            for (auto& o : offspring) ovecs.push_back(to_vector(o.x));
            // Respect the budget: stop once a generation would need more new
            // unique vectors than the remaining budget covers.
            std::size_t budget = cfg.mutation_cap - unique_evaluations();
            std::unordered_set<std::string> seen_new;
            for (const auto& v : ovecs) {
                const std::string key = key_of(v);
                if (!memo.count(key) && !seen_new.count(key)) {
                    if (budget == 0) {
                        exhausted = true;
                        break;
                    }
                    seen_new.insert(key);
                    --budget;
                }
            }
            if (exhausted) break;
            const auto ofs = evaluate_batch(ovecs);
            pop.tell(std::move(offspring), ofs);
        }
        for (const auto& rec : pop.trace()) trace.push_back(rec.to_json());
    }
};

}  // namespace

DiscoverResult discover(const RunConfig& cfg, const vae::VaeModel* model,
                        const std::vector<std::string>& corpus,
                        const dataset::FrameSequence& scene) {
    if (cfg.structure_count < 1) throw Error("structure count must be at least 1");
    if (cfg.mutation_cap < 1) throw Error("mutation cap must be at least 1");
    if (scene.frames.empty()) throw bgs::EmptySequence("scene has no frames");

    const auto structures = pick_structures(cfg, model, corpus);

    DiscoverResult result;
    Rng rng = Rng(cfg.seed).fork(0x64697363ULL);  // "disc"
    for (std::size_t si = 0; si < structures.size(); ++si) {
        StructureSearch search{cfg, scene, expr::parse_structure(structures[si]), result.records,
                               result.strategy_trace, {}};
        Rng srng = rng.fork(si);
        search.run(srng);
    }

    bool found = false;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& rec = result.records[i];
        if (!rec.error.empty()) continue;
        if (!found || rec.fscore > result.records[result.best_index].fscore) {
            result.best_index = i;
            found = true;
        }
    }
    if (!found) throw Error("every candidate evaluation failed");
    return result;
}

// ---- Reporting ----

std::vector<std::filesystem::path> write_report(const std::vector<dataset::EvalRecord>& records,
                                                const std::filesystem::path& out_dir) {
    if (records.empty()) throw EmptyRecords("no records to report");
    std::filesystem::create_directories(out_dir);

    // Group by scene, keeping first-appearance order.
    std::vector<std::string> scene_order;
    std::map<std::string, std::vector<const dataset::EvalRecord*>> by_scene;
    for (const auto& r : records) {
        if (!by_scene.count(r.scene)) scene_order.push_back(r.scene);
        by_scene[r.scene].push_back(&r);
    }

    std::vector<std::filesystem::path> written;
    for (const auto& scene : scene_order) {
        const auto path = out_dir / ("scores_" + (scene.empty() ? "unnamed" : scene) + ".csv");
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        out << "scene,equation,precision,recall,fscore,frames\n";
        for (const auto* r : by_scene[scene]) {
            out << r->scene << ",\"" << r->equation << "\"," << format_double(r->precision) << ','
                << format_double(r->recall) << ',' << format_double(r->fscore) << ','
                << r->frame_first << ".." << r->frame_last << '\n';
        }
        written.push_back(path);
    }

    const auto summary_path = out_dir / "summary.csv";
    std::ofstream out(summary_path);
    if (!out) throw IoError("cannot write " + summary_path.string());
    out << "scene,structure,equation,precision,recall,fscore\n";
    for (const auto& scene : scene_order) {
        const dataset::EvalRecord* best = nullptr;
        for (const auto* r : by_scene[scene]) {
            if (!r->error.empty()) continue;
            if (!best || r->fscore > best->fscore) best = r;
        }
        if (!best) continue;
        out << best->scene << ",\"" << best->structure << "\",\"" << best->equation << "\","
            << format_double(best->precision) << ',' << format_double(best->recall) << ','
            << format_double(best->fscore) << '\n';
    }
    written.push_back(summary_path);
    return written;
}

}  // namespace eqdisc::pipeline
