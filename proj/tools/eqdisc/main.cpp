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
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "eqdisc/bgs.hpp"
#include "eqdisc/dataset.hpp"
#include "eqdisc/expr.hpp"
#include "eqdisc/kernels.hpp"
#include "eqdisc/metrics.hpp"
#include "eqdisc/pipeline.hpp"
#include "eqdisc/records.hpp"
#include "eqdisc/vae.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eqdisc;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct FramesFlag {
    std::optional<dataset::FrameRange> range;
};

// "--frames a..b"
void add_frames_flag(CLI::App* cmd, FramesFlag& out) {
    cmd->add_option_function<std::string>(
        "--frames",
        [&out](const std::string& s) {
            const auto pos = s.find("..");
            if (pos == std::string::npos)
                throw CLI::ValidationError("--frames", "expected the form a..b");
            dataset::FrameRange r;
            try {
                r.first = std::stoi(s.substr(0, pos));
                r.last = std::stoi(s.substr(pos + 2));
            } catch (...) {
                throw CLI::ValidationError("--frames", "expected integers in a..b");
            }
            out.range = r;
        },
        "Frame index range, inclusive (a..b)");
}

dataset::FrameSequence load_scene_sequence(const fs::path& root, const std::string& scene,
                                           const FramesFlag& frames,
                                           std::optional<std::pair<int, int>> downscale) {
    const dataset::Scene sc = dataset::load_scene(root, scene, frames.range, downscale);
    for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
    return dataset::load_sequence(sc);
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

vae::VaeConfig default_train_config(std::uint64_t seed, int max_len) {
    // Tuned defaults for the shipped corpus; override per flag.
    vae::VaeConfig c;
    c.enc_hidden = 125;
    c.dec_hidden = 512;
    c.enc_layers = 6;
    c.dec_layers = 1;
    c.enc_dropout = 0.1;
    c.dec_dropout = 0.01;
    c.n_batch = 32;
    c.learning_rate = 0.005;
    c.optimizer = vae::Optimizer::RMSprop;
    c.latent_dim = 16;
    c.max_len = max_len;
    c.seed = seed;
    return c;
}

int corpus_max_len(const std::vector<std::string>& corpus) {
    int mx = 0;
    for (const auto& s : corpus) mx = std::max<int>(mx, static_cast<int>(s.size()) + 2);
    return mx + 8;
}

void write_train_report(const vae::TrainReport& report, const fs::path& path) {
    nlohmann::json j;
    j["early_stop_epoch"] = report.early_stop_epoch;
    j["best_epoch"] = report.best_epoch;
    j["final"] = {{"recon", report.final_recon},
                  {"kl", report.final_kl},
                  {"total", report.final_total},
                  {"uve", report.final_uve}};
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : report.epochs)
        epochs.push_back({{"recon", e.recon}, {"kl", e.kl}, {"total", e.total}, {"uve", e.uve}});
    j["epochs"] = std::move(epochs);
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discovers texture-threshold equations for background subtraction"};
    app.set_config("--config", "", "Configuration file (key = value with [section] headers)");
    app.require_subcommand(1);
    app.fallthrough();

    // Shared flags.
    std::uint64_t seed = 0;
    int workers = 1;
    fs::path out_dir = "out";
    app.add_option("--seed", seed, "Master seed; fixed seed makes runs reproducible")
        ->capture_default_str();
    app.add_option("--workers", workers, "Worker threads for candidate evaluation")
        ->capture_default_str();
    app.add_option("--out", out_dir, "Output directory or file")->capture_default_str();

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Write a synthetic moving-square scene");
    dataset::SynthConfig synth_cfg;
    synth->add_option("--width", synth_cfg.width)->capture_default_str();
    synth->add_option("--height", synth_cfg.height)->capture_default_str();
    synth->add_option("--count", synth_cfg.frames, "Number of frames")->capture_default_str();
    synth->add_option("--square", synth_cfg.square, "Square side length")->capture_default_str();

    // ---- train-vae ----
    auto* train_cmd = app.add_subcommand("train-vae", "Train the structure generator");
    fs::path corpus_path = "data/structures.txt";
    int train_epochs = 150;
    train_cmd->add_option("--corpus", corpus_path, "Structure corpus file")->capture_default_str();
    train_cmd->add_option("--epochs", train_epochs, "Maximum training epochs")
        ->capture_default_str();

    // ---- tune-vae ----
    auto* tune_cmd = app.add_subcommand("tune-vae", "Search generator hyperparameters");
    int vae_budget = 6;
    int tune_epochs = 20;
    int uve_samples = 100;
    tune_cmd->add_option("--corpus", corpus_path, "Structure corpus file")->capture_default_str();
    tune_cmd->add_option("--budget", vae_budget, "Configurations to train (L)")
        ->capture_default_str();
    tune_cmd->add_option("--epochs", tune_epochs, "Training epochs per candidate")
        ->capture_default_str();
    tune_cmd->add_option("--uve-samples", uve_samples, "Samples for the UVE measure")
        ->capture_default_str();

    // ---- generate ----
    auto* gen_cmd = app.add_subcommand("generate", "Sample structures from a trained generator");
    fs::path checkpoint_path;
    int gen_count = 305;
    double temperature = 0.0;
    bool valid_only = false;
    gen_cmd->add_option("--checkpoint", checkpoint_path, "Generator checkpoint")->required();
    gen_cmd->add_option("--count", gen_count, "Number of samples")->capture_default_str();
    gen_cmd->add_option("--temperature", temperature, "0 decodes greedily, > 0 samples")
        ->capture_default_str();
    gen_cmd->add_flag("--valid-only", valid_only, "Keep only grammatically valid samples");

    // Segmentation knobs shared by discover and evaluate.
    lbp::LbpConfig lbp_cfg;
    bgs::BgsParams bgs_params;
    auto add_vision_flags = [&](CLI::App* cmd) {
        cmd->add_option("--neighbors", lbp_cfg.neighbors, "Circle samples per pixel (P)")
            ->capture_default_str();
        cmd->add_option("--radius", lbp_cfg.radius, "Circle radius in pixels (R)")
            ->capture_default_str();
        cmd->add_option("--offset", lbp_cfg.offset, "Threshold offset (a)")->capture_default_str();
        cmd->add_option("--region-radius", lbp_cfg.region_radius,
                        "Histogram window half-width")
            ->capture_default_str();
        cmd->add_option("--slots", bgs_params.slots, "Model histograms per pixel (K)")
            ->capture_default_str();
        cmd->add_option("--match-threshold", bgs_params.match_threshold,
                        "Histogram intersection match threshold")
            ->capture_default_str();
        cmd->add_option("--background-mass", bgs_params.background_mass,
                        "Weight mass covered by background slots")
            ->capture_default_str();
        cmd->add_option("--histogram-lr", bgs_params.histogram_lr, "Histogram learning rate")
            ->capture_default_str();
        cmd->add_option("--weight-lr", bgs_params.weight_lr, "Weight learning rate")
            ->capture_default_str();
        cmd->add_option("--stride", bgs_params.stride, "Grid step for modeled pixels")
            ->capture_default_str();
    };

    // ---- discover ----
    auto* disc_cmd = app.add_subcommand("discover", "Search the best equation for a scene");
    fs::path dataset_root;
    std::string scene_name;
    FramesFlag frames_flag;
    fs::path structures_path;
    std::uint64_t cap = 1024;
    int structure_count = 4;
    bool downscale_flag = false;
    disc_cmd->add_option("--dataset", dataset_root, "Scene collection root directory")->required();
    disc_cmd->add_option("--scene", scene_name, "Scene name")->required();
    add_frames_flag(disc_cmd, frames_flag);
    disc_cmd->add_option("--checkpoint", checkpoint_path, "Generator checkpoint");
    disc_cmd->add_option("--structures", structures_path,
                         "Structure file to search (skips generator sampling)");
    disc_cmd->add_option("--corpus", corpus_path, "Corpus for unseen filtering")
        ->capture_default_str();
    disc_cmd->add_option("--cap", cap, "Mutation cap per structure")->capture_default_str();
    disc_cmd->add_option("-K,--structure-count", structure_count, "Structures to search (K)")
        ->capture_default_str();
    disc_cmd->add_flag("--downscale", downscale_flag, "Downscale frames to 180x120");
    add_vision_flags(disc_cmd);

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "Score one equation on a scene");
    std::string equation_text;
    bool write_masks = false;
    bool write_diffs = false;
    eval_cmd->add_option("--dataset", dataset_root, "Scene collection root directory")->required();
    eval_cmd->add_option("--scene", scene_name, "Scene name")->required();
    add_frames_flag(eval_cmd, frames_flag);
    eval_cmd->add_option("--equation", equation_text, "Equation text")->required();
    eval_cmd->add_flag("--masks", write_masks, "Write one mask PNG per scored frame");
    eval_cmd->add_flag("--diffs", write_diffs, "Write TP/TN/FP/FN diff PNGs");
    eval_cmd->add_flag("--downscale", downscale_flag, "Downscale frames to 180x120");
    add_vision_flags(eval_cmd);

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "Render score tables from records");
    fs::path records_path;
    report_cmd->add_option("--records", records_path, "JSON-lines records file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        const std::optional<std::pair<int, int>> downscale =
            downscale_flag ? std::make_optional(std::pair{180, 120}) : std::nullopt;

        if (*synth) {
            const auto seq = dataset::make_synthetic_scene(synth_cfg);
            dataset::write_scene(seq, out_dir / "synth");
            std::printf("wrote %d frames to %s\n", synth_cfg.frames,
                        (out_dir / "synth").string().c_str());
            return 0;
        }

        if (*train_cmd) {
            const auto corpus = expr::load_structure_corpus(corpus_path);
            vae::TrainOptions opts;
            opts.max_epochs = train_epochs;
            auto [model, report] =
                vae::train(default_train_config(seed, corpus_max_len(corpus)), corpus, opts);
            fs::create_directories(out_dir);
            vae::save_checkpoint(model, out_dir / "vae.ckpt");
            write_train_report(report, out_dir / "train_report.json");
            std::printf("trained %d epochs (best %d): total %.4f, uve %d\n",
                        report.early_stop_epoch, report.best_epoch, report.final_total,
                        report.final_uve);
            return 0;
        }

        if (*tune_cmd) {
            const auto corpus = expr::load_structure_corpus(corpus_path);
            pipeline::RunConfig cfg;
            cfg.vae_budget = vae_budget;
            cfg.train_epochs = tune_epochs;
            cfg.uve_samples = uve_samples;
            cfg.workers = workers;
            cfg.seed = seed;
            const auto result = pipeline::tune_vae(cfg, corpus);
            fs::create_directories(out_dir);
            vae::save_checkpoint(result.model, out_dir / "vae.ckpt");
            std::ofstream trace(out_dir / "tune_trace.jsonl");
            for (const auto& c : result.candidates) {
                nlohmann::json j;
                j["index"] = c.index;
                j["config"] = {{"enc_hidden", c.config.enc_hidden},
                               {"dec_hidden", c.config.dec_hidden},
                               {"enc_layers", c.config.enc_layers},
                               {"dec_layers", c.config.dec_layers},
                               {"enc_dropout", c.config.enc_dropout},
                               {"dec_dropout", c.config.dec_dropout},
                               {"n_batch", c.config.n_batch},
                               {"learning_rate", c.config.learning_rate},
                               {"optimizer", std::string(vae::optimizer_name(c.config.optimizer))}};
                j["recon"] = c.recon;
                j["kl"] = c.kl;
                j["uve"] = c.uve;
                if (!c.error.empty()) j["error"] = c.error;
                trace << j.dump() << '\n';
            }
            std::printf("best candidate #%zu: uve %d\n", result.best_index,
                        result.candidates[result.best_index].uve);
            return 0;
        }

        if (*gen_cmd) {
            const vae::VaeModel model = vae::load_checkpoint(checkpoint_path);
            const auto samples = model.sample(gen_count, seed, temperature);
            fs::create_directories(out_dir);
            const auto path = out_dir / "structures.txt";
            std::ofstream out(path);
            int kept = 0;
            for (const auto& s : samples) {
                if (valid_only && !expr::validate(s)) continue;
                out << s << '\n';
                ++kept;
            }
            std::printf("wrote %d/%d samples to %s\n", kept, gen_count, path.string().c_str());
            return 0;
        }

        if (*disc_cmd) {
            const auto scene = load_scene_sequence(dataset_root, scene_name, frames_flag, downscale);
            pipeline::RunConfig cfg;
            cfg.mutation_cap = cap;
            cfg.structure_count = structure_count;
            cfg.workers = workers;
            cfg.seed = seed;
            cfg.lbp = lbp_cfg;
            cfg.bgs = bgs_params;

            std::vector<std::string> corpus;
            if (fs::exists(corpus_path)) corpus = expr::load_structure_corpus(corpus_path);
            std::optional<vae::VaeModel> model;
            if (!structures_path.empty()) {
                cfg.seed_structures = read_lines(structures_path);
            } else {
                if (checkpoint_path.empty())
                    throw DataError("discover needs --checkpoint or --structures");
                model.emplace(vae::load_checkpoint(checkpoint_path));
            }

            const auto result =
                pipeline::discover(cfg, model ? &*model : nullptr, corpus, scene);
            fs::create_directories(out_dir);
            dataset::persist_records(result.records, out_dir / "records.jsonl");
            if (!result.strategy_trace.empty()) {
                std::ofstream trace(out_dir / "strategy_trace.jsonl");
                for (const auto& line : result.strategy_trace) trace << line << '\n';
            }
            pipeline::write_report(result.records, out_dir);
            const auto& best = result.best();
            std::printf("%zu records; best %s  F=%.4f (P=%.4f R=%.4f)\n", result.records.size(),
                        best.equation.c_str(), best.fscore, best.precision, best.recall);
            return 0;
        }

        if (*eval_cmd) {
            const auto scene = load_scene_sequence(dataset_root, scene_name, frames_flag, downscale);
            const expr::Equation eq = expr::Equation::parse(equation_text);
            bgs::EvalOptions opts;
            opts.threads = workers;
            opts.frame_first = scene.first_index;
            opts.seed = seed;
            opts.scene_name = scene.name;
            std::vector<bgs::ForegroundMask> masks;
            const auto rec = bgs::evaluate_equation_with_masks(
                eq, scene.frames, scene.gts, lbp_cfg, bgs_params,
                opts, (write_masks || write_diffs) ? &masks : nullptr);
            fs::create_directories(out_dir);
            const std::vector<dataset::EvalRecord> recs{rec};
            dataset::persist_records(recs, out_dir / "records.jsonl");
            if (write_masks || write_diffs) {
                char name[32];
                const int first_scored =
                    scene.first_index + static_cast<int>(scene.frames.size()) - rec.scored_frames;
                for (std::size_t i = 0; i < masks.size(); ++i) {
                    ByteImage png(masks[i].width, masks[i].height);
                    for (std::size_t k = 0; k < png.pix.size(); ++k)
                        png.pix[k] = masks[i].pix[k] ? 255 : 0;
                    const int index = first_scored + static_cast<int>(i);
                    if (write_masks) {
                        std::snprintf(name, sizeof name, "mask%06d.png", index);
                        write_png_gray8(out_dir / name, png);
                    }
                    if (write_diffs) {
                        std::snprintf(name, sizeof name, "diff%06d.png", index);
                        const std::size_t gi = scene.frames.size() - masks.size() + i;
                        write_png_rgb8(out_dir / name,
                                       metrics::render_diff(masks[i], scene.gts[gi]));
                    }
                }
            }
            std::printf("%s on %s: P=%.4f R=%.4f F=%.4f\n", rec.equation.c_str(),
                        rec.scene.c_str(), rec.precision, rec.recall, rec.fscore);
            return 0;
        }

        if (*report_cmd) {
            const auto records = dataset::load_records(records_path);
            if (records.empty()) throw pipeline::EmptyRecords("no records in " + records_path.string());
            const auto written = pipeline::write_report(records, out_dir);
            for (const auto& p : written) std::printf("wrote %s\n", p.string().c_str());
            return 0;
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
