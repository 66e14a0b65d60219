#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "msr/data/dataset.hpp"
#include "msr/data/tensor_io.hpp"
#include "msr/train/checkpoint.hpp"
#include "msr/train/fit.hpp"
#include "msr/train/gradcheck.hpp"
#include "msr/train/loader.hpp"
#include "msr/train/png.hpp"
#include "msr/train/stats.hpp"
#include "run_config.hpp"

namespace msr::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

fourier::Image slice_channel(const Tensor<float>& t, std::size_t n, std::size_t c) {
    const Shape& s = t.shape();
    fourier::Image img(s.h, s.w);
    for (std::size_t i = 0; i < s.plane(); ++i) img.data[i] = t[(n * s.c + c) * s.plane() + i];
    return img;
}

fourier::Image channel_mean_image(const Tensor<float>& t, std::size_t n) {
    const Shape& s = t.shape();
    fourier::Image img(s.h, s.w);
    for (std::size_t c = 0; c < s.c; ++c) {
        const auto ch = slice_channel(t, n, c);
        for (std::size_t i = 0; i < img.size(); ++i) img.data[i] += ch.data[i] / static_cast<double>(s.c);
    }
    return img;
}

// --- gen-data ----------------------------------------------------------------

struct GenDataArgs {
    std::uint64_t seed = 0;
    std::size_t count = 10;
    std::vector<std::size_t> size{64, 64};
    std::size_t scale = 2;
    std::vector<std::size_t> ratios{7, 1, 2};
    int shapes = 6;
    std::optional<std::uint64_t> aux_seed;
    std::string out;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    data::DatasetSpec spec;
    spec.seed = a.seed;
    spec.count = a.count;
    spec.height = a.size.at(0);
    spec.width = a.size.at(1);
    spec.scale = a.scale;
    spec.n_shapes = a.shapes;
    spec.ratios = {a.ratios.at(0), a.ratios.at(1), a.ratios.at(2)};
    spec.aux_seed = a.aux_seed;
    data::validate(spec);
    data::write_dataset(spec, a.out);
    const auto sizes = data::split_sizes(spec.count, spec.ratios);
    out << ordered_json{{"out", a.out},
                        {"train", sizes.train},
                        {"val", sizes.val},
                        {"test", sizes.test}}
               .dump()
        << "\n";
    return kExitOk;
}

// --- degrade -------------------------------------------------------------------

int cmd_degrade(const std::string& in, const std::string& dst, int scale, std::ostream& out) {
    const auto img = data::load_image(in);
    const fourier::ScaleFactor s(scale);
    s.require_divides(img.height, img.width);
    const auto lr = fourier::degrade(img, s);
    data::save_image(dst, lr);
    out << ordered_json{{"out", dst}, {"height", lr.height}, {"width", lr.width}}.dump() << "\n";
    return kExitOk;
}

// --- train -----------------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::string& data_root, const std::string& out_dir,
              std::ostream& out) {
    const RunConfig cfg = parse_run_config_text(read_text(config_path));
    const auto train_set = train::load_split(data_root, "train");
    const auto val_set = train::load_split(data_root, "val");
    if (train_set.empty()) throw ConfigError("training split is empty");
    if (train_set.front().scale != cfg.model.scale) {
        throw ConfigError("config scale " + std::to_string(cfg.model.scale) +
                          " does not match dataset scale " + std::to_string(train_set.front().scale));
    }

    const fs::path dir(out_dir);
    make_dirs(dir);
    write_text(dir / "config.json", canonical_json(cfg).dump(2) + "\n");
    std::ofstream log(dir / "log.jsonl", std::ios::binary | std::ios::trunc);
    if (!log) throw IoError("cannot open " + (dir / "log.jsonl").string());
    auto result = train::fit(cfg.model, train_set, val_set, cfg.train, [&](const train::EpochRecord& r) {
        log << train::to_json(r).dump() << "\n";
        log.flush();
    });
    train::save_checkpoint(dir / "checkpoint", result.model);

    const auto& last = result.epochs.back();
    out << ordered_json{{"checkpoint", (dir / "checkpoint").string()},
                        {"epochs", result.epochs.size()},
                        {"steps", last.step},
                        {"best_epoch", result.best_epoch},
                        {"final_loss", train::json_number(last.loss)}}
               .dump()
        << "\n";
    return kExitOk;
}

// --- eval ------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string split = "test";
    bool gt_as_pred = false;
    bool diagnostics = false;
    bool png = true;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const auto samples = train::load_split(a.data, a.split);
    const fs::path dir(a.out);
    make_dirs(dir);
    const fs::path png_dir = dir / "png";
    if (a.png) make_dirs(png_dir);

    train::MetricReport report;
    std::vector<fourier::Image> preds;
    ordered_json diag = nullptr;
    if (a.gt_as_pred) {
        report = train::evaluate_identity(samples);
        for (const auto& s : samples) preds.push_back(s.x_tar);
    } else {
        const auto model = train::load_checkpoint(a.checkpoint);
        if (!samples.empty() && samples.front().scale != model.config().scale) {
            throw ConfigError("checkpoint scale " + std::to_string(model.config().scale) +
                              " does not match dataset scale " + std::to_string(samples.front().scale));
        }
        preds = train::predict(model, samples);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            report.samples.push_back(train::measure(samples[i].id, preds[i], samples[i].x_tar));
        }
        train::summarize(report);

        if (a.diagnostics) {
            if (!model.config().use_sep_attention) {
                throw ConfigError("--diagnostics needs a model with separable attention");
            }
            nn::NoGradGuard no_grad;
            double max_dev = 0.0;
            bool open_interval = true;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const auto b = train::make_batch(samples, {i}, true);
                const auto fwd = model.forward(b.x_aux, b.y_tar, true);
                const auto& maps = fwd.diagnostics->attention;
                for (std::size_t l = 0; l < maps.size(); ++l) {
                    const auto& ah = maps[l].a_h;
                    const auto& al = maps[l].a_l;
                    for (std::size_t k = 0; k < ah.size(); ++k) {
                        max_dev = std::max(max_dev, static_cast<double>(std::abs(ah[k] + al[k] - 1.0f)));
                        open_interval = open_interval && ah[k] > 0.0f && ah[k] < 1.0f;
                    }
                    if (a.png) {
                        const std::string stem = samples[i].id + "_stage" + std::to_string(l + 1);
                        train::write_png(png_dir / (stem + "_AH.png"), channel_mean_image(ah, 0));
                        train::write_png(png_dir / (stem + "_AL.png"), channel_mean_image(al, 0));
                    }
                }
            }
            diag = {{"attention_sum_max_deviation", max_dev}, {"a_h_in_open_interval", open_interval}};
        }
    }

    if (a.png) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            train::write_png(png_dir / (samples[i].id + "_sr.png"), preds[i]);
            train::write_png(png_dir / (samples[i].id + "_err.png"),
                             train::error_map(preds[i], samples[i].x_tar));
        }
    }

    ordered_json j = train::to_json(report);
    j["split"] = a.split;
    if (!diag.is_null()) j["diagnostics"] = diag;
    write_text(dir / "report.json", j.dump(2) + "\n");
    out << j["aggregate"].dump() << "\n";
    return kExitOk;
}

// --- ablate ----------------------------------------------------------------------

struct AblateArgs {
    std::string data;
    std::string profile = "desk";
    std::size_t seeds = 3;
    std::size_t steps = 0;  // 0 keeps the profile's budget
    std::string out;
};

ordered_json t_test_json(const std::string& metric, std::optional<std::size_t> seed,
                         const std::vector<double>& a, const std::vector<double>& b) {
    const auto r = train::paired_t_test(a, b);
    ordered_json j{{"a", "full"}, {"b", "Ab1"}, {"metric", metric}};
    j["seed"] = seed ? ordered_json(*seed) : ordered_json("pooled");
    j["n"] = r.n;
    j["mean_diff"] = r.mean_diff;
    j["t"] = train::json_number(r.t);
    j["p"] = r.p;
    if (r.degenerate) j["p_report"] = "<1e-12";
    return j;
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
    if (a.seeds < 1) throw ConfigError("--seeds must be >= 1");
    const nn::ModelConfig base = model_profile(a.profile);
    train::TrainConfig tcfg = train_profile(a.profile);
    if (a.steps > 0) tcfg.max_steps = a.steps;

    const auto train_set = train::load_split(a.data, "train");
    const auto val_set = train::load_split(a.data, "val");
    const auto test_set = train::load_split(a.data, "test");
    if (!train_set.empty() && train_set.front().scale != base.scale) {
        throw ConfigError("profile scale does not match dataset scale");
    }

    ordered_json rows = ordered_json::array();
    ordered_json tests = ordered_json::array();
    std::vector<double> pooled_full_psnr;
    std::vector<double> pooled_ab1_psnr;
    std::vector<double> pooled_full_ssim;
    std::vector<double> pooled_ab1_ssim;
    for (std::size_t seed = 0; seed < a.seeds; ++seed) {
        std::map<std::string, train::MetricReport> reports;
        for (const auto& variant : nn::ablation_names()) {
            train::TrainConfig t = tcfg;
            t.seed = seed;
            const auto result = train::fit(nn::ablation_config(variant, base), train_set, val_set, t);
            auto report = train::evaluate(result.model, test_set);
            rows.push_back({{"variant", variant},
                            {"seed", seed},
                            {"psnr", train::json_number(report.mean_psnr)},
                            {"ssim", train::json_number(report.mean_ssim)},
                            {"nmse", train::json_number(report.mean_nmse)},
                            {"steps", result.epochs.back().step}});
            reports.emplace(variant, std::move(report));
        }
        const auto& full = reports.at("full");
        const auto& ab1 = reports.at("Ab1");
        tests.push_back(t_test_json("psnr", seed, full.psnr_values(), ab1.psnr_values()));
        tests.push_back(t_test_json("ssim", seed, full.ssim_values(), ab1.ssim_values()));
        for (double v : full.psnr_values()) pooled_full_psnr.push_back(v);
        for (double v : ab1.psnr_values()) pooled_ab1_psnr.push_back(v);
        for (double v : full.ssim_values()) pooled_full_ssim.push_back(v);
        for (double v : ab1.ssim_values()) pooled_ab1_ssim.push_back(v);
    }
    if (a.seeds > 1) {
        tests.push_back(t_test_json("psnr", std::nullopt, pooled_full_psnr, pooled_ab1_psnr));
        tests.push_back(t_test_json("ssim", std::nullopt, pooled_full_ssim, pooled_ab1_ssim));
    }
    const auto baseline = train::evaluate_zero_fill(test_set);

    ordered_json j{{"profile", a.profile},
                   {"seeds", a.seeds},
                   {"steps", tcfg.max_steps},
                   {"rows", rows},
                   {"t_tests", tests},
                   {"baseline",
                    {{"name", "zero_fill"},
                     {"psnr", train::json_number(baseline.mean_psnr)},
                     {"ssim", train::json_number(baseline.mean_ssim)},
                     {"nmse", train::json_number(baseline.mean_nmse)}}}};
    if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

// --- gradcheck -------------------------------------------------------------------

int cmd_gradcheck(const std::string& blocks, std::ostream& out) {
    std::vector<std::string> names;
    if (blocks == "all") {
        names = train::gradcheck_blocks();
    } else {
        std::stringstream ss(blocks);
        for (std::string name; std::getline(ss, name, ',');) {
            if (!name.empty()) names.push_back(name);
        }
    }
    if (names.empty()) throw ConfigError("no gradcheck blocks selected");

    ordered_json list = ordered_json::array();
    bool all_passed = true;
    for (const auto& name : names) {
        const auto r = train::grad_check(name);
        all_passed = all_passed && r.passed;
        list.push_back({{"block", r.block},
                        {"max_rel_error", r.max_rel_error},
                        {"worst", r.worst},
                        {"checked", r.checked},
                        {"skipped_kinks", r.skipped},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed}});
    }
    out << ordered_json{{"blocks", list}, {"passed", all_passed}}.dump(2) << "\n";
    return all_passed ? kExitOk : kExitNumeric;
}

// --- errors ----------------------------------------------------------------------

int report_error(std::ostream& err, const char* kind, const std::string& message, int code,
                 const ordered_json& extra = ordered_json::object()) {
    ordered_json e{{"kind", kind}, {"message", message}, {"exit_code", code}};
    for (const auto& [k, v] : extra.items()) e[k] = v;
    err << ordered_json{{"error", e}}.dump() << "\n";
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-contrast MR super-resolution toolkit", "msr"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic phantom dataset");
    gen_cmd->add_option("--seed", gen.seed, "Dataset seed")->required();
    gen_cmd->add_option("--count", gen.count, "Number of samples (>= 10)");
    gen_cmd->add_option("--size", gen.size, "Image height and width")->expected(2);
    gen_cmd->add_option("--scale", gen.scale, "Down-sampling factor");
    gen_cmd->add_option("--ratios", gen.ratios, "Train/val/test ratios")->expected(3);
    gen_cmd->add_option("--shapes", gen.shapes, "Shapes per phantom");
    gen_cmd->add_option("--aux-seed", gen.aux_seed, "Seed for auxiliary intensities only");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();

    std::string deg_in;
    std::string deg_out;
    int deg_scale = 2;
    auto* deg_cmd = app.add_subcommand("degrade", "Simulate a low-resolution acquisition of one image");
    deg_cmd->add_option("--in", deg_in, "Input image (.msrt, rank 2)")->required();
    deg_cmd->add_option("--scale", deg_scale, "Down-sampling factor");
    deg_cmd->add_option("--out", deg_out, "Output image")->required();

    std::string train_config;
    std::string train_data;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    train_cmd->add_option("--config", train_config, "Run config JSON")->required();
    train_cmd->add_option("--data", train_data, "Dataset directory")->required();
    train_cmd->add_option("--out", train_out, "Output directory")->required();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory");
    eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();
    eval_cmd->add_option("--out", ev.out, "Output directory")->required();
    eval_cmd->add_option("--split", ev.split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_flag("--gt-as-pred", ev.gt_as_pred, "Score the ground truth against itself");
    eval_cmd->add_flag("--diagnostics", ev.diagnostics, "Export attention maps");
    eval_cmd->add_flag("!--no-png", ev.png, "Skip PNG export");

    AblateArgs ab;
    auto* ablate_cmd = app.add_subcommand("ablate", "Train and compare the ablation variants");
    ablate_cmd->add_option("--data", ab.data, "Dataset directory")->required();
    ablate_cmd->add_option("--profile", ab.profile, "standard or desk");
    ablate_cmd->add_option("--seeds", ab.seeds, "Number of seeds (0..S-1)");
    ablate_cmd->add_option("--steps", ab.steps, "Override the step budget");
    ablate_cmd->add_option("--out", ab.out, "Also write the table to this file");

    std::string gc_blocks = "all";
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    gc_cmd->add_option("--blocks", gc_blocks, "all, or comma-separated block names");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return report_error(err, "usage", e.what(), kExitConfig);
    }

    try {
        if (*gen_cmd) return cmd_gen_data(gen, out);
        if (*deg_cmd) return cmd_degrade(deg_in, deg_out, deg_scale, out);
        if (*train_cmd) return cmd_train(train_config, train_data, train_out, out);
        if (*eval_cmd) {
            if (ev.checkpoint.empty() && !ev.gt_as_pred) {
                throw ConfigError("eval needs --checkpoint unless --gt-as-pred is given");
            }
            return cmd_eval(ev, out);
        }
        if (*ablate_cmd) return cmd_ablate(ab, out);
        if (*gc_cmd) return cmd_gradcheck(gc_blocks, out);
    } catch (const ConfigKeyError& e) {
        return report_error(err, "config", e.what(), kExitConfig, {{"keys", e.keys()}});
    } catch (const ConfigError& e) {
        return report_error(err, "config", e.what(), kExitConfig);
    } catch (const ParseError& e) {
        return report_error(err, "parse", e.what(), kExitData);
    } catch (const ShapeError& e) {
        return report_error(err, "shape", e.what(), kExitData);
    } catch (const IoError& e) {
        return report_error(err, "io", e.what(), kExitData);
    } catch (const ValueError& e) {
        return report_error(err, "value", e.what(), kExitData);
    } catch (const NumericError& e) {
        return report_error(err, "numeric", e.what(), kExitNumeric);
    } catch (const std::filesystem::filesystem_error& e) {
        return report_error(err, "io", e.what(), kExitData);
    } catch (const std::exception& e) {
        return report_error(err, "internal", e.what(), 1);
    }
    return kExitConfig;
}

}  // namespace msr::cli
