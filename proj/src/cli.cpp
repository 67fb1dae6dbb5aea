#include "qigl/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace qigl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Tags for derived rng streams, so evaluation, emission, and synthetic data
// never consume from the training stream.
constexpr std::uint64_t kTagSynth = 0xda7aULL;
constexpr std::uint64_t kTagEmit = 0x6e60ULL;
constexpr std::uint64_t kTagEval = 0xe7a1ULL;

std::string now_utc_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << text;
        if (!out) throw IoError("write failed for " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename temp file onto " + path.string());
}

std::string csv_row(const EpochRecord& rec) {
    std::ostringstream row;
    row << rec.epoch << ',' << format_double(rec.critic_loss) << ','
        << format_double(rec.generator_loss) << ',' << format_double(rec.frechet) << ','
        << format_double(rec.wall_seconds) << '\n';
    return row.str();
}

GrayImage row_to_image(const Vec& pixel_row, int width, int height) {
    GrayImage img{width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height)};
    for (Index j = 0; j < pixel_row.size(); ++j) {
        img.pixels[static_cast<std::size_t>(j)] = quantize_unit(pixel_row[j]);
    }
    return img;
}

std::string image_name(int index, ImageFormat format) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "gen_%05d.%s", index,
                  format == ImageFormat::Pgm ? "pgm" : "png");
    return buf;
}

void emit_images(const Checkpoint& ckpt, int count, const fs::path& dir, ImageFormat format,
                 std::uint64_t seed) {
    fs::create_directories(dir);
    if (count <= 0) return;
    Rng rng = Rng::derive(seed, kTagEmit);
    const Mat scaled = generate_scaled_features(ckpt.ensemble, count, rng);
    const Mat pixels = inverse_transform(ckpt.pca, unscale_scores(ckpt.pca, scaled));
    if (static_cast<Index>(ckpt.image_width) * ckpt.image_height != pixels.cols()) {
        throw ShapeError("checkpoint image dimensions do not match the PCA model");
    }
    for (int i = 0; i < count; ++i) {
        save_image(row_to_image(pixels.row(i), ckpt.image_width, ckpt.image_height),
                   dir / image_name(i, format), format);
    }
}

int find_latest_checkpoint_epoch(const fs::path& out) {
    int best = -1;
    if (!fs::is_directory(out)) return best;
    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        int epoch = 0;
        if (std::sscanf(name.c_str(), "checkpoint_%d.ckpt", &epoch) == 1) {
            best = std::max(best, epoch);
        }
    }
    return best;
}

Checkpoint snapshot(const RunConfig& config, const FeaturePipeline& pipe,
                    const GeneratorEnsemble& ensemble, const CriticParams& critic,
                    const AdamState& gen_opt, const AdamState& critic_opt, const Rng& rng,
                    int epoch, const std::vector<EpochRecord>& history) {
    Checkpoint c;
    c.config_text = canonical_config_text(config);
    c.epoch = epoch;
    c.image_width = pipe.dataset.width();
    c.image_height = pipe.dataset.height();
    c.ensemble = ensemble;
    c.critic = critic;
    c.pca = pipe.pca;
    c.gen_opt = gen_opt;
    c.critic_opt = critic_opt;
    c.rng_state = rng.state();
    c.history = history;
    return c;
}

double run_ablation_cell(const RunConfig& cell) {
    FeaturePipeline pipe = build_feature_pipeline(cell);
    Rng rng(cell.seed);
    GeneratorEnsemble ensemble = GeneratorEnsemble::make(cell.sub_generators, cell.qubits,
                                                         cell.layers, cell.assignment_mode(),
                                                         &rng);
    CriticParams critic = CriticParams::init(rng, cell.feature_count());
    critic.head = cell.loss_mode() == LossMode::Bce ? CriticHead::Sigmoid : CriticHead::Linear;
    AdamState gen_opt = make_generator_opt_state(ensemble);
    AdamState critic_opt = make_critic_opt_state(critic);

    const auto records = train(pipe.scaled_scores, ensemble, critic, cell.train_config(),
                               gen_opt, critic_opt, rng, cell.eval_samples);
    if (!records.empty()) return records.back().frechet;
    Rng eval_rng = Rng::derive(cell.seed, kTagEval);
    return generated_vs_real_frechet(ensemble, pipe.scaled_scores, cell.eval_samples, eval_rng);
}

}  // namespace

Dataset resolve_dataset(const RunConfig& config) {
    Dataset data;
    if (!config.dataset.empty()) {
        std::set<std::string> exclude;
        if (!config.exclude.empty()) exclude = read_exclusion_list(config.exclude);
        data = load_dataset(config.dataset, -1, -1, exclude);
    } else {
        Rng rng = Rng::derive(config.seed, kTagSynth);
        data = synth_dataset(parse_synth_kind(config.synth_kind), config.synth_n,
                             config.synth_size, rng, config.synth_jitter);
    }
    if (config.he) {
        for (auto& image : data.images) image = histogram_equalize(image);
    }
    return data;
}

FeaturePipeline build_feature_pipeline(const RunConfig& config) {
    FeaturePipeline pipe;
    pipe.dataset = resolve_dataset(config);
    const Mat pixels = flatten_normalize(pipe.dataset);
    pipe.pca = fit_pca(pixels, config.pca_components);
    pipe.scaled_scores = scale_scores(pipe.pca, transform(pipe.pca, pixels));
    return pipe;
}

fs::path checkpoint_path(const fs::path& out, int epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "checkpoint_%05d.ckpt", epoch);
    return out / buf;
}

std::string metrics_note() {
    return "Frechet distance computed in this model's own scaled PCA feature space; "
           "values are not comparable to Inception-feature FID scores reported elsewhere.";
}

void cmd_preprocess(const PreprocessOptions& options) {
    if (!fs::is_directory(options.input)) {
        throw IoError("input is not a directory: " + options.input.string());
    }
    std::set<std::string> exclude;
    if (!options.exclude.empty()) exclude = read_exclusion_list(options.exclude);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options.input)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext != ".pgm" && ext != ".png") continue;
        if (exclude.count(entry.path().filename().string())) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    if (files.empty()) throw DataError("empty dataset: " + options.input.string());

    fs::create_directories(options.out);
    json manifest;
    manifest["command"] = "preprocess";
    manifest["he"] = options.he;
    {
        std::string opts = "preprocess\nhe = " + std::string(options.he ? "true" : "false");
        for (const auto& name : exclude) opts += "\nexclude " + name;
        manifest["options_hash"] = hex64(fnv1a64(opts));
    }

    int width = -1, height = -1;
    std::vector<std::string> errors;
    json entries = json::array();
    for (const auto& file : files) {
        try {
            GrayImage img = load_image(file);
            if (width < 0) {
                width = img.width;
                height = img.height;
            } else if (img.width != width || img.height != height) {
                errors.push_back(file.filename().string() + ": dimensions " +
                                 std::to_string(img.width) + "x" + std::to_string(img.height) +
                                 " do not match " + std::to_string(width) + "x" +
                                 std::to_string(height));
                continue;
            }
            if (options.he) img = histogram_equalize(img);
            const std::string out_name = file.stem().string() + ".pgm";
            save_image(img, options.out / out_name, ImageFormat::Pgm);

            std::string hashed = std::to_string(img.width) + "x" + std::to_string(img.height) + ":";
            hashed.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
            entries.push_back({{"file", out_name},
                               {"width", img.width},
                               {"height", img.height},
                               {"hash", hex64(fnv1a64(hashed))}});
        } catch (const IoError& err) {
            errors.push_back(err.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "preprocess failed for " + std::to_string(errors.size()) + " file(s):";
        for (const auto& e : errors) msg += "\n  " + e;
        throw IoError(msg);
    }
    manifest["images"] = entries;
    write_text_atomic(options.out / "manifest.json", manifest.dump(2) + "\n");
}

void cmd_train(const TrainOptions& options) {
    const RunConfig& config = options.config;
    config.validate();
    fs::create_directories(config.out);

    FeaturePipeline pipe = build_feature_pipeline(config);

    const double captured = pipe.pca.explained_variance_ratio.sum();
    std::cout << "pca: " << config.pca_components << " components capture "
              << format_double(captured * 100.0) << "% of the variance\n";
    if (const auto k_eta = components_for_variance(pipe.pca, config.variance_eta)) {
        std::cout << "pca: " << *k_eta << " components reach the "
                  << format_double(config.variance_eta * 100.0) << "% threshold\n";
    } else {
        std::cout << "pca: the " << format_double(config.variance_eta * 100.0)
                  << "% threshold is not reached within " << config.pca_components
                  << " components\n";
    }

    const std::string canonical = canonical_config_text(config);
    const fs::path csv_path = fs::path(config.out) / "metrics.csv";

    Rng rng(config.seed);
    GeneratorEnsemble ensemble;
    CriticParams critic;
    AdamState gen_opt;
    AdamState critic_opt;
    std::vector<EpochRecord> history;
    int start_epoch = 0;

    if (options.resume) {
        const int latest = find_latest_checkpoint_epoch(config.out);
        if (latest < 0) throw IoError("no checkpoint to resume from in " + config.out);
        Checkpoint ckpt = load_checkpoint(checkpoint_path(config.out, latest));
        if (ckpt.config_text != canonical) {
            throw ConfigError("resume config does not match the checkpoint's config");
        }
        ensemble = ckpt.ensemble;
        critic = ckpt.critic;
        pipe.pca = ckpt.pca;
        gen_opt = ckpt.gen_opt;
        critic_opt = ckpt.critic_opt;
        history = ckpt.history;
        rng.set_state(ckpt.rng_state);
        start_epoch = ckpt.epoch;
        std::cout << "resuming from epoch " << start_epoch << "\n";
    } else {
        ensemble = GeneratorEnsemble::make(config.sub_generators, config.qubits, config.layers,
                                           config.assignment_mode(), &rng);
        critic = CriticParams::init(rng, config.feature_count());
        critic.head = config.loss_mode() == LossMode::Bce ? CriticHead::Sigmoid
                                                          : CriticHead::Linear;
        gen_opt = make_generator_opt_state(ensemble);
        critic_opt = make_critic_opt_state(critic);
        write_text_atomic(csv_path, "# config_hash=" + config_hash(config) +
                                        "\nepoch,L_D,L_G,frechet,wall_seconds\n");
        save_checkpoint(snapshot(config, pipe, ensemble, critic, gen_opt, critic_opt, rng, 0,
                                 history),
                        checkpoint_path(config.out, 0));
    }

    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw IoError("cannot append to " + csv_path.string());

    auto on_epoch = [&](const EpochRecord& raw) {
        EpochRecord rec = raw;
        if (!config.log_timing) rec.wall_seconds = 0.0;
        history.push_back(rec);
        csv << csv_row(rec);
        csv.flush();
        if (rec.epoch % config.checkpoint_every == 0 || rec.epoch == config.epochs) {
            save_checkpoint(snapshot(config, pipe, ensemble, critic, gen_opt, critic_opt, rng,
                                     rec.epoch, history),
                            checkpoint_path(config.out, rec.epoch));
        }
        std::cout << "epoch " << rec.epoch << ": L_D=" << format_double(rec.critic_loss)
                  << " L_G=" << format_double(rec.generator_loss)
                  << " frechet=" << format_double(rec.frechet) << "\n";
    };

    train(pipe.scaled_scores, ensemble, critic, config.train_config(), gen_opt, critic_opt,
          rng, config.eval_samples, start_epoch, on_epoch);

    if (config.emit_images > 0) {
        const int final_epoch = history.empty() ? start_epoch : history.back().epoch;
        const Checkpoint final_ckpt = load_checkpoint(checkpoint_path(config.out, final_epoch));
        emit_images(final_ckpt, config.emit_images, fs::path(config.out) / "images",
                    ImageFormat::Pgm, config.seed);
    }
}

void cmd_generate(const GenerateOptions& options) {
    const Checkpoint ckpt = load_checkpoint(options.checkpoint);
    const RunConfig config = parse_config_text(ckpt.config_text);
    if (ckpt.pca.components() != ckpt.ensemble.feature_count()) {
        throw ShapeError("checkpoint PCA component count does not match the generator");
    }
    fs::create_directories(options.out);
    if (options.count == 0) return;
    if (options.count < 0) throw ArgumentError("image count must be >= 0");
    emit_images(ckpt, options.count, options.out, options.format,
                options.seed.value_or(config.seed));
}

MetricsReport cmd_evaluate(const EvaluateOptions& options) {
    const Checkpoint ckpt = load_checkpoint(options.checkpoint);
    RunConfig config = parse_config_text(ckpt.config_text);
    if (options.n_samples < 2) throw DataError("evaluation needs n_samples >= 2");
    if (options.space != "feature" && options.space != "pixel") {
        throw ArgumentError("space must be 'feature' or 'pixel'");
    }
    const std::uint64_t seed = options.seed.value_or(config.seed);

    auto frechet_for = [&](const Dataset& data, std::uint64_t tag) {
        const Mat pixels = flatten_normalize(data);
        Rng rng = Rng::derive(seed, kTagEval + tag);
        if (options.space == "feature") {
            const Mat real_scaled = scale_scores(ckpt.pca, transform(ckpt.pca, pixels));
            return generated_vs_real_frechet(ckpt.ensemble, real_scaled, options.n_samples, rng);
        }
        const Mat scaled = generate_scaled_features(ckpt.ensemble, options.n_samples, rng);
        Mat fake_pixels = inverse_transform(ckpt.pca, unscale_scores(ckpt.pca, scaled));
        fake_pixels = fake_pixels.cwiseMax(0.0).cwiseMin(1.0);
        return frechet_distance(fit_gaussian(pixels), fit_gaussian(fake_pixels));
    };

    auto load_dir = [&](const fs::path& dir) {
        std::set<std::string> exclude;
        if (!config.exclude.empty()) exclude = read_exclusion_list(config.exclude);
        Dataset data = load_dataset(dir, -1, -1, exclude);
        if (config.he) {
            for (auto& image : data.images) image = histogram_equalize(image);
        }
        return data;
    };

    MetricsReport report;
    report.n_samples = options.n_samples;
    report.space = options.space;
    report.seed = seed;
    report.checkpoint_epoch = ckpt.epoch;
    report.note = metrics_note();
    report.config_hash = config_hash(config);
    report.timestamp = now_utc_iso8601();

    if (options.per_class) {
        if (options.dataset.empty() || !fs::is_directory(options.dataset)) {
            throw ArgumentError("--per-class needs a dataset directory of class subdirectories");
        }
        std::vector<fs::path> class_dirs;
        for (const auto& entry : fs::directory_iterator(options.dataset)) {
            if (entry.is_directory()) class_dirs.push_back(entry.path());
        }
        std::sort(class_dirs.begin(), class_dirs.end());
        if (class_dirs.empty()) throw DataError("no class subdirectories found");
        double pooled = 0.0;
        for (const auto& dir : class_dirs) {
            const std::string label = dir.filename().string();
            const double value = frechet_for(load_dir(dir), fnv1a64(label));
            report.per_class[label] = value;
            pooled += value;
        }
        report.frechet = pooled / static_cast<double>(class_dirs.size());
    } else {
        Dataset data = options.dataset.empty() ? resolve_dataset(config)
                                               : load_dir(options.dataset);
        report.frechet = frechet_for(data, 0);
    }

    const std::string text = metrics_to_json(report);
    std::cout << text;
    if (!options.out.empty()) {
        fs::create_directories(options.out);
        write_text_atomic(options.out / "metrics.json", text);
    }
    return report;
}

void cmd_ablate(const AblateOptions& options) {
    const RunConfig& base = options.config;
    base.validate();
    fs::create_directories(base.out);
    const fs::path csv_path = fs::path(base.out) / "ablation.csv";

    std::set<std::string> done;
    if (fs::exists(csv_path)) {
        std::ifstream in(csv_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("assignment,", 0) == 0) continue;
            const auto first = line.find(',');
            const auto second = line.find(',', first + 1);
            const auto third = line.find(',', second + 1);
            if (third == std::string::npos) continue;
            done.insert(line.substr(0, third));
        }
    } else {
        write_text_atomic(csv_path, "# config_hash=" + config_hash(base) +
                                        "\nassignment,loss,he,seed,frechet\n");
    }

    std::ofstream csv(csv_path, std::ios::app);
    if (!csv) throw IoError("cannot append to " + csv_path.string());

    // Row order mirrors the ablation table: within each HE block, the
    // conventional cells first, Wasserstein after plain BCE.
    for (const bool he : {false, true}) {
        for (const std::string assignment : {"conventional", "balanced"}) {
            for (const std::string loss : {"bce", "wasserstein"}) {
                const std::string tag =
                    assignment + "," + loss + "," + std::string(he ? "on" : "off");
                if (done.count(tag)) {
                    std::cout << "ablate: " << tag << " already done, skipping\n";
                    continue;
                }
                RunConfig cell = base;
                cell.he = he;
                cell.assignment = assignment;
                cell.loss = loss;
                const double frechet = run_ablation_cell(cell);
                csv << tag << ',' << cell.seed << ',' << format_double(frechet) << '\n';
                csv.flush();
                std::cout << "ablate: " << tag << " frechet=" << format_double(frechet) << "\n";
            }
        }
    }
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Hybrid quantum-classical generative learning over PCA image features"};
    app.require_subcommand(1);

    PreprocessOptions pre;
    auto* preprocess = app.add_subcommand("preprocess", "Equalize and repack a dataset as PGM");
    preprocess->add_option("input", pre.input, "input image directory")->required();
    preprocess->add_option("--out", pre.out, "output directory")->required();
    preprocess->add_flag("--he", pre.he, "apply histogram equalization");
    preprocess->add_option("--exclude", pre.exclude, "exclusion list file (one name per line)");

    std::string train_config_path;
    bool train_resume = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<std::string> assignment_override;
    std::optional<std::string> loss_override;
    bool he_on = false;
    bool he_off = false;
    auto* train_cmd = app.add_subcommand("train", "Fit PCA and run adversarial training");
    train_cmd->add_option("--config", train_config_path, "run config file")->required();
    train_cmd->add_flag("--resume", train_resume, "resume from the latest checkpoint");
    train_cmd->add_option("--seed", seed_override, "override the config seed");
    train_cmd->add_option("--out", out_override, "override the output directory");
    train_cmd->add_option("--assignment", assignment_override, "balanced | conventional")
        ->check(CLI::IsMember({"balanced", "conventional"}));
    train_cmd->add_option("--loss", loss_override, "wasserstein | bce")
        ->check(CLI::IsMember({"wasserstein", "bce"}));
    train_cmd->add_flag("--he", he_on, "enable histogram equalization");
    train_cmd->add_flag("--no-he", he_off, "disable histogram equalization");

    GenerateOptions gen;
    std::string gen_format = "pgm";
    auto* generate = app.add_subcommand("generate", "Sample images from a checkpoint");
    generate->add_option("checkpoint", gen.checkpoint, "checkpoint file")->required();
    generate->add_option("-n,--count", gen.count, "number of images")->required();
    generate->add_option("--out", gen.out, "output directory")->required();
    generate->add_option("--format", gen_format, "pgm | png")
        ->check(CLI::IsMember({"pgm", "png"}));
    generate->add_option("--seed", gen.seed, "override the checkpoint seed");

    EvaluateOptions eval;
    auto* evaluate = app.add_subcommand("evaluate", "Frechet metrics for a checkpoint");
    evaluate->add_option("checkpoint", eval.checkpoint, "checkpoint file")->required();
    evaluate->add_option("--dataset", eval.dataset,
                         "dataset directory (defaults to the checkpoint's source)");
    evaluate->add_option("-n,--samples", eval.n_samples, "generated sample count");
    evaluate->add_option("--seed", eval.seed, "override the checkpoint seed");
    evaluate->add_option("--space", eval.space, "feature | pixel")
        ->check(CLI::IsMember({"feature", "pixel"}));
    evaluate->add_flag("--per-class", eval.per_class, "treat subdirectories as classes");
    evaluate->add_option("--out", eval.out, "directory for metrics.json");

    std::string ablate_config_path;
    auto* ablate = app.add_subcommand("ablate",
                                      "Run the assignment x loss x HE grid with a shared seed");
    ablate->add_option("--config", ablate_config_path, "run config file")->required();
    ablate->add_option("--seed", seed_override, "override the config seed");
    ablate->add_option("--out", out_override, "override the output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 1;
    }

    auto apply_overrides = [&](RunConfig config) {
        if (seed_override) config.seed = *seed_override;
        if (out_override) config.out = *out_override;
        if (assignment_override) config.assignment = *assignment_override;
        if (loss_override) config.loss = *loss_override;
        if (he_on && he_off) throw ConfigError("--he and --no-he are mutually exclusive");
        if (he_on) config.he = true;
        if (he_off) config.he = false;
        config.validate();
        return config;
    };

    try {
        if (preprocess->parsed()) {
            cmd_preprocess(pre);
        } else if (train_cmd->parsed()) {
            TrainOptions options;
            options.config = apply_overrides(load_config(train_config_path));
            options.resume = train_resume;
            cmd_train(options);
        } else if (generate->parsed()) {
            gen.format = gen_format == "png" ? ImageFormat::Png : ImageFormat::Pgm;
            cmd_generate(gen);
        } else if (evaluate->parsed()) {
            cmd_evaluate(eval);
        } else if (ablate->parsed()) {
            AblateOptions options;
            options.config = apply_overrides(load_config(ablate_config_path));
            cmd_ablate(options);
        }
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    } catch (const ArgumentError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace qigl
