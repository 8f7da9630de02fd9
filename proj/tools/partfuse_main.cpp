// partfuse - part-based face verification pipeline.
//
// Subcommands: crop, import, score, fuse-train, fuse-apply, eval, protocol,
// synth. Reports are JSON by default; --format table prints the human view.
// PARTFUSE_THREADS caps worker threads (0 or unset = auto).

#include "partfuse/partfuse.hpp"
#include "partfuse/report.hpp"

#include <CLI11.hpp>

#ifdef PARTFUSE_WITH_OPENCV
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace partfuse;

namespace {

std::vector<Region> parse_region_list(const std::string& list) {
    std::vector<Region> out;
    for (auto name : split_fields(list)) {
        auto region = region_from_string(trim(name));
        if (!region) fail(Errc::usage, "unknown region '" + std::string(name) + "'");
        out.push_back(*region);
    }
    if (out.empty()) fail(Errc::usage, "empty region list");
    return out;
}

EmbeddingStore load_stores(const std::vector<std::string>& paths) {
    if (paths.empty()) fail(Errc::usage, "at least one --store file is required");
    EmbeddingStore store;
    for (const auto& p : paths) store.load_csv(read_file(p));
    return store;
}

ProviderMap resolve_providers(const std::vector<Region>& regions, const std::string& map_file,
                              const std::string& single_provider) {
    if (!map_file.empty() && !single_provider.empty()) {
        fail(Errc::usage, "--provider-map and --provider are mutually exclusive");
    }
    if (!map_file.empty()) return parse_provider_map(read_file(map_file));
    if (!single_provider.empty()) {
        ProviderMap pm;
        for (Region r : regions) pm[r] = single_provider;
        return pm;
    }
    fail(Errc::usage, "either --provider-map or --provider is required");
}

void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

double pct(double v) { return 100.0 * v; }

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", pct(v));
    return buf;
}

void print_eval_table(const std::string& title, const EvalReport& r) {
    std::printf("%-28s EER%% %6s  thr % .6g  FAR%% %6s  FRR%% %6s  HTER%% %6s", title.c_str(),
                fmt_pct(r.eer).c_str(), r.eer_threshold, fmt_pct(r.far).c_str(), fmt_pct(r.frr).c_str(),
                fmt_pct(r.hter).c_str());
    if (r.accuracy) std::printf("  ACC%% %6s", fmt_pct(*r.accuracy).c_str());
    std::printf("  (G=%ld I=%ld)\n", r.genuine_count, r.impostor_count);
}

std::string det_csv(const std::vector<DetPoint>& curve) {
    std::string out = "threshold,far,frr\n";
    for (const auto& p : curve) {
        out += (std::isfinite(p.threshold) ? fmt_double(p.threshold) : (p.threshold > 0 ? "inf" : "-inf"));
        out += "," + fmt_double(p.far) + "," + fmt_double(p.frr) + "\n";
    }
    return out;
}

// --- crop subcommand ---

struct CropArgs {
    std::string strategy = "parts4";
    std::string landmarks_dir;
    std::string images_dir;
    std::string out_dir;
    double margin = 1.3;
    int resize = 224;
    bool grayscale = false;
    std::string pad_fill = "replicate";
};

#ifdef PARTFUSE_WITH_OPENCV
Raster load_image(const fs::path& path) {
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) fail(Errc::io_failure, "cannot decode image " + path.string());
    if (mat.channels() == 4) cv::cvtColor(mat, mat, cv::COLOR_BGRA2BGR);
    if (mat.depth() != CV_8U) mat.convertTo(mat, CV_8U);
    Raster img(mat.cols, mat.rows, mat.channels());
    for (int y = 0; y < mat.rows; ++y) {
        const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
        std::copy_n(row, static_cast<std::size_t>(mat.cols) * mat.channels(),
                    img.data.begin() + static_cast<std::size_t>(y) * mat.cols * mat.channels());
    }
    return img;
}

void save_image(const fs::path& path, const Raster& img) {
    cv::Mat mat(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
    for (int y = 0; y < mat.rows; ++y) {
        std::copy_n(img.data.begin() + static_cast<std::size_t>(y) * img.width * img.channels,
                    static_cast<std::size_t>(img.width) * img.channels, mat.ptr<std::uint8_t>(y));
    }
    if (!cv::imwrite(path.string(), mat)) fail(Errc::io_failure, "cannot write " + path.string());
}
constexpr const char* kCropExt = ".png";
#else
Raster load_image(const fs::path& path) { return read_pnm(path); }
void save_image(const fs::path& path, const Raster& img) { write_pnm(path, img); }
constexpr const char* kCropExt = ".pgm";
#endif

fs::path find_image_file(const fs::path& dir, const std::string& image_id) {
    for (const char* ext : {".png", ".jpg", ".jpeg", ".bmp", ".pgm", ".ppm"}) {
        fs::path p = dir / (image_id + ext);
        if (fs::exists(p)) return p;
    }
    fail(Errc::io_failure, "no image file found for id '" + image_id + "' in " + dir.string());
}

int run_crop(const CropArgs& args) {
    fs::create_directories(args.out_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.landmarks_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(Errc::io_failure, "no landmark .csv files in " + args.landmarks_dir);

    CropConfig cfg;
    cfg.margin = args.margin;
    cfg.resize_to = args.resize;

    std::size_t written = 0;
    for (const fs::path& file : files) {
        LandmarkSet lm = load_landmarks(file);
        AlignResult aligned = align(lm);

        std::vector<RegionCrop> crops;
        if (args.strategy == "parts4") {
            crops = crop_parts4(aligned.landmarks, cfg);
        } else if (args.strategy == "thirds3") {
            crops = crop_thirds3(aligned.landmarks, cfg);
        } else {
            crops.push_back(crop_holistic(aligned.landmarks, cfg));
        }

        Raster img = load_image(find_image_file(args.images_dir, lm.image_id));
        if (args.grayscale) img = to_grayscale(img);
        Raster warped = warp_similarity(img, aligned.transform);
        PadFill fill = args.pad_fill == "black" ? PadFill::black : PadFill::replicate;
        for (const RegionCrop& crop : crops) {
            Raster out = extract_pixels(warped, crop, fill);
            fs::path dest = fs::path(args.out_dir) /
                            (crop_file_stem(lm.subject_id, lm.image_id, crop.tag) + kCropExt);
            save_image(dest, out);
            ++written;
        }
    }
    std::printf("wrote %zu crops from %zu landmark files to %s\n", written, files.size(),
                args.out_dir.c_str());
    return 0;
}

// --- import subcommand ---

struct ImportArgs {
    std::string embeddings_file;
    std::string provider;
    int dim = 0;
    std::string channel_mode = "rgb";
    int input_side = 224;
    std::string from_provider;
    std::string crops_dir;
    std::string out_file;
};

int run_import(const ImportArgs& args) {
    EmbeddingStore store;
    if (!args.from_provider.empty()) {
        if (args.crops_dir.empty()) fail(Errc::usage, "--from-provider requires --crops");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(args.crops_dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) fail(Errc::io_failure, "no crop files in " + args.crops_dir);
        int dim = args.dim;
        for (const fs::path& file : files) {
            CropFileName name = parse_crop_file_stem(file.stem().string());
            EmbeddingRecord rec;
            rec.subject_id = name.subject_id;
            rec.image_id = name.image_id;
            rec.region = name.region;
            rec.provider_id = args.provider;
            rec.values = invoke_embedding_provider(args.from_provider, file, name.region);
            if (dim == 0) dim = static_cast<int>(rec.values.size());
            if (static_cast<int>(rec.values.size()) != dim) {
                fail(Errc::dimension_mismatch, "provider returned " + std::to_string(rec.values.size()) +
                                                   " values for " + file.string() + ", expected " +
                                                   std::to_string(dim));
            }
            store.insert(std::move(rec));
        }
    } else {
        if (args.embeddings_file.empty()) fail(Errc::usage, "--embeddings or --from-provider is required");
        if (args.dim <= 0) fail(Errc::usage, "--dim is required when importing an embedding file");
        ProviderSpec spec;
        spec.provider_id = args.provider;
        spec.dim = args.dim;
        spec.channel_mode = channel_mode_from_string(args.channel_mode);
        spec.input_side = args.input_side;
        store.import_csv(read_file(args.embeddings_file), spec);
    }
    write_file(args.out_file, store.to_csv());
    std::printf("imported %zu embeddings into %s\n", store.size(), args.out_file.c_str());
    return 0;
}

// --- score subcommand ---

struct ScoreArgs {
    std::vector<std::string> stores;
    std::string trials_file;
    std::string regions;
    std::string provider_map;
    std::string provider;
    std::string out_file;
};

int run_score(const ScoreArgs& args) {
    EmbeddingStore store = load_stores(args.stores);
    std::vector<Region> regions = parse_region_list(args.regions);
    ProviderMap providers = resolve_providers(regions, args.provider_map, args.provider);
    std::vector<TrialPair> trials = parse_trials_csv(read_file(args.trials_file));
    ScoredTrials scored = score_trials(store, trials, regions, providers);
    write_file(args.out_file, format_scores_csv(scored));
    std::printf("scored %zu trials on %zu regions -> %s\n", scored.trials.size(), regions.size(),
                args.out_file.c_str());
    return 0;
}

// --- fuse-train / fuse-apply ---

struct FuseTrainArgs {
    std::string scores_file;
    std::string out_file;
    double l2 = 0.0;
    int max_iterations = 200;
    std::string dataset_id;
    bool allow_nonconverged = false;
};

int run_fuse_train(const FuseTrainArgs& args) {
    ScoredTrials scored = parse_scores_csv(read_file(args.scores_file));
    TrainConfig cfg;
    cfg.l2 = args.l2;
    cfg.max_iterations = args.max_iterations;
    cfg.dataset_id = args.dataset_id;
    cfg.warn = warn_to_stderr;
    FusionModel model = train_llr(scored, cfg);
    if (!model.meta.converged && !args.allow_nonconverged) {
        write_file(args.out_file, format_fusion_model(model));
        fail(Errc::not_converged, "fusion training stopped after " +
                                      std::to_string(model.meta.iterations) +
                                      " iterations without convergence (model written; rerun with "
                                      "--allow-nonconverged to accept it)");
    }
    write_file(args.out_file, format_fusion_model(model));
    std::printf("trained fusion on %zu trials: loss %.6g after %d iterations%s -> %s\n",
                scored.trials.size(), model.meta.final_loss, model.meta.iterations,
                model.meta.converged ? "" : " (not converged)", args.out_file.c_str());
    return 0;
}

struct FuseApplyArgs {
    std::string model_file;
    std::string scores_file;
    std::string out_file;
};

int run_fuse_apply(const FuseApplyArgs& args) {
    FusionModel model = parse_fusion_model(read_file(args.model_file));
    ScoredTrials scored = parse_scores_csv(read_file(args.scores_file));
    std::vector<double> fused = apply_fusion(model, scored);
    std::vector<TrialPair> trials;
    trials.reserve(scored.trials.size());
    for (const auto& t : scored.trials) trials.push_back(t.trial);
    write_file(args.out_file, format_fused_csv(trials, fused));
    std::printf("fused %zu trials -> %s\n", trials.size(), args.out_file.c_str());
    return 0;
}

// --- eval subcommand ---

struct EvalArgs {
    std::string fused_file;
    std::string report_file;
    std::string det_file;
    std::optional<double> threshold;
    std::string format = "json";
};

int run_eval(const EvalArgs& args) {
    FusedTrials fused = parse_fused_csv(read_file(args.fused_file));
    ScoreSet set;
    for (std::size_t i = 0; i < fused.trials.size(); ++i) {
        (fused.trials[i].genuine ? set.genuine : set.impostor).push_back(fused.scores[i]);
    }
    EvalReport report = args.threshold ? evaluate_at(set, *args.threshold) : evaluate(set);
    if (!args.report_file.empty()) write_file(args.report_file, dump_report(to_json(report)));
    if (!args.det_file.empty()) write_file(args.det_file, det_csv(det_curve(set)));
    if (args.format == "table") {
        print_eval_table(args.fused_file, report);
    } else {
        std::fputs(dump_report(to_json(report)).c_str(), stdout);
    }
    return 0;
}

// --- protocol subcommand ---

struct ProtocolArgs {
    std::string mode;
    std::string manifest_file;
    std::string source;
    std::vector<std::string> stores;
    std::string regions;
    std::string provider_map;
    std::string provider;
    std::uint64_t seed = 42;
    int folds = 5;
    double l2 = 0.0;
    bool paper_mode = false;
    bool no_fusion = false;
    bool search_best = false;
    bool allow_nonconverged = false;
    std::string report_file;
    std::string format = "json";
};

ProviderMap searched_map(const DatasetManifest& manifest, const EmbeddingStore& store,
                         const ProtocolConfig& cfg) {
    std::vector<std::string> images;
    for (const auto& e : manifest.entries) images.push_back(e.image_id);
    std::map<Region, std::vector<std::string>> candidates;
    for (Region r : cfg.regions) candidates[r] = store.providers_covering(r, images);
    return search_best_combination(manifest, store, cfg.regions, candidates, cfg).providers;
}

int run_protocol(const ProtocolArgs& args) {
    EmbeddingStore store = load_stores(args.stores);
    std::vector<DatasetManifest> manifests = parse_manifest_csv(read_file(args.manifest_file));

    ProtocolConfig cfg;
    cfg.regions = parse_region_list(args.regions);
    cfg.fusion = !args.no_fusion;
    cfg.paper_mode = args.paper_mode;
    cfg.folds = args.folds;
    cfg.seed = args.seed;
    cfg.l2 = args.l2;
    cfg.require_convergence = !args.allow_nonconverged;
    cfg.warn = warn_to_stderr;

    if (!args.search_best) {
        cfg.providers = resolve_providers(cfg.regions, args.provider_map, args.provider);
    }

    auto selected = [&](const DatasetManifest& m) { return args.source.empty() || m.dataset_id == args.source; };

    nlohmann::json out;
    out["protocol"] = args.mode;
    out["seed"] = args.seed;
    nlohmann::json region_names = nlohmann::json::array();
    for (Region r : cfg.regions) region_names.push_back(std::string(to_string(r)));
    out["regions"] = region_names;
    out["fusion"] = cfg.fusion;

    if (args.mode == "eer") {
        out["paper_mode"] = cfg.paper_mode;
        nlohmann::json datasets = nlohmann::json::array();
        for (const auto& manifest : manifests) {
            if (!selected(manifest)) continue;
            ProtocolConfig dataset_cfg = cfg;
            if (args.search_best) dataset_cfg.providers = searched_map(manifest, store, cfg);
            SingleDatasetResult result = run_single_dataset_eer(manifest, store, dataset_cfg);
            nlohmann::json entry;
            entry["dataset"] = manifest.dataset_id;
            entry["report"] = to_json(result.report);
            nlohmann::json pm;
            for (const auto& [r, p] : dataset_cfg.providers) pm[std::string(to_string(r))] = p;
            entry["providers"] = pm;
            if (result.model) entry["model"] = to_json(*result.model);
            datasets.push_back(entry);
            if (args.format == "table") {
                print_eval_table(manifest.dataset_id, result.report);
            }
        }
        out["datasets"] = datasets;
    } else if (args.mode == "cross") {
        if (args.search_best) fail(Errc::usage, "--search-best applies to the eer protocol only");
        std::optional<std::string> source;
        if (!args.source.empty()) source = args.source;
        std::vector<CrossRow> rows = run_cross_dataset(manifests, store, cfg, source);
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& row : rows) jrows.push_back(to_json(row));
        out["rows"] = jrows;
        if (args.format == "table") {
            std::printf("%-12s", "source");
            for (const auto& [target, h] : rows.front().hter) std::printf(" %10s", target.c_str());
            std::printf(" %16s %8s\n", "Avg +- S.D.", "Max.");
            for (const auto& row : rows) {
                std::printf("%-12s", row.source.c_str());
                for (const auto& [target, h] : row.hter) std::printf(" %10s", fmt_pct(h).c_str());
                std::printf("     %s +- %s %8s\n", fmt_pct(row.mean).c_str(), fmt_pct(row.stddev).c_str(),
                            fmt_pct(row.max).c_str());
            }
        }
    } else if (args.mode == "kfold") {
        nlohmann::json datasets = nlohmann::json::array();
        for (const auto& manifest : manifests) {
            if (!selected(manifest)) continue;
            ProtocolConfig dataset_cfg = cfg;
            if (args.search_best) dataset_cfg.providers = searched_map(manifest, store, cfg);
            KfoldResult result = run_kfold_accuracy(manifest, store, dataset_cfg);
            nlohmann::json entry = to_json(result);
            entry["dataset"] = manifest.dataset_id;
            datasets.push_back(entry);
            if (args.format == "table") {
                std::printf("%-28s mean accuracy %6s%%  folds", manifest.dataset_id.c_str(),
                            fmt_pct(result.mean_accuracy).c_str());
                for (double a : result.fold_accuracy) std::printf(" %s", fmt_pct(a).c_str());
                std::printf("\n");
            }
        }
        out["datasets"] = datasets;
    } else { // ymu-matrix
        nlohmann::json datasets = nlohmann::json::array();
        for (const auto& manifest : manifests) {
            if (!selected(manifest)) continue;
            ProtocolConfig dataset_cfg = cfg;
            if (args.search_best) dataset_cfg.providers = searched_map(manifest, store, cfg);
            YmuMatrixResult result = run_ymu_matrix(manifest, store, dataset_cfg);
            nlohmann::json entry = to_json(result);
            entry["dataset"] = manifest.dataset_id;
            datasets.push_back(entry);
            if (args.format == "table") {
                std::printf("%-28s B vs B %6s  A vs A %6s  A vs B %6s (EER%%)\n",
                            manifest.dataset_id.c_str(), fmt_pct(result.before_vs_before.eer).c_str(),
                            fmt_pct(result.after_vs_after.eer).c_str(),
                            fmt_pct(result.before_vs_after.eer).c_str());
            }
        }
        out["datasets"] = datasets;
    }

    if (!args.report_file.empty()) write_file(args.report_file, dump_report(out));
    if (args.format != "table") std::fputs(dump_report(out).c_str(), stdout);
    return 0;
}

// --- synth subcommand ---

struct SynthArgs {
    std::string spec_file;
    std::string out_dir;
};

int run_synth(const SynthArgs& args) {
    ScenarioSpec spec = parse_scenario(read_file(args.spec_file));
    SyntheticData data = generate(spec);
    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "manifest.csv", format_manifest_csv({data.manifest}));
    write_file(fs::path(args.out_dir) / "embeddings.csv", data.store.to_csv());
    write_file(fs::path(args.out_dir) / "trials.csv",
               format_trials_csv(build_trials(data.manifest, TrialMode::before_vs_after)));
    std::printf("generated %d subjects x %zu regions (dim %d) into %s\n", spec.n_subjects,
                spec.region_noise.size(), spec.dim, args.out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"partfuse - part-based face verification: landmark crops, per-region cosine "
                 "scores, LLR fusion and evaluation protocols"};
    app.require_subcommand(1);

    CropArgs crop_args;
    auto* crop = app.add_subcommand("crop", "Crop aligned face regions from images");
    crop->add_option("--strategy", crop_args.strategy, "parts4 | thirds3 | holistic")
        ->check(CLI::IsMember({"parts4", "thirds3", "holistic"}))
        ->capture_default_str();
    crop->add_option("--landmarks", crop_args.landmarks_dir, "directory of landmark .csv files")->required();
    crop->add_option("--images", crop_args.images_dir, "directory of input images")->required();
    crop->add_option("--out", crop_args.out_dir, "output directory for crops")->required();
    crop->add_option("--margin", crop_args.margin, "square expansion margin factor")->capture_default_str();
    crop->add_option("--resize", crop_args.resize, "output square side in pixels")->capture_default_str();
    crop->add_flag("--grayscale", crop_args.grayscale, "convert to grayscale before cropping");
    crop->add_option("--pad-fill", crop_args.pad_fill, "out-of-image fill: replicate | black")
        ->check(CLI::IsMember({"replicate", "black"}))
        ->capture_default_str();

    ImportArgs import_args;
    auto* import_cmd = app.add_subcommand("import", "Validate embeddings into a store file");
    import_cmd->add_option("--embeddings", import_args.embeddings_file, "embedding CSV to import");
    import_cmd->add_option("--provider", import_args.provider, "provider id")->required();
    import_cmd->add_option("--dim", import_args.dim, "embedding dimension");
    import_cmd->add_option("--channel-mode", import_args.channel_mode, "rgb | grayscale")
        ->check(CLI::IsMember({"rgb", "grayscale"}))
        ->capture_default_str();
    import_cmd->add_option("--input-side", import_args.input_side, "provider input side in pixels")
        ->capture_default_str();
    import_cmd->add_option("--from-provider", import_args.from_provider,
                           "run this command per crop instead of reading a CSV");
    import_cmd->add_option("--crops", import_args.crops_dir, "crop directory for --from-provider");
    import_cmd->add_option("--out", import_args.out_file, "output store file")->required();

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Cosine-score trial pairs per region");
    score->add_option("--store", score_args.stores, "embedding store file (repeatable)")->required();
    score->add_option("--trials", score_args.trials_file, "trial list CSV")->required();
    score->add_option("--regions", score_args.regions, "comma-separated region list")->required();
    score->add_option("--provider-map", score_args.provider_map, "region=provider file");
    score->add_option("--provider", score_args.provider, "one provider for all regions");
    score->add_option("--out", score_args.out_file, "output scores CSV")->required();

    FuseTrainArgs fuse_train_args;
    auto* fuse_train = app.add_subcommand("fuse-train", "Train LLR score fusion");
    fuse_train->add_option("--scores", fuse_train_args.scores_file, "scores CSV")->required();
    fuse_train->add_option("--out", fuse_train_args.out_file, "output model file")->required();
    fuse_train->add_option("--l2", fuse_train_args.l2, "L2 penalty on the weights")->capture_default_str();
    fuse_train->add_option("--max-iterations", fuse_train_args.max_iterations, "Newton iteration cap")
        ->capture_default_str();
    fuse_train->add_option("--dataset-id", fuse_train_args.dataset_id, "dataset tag stored in the model");
    fuse_train->add_flag("--allow-nonconverged", fuse_train_args.allow_nonconverged,
                         "accept a model that hit the iteration cap");

    FuseApplyArgs fuse_apply_args;
    auto* fuse_apply = app.add_subcommand("fuse-apply", "Apply a fusion model to scores");
    fuse_apply->add_option("--model", fuse_apply_args.model_file, "fusion model file")->required();
    fuse_apply->add_option("--scores", fuse_apply_args.scores_file, "scores CSV")->required();
    fuse_apply->add_option("--out", fuse_apply_args.out_file, "output fused CSV")->required();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Verification metrics for fused scores");
    eval_cmd->add_option("--fused", eval_args.fused_file, "fused scores CSV")->required();
    eval_cmd->add_option("--report", eval_args.report_file, "output report JSON");
    eval_cmd->add_option("--det", eval_args.det_file, "output DET curve CSV");
    double eval_threshold = 0;
    auto* thr =
        eval_cmd->add_option("--threshold", eval_threshold, "evaluate at this fixed threshold");
    eval_cmd->add_option("--format", eval_args.format, "json | table")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();

    ProtocolArgs protocol_args;
    auto* protocol = app.add_subcommand("protocol", "Run an evaluation protocol end to end");
    protocol->add_option("mode", protocol_args.mode, "eer | cross | kfold | ymu-matrix")
        ->required()
        ->check(CLI::IsMember({"eer", "cross", "kfold", "ymu-matrix"}));
    protocol->add_option("--manifest", protocol_args.manifest_file, "dataset manifest CSV")->required();
    protocol->add_option("--source", protocol_args.source, "restrict to this dataset id");
    protocol->add_option("--store", protocol_args.stores, "embedding store file (repeatable)")->required();
    protocol->add_option("--regions", protocol_args.regions, "comma-separated region list")->required();
    protocol->add_option("--provider-map", protocol_args.provider_map, "region=provider file");
    protocol->add_option("--provider", protocol_args.provider, "one provider for all regions");
    protocol->add_option("--seed", protocol_args.seed, "seed for folds and sampling")->capture_default_str();
    protocol->add_option("--folds", protocol_args.folds, "fold count")->capture_default_str();
    protocol->add_option("--l2", protocol_args.l2, "L2 penalty on fusion weights")->capture_default_str();
    protocol->add_flag("--paper-mode", protocol_args.paper_mode,
                       "train fusion on the whole dataset instead of leak-free folds");
    protocol->add_flag("--no-fusion", protocol_args.no_fusion, "evaluate one region without fusion");
    protocol->add_flag("--search-best", protocol_args.search_best,
                       "exhaustive per-region provider search by training EER");
    protocol->add_flag("--allow-nonconverged", protocol_args.allow_nonconverged,
                       "accept fusion fits that hit the iteration cap");
    protocol->add_option("--report", protocol_args.report_file, "output report JSON");
    protocol->add_option("--format", protocol_args.format, "json | table")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    synth->add_option("--spec", synth_args.spec_file, "scenario key=value file")->required();
    synth->add_option("--out-dir", synth_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (thr->count() > 0) eval_args.threshold = eval_threshold;
        if (crop->parsed()) return run_crop(crop_args);
        if (import_cmd->parsed()) return run_import(import_args);
        if (score->parsed()) return run_score(score_args);
        if (fuse_train->parsed()) return run_fuse_train(fuse_train_args);
        if (fuse_apply->parsed()) return run_fuse_apply(fuse_apply_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (protocol->parsed()) return run_protocol(protocol_args);
        if (synth->parsed()) return run_synth(synth_args);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == Errc::not_converged) return 3;
        if (e.code() == Errc::usage) return 1;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
