#include "cli_runner.hpp"
#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <fstream>

using namespace partfuse;

namespace {

std::string slurp(const std::string& path) { return read_file(path); }

void spit(const std::string& path, const std::string& content) { write_file(path, content); }

using testutil::scenario_text;

} // namespace

TEST_CASE("help documents every subcommand and its flags") {
    auto top = cli::run("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"crop", "import", "score", "fuse-train", "fuse-apply", "eval", "protocol", "synth"}) {
        CHECK(top.output.find(sub) != std::string::npos);
    }
    auto crop = cli::run("crop --help");
    CHECK(crop.exit_code == 0);
    for (const char* flag : {"--strategy", "--landmarks", "--images", "--out", "--margin", "--resize"}) {
        CHECK(crop.output.find(flag) != std::string::npos);
    }
    auto score = cli::run("score --help");
    for (const char* flag : {"--store", "--trials", "--regions", "--provider-map", "--out"}) {
        CHECK(score.output.find(flag) != std::string::npos);
    }
    auto protocol = cli::run("protocol --help");
    for (const char* flag : {"--manifest", "--source", "--seed", "--folds", "--report", "--paper-mode"}) {
        CHECK(protocol.output.find(flag) != std::string::npos);
    }
    auto eval = cli::run("eval --help");
    for (const char* flag : {"--fused", "--report", "--det", "--threshold"}) {
        CHECK(eval.output.find(flag) != std::string::npos);
    }
    auto fuse = cli::run("fuse-train --help");
    CHECK(fuse.output.find("--l2") != std::string::npos);
    auto fuse_apply = cli::run("fuse-apply --help");
    for (const char* flag : {"--model", "--scores", "--out"}) {
        CHECK(fuse_apply.output.find(flag) != std::string::npos);
    }
    auto import_help = cli::run("import --help");
    for (const char* flag : {"--embeddings", "--provider", "--dim", "--from-provider", "--crops"}) {
        CHECK(import_help.output.find(flag) != std::string::npos);
    }
    auto synth = cli::run("synth --help");
    for (const char* flag : {"--spec", "--out-dir"}) {
        CHECK(synth.output.find(flag) != std::string::npos);
    }
}

TEST_CASE("missing arguments are a usage error") {
    CHECK(cli::run("protocol eer").exit_code == 1);
    CHECK(cli::run("eval").exit_code == 1);
    CHECK(cli::run("no-such-command").exit_code == 1);
}

TEST_CASE("eval on a separated fixture reports zero eer") {
    cli::ScratchDir dir("eval");
    spit(dir.file("fused.csv"), "image_a,image_b,label,score\n"
                                "a1,b1,genuine,0.9\n"
                                "a2,b2,genuine,0.8\n"
                                "a3,b3,impostor,0.2\n"
                                "a4,b4,impostor,0.1\n");
    auto run = cli::run("eval --fused " + dir.file("fused.csv") + " --report " + dir.file("report.json") +
                        " --det " + dir.file("det.csv"));
    REQUIRE(run.exit_code == 0);
    auto report = nlohmann::json::parse(slurp(dir.file("report.json")));
    CHECK(report["eer"].get<double>() == 0.0);
    CHECK(report["counts"]["G"].get<int>() == 2);
    CHECK(report["counts"]["I"].get<int>() == 2);
    std::string det = slurp(dir.file("det.csv"));
    CHECK(det.rfind("threshold,far,frr\n", 0) == 0);
}

TEST_CASE("malformed data files exit with the data error code") {
    cli::ScratchDir dir("baddata");
    spit(dir.file("fused.csv"), "image_a,image_b,label,score\na,b,maybe,0.5\n");
    auto run = cli::run("eval --fused " + dir.file("fused.csv"));
    CHECK(run.exit_code == 2);
    CHECK(run.output.find("label") != std::string::npos);

    auto missing = cli::run("eval --fused " + dir.file("does_not_exist.csv"));
    CHECK(missing.exit_code == 2);
}

TEST_CASE("fuse-train exit codes reflect convergence") {
    cli::ScratchDir dir("conv");
    SyntheticData data = generate(testutil::holistic_degraded_scenario(4, 24));
    ScoredTrials scored = score_trials(
        data.store, build_trials(data.manifest, TrialMode::before_vs_after),
        {Region::holistic, Region::left_periocular}, {{Region::holistic, "synth"}, {Region::left_periocular, "synth"}});
    spit(dir.file("scores.csv"), format_scores_csv(scored));

    auto capped = cli::run("fuse-train --scores " + dir.file("scores.csv") + " --out " + dir.file("m.txt") +
                           " --max-iterations 1");
    CHECK(capped.exit_code == 3);

    auto allowed = cli::run("fuse-train --scores " + dir.file("scores.csv") + " --out " + dir.file("m.txt") +
                            " --max-iterations 1 --allow-nonconverged");
    CHECK(allowed.exit_code == 0);
    FusionModel model = parse_fusion_model(slurp(dir.file("m.txt")));
    CHECK_FALSE(model.meta.converged);

    auto full = cli::run("fuse-train --scores " + dir.file("scores.csv") + " --out " + dir.file("m.txt"));
    CHECK(full.exit_code == 0);
    CHECK(parse_fusion_model(slurp(dir.file("m.txt"))).meta.converged);
}

TEST_CASE("synth -> score -> fuse -> eval chain shows the fusion gain and is idempotent") {
    cli::ScratchDir dir("chain");
    ScenarioSpec spec = testutil::holistic_degraded_scenario(1, 60);
    spit(dir.file("scenario.txt"), scenario_text(spec));

    auto synth = cli::run("synth --spec " + dir.file("scenario.txt") + " --out-dir " + dir.file("data"));
    REQUIRE(synth.exit_code == 0);

    std::string stores = dir.file("data") + "/embeddings.csv";
    std::string trials = dir.file("data") + "/trials.csv";

    auto score_all = cli::run("score --store " + stores + " --trials " + trials +
                              " --regions holistic,left_periocular,right_periocular --provider synth --out " +
                              dir.file("scores.csv"));
    REQUIRE(score_all.exit_code == 0);

    auto train = cli::run("fuse-train --scores " + dir.file("scores.csv") + " --out " + dir.file("model.txt") +
                          " --dataset-id bench");
    REQUIRE(train.exit_code == 0);

    auto apply = cli::run("fuse-apply --model " + dir.file("model.txt") + " --scores " + dir.file("scores.csv") +
                          " --out " + dir.file("fused.csv"));
    REQUIRE(apply.exit_code == 0);

    auto eval_fused = cli::run("eval --fused " + dir.file("fused.csv") + " --report " + dir.file("fused.json"));
    REQUIRE(eval_fused.exit_code == 0);

    // holistic baseline through the protocol runner
    auto eer_holistic = cli::run("protocol eer --manifest " + dir.file("data") + "/manifest.csv --store " +
                                 stores + " --regions holistic --provider synth --no-fusion --report " +
                                 dir.file("holistic.json"));
    REQUIRE(eer_holistic.exit_code == 0);

    double fused_eer = nlohmann::json::parse(slurp(dir.file("fused.json")))["eer"].get<double>();
    double holistic_eer = nlohmann::json::parse(slurp(dir.file("holistic.json")))["datasets"][0]["report"]["eer"]
                              .get<double>();
    CHECK(fused_eer < holistic_eer);

    // identical inputs reproduce identical artifacts
    auto synth2 = cli::run("synth --spec " + dir.file("scenario.txt") + " --out-dir " + dir.file("data2"));
    REQUIRE(synth2.exit_code == 0);
    CHECK(slurp(dir.file("data") + "/embeddings.csv") == slurp(dir.file("data2") + "/embeddings.csv"));
    CHECK(slurp(dir.file("data") + "/manifest.csv") == slurp(dir.file("data2") + "/manifest.csv"));
    CHECK(slurp(dir.file("data") + "/trials.csv") == slurp(dir.file("data2") + "/trials.csv"));

    auto score2 = cli::run("score --store " + stores + " --trials " + trials +
                           " --regions holistic,left_periocular,right_periocular --provider synth --out " +
                           dir.file("scores2.csv"));
    REQUIRE(score2.exit_code == 0);
    CHECK(slurp(dir.file("scores.csv")) == slurp(dir.file("scores2.csv")));
}

TEST_CASE("protocol kfold and cross emit stable machine reports") {
    cli::ScratchDir dir("proto");
    ScenarioSpec spec = testutil::holistic_degraded_scenario(2, 40);
    spit(dir.file("scenario.txt"), scenario_text(spec));
    REQUIRE(cli::run("synth --spec " + dir.file("scenario.txt") + " --out-dir " + dir.file("d")).exit_code == 0);

    std::string common = " --manifest " + dir.file("d") + "/manifest.csv --store " + dir.file("d") +
                         "/embeddings.csv --regions holistic,left_periocular,right_periocular "
                         "--provider synth --seed 42 --folds 5";

    auto kfold1 = cli::run("protocol kfold" + common + " --report " + dir.file("k1.json"));
    REQUIRE(kfold1.exit_code == 0);
    auto kfold2 = cli::run("protocol kfold" + common + " --report " + dir.file("k2.json"));
    REQUIRE(kfold2.exit_code == 0);
    CHECK(slurp(dir.file("k1.json")) == slurp(dir.file("k2.json")));

    auto parsed = nlohmann::json::parse(slurp(dir.file("k1.json")));
    CHECK(parsed["protocol"] == "kfold");
    CHECK(parsed["datasets"][0]["fold_accuracy"].size() == 5);

    auto cross = cli::run("protocol cross" + common + " --report " + dir.file("c.json") + " --format table");
    REQUIRE(cross.exit_code == 0);
    CHECK(cross.output.find("Avg") != std::string::npos);
    auto cross_json = nlohmann::json::parse(slurp(dir.file("c.json")));
    CHECK(cross_json["rows"].size() == 1);
    CHECK(cross_json["rows"][0]["source"] == "bench");
}

TEST_CASE("crop emits a file per region with the expected geometry") {
    cli::ScratchDir dir("crop");
    std::filesystem::create_directories(dir.file("lm"));
    std::filesystem::create_directories(dir.file("img"));

    LandmarkSet lm = testutil::canonical_landmarks();
    spit(dir.file("lm") + "/face.csv", format_landmarks(lm));

    Raster img(256, 256, 1);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) img.at(x, y) = static_cast<std::uint8_t>((x + y) % 256);
    }
    write_pnm(dir.file("img") + "/imgA.pgm", img);

    auto crop = cli::run("crop --strategy parts4 --landmarks " + dir.file("lm") + " --images " +
                         dir.file("img") + " --out " + dir.file("out") + " --resize 64");
    REQUIRE(crop.exit_code == 0);

    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir.file("out"))) {
        ++count;
        CHECK(entry.path().filename().string().rfind("subA__imgA__", 0) == 0);
    }
    CHECK(count == 4);

    auto thirds = cli::run("crop --strategy thirds3 --landmarks " + dir.file("lm") + " --images " +
                           dir.file("img") + " --out " + dir.file("out3") + " --resize 64");
    REQUIRE(thirds.exit_code == 0);
    CHECK(std::distance(std::filesystem::directory_iterator(dir.file("out3")),
                        std::filesystem::directory_iterator{}) == 3);

    auto holistic = cli::run("crop --strategy holistic --landmarks " + dir.file("lm") + " --images " +
                             dir.file("img") + " --out " + dir.file("outh") + " --resize 64");
    REQUIRE(holistic.exit_code == 0);
    CHECK(std::distance(std::filesystem::directory_iterator(dir.file("outh")),
                        std::filesystem::directory_iterator{}) == 1);
}
