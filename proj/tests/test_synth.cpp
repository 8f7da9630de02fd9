#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace partfuse;

TEST_CASE("no noise and no shift gives perfect genuine scores") {
    ScenarioSpec spec;
    spec.n_subjects = 10;
    spec.dim = 8;
    spec.seed = 1;
    spec.region_noise = {{Region::holistic, 0.0}};
    spec.makeup_shift = {{Region::holistic, 0.0}};
    SyntheticData data = generate(spec);

    ScoredTrials scored =
        score_trials(data.store, build_trials(data.manifest, TrialMode::before_vs_after),
                     {Region::holistic}, {{Region::holistic, std::string(kSynthProvider)}});
    ScoreSet set;
    for (const auto& t : scored.trials) {
        (t.trial.genuine ? set.genuine : set.impostor).push_back(t.scores[0]);
    }
    for (double s : set.genuine) CHECK(s == Catch::Approx(1.0).margin(1e-12));
    CHECK(eer(set).eer == 0.0);
}

TEST_CASE("generation is bitwise reproducible per seed") {
    ScenarioSpec spec = testutil::holistic_degraded_scenario(5, 25);
    SyntheticData a = generate(spec);
    SyntheticData b = generate(spec);
    CHECK(a.store.to_csv() == b.store.to_csv());
    CHECK(format_manifest_csv({a.manifest}) == format_manifest_csv({b.manifest}));

    spec.seed = 6;
    SyntheticData c = generate(spec);
    CHECK(a.store.to_csv() != c.store.to_csv());
}

TEST_CASE("a heavily shifted region scores worse than a clean one") {
    ScenarioSpec spec;
    spec.n_subjects = 60;
    spec.dim = 32;
    spec.seed = 3;
    spec.region_noise = {{Region::holistic, 0.1}, {Region::nose, 0.1}};
    spec.makeup_shift = {{Region::holistic, 2.5}, {Region::nose, 0.0}};
    SyntheticData data = generate(spec);

    auto eer_of = [&](Region r) {
        ProtocolConfig cfg = testutil::synth_protocol_config({r}, false);
        return run_single_dataset_eer(data.manifest, data.store, cfg).report.eer;
    };
    CHECK(eer_of(Region::nose) < eer_of(Region::holistic));
}

TEST_CASE("scenario file parsing") {
    std::string text = "# demo scenario\n"
                       "n_subjects = 12\n"
                       "dim = 16\n"
                       "seed = 99\n"
                       "dataset_id = demo\n"
                       "noise.holistic = 0.1\n"
                       "shift.holistic = 0.5\n"
                       "noise.nose = 0.2\n";
    ScenarioSpec spec = parse_scenario(text);
    CHECK(spec.n_subjects == 12);
    CHECK(spec.dim == 16);
    CHECK(spec.seed == 99);
    CHECK(spec.dataset_id == "demo");
    CHECK(spec.region_noise.at(Region::holistic) == 0.1);
    CHECK(spec.makeup_shift.at(Region::holistic) == 0.5);
    CHECK(spec.region_noise.at(Region::nose) == 0.2);

    CHECK_THROWS_AS(parse_scenario("n_subjects = 1\ndim = 8\nnoise.holistic = 0.1\n"), Error);
    CHECK_THROWS_AS(parse_scenario("n_subjects = 5\ndim = 8\nnoise.eyebrow = 0.1\n"), Error);
    CHECK_THROWS_AS(parse_scenario("n_subjects = 5\ndim = 8\nshift.nose = 0.1\n"), Error);
}

TEST_CASE("increasing the makeup shift does not improve the eer") {
    // sampled-noise inversions are tolerated once per seed
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        double prev = -1.0;
        int inversions = 0;
        for (double delta : {0.0, 1.0, 2.0, 3.0}) {
            ScenarioSpec spec;
            spec.n_subjects = 60;
            spec.dim = 64;
            spec.seed = seed;
            spec.region_noise = {{Region::holistic, 0.15}};
            spec.makeup_shift = {{Region::holistic, delta}};
            SyntheticData data = generate(spec);
            ProtocolConfig cfg = testutil::synth_protocol_config({Region::holistic}, false);
            double e = run_single_dataset_eer(data.manifest, data.store, cfg).report.eer;
            if (prev >= 0 && e < prev) ++inversions;
            prev = e;
        }
        CHECK(inversions <= 1);
    }
}
