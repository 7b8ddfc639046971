// Exercises the shared library through its C header only.
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "plantsite/plantsite.h"

namespace fs = std::filesystem;

namespace {

const fs::path kGolden = fs::path(PLANTSITE_TEST_DATA) / "golden";

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Scratch {
    fs::path path;
    Scratch()
    {
        static std::atomic<int> n{0};
        path = fs::temp_directory_path() / ("plantsite_capi_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~Scratch()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string take(char* s)
{
    std::string out = s ? s : "";
    ps_string_free(s);
    return out;
}

struct Golden {
    ps_config* config = nullptr;
    ps_landscape* land = nullptr;
    ps_model* model = nullptr;
    ps_scores* scores = nullptr;
    Golden()
    {
        EXPECT_EQ(ps_config_new(&config), PS_OK);
        EXPECT_EQ(ps_landscape_load((kGolden / "landscape").c_str(), 0, &land), PS_OK) << ps_last_error();
        EXPECT_EQ(ps_model_load((kGolden / "model.json").c_str(), &model), PS_OK) << ps_last_error();
        EXPECT_EQ(ps_scores_compute(land, model, config, 1, &scores), PS_OK) << ps_last_error();
    }
    ~Golden()
    {
        ps_scores_free(scores);
        ps_model_free(model);
        ps_landscape_free(land);
        ps_config_free(config);
    }
};

}  // namespace

TEST(CApi, VersionNamesAndErrors)
{
    EXPECT_STREQ(ps_version(), "0.1.0");
    EXPECT_STREQ(ps_status_name(PS_OK), "ok");
    EXPECT_STREQ(ps_class_name(PS_CLASS_HIGH), "high");
    EXPECT_STREQ(ps_class_name(PS_CLASS_LARGELY_UNSUITABLE), "largely_unsuitable");
    EXPECT_STREQ(ps_feature_name(0), "households");
    EXPECT_STREQ(ps_feature_name(PS_FEATURE_COUNT - 1), "lst_k");
    EXPECT_EQ(ps_feature_name(PS_FEATURE_COUNT), nullptr);

    ps_landscape* land = nullptr;
    EXPECT_EQ(ps_landscape_load("/no/such/dir", 0, &land), PS_ERR_IO);
    EXPECT_EQ(land, nullptr);
    EXPECT_NE(std::string(ps_last_error()).find("/no/such/dir"), std::string::npos);
    EXPECT_EQ(ps_landscape_load(nullptr, 0, &land), PS_ERR_ARGUMENT);

    ps_config* cfg = nullptr;
    ASSERT_EQ(ps_config_new(&cfg), PS_OK);
    EXPECT_EQ(ps_config_set(cfg, "alpha", "2"), PS_ERR_CONFIG);
    EXPECT_EQ(ps_config_set(cfg, "nonsense", "1"), PS_ERR_CONFIG);
    EXPECT_EQ(ps_config_set(cfg, "alpha", "0.25"), PS_OK);
    double alpha = 0;
    ps_config_alpha(cfg, &alpha);
    EXPECT_EQ(alpha, 0.25);
    char* text = nullptr;
    ASSERT_EQ(ps_config_to_text(cfg, &text), PS_OK);
    EXPECT_NE(take(text).find("alpha = 0.25"), std::string::npos);
    ps_config_free(cfg);

    ps_config_free(nullptr);
    ps_landscape_free(nullptr);
    ps_string_free(nullptr);
}

TEST(CApi, SynthesizeSaveLoadRoundTrip)
{
    ps_synth_request req{};
    req.seed = 42;
    req.x_max = 1060;
    req.y_max = 530;
    req.n_compartments = 60;
    req.n_villages = 2;
    req.profile = "himalayan-gradient";
    ps_landscape* land = nullptr;
    ASSERT_EQ(ps_landscape_synthesize(&req, &land), PS_OK) << ps_last_error();
    size_t cells = 0, comps = 0, villages = 0;
    ps_landscape_counts(land, &cells, &comps, &villages);
    EXPECT_EQ(cells, 8u);
    EXPECT_EQ(comps, 60u);
    EXPECT_EQ(villages, 2u);

    Scratch dir;
    ASSERT_EQ(ps_landscape_save(land, dir.path.c_str()), PS_OK);
    for (const char* f : {"grids.csv", "compartments.json", "villages.csv"})
        EXPECT_EQ(slurp(dir.path / f), slurp(kGolden / "landscape" / f)) << f;
    ps_landscape_free(land);

    req.profile = "tundra";
    EXPECT_EQ(ps_landscape_synthesize(&req, &land), PS_ERR_VALIDATION);
    req.profile = "uniform";
    req.x_max = 0;
    EXPECT_EQ(ps_landscape_synthesize(&req, &land), PS_ERR_VALIDATION);
}

TEST(CApi, TrainReproducesGoldenModel)
{
    ps_landscape* land = nullptr;
    ASSERT_EQ(ps_landscape_load((kGolden / "landscape").c_str(), 0, &land), PS_OK);
    ps_config* cfg = nullptr;
    ps_config_new(&cfg);
    ps_model* model = nullptr;
    ps_eval_report rep{};
    ASSERT_EQ(ps_model_train(land, cfg, &model, &rep), PS_OK) << ps_last_error();
    EXPECT_EQ(rep.n_train, 48u);
    EXPECT_EQ(rep.n_test, 12u);
    EXPECT_EQ(rep.tp + rep.fp + rep.tn + rep.fn, 12u);
    EXPECT_LT(rep.final_loss, rep.initial_loss);
    Scratch dir;
    ASSERT_EQ(ps_model_save(model, (dir.path / "m.json").c_str()), PS_OK);
    EXPECT_EQ(slurp(dir.path / "m.json"), slurp(kGolden / "model.json"));

    double features[PS_FEATURE_COUNT] = {};
    double p = -1;
    ASSERT_EQ(ps_model_predict(model, features, &p), PS_OK);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    ps_model_free(model);
    ps_config_free(cfg);
    ps_landscape_free(land);
}

TEST(CApi, ScoresMatchGoldenFile)
{
    Golden g;
    Scratch dir;
    ASSERT_EQ(ps_scores_save(g.scores, (dir.path / "scores.csv").c_str(), PS_FORMAT_CSV), PS_OK);
    EXPECT_EQ(slurp(dir.path / "scores.csv"), slurp(kGolden / "scores.csv"));

    size_t n = 0;
    ps_scores_count(g.scores, &n);
    ASSERT_EQ(n, 8u);
    for (size_t i = 0; i < n; ++i) {
        ps_score_record r{};
        ASSERT_EQ(ps_scores_get(g.scores, i, &r), PS_OK);
        char* reasons = nullptr;
        ps_scores_reasons(g.scores, i, &reasons);
        EXPECT_EQ(r.excluded != 0, !take(reasons).empty());
        if (r.excluded) {
            EXPECT_EQ(r.x, 0.0);
            EXPECT_EQ(r.cls, PS_CLASS_LARGELY_UNSUITABLE);
        }
    }
    ps_score_record r{};
    EXPECT_EQ(ps_scores_get(g.scores, 8, &r), PS_ERR_ARGUMENT);

    double pct[PS_CLASS_COUNT];
    ps_scores_distribution(g.scores, pct);
    EXPECT_EQ(pct[0] + pct[1] + pct[2] + pct[3], 100.0);

    ps_scores* loaded = nullptr;
    ASSERT_EQ(ps_scores_load((kGolden / "scores.csv").c_str(), &loaded), PS_OK);
    ASSERT_EQ(ps_scores_save(loaded, (dir.path / "again.csv").c_str(), PS_FORMAT_CSV), PS_OK);
    EXPECT_EQ(slurp(dir.path / "again.csv"), slurp(kGolden / "scores.csv"));
    ASSERT_EQ(ps_scores_save(loaded, (dir.path / "scores.json").c_str(), PS_FORMAT_JSON), PS_OK);
    EXPECT_EQ(slurp(dir.path / "scores.json").front(), '[');
    ps_scores_free(loaded);
}

TEST(CApi, SweepAndTune)
{
    Golden g;
    ps_sweep* sweep = nullptr;
    ASSERT_EQ(ps_sweep_compute(g.scores, nullptr, 0, &sweep), PS_OK);
    Scratch dir;
    ps_sweep_save(sweep, (dir.path / "sweep.csv").c_str());
    EXPECT_EQ(slurp(dir.path / "sweep.csv"), slurp(kGolden / "sweep.csv"));
    size_t n = 0;
    ps_sweep_count(sweep, &n);
    ASSERT_EQ(n, 11u);
    double alpha = 0, pct[PS_CLASS_COUNT];
    ps_sweep_row(sweep, 5, &alpha, pct);
    EXPECT_EQ(alpha, 0.5);
    double tuned = -1;
    ASSERT_EQ(ps_tune(sweep, pct, &tuned), PS_OK);
    EXPECT_EQ(tuned, 0.5);
    ps_sweep_free(sweep);

    const double bad_alpha[] = {0.5, 1.5};
    EXPECT_EQ(ps_sweep_compute(g.scores, bad_alpha, 2, &sweep), PS_ERR_DOMAIN);

    ASSERT_EQ(ps_sweep_reference(&sweep), PS_OK);
    const double ref[PS_CLASS_COUNT] = {68.46, 15.71, 14.15, 1.68};
    ps_tune(sweep, ref, &tuned);
    EXPECT_EQ(tuned, 0.9);
    ps_sweep_free(sweep);
}

TEST(CApi, ReportWritesTables)
{
    Golden g;
    Scratch dir;
    std::ofstream(dir.path / "sites.csv") << "site_id,x,y\n1,132.5,132.5\n2,397.5,132.5\n3,5000,5000\n";
    char* text = nullptr;
    ASSERT_EQ(ps_report(g.scores, g.land, (dir.path / "sites.csv").c_str(), dir.path.c_str(), &text), PS_OK)
        << ps_last_error();
    const auto t = take(text);
    EXPECT_NE(t.find("largely_unsuitable"), std::string::npos);
    EXPECT_EQ(slurp(dir.path / "descriptives.csv"), slurp(kGolden / "report" / "descriptives.csv"));
    EXPECT_NE(slurp(dir.path / "sites.csv").find("unmapped,1"), std::string::npos);
}

TEST(CApi, ServiceInProcessAndOverHttp)
{
    Golden g;
    ps_service* svc = nullptr;
    ASSERT_EQ(ps_service_create(g.scores, g.land, g.config, &svc), PS_OK) << ps_last_error();
    int status = 0;
    char* body = nullptr;
    ASSERT_EQ(ps_service_handle(svc, "GET", "/grids?bbox=0%2C0%2C1060%2C530", nullptr, &status, &body), PS_OK);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(take(body).front(), '[');
    ps_service_handle(svc, "POST", "/whatif", "{\"alpha\": 2}", &status, &body);
    EXPECT_EQ(status, 400);
    take(body);
    ps_service_handle(svc, "GET", "/grids/77/breakdown", nullptr, &status, &body);
    EXPECT_EQ(status, 404);
    take(body);

    int port = 0;
    ASSERT_EQ(ps_service_bind(svc, "127.0.0.1", 0, &port), PS_OK);
    EXPECT_GT(port, 0);
    std::thread runner([&] { ps_service_run(svc); });
    ps_service_stop(svc);
    runner.join();
    ps_service_free(svc);

    ps_config* other = nullptr;
    ps_config_new(&other);
    ps_config_set(other, "treeline_m", "1000");
    EXPECT_EQ(ps_service_create(g.scores, g.land, other, &svc), PS_ERR_VALIDATION);
    ps_config_free(other);
}
