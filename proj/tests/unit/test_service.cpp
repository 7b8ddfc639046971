#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "plantsite/service.hpp"

using namespace plantsite;
using nlohmann::json;

namespace {

struct Fixture {
    Landscape land;
    GbdtModel model;
    RunConfig config;
    std::vector<SuitabilityRecord> records;
};

const Fixture& fixture()
{
    static const Fixture f = [] {
        Fixture out;
        SynthesisRequest req;
        req.seed = 42;
        req.region = {0, 0, 1060, 530};
        req.n_compartments = 60;
        req.n_villages = 2;
        req.profile = Profile::himalayan_gradient;
        out.land = synthesize_landscape(req);
        const auto split = split_train_test(labeled_rows(out.land.compartments), out.config.seed);
        out.model = train(split.train, out.config.gbdt, out.config.seed);
        out.records = score_all(out.land.cells, out.model, out.land.compartments, out.config);
        return out;
    }();
    return f;
}

std::shared_ptr<const ScoredSnapshot> snapshot()
{
    const auto& f = fixture();
    return ScoredSnapshot::build(f.land.cells, f.records, f.config, f.model);
}

ApiResponse get(const SuitabilityService& svc, const std::string& path, std::map<std::string, std::string> q = {})
{
    return svc.handle({"GET", path, std::move(q), ""});
}

ApiResponse post(const SuitabilityService& svc, const std::string& path, const std::string& body)
{
    return svc.handle({"POST", path, {}, body});
}

}  // namespace

TEST(Service, HealthBeforeAndAfterLoad)
{
    SuitabilityService svc;
    auto r = get(svc, "/health");
    EXPECT_EQ(r.status, 503);
    auto j = json::parse(r.body);
    EXPECT_EQ(j["status"], "loading");
    EXPECT_TRUE(j["snapshot_timestamp"].is_null());
    EXPECT_EQ(get(svc, "/summary").status, 503);

    svc.publish(snapshot());
    r = get(svc, "/health");
    EXPECT_EQ(r.status, 200);
    j = json::parse(r.body);
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["snapshot_timestamp"], svc.snapshot()->built_at());
}

TEST(Service, GridsByBoundingBox)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    auto r = get(svc, "/grids", {{"bbox", "0,0,1060,530"}});
    ASSERT_EQ(r.status, 200);
    auto j = json::parse(r.body);
    ASSERT_EQ(j.size(), 8u);
    const auto& recs = svc.snapshot()->records();
    for (std::size_t i = 0; i < j.size(); ++i) {
        EXPECT_EQ(j[i]["grid_id"], static_cast<GridId>(i));
        EXPECT_EQ(j[i]["x"].get<double>(), recs[i].x);
        EXPECT_EQ(j[i]["class"], to_string(recs[i].cls));
        EXPECT_EQ(j[i]["size_m"], 265.0);
    }

    // one cell: centered at (397.5, 397.5), the second of the top row
    r = get(svc, "/grids", {{"bbox", "300,300,400,400"}});
    j = json::parse(r.body);
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["grid_id"], 5);
    EXPECT_EQ(j[0]["origin"], json::array({265.0, 265.0}));

    r = get(svc, "/grids", {{"bbox", "5000,5000,6000,6000"}});
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(json::parse(r.body), json::array());

    for (const char* bad : {"1,2,3", "a,b,c,d", "10,0,0,10", "0,0,1,1,1", ""})
        EXPECT_EQ(get(svc, "/grids", {{"bbox", bad}}).status, 400) << bad;
    EXPECT_EQ(get(svc, "/grids").status, 400);
}

TEST(Service, BreakdownMatchesScores)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    const auto& f = fixture();
    for (const auto& rec : f.records) {
        const auto r = get(svc, "/grids/" + std::to_string(rec.grid_id) + "/breakdown");
        ASSERT_EQ(r.status, 200);
        const auto j = json::parse(r.body);
        EXPECT_EQ(j["s"].get<double>(), rec.s);
        EXPECT_EQ(j["m"].get<double>(), rec.m);
        EXPECT_EQ(j["x"].get<double>(), rec.x);
        EXPECT_EQ(j["class"], to_string(rec.cls));
        EXPECT_EQ(j["excluded"], rec.excluded());
        EXPECT_EQ(j["rules"].size(), 14u);
        double sum = 0;
        for (const auto& row : j["rules"]) sum += row["contribution"].get<double>();
        EXPECT_NEAR(sum * 100 / 90, rec.s, 1e-9);
        if (!rec.excluded()) {
            EXPECT_NEAR(0.9 * rec.s + 0.1 * rec.m, rec.x, 1e-9);
        }
    }
    EXPECT_EQ(get(svc, "/grids/999/breakdown").status, 404);
    EXPECT_EQ(get(svc, "/grids/abc/breakdown").status, 400);
    EXPECT_EQ(get(svc, "/nowhere").status, 404);
}

TEST(Service, ExcludedCellReportsReasons)
{
    const auto& f = fixture();
    auto cells = f.land.cells;
    cells[3].landuse_flags.set(LanduseFlag::road);
    const auto recs = score_all(cells, f.model, f.land.compartments, f.config);
    SuitabilityService svc;
    svc.publish(ScoredSnapshot::build(cells, recs, f.config));
    const auto j = json::parse(get(svc, "/grids/3/breakdown").body);
    EXPECT_EQ(j["x"], 0.0);
    EXPECT_EQ(j["class"], "largely_unsuitable");
    EXPECT_EQ(j["excluded"], true);
    ASSERT_FALSE(j["exclusion_reasons"].empty());
    EXPECT_EQ(j["exclusion_reasons"][0], "landuse_flag:road");
}

TEST(Service, SnapshotRejectsInconsistentRecords)
{
    const auto& f = fixture();
    auto recs = f.records;
    recs[0].s += 1;
    EXPECT_THROW(ScoredSnapshot::build(f.land.cells, recs, f.config), ValidationError);
    auto other = f.config;
    other.alpha = 0.5;
    bool differs = false;
    for (const auto& r : f.records) differs |= !r.excluded() && r.s != r.m;
    if (differs) {
        EXPECT_THROW(ScoredSnapshot::build(f.land.cells, f.records, other), ValidationError);
    }
    auto extra = f.records;
    extra.push_back(extra[0]);
    EXPECT_THROW(ScoredSnapshot::build(f.land.cells, extra, f.config), ValidationError);
}

TEST(Service, WhatIfReclassifiesWithoutMutation)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    const auto before = svc.snapshot()->fingerprint();

    auto r = post(svc, "/whatif", R"({"alpha": 0.9})");
    ASSERT_EQ(r.status, 200);
    auto j = json::parse(r.body);
    EXPECT_EQ(j["changed_cells"], 0);
    EXPECT_EQ(j["distribution"], json::parse(get(svc, "/summary").body)["distribution"]);

    const auto sweep = sweep_weights(fixture().records, default_alphas());
    for (const auto& row : sweep) {
        j = json::parse(post(svc, "/whatif", json{{"alpha", row.alpha}}.dump()).body);
        EXPECT_EQ(j["distribution"], to_json(row.distribution)) << row.alpha;
        EXPECT_EQ(j["changed_cells"], j["changes"].size());
    }
    EXPECT_EQ(post(svc, "/whatif", R"({"alpha": 1.5})").status, 400);
    EXPECT_EQ(post(svc, "/whatif", R"({"alpha": -0.1})").status, 400);
    EXPECT_EQ(post(svc, "/whatif", R"({"beta": 1})").status, 400);
    EXPECT_EQ(post(svc, "/whatif", "{oops").status, 400);
    EXPECT_EQ(svc.snapshot()->fingerprint(), before);
}

TEST(Service, SummaryIsIdempotentAndMatchesReporting)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    const auto a = get(svc, "/summary");
    const auto b = get(svc, "/summary");
    ASSERT_EQ(a.status, 200);
    EXPECT_EQ(a.body, b.body);
    const auto j = json::parse(a.body);
    const auto& f = fixture();
    EXPECT_EQ(j["cells"], 8);
    EXPECT_EQ(j["alpha"], 0.9);
    EXPECT_EQ(j["distribution"], to_json(class_distribution(f.records)));
    EXPECT_EQ(j["descriptives"], to_json(class_descriptives(f.records, f.land.cells)));
}

TEST(Service, EmptyLandscapeHasZeroShares)
{
    SuitabilityService svc;
    svc.publish(ScoredSnapshot::build({}, {}, RunConfig{}));
    const auto j = json::parse(get(svc, "/summary").body);
    EXPECT_EQ(j["distribution"], to_json(ClassDistribution{}));
}

TEST(Service, ConcurrentStormLeavesScoresUntouched)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    const auto before = svc.snapshot()->fingerprint();
    const auto summary = get(svc, "/summary").body;
    std::atomic<int> mismatches{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&, t] {
            for (int i = 0; i < 200; ++i) {
                post(svc, "/whatif", json{{"alpha", (i % 11) / 10.0}}.dump());
                get(svc, "/grids", {{"bbox", "0,0,600,600"}});
                get(svc, "/grids/" + std::to_string((i + t) % 8) + "/breakdown");
                if (get(svc, "/summary").body != summary) ++mismatches;
                if (t == 0 && i % 50 == 0) svc.publish(snapshot());  // atomic swap mid-storm
            }
        });
    }
    for (auto& th : pool) th.join();
    EXPECT_EQ(mismatches, 0);
    EXPECT_EQ(svc.snapshot()->fingerprint(), before);
}

TEST(Service, ServesOverHttpWithCors)
{
    SuitabilityService svc;
    svc.publish(snapshot());
    ASSERT_TRUE(svc.bind("127.0.0.1", 0));
    ASSERT_GT(svc.port(), 0);
    std::thread server([&] { svc.serve(); });

    httplib::Client cli("127.0.0.1", svc.port());
    auto res = cli.Get("/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_NE(res->get_header_value("Content-Type").find("application/json"), std::string::npos);

    res = cli.Get("/grids?bbox=0%2C0%2C1060%2C530");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body).size(), 8u);

    res = cli.Post("/whatif", R"({"alpha": 0.0})", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);

    res = cli.Options("/whatif");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 204);
    EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);

    res = cli.Get("/grids/12345/breakdown");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
    EXPECT_TRUE(json::parse(res->body).contains("error"));

    svc.stop();
    server.join();
}

TEST(Service, StopBeforeServeDoesNotHang)
{
    for (int i = 0; i < 20; ++i) {
        SuitabilityService svc;
        ASSERT_TRUE(svc.bind("127.0.0.1", 0));
        std::thread server([&] { svc.serve(); });
        if (i % 2) std::this_thread::yield();
        svc.stop();
        server.join();
    }
    SuitabilityService svc;
    ASSERT_TRUE(svc.bind("127.0.0.1", 0));
    svc.stop();
    EXPECT_TRUE(svc.serve());
}
