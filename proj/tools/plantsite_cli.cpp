// plantsite command-line front end. Uses the C API only.

#include <array>
#include <charconv>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "plantsite/plantsite.h"

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(ps_status status, const std::string& what)
{
    if (status != PS_OK) {
        std::string msg = what + ": ";
        msg += ps_last_error()[0] ? ps_last_error() : ps_status_name(status);
        throw CliError(msg);
    }
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<ps_config, Deleter<ps_config, ps_config_free>>;
using Landscape = std::unique_ptr<ps_landscape, Deleter<ps_landscape, ps_landscape_free>>;
using Model = std::unique_ptr<ps_model, Deleter<ps_model, ps_model_free>>;
using Scores = std::unique_ptr<ps_scores, Deleter<ps_scores, ps_scores_free>>;
using Sweep = std::unique_ptr<ps_sweep, Deleter<ps_sweep, ps_sweep_free>>;
using Service = std::unique_ptr<ps_service, Deleter<ps_service, ps_service_free>>;

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { ps_string_free(p); }
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& option)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw CliError(option + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (expected != 0 && out.size() != expected)
        throw CliError(option + ": expected " + std::to_string(expected) + " comma-separated numbers");
    if (out.empty()) throw CliError(option + ": empty list");
    return out;
}

// Shortest text that reads back to the same double.
std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_pct(const double* pct)
{
    std::string out;
    for (int k = 0; k < PS_CLASS_COUNT; ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%s=%.2f", k ? " " : "", ps_class_name(static_cast<ps_class>(k)), pct[k]);
        out += buf;
    }
    return out;
}

// Config file first, then --set pairs, then dedicated flags.
struct ConfigOptions {
    std::string path;
    std::vector<std::string> overrides;

    Config build(const std::vector<std::pair<std::string, std::string>>& flags = {}) const
    {
        ps_config* raw = nullptr;
        if (path.empty())
            check(ps_config_new(&raw), "config");
        else
            check(ps_config_load(path.c_str(), &raw), "config " + path);
        Config cfg(raw);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CliError("--set expects key=value, got '" + kv + "'");
            const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
            check(ps_config_set(cfg.get(), key.c_str(), value.c_str()), "--set " + kv);
        }
        for (const auto& [key, value] : flags)
            check(ps_config_set(cfg.get(), key.c_str(), value.c_str()), "--" + key);
        return cfg;
    }
};

Landscape load_landscape(const std::string& dir, const ps_config* cfg)
{
    double cell = 0.0;
    check(ps_config_cell_size(cfg, &cell), "config");
    ps_landscape* raw = nullptr;
    check(ps_landscape_load(dir.c_str(), cell, &raw), "landscape " + dir);
    spdlog::info("loaded landscape from {}", dir);
    return Landscape(raw);
}

Scores load_scores(const std::string& path)
{
    ps_scores* raw = nullptr;
    check(ps_scores_load(path.c_str(), &raw), "scores " + path);
    return Scores(raw);
}

void print_eval(const ps_eval_report& r)
{
    std::printf("train_rows %zu\ntest_rows %zu\n", r.n_train, r.n_test);
    std::printf("tp %zu\nfp %zu\ntn %zu\nfn %zu\n", r.tp, r.fp, r.tn, r.fn);
    std::printf("precision %.4f%s\n", r.precision, r.precision_defined ? "" : " (undefined: no positive predictions)");
    std::printf("recall %.4f%s\n", r.recall, r.recall_defined ? "" : " (undefined: no positive labels)");
    std::printf("threshold %.2f\n", r.threshold);
    std::printf("train_log_loss %.6f -> %.6f\n", r.initial_loss, r.final_loss);
}

int serve_until_signal(ps_service* service, const std::string& host, int port)
{
    int bound = 0;
    check(ps_service_bind(service, host.c_str(), port, &bound), "serve");

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("signal {}, stopping", sig);
        ps_service_stop(service);
    });

    std::printf("listening on http://%s:%d\n", host.c_str(), bound);
    std::fflush(stdout);
    const ps_status status = ps_service_run(service);
    // wake the waiter if the server stopped on its own
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    check(status, "serve");
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    auto log = spdlog::stderr_color_mt("plantsite");
    spdlog::set_default_logger(log);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("PLANTSITE_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(level));

    CLI::App app{"plantsite: plantation site suitability engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ps_version());

    ConfigOptions config;
    unsigned threads = 0;
    app.add_option("--config", config.path, "Run config file (key = value lines)")->check(CLI::ExistingFile);
    app.add_option("--set", config.overrides, "Config override key=value; repeatable, wins over --config");
    app.add_option("--threads", threads, "Worker threads; 0 = all cores")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic landscape");
    std::uint64_t synth_seed = 42;
    std::string region, profile = "himalayan-gradient", synth_out;
    std::size_t n_compartments = 60, n_villages = 10;
    double synth_cell = 0.0;
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->add_option("--region", region, "x_min,y_min,x_max,y_max in meters")->required();
    synth->add_option("--compartments", n_compartments)->capture_default_str();
    synth->add_option("--villages", n_villages)->capture_default_str();
    synth->add_option("--profile", profile, "uniform | himalayan-gradient | separable-loss")->capture_default_str();
    synth->add_option("--cell-size", synth_cell, "Cell side in meters; default 265");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train the loss model and print its evaluation");
    std::string train_landscape, out_model;
    std::optional<std::string> train_seed;
    train->add_option("--landscape", train_landscape, "Landscape directory")->required();
    train->add_option("--out-model", out_model, "Model JSON path")->required();
    train->add_option("--seed", train_seed, "Split and subsample seed (overrides config)");

    // score
    auto* score = app.add_subcommand("score", "Score every cell");
    std::string score_landscape, score_model, score_out, score_format = "csv";
    std::optional<std::string> score_alpha;
    score->add_option("--landscape", score_landscape)->required();
    score->add_option("--model", score_model)->required();
    score->add_option("--out", score_out)->required();
    score->add_option("--alpha", score_alpha, "Expert weight (overrides config)");
    score->add_option("--format", score_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Class shares for a range of expert weights");
    std::string sweep_scores, sweep_out, sweep_alphas;
    sweep->add_option("--scores", sweep_scores, "scores.csv")->required();
    sweep->add_option("--out", sweep_out, "sweep.csv; printed to stdout when omitted");
    sweep->add_option("--alphas", sweep_alphas, "Comma-separated weights; default 1.0,0.9,...,0.0");

    // tune
    auto* tune = app.add_subcommand("tune", "Pick the weight whose class shares best match a reference");
    std::string tune_sweep, tune_scores, tune_reference;
    auto* tune_sweep_opt = tune->add_option("--sweep", tune_sweep, "sweep.csv");
    auto* tune_scores_opt = tune->add_option("--scores", tune_scores, "scores.csv (swept over default weights)");
    tune_sweep_opt->excludes(tune_scores_opt);
    tune->add_option("--reference", tune_reference, "largely_unsuitable,low,medium,high shares in percent")
        ->required();

    // report
    auto* report = app.add_subcommand("report", "Class distribution, descriptives and site evaluation");
    std::string report_scores, report_landscape, report_sites, report_out;
    report->add_option("--scores", report_scores)->required();
    report->add_option("--landscape", report_landscape)->required();
    report->add_option("--sites", report_sites, "CSV with site_id,x,y");
    report->add_option("--out-dir", report_out, "Also write the tables as CSV files here");

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP API over a scored landscape");
    std::string serve_scores, serve_landscape, host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--scores", serve_scores)->required();
    serve->add_option("--landscape", serve_landscape)->required();
    serve->add_option("--port", port)->check(CLI::Range(0, 65535))->capture_default_str();
    serve->add_option("--host", host)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "plantsite: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        config.build();  // reject a bad --config/--set before any subcommand runs
        if (synth->parsed()) {
            const auto r = parse_list(region, 4, "--region");
            ps_synth_request req{synth_seed,     r[0],       r[1],           r[2],     r[3],
                                 n_compartments, n_villages, profile.c_str(), synth_cell};
            ps_landscape* raw = nullptr;
            check(ps_landscape_synthesize(&req, &raw), "synth");
            Landscape land(raw);
            check(ps_landscape_save(land.get(), synth_out.c_str()), "synth " + synth_out);
            std::size_t cells = 0, comps = 0, vills = 0;
            ps_landscape_counts(land.get(), &cells, &comps, &vills);
            std::printf("wrote %zu cells, %zu compartments, %zu villages to %s\n", cells, comps, vills,
                        synth_out.c_str());
        } else if (train->parsed()) {
            std::vector<std::pair<std::string, std::string>> flags;
            if (train_seed) flags.emplace_back("seed", *train_seed);
            const auto cfg = config.build(flags);
            const auto land = load_landscape(train_landscape, cfg.get());
            ps_model* raw = nullptr;
            ps_eval_report ev{};
            check(ps_model_train(land.get(), cfg.get(), &raw, &ev), "train");
            Model model(raw);
            check(ps_model_save(model.get(), out_model.c_str()), "train " + out_model);
            print_eval(ev);
        } else if (score->parsed()) {
            std::vector<std::pair<std::string, std::string>> flags;
            if (score_alpha) flags.emplace_back("alpha", *score_alpha);
            const auto cfg = config.build(flags);
            const auto land = load_landscape(score_landscape, cfg.get());
            ps_model* mraw = nullptr;
            check(ps_model_load(score_model.c_str(), &mraw), "model " + score_model);
            Model model(mraw);
            ps_scores* sraw = nullptr;
            check(ps_scores_compute(land.get(), model.get(), cfg.get(), threads, &sraw), "score");
            Scores scores(sraw);
            check(ps_scores_save(scores.get(), score_out.c_str(),
                                 score_format == "json" ? PS_FORMAT_JSON : PS_FORMAT_CSV),
                  "score " + score_out);
            double pct[PS_CLASS_COUNT];
            ps_scores_distribution(scores.get(), pct);
            std::printf("%s\n", format_pct(pct).c_str());
        } else if (sweep->parsed()) {
            const auto scores = load_scores(sweep_scores);
            std::vector<double> alphas;
            if (!sweep_alphas.empty()) alphas = parse_list(sweep_alphas, 0, "--alphas");
            ps_sweep* raw = nullptr;
            check(ps_sweep_compute(scores.get(), alphas.empty() ? nullptr : alphas.data(), alphas.size(), &raw),
                  "sweep");
            Sweep rows(raw);
            if (!sweep_out.empty()) {
                check(ps_sweep_save(rows.get(), sweep_out.c_str()), "sweep " + sweep_out);
            } else {
                std::size_t n = 0;
                ps_sweep_count(rows.get(), &n);
                std::printf("alpha,largely_unsuitable_pct,low_pct,medium_pct,high_pct\n");
                for (std::size_t i = 0; i < n; ++i) {
                    double a = 0, pct[PS_CLASS_COUNT];
                    ps_sweep_row(rows.get(), i, &a, pct);
                    std::printf("%s,%s,%s,%s,%s\n", shortest(a).c_str(), shortest(pct[0]).c_str(),
                                shortest(pct[1]).c_str(), shortest(pct[2]).c_str(), shortest(pct[3]).c_str());
                }
            }
        } else if (tune->parsed()) {
            if (tune_sweep.empty() && tune_scores.empty()) throw CliError("tune needs --sweep or --scores");
            const auto reference = parse_list(tune_reference, PS_CLASS_COUNT, "--reference");
            ps_sweep* raw = nullptr;
            if (!tune_sweep.empty()) {
                check(ps_sweep_load(tune_sweep.c_str(), &raw), "sweep " + tune_sweep);
            } else {
                const auto scores = load_scores(tune_scores);
                check(ps_sweep_compute(scores.get(), nullptr, 0, &raw), "sweep");
            }
            Sweep rows(raw);
            double alpha = 0.0;
            check(ps_tune(rows.get(), reference.data(), &alpha), "tune");
            std::printf("%s\n", shortest(alpha).c_str());
        } else if (report->parsed()) {
            const auto cfg = config.build();
            const auto scores = load_scores(report_scores);
            const auto land = load_landscape(report_landscape, cfg.get());
            OwnedString text;
            check(ps_report(scores.get(), land.get(), report_sites.empty() ? nullptr : report_sites.c_str(),
                            report_out.empty() ? nullptr : report_out.c_str(), &text.p),
                  "report");
            std::fputs(text.p, stdout);
        } else if (serve->parsed()) {
            const auto cfg = config.build();
            const auto scores = load_scores(serve_scores);
            const auto land = load_landscape(serve_landscape, cfg.get());
            ps_service* raw = nullptr;
            check(ps_service_create(scores.get(), land.get(), cfg.get(), &raw), "serve");
            Service service(raw);
            return serve_until_signal(service.get(), host, port);
        }
    } catch (const CliError& e) {
        std::fprintf(stderr, "plantsite: error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "plantsite: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
