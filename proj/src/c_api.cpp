#include "plantsite/plantsite.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "plantsite/config.hpp"
#include "plantsite/fusion.hpp"
#include "plantsite/io_util.hpp"
#include "plantsite/landscape.hpp"
#include "plantsite/loss_model.hpp"
#include "plantsite/reporting.hpp"
#include "plantsite/service.hpp"

struct ps_config {
    plantsite::RunConfig value;
};
struct ps_landscape {
    plantsite::Landscape value;
};
struct ps_model {
    plantsite::GbdtModel value;
};
struct ps_scores {
    std::vector<plantsite::SuitabilityRecord> value;
};
struct ps_sweep {
    std::vector<plantsite::SweepRow> value;
};
struct ps_service {
    plantsite::SuitabilityService value;
};

namespace {

thread_local std::string g_last_error;

ps_status fail(ps_status status, std::string message)
{
    g_last_error = std::move(message);
    return status;
}

template <class F>
ps_status guarded(F&& body)
{
    try {
        g_last_error.clear();
        return body();
    } catch (const plantsite::ValidationError& e) {
        return fail(PS_ERR_VALIDATION, e.what());
    } catch (const plantsite::ConfigError& e) {
        return fail(PS_ERR_CONFIG, e.what());
    } catch (const plantsite::IoError& e) {
        return fail(PS_ERR_IO, e.what());
    } catch (const plantsite::TrainingError& e) {
        return fail(PS_ERR_TRAINING, e.what());
    } catch (const plantsite::DomainError& e) {
        return fail(PS_ERR_DOMAIN, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(PS_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(PS_ERR_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PS_ERR_INTERNAL, "unknown error");
    }
}

#define PS_REQUIRE(ptr)                                                        \
    do {                                                                       \
        if ((ptr) == nullptr) return fail(PS_ERR_ARGUMENT, #ptr " is null"); \
    } while (0)

char* dup_string(std::string_view s)
{
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size());
    out[s.size()] = '\0';
    return out;
}

ps_class to_c(plantsite::SuitabilityClass c) { return static_cast<ps_class>(c); }

std::string percent_decode(std::string_view in)
{
    std::string out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == '%' && i + 2 < in.size()) {
            const auto hex = std::string(in.substr(i + 1, 2));
            char* end = nullptr;
            const long v = std::strtol(hex.c_str(), &end, 16);
            if (end == hex.c_str() + 2) {
                out += static_cast<char>(v);
                i += 2;
                continue;
            }
        }
        out += in[i] == '+' ? ' ' : in[i];
    }
    return out;
}

}  // namespace

extern "C" {

const char* ps_last_error(void) { return g_last_error.c_str(); }

const char* ps_status_name(ps_status status)
{
    switch (status) {
    case PS_OK: return "ok";
    case PS_ERR_ARGUMENT: return "invalid argument";
    case PS_ERR_IO: return "io error";
    case PS_ERR_VALIDATION: return "validation error";
    case PS_ERR_CONFIG: return "config error";
    case PS_ERR_DOMAIN: return "domain error";
    case PS_ERR_TRAINING: return "training error";
    case PS_ERR_NOT_FOUND: return "not found";
    case PS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ps_version(void) { return "0.1.0"; }

void ps_string_free(char* s) { std::free(s); }

const char* ps_class_name(ps_class c)
{
    if (static_cast<int>(c) < 0 || static_cast<int>(c) >= PS_CLASS_COUNT) return nullptr;
    return plantsite::to_string(static_cast<plantsite::SuitabilityClass>(c)).data();
}

const char* ps_feature_name(size_t index)
{
    if (index >= plantsite::kFeatureCount) return nullptr;
    return plantsite::kFeatureNames[index].data();
}

// ---- config

ps_status ps_config_new(ps_config** out)
{
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_config{};
        return PS_OK;
    });
}

ps_status ps_config_load(const char* path, ps_config** out)
{
    PS_REQUIRE(path);
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_config{plantsite::RunConfig::load(path)};
        return PS_OK;
    });
}

ps_status ps_config_set(ps_config* config, const char* key, const char* value)
{
    PS_REQUIRE(config);
    PS_REQUIRE(key);
    PS_REQUIRE(value);
    return guarded([&] {
        auto next = config->value;
        next.set(key, value);
        next.validate();
        config->value = next;
        return PS_OK;
    });
}

ps_status ps_config_alpha(const ps_config* config, double* alpha)
{
    PS_REQUIRE(config);
    PS_REQUIRE(alpha);
    *alpha = config->value.alpha;
    return PS_OK;
}

ps_status ps_config_seed(const ps_config* config, uint64_t* seed)
{
    PS_REQUIRE(config);
    PS_REQUIRE(seed);
    *seed = config->value.seed;
    return PS_OK;
}

ps_status ps_config_cell_size(const ps_config* config, double* cell_size_m)
{
    PS_REQUIRE(config);
    PS_REQUIRE(cell_size_m);
    *cell_size_m = config->value.cell_size_m;
    return PS_OK;
}

ps_status ps_config_to_text(const ps_config* config, char** text)
{
    PS_REQUIRE(config);
    PS_REQUIRE(text);
    return guarded([&] {
        *text = dup_string(config->value.to_text());
        return PS_OK;
    });
}

void ps_config_free(ps_config* config) { delete config; }

// ---- landscape

ps_status ps_landscape_synthesize(const ps_synth_request* request, ps_landscape** out)
{
    PS_REQUIRE(request);
    PS_REQUIRE(out);
    return guarded([&] {
        plantsite::SynthesisRequest r;
        r.seed = request->seed;
        r.region = {request->x_min, request->y_min, request->x_max, request->y_max};
        r.n_compartments = request->n_compartments;
        r.n_villages = request->n_villages;
        r.profile = plantsite::parse_profile(request->profile ? request->profile : "uniform");
        if (request->cell_size_m > 0.0) r.cell_size_m = request->cell_size_m;
        *out = new ps_landscape{plantsite::synthesize_landscape(r)};
        return PS_OK;
    });
}

ps_status ps_landscape_load(const char* directory, double cell_size_m, ps_landscape** out)
{
    PS_REQUIRE(directory);
    PS_REQUIRE(out);
    return guarded([&] {
        const double size = cell_size_m > 0.0 ? cell_size_m : plantsite::kDefaultCellSizeM;
        *out = new ps_landscape{plantsite::load_landscape(std::filesystem::path(directory), size)};
        return PS_OK;
    });
}

ps_status ps_landscape_save(const ps_landscape* landscape, const char* directory)
{
    PS_REQUIRE(landscape);
    PS_REQUIRE(directory);
    return guarded([&] {
        plantsite::save_landscape(landscape->value, directory);
        return PS_OK;
    });
}

ps_status ps_landscape_counts(const ps_landscape* landscape, size_t* cells, size_t* compartments, size_t* villages)
{
    PS_REQUIRE(landscape);
    if (cells) *cells = landscape->value.cells.size();
    if (compartments) *compartments = landscape->value.compartments.size();
    if (villages) *villages = landscape->value.villages.size();
    return PS_OK;
}

void ps_landscape_free(ps_landscape* landscape) { delete landscape; }

// ---- model

ps_status ps_model_train(const ps_landscape* landscape, const ps_config* config, ps_model** out,
                         ps_eval_report* report)
{
    PS_REQUIRE(landscape);
    PS_REQUIRE(config);
    PS_REQUIRE(out);
    return guarded([&] {
        const auto& cfg = config->value;
        cfg.validate();
        auto split = plantsite::split_train_test(plantsite::labeled_rows(landscape->value.compartments), cfg.seed);
        plantsite::LossTrace trace;
        auto model = plantsite::train(split.train, cfg.gbdt, cfg.seed, &trace);
        if (report) {
            const auto ev = plantsite::evaluate(model, split.test);
            *report = ps_eval_report{split.train.size(),
                                     split.test.size(),
                                     ev.tp,
                                     ev.fp,
                                     ev.tn,
                                     ev.fn,
                                     ev.precision,
                                     ev.recall,
                                     ev.precision_defined ? 1 : 0,
                                     ev.recall_defined ? 1 : 0,
                                     ev.threshold,
                                     trace.front(),
                                     trace.back()};
        }
        *out = new ps_model{std::move(model)};
        return PS_OK;
    });
}

ps_status ps_model_load(const char* path, ps_model** out)
{
    PS_REQUIRE(path);
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_model{plantsite::model_from_json(plantsite::read_file(path))};
        return PS_OK;
    });
}

ps_status ps_model_save(const ps_model* model, const char* path)
{
    PS_REQUIRE(model);
    PS_REQUIRE(path);
    return guarded([&] {
        plantsite::write_file_atomic(path, plantsite::model_to_json(model->value));
        return PS_OK;
    });
}

ps_status ps_model_predict(const ps_model* model, const double* features, double* p_loss)
{
    PS_REQUIRE(model);
    PS_REQUIRE(features);
    PS_REQUIRE(p_loss);
    return guarded([&] {
        plantsite::CompartmentFeatures f;
        std::copy(features, features + plantsite::kFeatureCount, f.values.begin());
        *p_loss = plantsite::predict_proba(model->value, f);
        return PS_OK;
    });
}

void ps_model_free(ps_model* model) { delete model; }

// ---- scores

ps_status ps_scores_compute(const ps_landscape* landscape, const ps_model* model, const ps_config* config,
                            unsigned threads, ps_scores** out)
{
    PS_REQUIRE(landscape);
    PS_REQUIRE(model);
    PS_REQUIRE(config);
    PS_REQUIRE(out);
    return guarded([&] {
        const auto& l = landscape->value;
        *out = new ps_scores{plantsite::score_all(l.cells, model->value, l.compartments, config->value, threads)};
        return PS_OK;
    });
}

ps_status ps_scores_load(const char* path, ps_scores** out)
{
    PS_REQUIRE(path);
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_scores{plantsite::parse_scores_csv(plantsite::read_file(path))};
        return PS_OK;
    });
}

ps_status ps_scores_save(const ps_scores* scores, const char* path, ps_format format)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(path);
    if (format != PS_FORMAT_CSV && format != PS_FORMAT_JSON) return fail(PS_ERR_ARGUMENT, "unknown export format");
    return guarded([&] {
        plantsite::export_summary(scores->value, path,
                                  format == PS_FORMAT_CSV ? plantsite::ExportFormat::csv : plantsite::ExportFormat::json);
        return PS_OK;
    });
}

ps_status ps_scores_count(const ps_scores* scores, size_t* count)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(count);
    *count = scores->value.size();
    return PS_OK;
}

ps_status ps_scores_get(const ps_scores* scores, size_t index, ps_score_record* record)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(record);
    if (index >= scores->value.size()) return fail(PS_ERR_ARGUMENT, "record index out of range");
    const auto& r = scores->value[index];
    *record = ps_score_record{r.grid_id, r.s, r.m, r.x, to_c(r.cls), r.excluded() ? 1 : 0, r.ml_neutral ? 1 : 0};
    return PS_OK;
}

ps_status ps_scores_reasons(const ps_scores* scores, size_t index, char** reasons)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(reasons);
    if (index >= scores->value.size()) return fail(PS_ERR_ARGUMENT, "record index out of range");
    return guarded([&] {
        *reasons = dup_string(scores->value[index].exclusion.joined());
        return PS_OK;
    });
}

ps_status ps_scores_distribution(const ps_scores* scores, double pct[PS_CLASS_COUNT])
{
    PS_REQUIRE(scores);
    PS_REQUIRE(pct);
    const auto d = plantsite::class_distribution(scores->value);
    std::copy(d.pct.begin(), d.pct.end(), pct);
    return PS_OK;
}

void ps_scores_free(ps_scores* scores) { delete scores; }

// ---- sweep

ps_status ps_sweep_compute(const ps_scores* scores, const double* alphas, size_t n_alphas, ps_sweep** out)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(out);
    return guarded([&] {
        const auto grid = alphas ? std::vector<double>(alphas, alphas + n_alphas) : plantsite::default_alphas();
        *out = new ps_sweep{plantsite::sweep_weights(scores->value, grid)};
        return PS_OK;
    });
}

ps_status ps_sweep_reference(ps_sweep** out)
{
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_sweep{plantsite::reference_sweep_table()};
        return PS_OK;
    });
}

ps_status ps_sweep_load(const char* path, ps_sweep** out)
{
    PS_REQUIRE(path);
    PS_REQUIRE(out);
    return guarded([&] {
        *out = new ps_sweep{plantsite::parse_sweep_csv(plantsite::read_file(path))};
        return PS_OK;
    });
}

ps_status ps_sweep_save(const ps_sweep* sweep, const char* path)
{
    PS_REQUIRE(sweep);
    PS_REQUIRE(path);
    return guarded([&] {
        plantsite::write_file_atomic(path, plantsite::write_sweep_csv(sweep->value));
        return PS_OK;
    });
}

ps_status ps_sweep_count(const ps_sweep* sweep, size_t* count)
{
    PS_REQUIRE(sweep);
    PS_REQUIRE(count);
    *count = sweep->value.size();
    return PS_OK;
}

ps_status ps_sweep_row(const ps_sweep* sweep, size_t index, double* alpha, double pct[PS_CLASS_COUNT])
{
    PS_REQUIRE(sweep);
    if (index >= sweep->value.size()) return fail(PS_ERR_ARGUMENT, "sweep row index out of range");
    const auto& row = sweep->value[index];
    if (alpha) *alpha = row.alpha;
    if (pct) std::copy(row.distribution.pct.begin(), row.distribution.pct.end(), pct);
    return PS_OK;
}

ps_status ps_tune(const ps_sweep* sweep, const double reference_pct[PS_CLASS_COUNT], double* alpha)
{
    PS_REQUIRE(sweep);
    PS_REQUIRE(reference_pct);
    PS_REQUIRE(alpha);
    return guarded([&] {
        plantsite::ClassDistribution ref;
        std::copy(reference_pct, reference_pct + PS_CLASS_COUNT, ref.pct.begin());
        *alpha = plantsite::tune_weight(sweep->value, ref);
        return PS_OK;
    });
}

void ps_sweep_free(ps_sweep* sweep) { delete sweep; }

// ---- reporting

ps_status ps_report(const ps_scores* scores, const ps_landscape* landscape, const char* sites_csv,
                    const char* out_dir, char** text)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(landscape);
    PS_REQUIRE(text);
    return guarded([&] {
        const auto& records = scores->value;
        const auto& cells = landscape->value.cells;
        const auto distribution = plantsite::class_distribution(records);
        const auto descriptives = plantsite::class_descriptives(records, cells);
        std::optional<plantsite::SiteEvaluation> sites;
        if (sites_csv) {
            const auto parsed = plantsite::parse_sites_csv(plantsite::read_file(sites_csv));
            sites = plantsite::evaluate_proposed_sites(parsed, records, cells);
        }
        if (out_dir) {
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            plantsite::write_file_atomic(dir / "distribution.csv", plantsite::distribution_csv(distribution));
            plantsite::write_file_atomic(dir / "descriptives.csv", plantsite::descriptives_csv(descriptives));
            plantsite::write_file_atomic(dir / "histogram.csv",
                                         plantsite::histogram_csv(plantsite::score_histogram(records)));
            if (sites) plantsite::write_file_atomic(dir / "sites.csv", plantsite::site_evaluation_csv(*sites));
        }
        *text = dup_string(plantsite::format_report(distribution, descriptives, sites));
        return PS_OK;
    });
}

// ---- service

ps_status ps_service_create(const ps_scores* scores, const ps_landscape* landscape, const ps_config* config,
                            ps_service** out)
{
    PS_REQUIRE(scores);
    PS_REQUIRE(landscape);
    PS_REQUIRE(config);
    PS_REQUIRE(out);
    return guarded([&] {
        auto snapshot = plantsite::ScoredSnapshot::build(landscape->value.cells, scores->value, config->value);
        auto service = std::make_unique<ps_service>();
        service->value.publish(std::move(snapshot));
        *out = service.release();
        return PS_OK;
    });
}

ps_status ps_service_bind(ps_service* service, const char* host, int port, int* bound_port)
{
    PS_REQUIRE(service);
    PS_REQUIRE(host);
    if (port < 0 || port > 65535) return fail(PS_ERR_ARGUMENT, "port must lie in [0,65535]");
    return guarded([&] {
        if (!service->value.bind(host, port))
            return fail(PS_ERR_IO, std::string("cannot bind ") + host + ":" + std::to_string(port));
        if (bound_port) *bound_port = service->value.port();
        return PS_OK;
    });
}

ps_status ps_service_run(ps_service* service)
{
    PS_REQUIRE(service);
    return guarded([&] { return service->value.serve() ? PS_OK : fail(PS_ERR_IO, "server stopped with an error"); });
}

ps_status ps_service_stop(ps_service* service)
{
    PS_REQUIRE(service);
    return guarded([&] {
        service->value.stop();
        return PS_OK;
    });
}

ps_status ps_service_handle(const ps_service* service, const char* method, const char* target, const char* body,
                            int* http_status, char** response_body)
{
    PS_REQUIRE(service);
    PS_REQUIRE(method);
    PS_REQUIRE(target);
    PS_REQUIRE(http_status);
    PS_REQUIRE(response_body);
    return guarded([&] {
        plantsite::ApiRequest req;
        req.method = method;
        req.body = body ? body : "";
        const std::string_view t(target);
        const auto q = t.find('?');
        req.path = percent_decode(t.substr(0, q));
        if (q != std::string_view::npos) {
            for (auto pair : plantsite::split(t.substr(q + 1), '&')) {
                if (pair.empty()) continue;
                const auto eq = pair.find('=');
                req.query.emplace(percent_decode(pair.substr(0, eq)),
                                  eq == std::string_view::npos ? "" : percent_decode(pair.substr(eq + 1)));
            }
        }
        const auto res = service->value.handle(req);
        *http_status = res.status;
        *response_body = dup_string(res.body);
        return PS_OK;
    });
}

void ps_service_free(ps_service* service) { delete service; }

}  // extern "C"
