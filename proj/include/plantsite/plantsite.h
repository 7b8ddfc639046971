#ifndef PLANTSITE_H
#define PLANTSITE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PLANTSITE_BUILDING)
#    define PS_API __declspec(dllexport)
#  else
#    define PS_API __declspec(dllimport)
#  endif
#else
#  define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
    PS_OK = 0,
    PS_ERR_ARGUMENT = 1,   /* null handle, bad index, malformed option */
    PS_ERR_IO = 2,         /* unreadable or unwritable file, malformed file */
    PS_ERR_VALIDATION = 3, /* input violates a domain invariant */
    PS_ERR_CONFIG = 4,     /* unknown config key or out-of-range value */
    PS_ERR_DOMAIN = 5,     /* score or weight outside its range */
    PS_ERR_TRAINING = 6,   /* model cannot be fitted */
    PS_ERR_NOT_FOUND = 7,
    PS_ERR_INTERNAL = 99
} ps_status;

/* Message for the last failing call on this thread; "" after a success. */
PS_API const char* ps_last_error(void);
PS_API const char* ps_status_name(ps_status status);
PS_API const char* ps_version(void);

/* Strings returned through char** are owned by the caller. */
PS_API void ps_string_free(char* s);

enum { PS_CLASS_COUNT = 4, PS_FEATURE_COUNT = 31 };

typedef enum ps_class {
    PS_CLASS_LARGELY_UNSUITABLE = 0,
    PS_CLASS_LOW = 1,
    PS_CLASS_MEDIUM = 2,
    PS_CLASS_HIGH = 3
} ps_class;

PS_API const char* ps_class_name(ps_class c);
PS_API const char* ps_feature_name(size_t index);

typedef enum ps_format { PS_FORMAT_CSV = 0, PS_FORMAT_JSON = 1 } ps_format;

/* ---- run configuration ---- */

typedef struct ps_config ps_config;

PS_API ps_status ps_config_new(ps_config** out);
PS_API ps_status ps_config_load(const char* path, ps_config** out);
/* One `key = value` override; validated immediately. */
PS_API ps_status ps_config_set(ps_config* config, const char* key, const char* value);
PS_API ps_status ps_config_alpha(const ps_config* config, double* alpha);
PS_API ps_status ps_config_seed(const ps_config* config, uint64_t* seed);
PS_API ps_status ps_config_cell_size(const ps_config* config, double* cell_size_m);
PS_API ps_status ps_config_to_text(const ps_config* config, char** text);
PS_API void ps_config_free(ps_config* config);

/* ---- landscape ---- */

typedef struct ps_landscape ps_landscape;

typedef struct ps_synth_request {
    uint64_t seed;
    double x_min, y_min, x_max, y_max;
    size_t n_compartments;
    size_t n_villages;
    const char* profile; /* "uniform", "himalayan-gradient", "separable-loss" */
    double cell_size_m;  /* 0 selects the default 265 m */
} ps_synth_request;

PS_API ps_status ps_landscape_synthesize(const ps_synth_request* request, ps_landscape** out);
/* Reads grids.csv, compartments.json and villages.csv from a directory. */
PS_API ps_status ps_landscape_load(const char* directory, double cell_size_m, ps_landscape** out);
PS_API ps_status ps_landscape_save(const ps_landscape* landscape, const char* directory);
PS_API ps_status ps_landscape_counts(const ps_landscape* landscape, size_t* cells, size_t* compartments,
                                     size_t* villages);
PS_API void ps_landscape_free(ps_landscape* landscape);

/* ---- loss model ---- */

typedef struct ps_model ps_model;

typedef struct ps_eval_report {
    size_t n_train, n_test;
    size_t tp, fp, tn, fn;
    double precision, recall;
    int precision_defined, recall_defined;
    double threshold;
    double initial_loss, final_loss; /* mean training log loss before and after boosting */
} ps_eval_report;

/* Labels the landscape's compartments, splits 80/20 with the config seed,
   trains on the first part and evaluates on the second. `report` may be NULL. */
PS_API ps_status ps_model_train(const ps_landscape* landscape, const ps_config* config, ps_model** out,
                                ps_eval_report* report);
PS_API ps_status ps_model_load(const char* path, ps_model** out);
PS_API ps_status ps_model_save(const ps_model* model, const char* path);
/* `features` holds PS_FEATURE_COUNT values in ps_feature_name order. */
PS_API ps_status ps_model_predict(const ps_model* model, const double* features, double* p_loss);
PS_API void ps_model_free(ps_model* model);

/* ---- scores ---- */

typedef struct ps_scores ps_scores;

typedef struct ps_score_record {
    int64_t grid_id;
    double s, m, x;
    ps_class cls;
    int excluded;
    int ml_neutral;
} ps_score_record;

/* threads == 0 uses the hardware concurrency. */
PS_API ps_status ps_scores_compute(const ps_landscape* landscape, const ps_model* model, const ps_config* config,
                                   unsigned threads, ps_scores** out);
PS_API ps_status ps_scores_load(const char* path, ps_scores** out);
PS_API ps_status ps_scores_save(const ps_scores* scores, const char* path, ps_format format);
PS_API ps_status ps_scores_count(const ps_scores* scores, size_t* count);
PS_API ps_status ps_scores_get(const ps_scores* scores, size_t index, ps_score_record* record);
/* `|`-separated exclusion reasons of one record. */
PS_API ps_status ps_scores_reasons(const ps_scores* scores, size_t index, char** reasons);
PS_API ps_status ps_scores_distribution(const ps_scores* scores, double pct[PS_CLASS_COUNT]);
PS_API void ps_scores_free(ps_scores* scores);

/* ---- weight sweep and tuning ---- */

typedef struct ps_sweep ps_sweep;

/* `alphas` NULL selects 1.0, 0.9, ..., 0.0. */
PS_API ps_status ps_sweep_compute(const ps_scores* scores, const double* alphas, size_t n_alphas, ps_sweep** out);
/* Published real-data sweep, for reference. */
PS_API ps_status ps_sweep_reference(ps_sweep** out);
PS_API ps_status ps_sweep_load(const char* path, ps_sweep** out);
PS_API ps_status ps_sweep_save(const ps_sweep* sweep, const char* path);
PS_API ps_status ps_sweep_count(const ps_sweep* sweep, size_t* count);
PS_API ps_status ps_sweep_row(const ps_sweep* sweep, size_t index, double* alpha, double pct[PS_CLASS_COUNT]);
/* Alpha whose distribution is nearest (L1) to `reference_pct`; ties go to the larger alpha. */
PS_API ps_status ps_tune(const ps_sweep* sweep, const double reference_pct[PS_CLASS_COUNT], double* alpha);
PS_API void ps_sweep_free(ps_sweep* sweep);

/* ---- reporting ---- */

/* Class distribution and descriptives as text tables, plus the proposed-site
   evaluation when `sites_csv` is non-NULL. With `out_dir` non-NULL the tables
   are also written there as CSV files. */
PS_API ps_status ps_report(const ps_scores* scores, const ps_landscape* landscape, const char* sites_csv,
                           const char* out_dir, char** text);

/* ---- HTTP service ---- */

typedef struct ps_service ps_service;

/* Builds a snapshot from the scores and the landscape they were computed on;
   fails with PS_ERR_VALIDATION when the two disagree under `config`. */
PS_API ps_status ps_service_create(const ps_scores* scores, const ps_landscape* landscape, const ps_config* config,
                                   ps_service** out);
/* Port 0 picks a free port, reported through `bound_port`. */
PS_API ps_status ps_service_bind(ps_service* service, const char* host, int port, int* bound_port);
/* Blocks until ps_service_stop is called from another thread. */
PS_API ps_status ps_service_run(ps_service* service);
PS_API ps_status ps_service_stop(ps_service* service);
/* In-process dispatch of one request, e.g. ("GET", "/grids?bbox=0,0,10,10", NULL). */
PS_API ps_status ps_service_handle(const ps_service* service, const char* method, const char* target,
                                   const char* body, int* http_status, char** response_body);
PS_API void ps_service_free(ps_service* service);

#ifdef __cplusplus
}
#endif

#endif
