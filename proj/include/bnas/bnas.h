/* C interface to the binary architecture search library.
 *
 * Every function returns a bnas_status. On failure the message of the most
 * recent error on the calling thread is available from bnas_last_error().
 * Objects are opaque handles created by *_new / *_load / producing calls and
 * released with the matching *_free (free functions accept NULL).
 *
 * Text outputs follow the snprintf convention: the result is written into
 * buf (at most cap bytes including the terminator) and *needed receives the
 * full size including the terminator. A buffer that is too small yields
 * BNAS_ERR_INVALID_ARGUMENT with *needed set, so callers can retry.
 */
#ifndef BNAS_BNAS_H
#define BNAS_BNAS_H

#include <stddef.h>

#if defined(_WIN32)
#define BNAS_API __declspec(dllexport)
#else
#define BNAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bnas_status {
  BNAS_OK = 0,
  BNAS_ERR_INVALID_ARGUMENT = 1,
  BNAS_ERR_CONTRACT = 2,
  BNAS_ERR_GEOMETRY = 3,
  BNAS_ERR_PARSE = 4,
  BNAS_ERR_IO = 5,
  BNAS_ERR_NUMERIC = 6,
  BNAS_ERR_USAGE = 7,
  BNAS_ERR_INTERNAL = 99
} bnas_status;

typedef struct bnas_config bnas_config;
typedef struct bnas_dataset bnas_dataset;
typedef struct bnas_arch bnas_arch;
typedef struct bnas_genotype bnas_genotype;
typedef struct bnas_model bnas_model;

#define BNAS_MAX_CLASSES 64

typedef struct bnas_eval_result {
  double top1; /* percent */
  double top5; /* percent */
  double loss;
  size_t count;
  int num_classes;
  double per_class[BNAS_MAX_CLASSES]; /* percent, first num_classes entries */
} bnas_eval_result;

typedef struct bnas_flops_report {
  double float_ops;  /* includes scale_ops */
  double scale_ops;
  double binary_ops; /* binary multiply-accumulates */
  double effective_flops; /* float_ops + binary_ops / 64 */
  double params_float;
  double params_binary_bits;
  double betas;
  double twin_float_ops;
  double twin_params;
  double memory_savings;
  double inference_speedup;
} bnas_flops_report;

BNAS_API const char* bnas_version(void);
BNAS_API const char* bnas_last_error(void);
BNAS_API const char* bnas_status_name(bnas_status status);

/* Configuration: preset ("paper", "desk", "tiny") < config file < set(). */
BNAS_API bnas_status bnas_config_new(const char* preset, bnas_config** out);
BNAS_API void bnas_config_free(bnas_config* config);
BNAS_API bnas_status bnas_config_set(bnas_config* config, const char* key, const char* value);
BNAS_API bnas_status bnas_config_load_file(bnas_config* config, const char* path);
BNAS_API bnas_status bnas_config_get(const bnas_config* config, const char* key, char* buf, size_t cap,
                                     size_t* needed);
/* 16 hex digits plus terminator. */
BNAS_API bnas_status bnas_config_hash(const bnas_config* config, char out[17]);
BNAS_API bnas_status bnas_config_dump(const bnas_config* config, char* buf, size_t cap, size_t* needed);

/* Dataset named by the config (dataset, data_dir, synthetic.*, *.images). */
BNAS_API bnas_status bnas_dataset_load(const bnas_config* config, bnas_dataset** out);
BNAS_API void bnas_dataset_free(bnas_dataset* dataset);
BNAS_API bnas_status bnas_dataset_info(const bnas_dataset* dataset, size_t* train, size_t* test, int* channels,
                                       int* height, int* width);

/* Architecture search. log_csv may be NULL. */
BNAS_API bnas_status bnas_search(const bnas_config* config, const bnas_dataset* dataset, const char* log_csv,
                                 bnas_arch** out);
BNAS_API void bnas_arch_free(bnas_arch* arch);
BNAS_API bnas_status bnas_arch_save(const bnas_arch* arch, const char* path);
BNAS_API bnas_status bnas_arch_load(const char* path, bnas_arch** out);
/* Mean softmax entropy per row and the number of edges per table. */
BNAS_API bnas_status bnas_arch_info(const bnas_arch* arch, double* entropy, int* edges, int* ops);

/* Genotypes. gamma must be > 0. */
BNAS_API bnas_status bnas_derive(const bnas_arch* arch, double gamma, bnas_genotype** out);
BNAS_API void bnas_genotype_free(bnas_genotype* genotype);
BNAS_API bnas_status bnas_genotype_parse(const char* json, bnas_genotype** out);
BNAS_API bnas_status bnas_genotype_load(const char* path, bnas_genotype** out);
BNAS_API bnas_status bnas_genotype_save(const bnas_genotype* genotype, const char* path);
BNAS_API bnas_status bnas_genotype_json(const bnas_genotype* genotype, char* buf, size_t cap, size_t* needed);
BNAS_API bnas_status bnas_genotype_op_proportion(const bnas_genotype* genotype, const char* op, double* out);

/* Networks built from a genotype at the config's net.cells / net.channels.
 * The dataset fixes the input geometry; pass NULL for 3x32x32. */
BNAS_API bnas_status bnas_model_build(const bnas_config* config, const bnas_genotype* genotype,
                                      const bnas_dataset* dataset, bnas_model** out);
BNAS_API void bnas_model_free(bnas_model* model);
/* metrics_csv and grads_csv may be NULL. */
BNAS_API bnas_status bnas_model_train(bnas_model* model, const bnas_config* config, const bnas_dataset* dataset,
                                      const char* metrics_csv, const char* grads_csv);
BNAS_API bnas_status bnas_model_evaluate(bnas_model* model, const bnas_dataset* dataset, bnas_eval_result* out);
BNAS_API bnas_status bnas_model_save(const bnas_model* model, const char* path);
BNAS_API bnas_status bnas_model_load(bnas_model* model, const char* path);
BNAS_API bnas_status bnas_model_export(const bnas_model* model, const char* path);
BNAS_API bnas_status bnas_model_param_count(const bnas_model* model, size_t* out);

/* Complexity of the network a genotype builds at the config's budget.
 * reference (may be NULL) supplies the full-precision twin baseline, e.g.
 * the same budget without zeroise. csv_path (may be NULL) receives the
 * per-layer breakdown; text (may be NULL) the aligned report. */
BNAS_API bnas_status bnas_flops(const bnas_config* config, const bnas_genotype* genotype,
                                const bnas_genotype* reference, int in_channels, int height, int width,
                                bnas_flops_report* out, const char* csv_path, char* text, size_t cap,
                                size_t* needed);

/* Runs a scripted study ("quant-error", "ablation", "sepconv", "skip-probe")
 * and writes results under results_root/<study>/<stamp>/. The genotype is
 * required by skip-probe only. The output directory is returned in dir. */
BNAS_API bnas_status bnas_study_run(const bnas_config* config, const char* study, const bnas_dataset* dataset,
                                    const bnas_genotype* genotype, const char* results_root, char* dir,
                                    size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
