#ifndef BICF_BICF_H_
#define BICF_BICF_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define BICF_API __attribute__((visibility("default")))
#else
#define BICF_API
#endif

/* Every fallible call returns one of these. On failure the message is kept
   per thread and read back with bicf_last_error(). */
typedef enum bicf_status {
  BICF_OK = 0,
  BICF_E_IO = 1,
  BICF_E_PARSE = 2,
  BICF_E_VALIDATION = 3,
  BICF_E_BIO = 4,
  BICF_E_SPEC = 5,
  BICF_E_EMPTY_CORPUS = 6,
  BICF_E_EMPTY_PARALLEL_CORPUS = 7,
  BICF_E_INDEX_OUT_OF_RANGE = 8,
  BICF_E_PAIR_COUNT_MISMATCH = 9,
  BICF_E_INDEX_OUT_OF_VOCAB = 10,
  BICF_E_LABEL_OUT_OF_INVENTORY = 11,
  BICF_E_SHAPE_MISMATCH = 12,
  BICF_E_DIVERGENCE = 13,
  BICF_E_MISSING_IMPORT = 14,
  BICF_E_LENGTH_MISMATCH = 15,
  BICF_E_EMPTY_INPUT = 16,
  BICF_E_CONFIG = 17,
  BICF_E_INVALID_ARGUMENT = 18,
  BICF_E_INTERNAL = 99
} bicf_status;

typedef struct bicf_config bicf_config;
typedef struct bicf_corpus bicf_corpus;
typedef struct bicf_freq_lexicon bicf_freq_lexicon;
typedef struct bicf_conf_lexicon bicf_conf_lexicon;
typedef struct bicf_mixed bicf_mixed;
typedef struct bicf_model bicf_model;

BICF_API const char* bicf_version(void);
/* Empty string when the last call on this thread succeeded. */
BICF_API const char* bicf_last_error(void);
/* "ParseError", "ConfigError", ... */
BICF_API const char* bicf_status_name(int status);
/* Strings handed out through char** parameters are owned by the caller. */
BICF_API void bicf_string_free(char* s);

/* Run configuration (dotted keys, see README). */
BICF_API int bicf_config_new(bicf_config** out);
BICF_API int bicf_config_load(const char* path, bicf_config** out);
BICF_API int bicf_config_set(bicf_config* cfg, const char* key, const char* value);
/* "key=value" */
BICF_API int bicf_config_override(bicf_config* cfg, const char* assignment);
BICF_API int bicf_config_get(const bicf_config* cfg, const char* key, char** value);
BICF_API int bicf_config_hash(const bicf_config* cfg, char** hex);
BICF_API int bicf_config_dump(const bicf_config* cfg, char** text);
BICF_API void bicf_config_free(bicf_config* cfg);

/* Annotated corpora (JSONL). */
BICF_API int bicf_corpus_load(const char* path, const char* language, bicf_corpus** out);
BICF_API int bicf_corpus_save(const bicf_corpus* corpus, const char* path);
BICF_API size_t bicf_corpus_size(const bicf_corpus* corpus);
/* Counts, inventories and dialogue statistics as JSON. */
BICF_API int bicf_corpus_stats(const bicf_corpus* corpus, char** json);
BICF_API void bicf_corpus_free(bicf_corpus* corpus);

/* Synthetic bilingual fixture from the synth.* keys and the seed. Writes
   source.jsonl, target_train.jsonl, target_test.jsonl, parallel.txt,
   dictionary.tsv, import_gold.jsonl and fixture.toml into out_dir. */
BICF_API int bicf_synth(const bicf_config* cfg, const char* out_dir, char** summary_json);

/* Frequency lexicon; aggregation from mix.tfidf. */
BICF_API int bicf_freq_build(const bicf_corpus* corpus, const bicf_config* cfg,
                             bicf_freq_lexicon** out);
BICF_API int bicf_freq_load(const char* path, bicf_freq_lexicon** out);
BICF_API int bicf_freq_save(const bicf_freq_lexicon* lex, const char* path);
BICF_API size_t bicf_freq_size(const bicf_freq_lexicon* lex);
BICF_API void bicf_freq_free(bicf_freq_lexicon* lex);

/* Confidence lexicon by EM over a parallel file (align.* keys and seed).
   log_likelihood_json, if not NULL, receives the per-iteration trace. */
BICF_API int bicf_conf_train(const char* parallel_path, const bicf_config* cfg,
                             bicf_conf_lexicon** out, char** log_likelihood_json);
BICF_API int bicf_conf_import_pharaoh(const char* parallel_path, const char* alignment_path,
                                      bicf_conf_lexicon** out);
BICF_API int bicf_conf_load(const char* path, bicf_conf_lexicon** out);
BICF_API int bicf_conf_save(const bicf_conf_lexicon* lex, const char* path);
BICF_API size_t bicf_conf_size(const bicf_conf_lexicon* lex);
BICF_API void bicf_conf_free(bicf_conf_lexicon* lex);

/* Thresh, fusion and mixing with the mix.* keys. */
BICF_API int bicf_mix(const bicf_corpus* source, const bicf_freq_lexicon* freq,
                      const bicf_conf_lexicon* conf, const bicf_config* cfg,
                      bicf_mixed** out);
BICF_API size_t bicf_mixed_table_size(const bicf_mixed* mixed);
BICF_API size_t bicf_mixed_substitution_count(const bicf_mixed* mixed);
/* *violation is set to NULL when labels are preserved, otherwise to a
   description of the first difference. */
BICF_API int bicf_mixed_verify(const bicf_mixed* mixed, const bicf_corpus* source,
                               char** violation);
/* table_path may be NULL. */
BICF_API int bicf_mixed_save(const bicf_mixed* mixed, const char* corpus_path,
                             const char* log_path, const char* table_path);
BICF_API void bicf_mixed_free(bicf_mixed* mixed);

/* Full run of the configured mode. Writes model.ckpt and report.json (plus
   the mixed corpus files for bicf) into out_dir. */
BICF_API int bicf_train(const bicf_config* cfg, char** report_json);
/* Comma-separated lists; modes/seeds may be NULL to use the config's.
   Writes sweep.csv, sweep.json and sweep.svg into out_dir. */
BICF_API int bicf_sweep(const bicf_config* cfg, const char* sizes, const char* modes,
                        const char* seeds, unsigned jobs, char** csv);

BICF_API int bicf_model_load(const char* path, bicf_model** out);
/* Report JSON including the run metadata stored in the checkpoint. */
BICF_API int bicf_model_eval(const bicf_model* model, const bicf_corpus* gold,
                             char** report_json);
/* Whitespace-separated tokens in, {"intents":[...],"tags":[...]} out. */
BICF_API int bicf_model_predict(const bicf_model* model, const char* tokens, char** json);
BICF_API void bicf_model_free(bicf_model* model);

/* Metrics. */
BICF_API int bicf_bleu_files(const char* hypothesis_path, const char* reference_path,
                             unsigned max_n, double* out);
/* counts is items x categories, row-major. */
BICF_API int bicf_fleiss_kappa(const size_t* counts, size_t items, size_t categories,
                               double* kappa, int* degenerate);

#ifdef __cplusplus
}
#endif

#endif /* BICF_BICF_H_ */
