#ifndef FAKESPREAD_FAKESPREAD_H
#define FAKESPREAD_FAKESPREAD_H

#include <stddef.h>
#include <stdint.h>

#if defined(FAKESPREAD_BUILDING)
#define FS_API __attribute__((visibility("default")))
#else
#define FS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fs_status {
  FS_OK = 0,
  FS_ERR_USAGE = 1,    /* invalid argument or configuration */
  FS_ERR_DATA = 2,     /* missing or malformed input data */
  FS_ERR_INTERNAL = 3  /* invariant violation */
} fs_status;

typedef struct fs_pipeline fs_pipeline;
typedef struct fs_topic_model fs_topic_model;
typedef struct fs_model fs_model;

/* Message of the last failed call on this thread; never NULL. */
FS_API const char* fs_last_error(void);
FS_API const char* fs_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
FS_API void fs_string_free(char* s);

/* ---- pipeline ---- */

/* overrides_json: JSON object (dotted keys allowed) or NULL. */
FS_API fs_status fs_pipeline_open(const char* config_path, const char* overrides_json, fs_pipeline** out);
/* stage: ingest, topics, features, label, train, evaluate or all. */
FS_API fs_status fs_pipeline_run(fs_pipeline* p, const char* stage);
FS_API fs_status fs_pipeline_out_dir(const fs_pipeline* p, char** out);
FS_API fs_status fs_pipeline_config_json(const fs_pipeline* p, char** out);
/* request_json fields: sender, text, recipients, like_count, mode, model. */
FS_API fs_status fs_pipeline_predict_spread(fs_pipeline* p, const char* request_json, char** out_json);
FS_API void fs_pipeline_close(fs_pipeline* p);

/* ---- features ---- */

FS_API fs_status fs_tff(int64_t followers, int64_t following, double* out);
FS_API fs_status fs_acceptance_score(const double* theta_recipient, const double* tweet_posterior, size_t num_topics,
                                     double tff_sender, double tff_norm, double* out);
/* lexicon_path NULL selects the bundled lexicon. Output is a JSON object. */
FS_API fs_status fs_text_features(const char* text, const char* lexicon_path, char** out_json);

/* ---- evaluation ---- */

FS_API fs_status fs_auroc(const double* y_true, const double* scores, size_t n, double* out);

/* ---- topic model ---- */

FS_API fs_status fs_topic_model_load(const char* path, fs_topic_model** out);
FS_API fs_status fs_topic_model_num_topics(const fs_topic_model* m, int* out);
/* out receives num_topics values. */
FS_API fs_status fs_topic_model_infer(const fs_topic_model* m, const char* text, double* out, size_t out_len);
FS_API fs_status fs_topic_model_user_theta(const fs_topic_model* m, const char* user_id, double* out, size_t out_len);
FS_API void fs_topic_model_free(fs_topic_model* m);

/* ---- trained models ---- */

FS_API fs_status fs_model_load(const char* path, fs_model** out);
FS_API fs_status fs_model_num_features(const fs_model* m, size_t* out);
FS_API fs_status fs_model_is_classifier(const fs_model* m, int* out);
/* Share probability for classifiers, prediction for regressors. */
FS_API fs_status fs_model_score(const fs_model* m, const double* x, size_t n_features, double* out);
FS_API fs_status fs_model_predict(const fs_model* m, const double* x, size_t n_features, double* out);
FS_API void fs_model_free(fs_model* m);

#ifdef __cplusplus
}
#endif

#endif
