/* C surface of the sub-Riemannian geometry toolkit. All structured data
 * crosses this boundary as JSON text; every returned char* is owned by the
 * caller and released with srgeo_free. Functions returning int use the
 * status codes below and record a message retrievable per context. */
#ifndef SRGEO_H
#define SRGEO_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct srgeo_ctx srgeo_ctx;
typedef struct srgeo_frame srgeo_frame;

enum {
  SRGEO_OK = 0,
  SRGEO_ERR_CONFIG = 1, /* malformed request: bad JSON, keys, values */
  SRGEO_ERR_MATH = 2,   /* a solver or construction failed */
  SRGEO_CHECKS_FAILED = 3 /* strict run with failing data checks */
};

const char* srgeo_version(void);

srgeo_ctx* srgeo_ctx_new(void);
void srgeo_ctx_free(srgeo_ctx* ctx);

/* message from the most recent failing call on this context; "" when the
 * last call succeeded; owned by the context */
const char* srgeo_last_error(const srgeo_ctx* ctx);

void srgeo_free(char* text);

/* --- frames --- */

/* bundled frame by name (heis1, heis2, martinet, example5, example7);
 * NULL on unknown names with the error recorded */
srgeo_frame* srgeo_frame_bundled(srgeo_ctx* ctx, const char* name);

/* frame from its JSON serialization */
srgeo_frame* srgeo_frame_parse(srgeo_ctx* ctx, const char* json_text);

void srgeo_frame_free(srgeo_frame* frame);

/* canonical formula text per field, as a JSON array of strings */
int srgeo_frame_formulas(srgeo_ctx* ctx, const srgeo_frame* frame,
                         char** out_json);

/* JSON serialization of the frame, inverse of srgeo_frame_parse */
int srgeo_frame_to_json(srgeo_ctx* ctx, const srgeo_frame* frame,
                        char** out_json);

/* --- pointwise analysis --- */

/* growth flag over rational sample points; points_json is an array of
 * coordinate-string arrays, e.g. [["1/4","0","0","0","0"]] */
int srgeo_equiregular(srgeo_ctx* ctx, const srgeo_frame* frame,
                      const char* points_json, char** out_json);

/* tangent model at one rational point: growth, weights, structure
 * constants, and the isomorphism-invariant fingerprint */
int srgeo_nilpotentize(srgeo_ctx* ctx, const srgeo_frame* frame,
                       const char* point_json, char** out_json);

/* stratified isomorphism search between two serialized graded algebras;
 * workers = 0 picks a thread count */
int srgeo_iso_search(srgeo_ctx* ctx, const char* algebra1_json,
                     const char* algebra2_json, int restarts, double tol,
                     unsigned long long seed, int workers, char** out_json);

/* --- experiment pipelines --- */

/* Runs one command (flag, nilp, iso, group, defect, patchwork, cantor,
 * embed, cover, report) against a JSON config object. On success or
 * SRGEO_CHECKS_FAILED, *out_json receives an object with fields "report"
 * (the deterministic report envelope, also written under the configured
 * output directory), "artifacts" (paths written), "summary" (human text),
 * and "exit_code". On SRGEO_ERR_* *out_json is NULL. */
int srgeo_run(srgeo_ctx* ctx, const char* command, const char* config_json,
              char** out_json);

#ifdef __cplusplus
}
#endif

#endif
