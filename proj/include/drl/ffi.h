#ifndef DRL_FFI_H
#define DRL_FFI_H

/* C boundary for compile-once, refine-many use from other languages. Buffers
   are row-major arrays of doubles; handles are immutable and may be shared
   between threads. Functions returning int report 0 on success and the CLI
   exit codes otherwise (1 usage/parse, 2 unsat, 3 numeric failure); the
   message is then available from drl_last_error on the calling thread. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct drl_layer drl_layer;

/* Compiles constraint DSL text. ordering lists variable names separated by
   commas or whitespace, or is NULL for the declared order. epsilon is a
   decimal or "num/den" string, or NULL for 1e-6. Returns NULL on error. */
drl_layer* drl_load(const char* constraints_text, const char* ordering, const char* epsilon);

/* Loads a compiled artifact written by `drl compile`. */
drl_layer* drl_load_artifact(const char* path);

size_t drl_dimension(const drl_layer* layer);

/* Name of caller-side variable i, valid as long as the handle. */
const char* drl_variable_name(const drl_layer* layer, size_t i);

/* Refines rows x cols values from in into out (which may alias in). cols must
   equal drl_dimension. When jacobians is not NULL it receives rows x cols x
   cols values, d out[r][a] / d in[r][b] at [r][a][b]. */
int drl_refine_batch(const drl_layer* layer, const double* in, size_t rows, size_t cols, double* out,
                     double* jacobians, double tau);

void drl_release(drl_layer* layer);

const char* drl_last_error(void);

#ifdef __cplusplus
}
#endif

#endif
