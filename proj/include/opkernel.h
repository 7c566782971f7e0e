#ifndef OPKERNEL_H
#define OPKERNEL_H

/*
 * C interface to the opkernel library.  All structured data crosses the
 * boundary as UTF-8 JSON documents in the formats described in the README;
 * results are heap-allocated strings released with opk_string_free().
 *
 * Status codes mirror the CLI exit codes:
 *   0  OPK_OK              everything checked out
 *   1  OPK_CHECK_FAILED    a mathematical check failed (report explains)
 *   2  OPK_INVALID_INPUT   malformed input, shape mismatch, cap exceeded
 *   3  OPK_INTERNAL_ERROR  unexpected internal failure
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define OPK_OK 0
#define OPK_CHECK_FAILED 1
#define OPK_INVALID_INPUT 2
#define OPK_INTERNAL_ERROR 3

typedef struct opk_ctx opk_ctx;

opk_ctx *opk_ctx_new(void);
void opk_ctx_free(opk_ctx *ctx);

/* residual thresholds: effective threshold is
 * max(abs_floor, rel_eps * scale) */
int opk_set_tolerance(opk_ctx *ctx, double rel_eps, double abs_floor);
int opk_set_seed(opk_ctx *ctx, unsigned long long seed);

/* message for the most recent failure on this context */
const char *opk_last_error(const opk_ctx *ctx);
void opk_string_free(char *str);
const char *opk_version(void);

/* positive definiteness of a B-valued kernel */
int opk_check_pd(opk_ctx *ctx, const char *kernel_json, char **report_json);
/* complete positive definiteness of a kernel of maps */
int opk_check_cpd(opk_ctx *ctx, const char *kernel_json, char **report_json);
/* minimal Kolmogorov decomposition of a PD kernel */
int opk_kolmogorov(opk_ctx *ctx, const char *kernel_json, char **result_json);
/* GNS correspondence of a CPD kernel */
int opk_gns(opk_ctx *ctx, const char *kernel_json, char **result_json);
/* Schur composition L o K with the embedding of its GNS space */
int opk_compose(opk_ctx *ctx, const char *l_json, const char *k_json,
                char **report_json);
/* Stinespring dilation; module_json may be NULL for the identity
 * representation of the target algebra */
int opk_stinespring(opk_ctx *ctx, const char *kernel_json,
                    const char *module_json, char **report_json);
/* phi-map dilation sextuple; task carries module, t_matrix, phi */
int opk_phimap(opk_ctx *ctx, const char *task_json, char **report_json);
/* tensor-sandwich of a correspondence over the operator algebra of E */
int opk_sandwich(opk_ctx *ctx, const char *task_json, char **report_json);
/* Schoenberg normalization plus Fock verification over a time grid */
int opk_schoenberg(opk_ctx *ctx, const char *generator_json,
                   const char *base_point, const double *times,
                   size_t n_times, int fock_truncation, char **report_json);
/* subproduct-system checks for a semigroup generator at times (s, t) */
int opk_semigroup(opk_ctx *ctx, const char *generator_json, double s,
                  double t, char **report_json);
/* abstract *-algebra positivity: subcommand in
 * {"gns", "separated", "spositive", "sqrt", "kolmogorov"} */
int opk_star(opk_ctx *ctx, const char *subcommand, const char *task_json,
             char **report_json);
/* the full deterministic verification suite */
int opk_selftest(opk_ctx *ctx, char **report_json);

#ifdef __cplusplus
}
#endif

#endif
