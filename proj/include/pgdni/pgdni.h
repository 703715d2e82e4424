/* C interface of the pgdni library.
 *
 * Every function returning pgdni_status reports failures through the status
 * code; pgdni_last_error() then describes the most recent failure on the
 * calling thread. Handles are opaque and owned by the caller, who releases
 * them with the matching *_free function. */
#ifndef PGDNI_H
#define PGDNI_H

#include <stddef.h>
#include <stdint.h>

#if defined(PGDNI_BUILDING_LIBRARY)
#define PGDNI_API __attribute__((visibility("default")))
#else
#define PGDNI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pgdni_status {
  PGDNI_OK = 0,
  PGDNI_INVALID_ARGUMENT = 1,
  PGDNI_NOT_CONVERGED = 2,
  PGDNI_IO_ERROR = 3,
  PGDNI_NUMERICAL_ERROR = 4,
  PGDNI_OUT_OF_RANGE = 5,
  PGDNI_CALLBACK_ERROR = 6,
  PGDNI_INTERNAL_ERROR = 7
} pgdni_status;

/* Algorithm selection bits. */
enum {
  PGDNI_ALGO_BASIC = 1u,
  PGDNI_ALGO_IMPROVED = 2u,
  PGDNI_ALGO_GALERKIN = 4u,
  PGDNI_ALGO_SVD = 8u
};

typedef enum pgdni_format { PGDNI_FORMAT_CSV = 0, PGDNI_FORMAT_JSON = 1 } pgdni_format;

typedef enum pgdni_param_rule {
  PGDNI_PARAM_RULE_GAUSS = 0,
  PGDNI_PARAM_RULE_NODAL = 1
} pgdni_param_rule;

typedef enum pgdni_obstacle_form {
  PGDNI_OBSTACLE_AS_STATED = 0,
  PGDNI_OBSTACLE_DRAPED = 1
} pgdni_obstacle_form;

/* ------------------------------------------------------------------------ */
/* Benchmark studies                                                         */

typedef struct pgdni_network_options {
  const int* degrees; /* NULL selects 2, 3, 4, 5 */
  size_t n_degrees;
  int max_rank;
  unsigned algorithms; /* PGDNI_ALGO_BASIC | IMPROVED | GALERKIN */
  double resistance;   /* B = M / resistance */
  double bfgs_tol;
  int memory;
  int error_points; /* per dimension of the error rule */
  int parallel;
} pgdni_network_options;

typedef struct pgdni_obstacle_options {
  int max_rank;
  unsigned algorithms; /* PGDNI_ALGO_BASIC | IMPROVED | SVD */
  int param_elements;
  pgdni_param_rule param_rule;
  int param_points; /* Gauss points per parameter cell */
  pgdni_obstacle_form form;
  int n_elements; /* spatial P1 elements */
  double penalty;
  int element_quadrature;
  double anchor; /* preconditioner parameter point */
  double bfgs_tol;
  int memory;
  int parallel;
} pgdni_obstacle_options;

typedef struct pgdni_record {
  const char* algorithm; /* "basic", "improved", "galerkin" or "svd" */
  int d;                 /* 0 for obstacle records */
  int rank;
  double rel_error; /* NaN for failed cells */
  uint64_t residual_calls;
  int converged;
  const char* message; /* empty unless the cell failed */
} pgdni_record;

typedef struct pgdni_results pgdni_results;

PGDNI_API void pgdni_network_options_init(pgdni_network_options* options);
PGDNI_API void pgdni_obstacle_options_init(pgdni_obstacle_options* options);

/* Solver failures inside a cell are reported in the records (converged = 0)
 * and do not change the returned status. */
PGDNI_API pgdni_status pgdni_run_network(const pgdni_network_options* options,
                                         pgdni_results** out);
PGDNI_API pgdni_status pgdni_run_obstacle(const pgdni_obstacle_options* options,
                                          pgdni_results** out);

PGDNI_API size_t pgdni_results_count(const pgdni_results* results);
/* Strings in the record stay valid until the results are freed. */
PGDNI_API pgdni_status pgdni_results_get(const pgdni_results* results, size_t index,
                                         pgdni_record* out);
PGDNI_API int pgdni_results_all_converged(const pgdni_results* results);
/* path NULL or "-" writes to standard output. */
PGDNI_API pgdni_status pgdni_results_write(const pgdni_results* results,
                                           const char* path, pgdni_format format);
PGDNI_API void pgdni_results_free(pgdni_results* results);

/* ------------------------------------------------------------------------ */
/* User problems                                                             */

/* Callbacks return 0 on success; any other value aborts the solve with
 * PGDNI_CALLBACK_ERROR. Arrays have the problem's state or parameter size. */
typedef int (*pgdni_residual_fn)(void* user, const double* u, const double* p,
                                 double* out);
typedef int (*pgdni_precond_fn)(void* user, const double* vec, const double* p,
                                const double* u_state, double* out);

typedef struct pgdni_problem_desc {
  size_t state_dim;
  size_t param_dim; /* parameters uniform on [-1, 1]^param_dim */
  pgdni_residual_fn residual;
  pgdni_precond_fn precond_inverse; /* NULL selects the identity */
  pgdni_precond_fn precond_forward; /* optional */
  void* user;
} pgdni_problem_desc;

typedef struct pgdni_pgd_options {
  int improved; /* 0: greedy rank-one PGD, 1: improved PGD */
  int max_rank;
  int degree; /* total degree of the Legendre basis */
  double bfgs_tol;
  int memory;
  double outer_tol; /* stop adding ranks below this relative correction */
} pgdni_pgd_options;

typedef struct pgdni_lowrank pgdni_lowrank;

PGDNI_API void pgdni_pgd_options_init(pgdni_pgd_options* options);
/* Runs PGD on a Legendre total-degree basis with a (degree + 1)^param_dim
 * Gauss rule and returns the approximation of the highest rank reached. */
PGDNI_API pgdni_status pgdni_solve_pgd(const pgdni_problem_desc* problem,
                                       const pgdni_pgd_options* options,
                                       pgdni_lowrank** out);
PGDNI_API size_t pgdni_lowrank_rank(const pgdni_lowrank* u);
PGDNI_API size_t pgdni_lowrank_basis_size(const pgdni_lowrank* u);
PGDNI_API size_t pgdni_lowrank_state_dim(const pgdni_lowrank* u);
PGDNI_API uint64_t pgdni_lowrank_residual_calls(const pgdni_lowrank* u);
/* Column-major copies: lambda is basis_size x rank, v is state_dim x rank.
 * Either pointer may be NULL. */
PGDNI_API pgdni_status pgdni_lowrank_factors(const pgdni_lowrank* u, double* lambda,
                                             double* v);
PGDNI_API pgdni_status pgdni_lowrank_evaluate(const pgdni_lowrank* u, const double* p,
                                              double* out);
PGDNI_API void pgdni_lowrank_free(pgdni_lowrank* u);

/* ------------------------------------------------------------------------ */

PGDNI_API const char* pgdni_last_error(void);
PGDNI_API const char* pgdni_status_string(pgdni_status status);
PGDNI_API const char* pgdni_version(void);

#ifdef __cplusplus
}
#endif

#endif /* PGDNI_H */
