#ifndef NKE_NKE_H
#define NKE_NKE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NKE_BUILDING_LIBRARY)
#    define NKE_API __declspec(dllexport)
#  else
#    define NKE_API __declspec(dllimport)
#  endif
#else
#  define NKE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nke_status {
  NKE_OK = 0,
  NKE_ERR_INVALID_ARGUMENT,
  NKE_ERR_UNKNOWN_ACTIVATION,
  NKE_ERR_BAD_PARAMS,
  NKE_ERR_DEGREE_TOO_LARGE,
  NKE_ERR_DEGREE_OVERFLOW,
  NKE_ERR_DOMAIN,
  NKE_ERR_ZERO_NORM_INPUT,
  NKE_ERR_NON_FINITE_ACTIVATION,
  NKE_ERR_NON_FINITE_KERNEL,
  NKE_ERR_SHAPE_MISMATCH,
  NKE_ERR_DIMENSION_MISMATCH,
  NKE_ERR_EIGEN_FAILURE,
  NKE_ERR_SINGULAR_SYSTEM,
  NKE_ERR_NOT_HOMOGENEOUS,
  NKE_ERR_NOT_SYMMETRIC,
  NKE_ERR_ZERO_DENOMINATOR,
  NKE_ERR_NO_SCALAR_FORM,
  NKE_ERR_BUDGET_EXCEEDED,
  NKE_ERR_IO,
  NKE_ERR_PARSE,
  NKE_ERR_OUT_OF_MEMORY,
  NKE_ERR_INTERNAL
} nke_status;

typedef enum nke_kernel_kind { NKE_NNGP = 0, NKE_NTK = 1 } nke_kernel_kind;

typedef enum nke_cntk_mode { NKE_CNTK_EXACT = 0, NKE_CNTK_SKETCH = 1 } nke_cntk_mode;

typedef struct nke_matrix nke_matrix;
typedef struct nke_image nke_image;
typedef struct nke_dual nke_dual;
typedef struct nke_ridge nke_ridge;

/* Message of the last failed call on this thread; empty string if none. */
NKE_API const char* nke_last_error(void);
/* Row index attached to the last error, or -1. */
NKE_API int64_t nke_last_error_index(void);
NKE_API const char* nke_status_name(nke_status status);

/* Dense matrices, row-major. */
NKE_API nke_status nke_matrix_create(size_t rows, size_t cols, const double* data, nke_matrix** out);
NKE_API nke_status nke_matrix_load(const char* path, nke_matrix** out);
/* Binary above one million entries, CSV otherwise. */
NKE_API nke_status nke_matrix_save(const nke_matrix* m, const char* path);
NKE_API nke_status nke_matrix_save_csv(const nke_matrix* m, const char* path);
NKE_API nke_status nke_matrix_save_binary(const nke_matrix* m, const char* path);
NKE_API size_t nke_matrix_rows(const nke_matrix* m);
NKE_API size_t nke_matrix_cols(const nke_matrix* m);
NKE_API const double* nke_matrix_data(const nke_matrix* m);
NKE_API void nke_matrix_free(nke_matrix* m);

/* Images of shape d1 x d2 x channels, row-major with channels innermost. */
NKE_API nke_status nke_image_create(size_t d1, size_t d2, size_t channels, const double* data, nke_image** out);
NKE_API nke_status nke_image_load(const char* path, nke_image** out);
NKE_API nke_status nke_image_save(const nke_image* img, const char* path);
NKE_API void nke_image_shape(const nke_image* img, size_t* d1, size_t* d2, size_t* channels);
NKE_API const double* nke_image_data(const nke_image* img);
NKE_API void nke_image_free(nke_image* img);

/* Dual activations from the catalog. */
NKE_API size_t nke_catalog_count(void);
NKE_API const char* nke_catalog_name(size_t index);
NKE_API nke_status nke_dual_create(const char* name, const double* params, size_t n_params, nke_dual** out);
NKE_API nke_status nke_dual_eval(const nke_dual* d, double a, double b, double c, double* out);
/* Closed form of the derivative dual when known, numeric rule otherwise. */
NKE_API nke_status nke_dual_deriv_eval(const nke_dual* d, double a, double b, double c, double* out);
NKE_API nke_status nke_dual_deriv_numeric(const nke_dual* d, double a, double b, double c, double h, double* out);
NKE_API int nke_dual_has_closed_deriv(const nke_dual* d);
NKE_API int nke_dual_is_homogeneous(const nke_dual* d);
NKE_API void nke_dual_free(nke_dual* d);

/* E[sigma(u) sigma(v)] by a q-point tensor Gauss-Hermite rule. */
NKE_API nke_status nke_quadrature_dual(const char* name, const double* params, size_t n_params, double a, double b,
                                       double c, int q, double* out);

/* Fully connected kernels; rows of X are points. */
NKE_API nke_status nke_kernel_matrix(const nke_matrix* X, const nke_dual* dual, int depth, nke_kernel_kind which,
                                     nke_matrix** out);
NKE_API nke_status nke_kernel_matrix_cross(const nke_matrix* A, const nke_matrix* B, const nke_dual* dual, int depth,
                                           nke_kernel_kind which, nke_matrix** out);

typedef struct nke_embed_options {
  int depth;
  int degree;        /* truncation degree of the dot-product polynomial */
  size_t sketch_dim;
  int max_degree;    /* truncation degree of the composed polynomials */
  uint64_t seed;
} nke_embed_options;

NKE_API void nke_embed_options_default(nke_embed_options* opts);

/* Random features for the NNGP (phi) and NTK (psi) of a degree-1 homogeneous activation.
   Output rows are points. The tails are the coefficient mass dropped by truncation. */
NKE_API nke_status nke_embed(const char* name, const double* params, size_t n_params, const nke_matrix* X,
                             const nke_embed_options* opts, nke_matrix** phi, nke_matrix** psi, double* nngp_tail,
                             double* ntk_tail);

typedef struct nke_cntk_options {
  int depth;
  int filter;
  int degree;
  size_t sketch_dim;
  size_t output_sketch_dim;
  size_t pixel_budget;
  uint64_t seed;
} nke_cntk_options;

NKE_API void nke_cntk_options_default(nke_cntk_options* opts);

NKE_API nke_status nke_cntk_pair(const nke_image* y, const nke_image* z, const nke_dual* dual,
                                 const nke_cntk_options* opts, double* out);
/* Gram matrix of the convolutional NTK. Sketch mode needs a degree-1 homogeneous activation. */
NKE_API nke_status nke_cntk_kernel(const nke_image* const* images, size_t count, const char* name,
                                   const double* params, size_t n_params, const nke_cntk_options* opts,
                                   nke_cntk_mode mode, nke_matrix** out);
/* One feature row per image. */
NKE_API nke_status nke_cntk_features(const nke_image* const* images, size_t count, const char* name,
                                     const double* params, size_t n_params, const nke_cntk_options* opts,
                                     nke_matrix** out);

/* Baselines and diagnostics. */
NKE_API nke_status nke_monte_carlo_dual(const char* name, const double* params, size_t n_params, const nke_matrix* X,
                                        size_t samples, uint64_t seed, nke_matrix** out);
NKE_API nke_status nke_hermite_dual_matrix(const char* name, const double* params, size_t n_params,
                                           const nke_matrix* X, int degree, nke_matrix** out);
NKE_API nke_status nke_dual_matrix(const nke_dual* dual, const nke_matrix* X, nke_matrix** out);
NKE_API nke_status nke_relative_frobenius_error(const nke_matrix* approx, const nke_matrix* exact, double* out);
NKE_API nke_status nke_statistical_dimension(const nke_matrix* K, double lambda, double* out);

/* Ridge regression over a list of regularizers. Pass lambdas = NULL for the default grid.
   Kernel mode takes K_train (n x n) and K_test (t x n); feature mode takes feature rows per point. */
NKE_API nke_status nke_ridge_kernel(const nke_matrix* K_train, const nke_matrix* K_test, const nke_matrix* Y_train,
                                    const nke_matrix* Y_test, const double* lambdas, size_t n_lambdas,
                                    nke_ridge** out);
NKE_API nke_status nke_ridge_features(const nke_matrix* F_train, const nke_matrix* F_test, const nke_matrix* Y_train,
                                      const nke_matrix* Y_test, const double* lambdas, size_t n_lambdas,
                                      nke_ridge** out);
NKE_API size_t nke_ridge_count(const nke_ridge* r);
NKE_API double nke_ridge_lambda(const nke_ridge* r, size_t i);
NKE_API double nke_ridge_accuracy(const nke_ridge* r, size_t i);
NKE_API double nke_ridge_jitter(const nke_ridge* r, size_t i);
NKE_API size_t nke_ridge_best(const nke_ridge* r);
NKE_API nke_status nke_ridge_predictions(const nke_ridge* r, size_t i, nke_matrix** out);
NKE_API void nke_ridge_free(nke_ridge* r);

#ifdef __cplusplus
}
#endif

#endif
