#include "nke/nke.h"

#include <Eigen/Dense>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "nke/bench.hpp"
#include "nke/cntk.hpp"
#include "nke/dual_catalog.hpp"
#include "nke/error.hpp"
#include "nke/fc_kernels.hpp"
#include "nke/homogeneous_embed.hpp"
#include "nke/io.hpp"

struct nke_matrix {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m;
};

struct nke_image {
  nke::ImageTensor img;
};

struct nke_dual {
  nke::DualActivation dual;
};

struct nke_ridge {
  nke::RidgeResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local int64_t g_last_index = -1;

nke_status to_status(nke::ErrorCode code) {
  return static_cast<nke_status>(static_cast<int>(code) + 1);
}

void clear_error() {
  g_last_error.clear();
  g_last_index = -1;
}

template <class F>
nke_status guarded(F&& body) {
  clear_error();
  try {
    body();
    return NKE_OK;
  } catch (const nke::Error& e) {
    g_last_error = e.what();
    if (e.index()) g_last_index = static_cast<int64_t>(*e.index());
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NKE_ERR_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NKE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return NKE_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) nke::fail(nke::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

Eigen::MatrixXd mat(const nke_matrix* m, const char* what) {
  require(m, what);
  return m->m;
}

nke_matrix* wrap(const Eigen::MatrixXd& m) {
  auto* out = new nke_matrix;
  out->m = m;
  return out;
}

std::span<const double> param_span(const double* params, size_t n) {
  if (n > 0) require(params, "params");
  return {params, n};
}

std::vector<double> lambda_list(const double* lambdas, size_t n) {
  if (!lambdas || n == 0) return nke::default_lambda_grid();
  return {lambdas, lambdas + n};
}

nke::CntkConfig cntk_config(const nke_cntk_options* opts, nke::DualActivation dual) {
  require(opts, "options");
  nke::CntkConfig cfg;
  cfg.depth = opts->depth;
  cfg.filter = opts->filter;
  cfg.dual = std::move(dual);
  cfg.sketch_dim = opts->sketch_dim;
  cfg.output_sketch_dim = opts->output_sketch_dim;
  cfg.pixel_budget = opts->pixel_budget;
  cfg.seed = opts->seed;
  return cfg;
}

std::vector<nke::ImageTensor> image_list(const nke_image* const* images, size_t count) {
  if (count == 0) nke::fail(nke::ErrorCode::InvalidArgument, "no images given");
  require(images, "images");
  std::vector<nke::ImageTensor> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    require(images[i], "image");
    out.push_back(images[i]->img);
  }
  return out;
}

}  // namespace

extern "C" {

const char* nke_last_error(void) { return g_last_error.c_str(); }

int64_t nke_last_error_index(void) { return g_last_index; }

const char* nke_status_name(nke_status status) {
  switch (status) {
    case NKE_OK:
      return "Ok";
    case NKE_ERR_OUT_OF_MEMORY:
      return "OutOfMemory";
    case NKE_ERR_INTERNAL:
      return "Internal";
    default:
      if (status > NKE_OK && status < NKE_ERR_OUT_OF_MEMORY)
        return nke::error_code_name(static_cast<nke::ErrorCode>(static_cast<int>(status) - 1));
      return "Unknown";
  }
}

nke_status nke_matrix_create(size_t rows, size_t cols, const double* data, nke_matrix** out) {
  return guarded([&] {
    require(out, "out");
    if (rows * cols > 0) require(data, "data");
    auto* m = new nke_matrix;
    m->m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::copy(data, data + rows * cols, m->m.data());
    *out = m;
  });
}

nke_status nke_matrix_load(const char* path, nke_matrix** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(nke::read_matrix(path));
  });
}

nke_status nke_matrix_save(const nke_matrix* m, const char* path) {
  return guarded([&] {
    require(path, "path");
    nke::write_matrix(path, mat(m, "matrix"));
  });
}

nke_status nke_matrix_save_csv(const nke_matrix* m, const char* path) {
  return guarded([&] {
    require(path, "path");
    nke::write_csv(path, mat(m, "matrix"));
  });
}

nke_status nke_matrix_save_binary(const nke_matrix* m, const char* path) {
  return guarded([&] {
    require(path, "path");
    nke::write_binary(path, mat(m, "matrix"));
  });
}

size_t nke_matrix_rows(const nke_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t nke_matrix_cols(const nke_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }
const double* nke_matrix_data(const nke_matrix* m) { return m ? m->m.data() : nullptr; }
void nke_matrix_free(nke_matrix* m) { delete m; }

nke_status nke_image_create(size_t d1, size_t d2, size_t channels, const double* data, nke_image** out) {
  return guarded([&] {
    require(out, "out");
    if (d1 == 0 || d2 == 0 || channels == 0) nke::fail(nke::ErrorCode::InvalidArgument, "image dimensions must be positive");
    require(data, "data");
    auto* im = new nke_image{nke::ImageTensor(d1, d2, channels)};
    std::copy(data, data + d1 * d2 * channels, im->img.data.begin());
    *out = im;
  });
}

nke_status nke_image_load(const char* path, nke_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new nke_image{nke::read_image(path)};
  });
}

nke_status nke_image_save(const nke_image* img, const char* path) {
  return guarded([&] {
    require(img, "image");
    require(path, "path");
    nke::write_image(path, img->img);
  });
}

void nke_image_shape(const nke_image* img, size_t* d1, size_t* d2, size_t* channels) {
  if (d1) *d1 = img ? img->img.d1 : 0;
  if (d2) *d2 = img ? img->img.d2 : 0;
  if (channels) *channels = img ? img->img.c : 0;
}

const double* nke_image_data(const nke_image* img) { return img ? img->img.data.data() : nullptr; }
void nke_image_free(nke_image* img) { delete img; }

size_t nke_catalog_count(void) { return nke::catalog_names().size(); }

const char* nke_catalog_name(size_t index) {
  static const std::vector<std::string> names = nke::catalog_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

nke_status nke_dual_create(const char* name, const double* params, size_t n_params, nke_dual** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = new nke_dual{nke::catalog_lookup(name, param_span(params, n_params))};
  });
}

nke_status nke_dual_eval(const nke_dual* d, double a, double b, double c, double* out) {
  return guarded([&] {
    require(d, "dual");
    require(out, "out");
    *out = d->dual.eval(a, b, c);
  });
}

nke_status nke_dual_deriv_eval(const nke_dual* d, double a, double b, double c, double* out) {
  return guarded([&] {
    require(d, "dual");
    require(out, "out");
    *out = nke::derivative_dual(d->dual, a, b, c);
  });
}

nke_status nke_dual_deriv_numeric(const nke_dual* d, double a, double b, double c, double h, double* out) {
  return guarded([&] {
    require(d, "dual");
    require(out, "out");
    *out = nke::derivative_dual_numeric(d->dual, a, b, c, h);
  });
}

int nke_dual_has_closed_deriv(const nke_dual* d) { return d && d->dual.has_deriv() ? 1 : 0; }
int nke_dual_is_homogeneous(const nke_dual* d) { return d && d->dual.is_homogeneous ? 1 : 0; }
void nke_dual_free(nke_dual* d) { delete d; }

nke_status nke_quadrature_dual(const char* name, const double* params, size_t n_params, double a, double b, double c,
                               int q, double* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = nke::gauss_hermite_dual(nke::activation_spec(name, param_span(params, n_params)), a, b, c, q);
  });
}

nke_status nke_kernel_matrix(const nke_matrix* X, const nke_dual* dual, int depth, nke_kernel_kind which,
                             nke_matrix** out) {
  return guarded([&] {
    require(dual, "dual");
    require(out, "out");
    const nke::KernelConfig cfg{depth, dual->dual};
    *out = wrap(nke::kernel_matrix(mat(X, "X"), cfg, which == NKE_NTK ? nke::KernelKind::Ntk : nke::KernelKind::Nngp));
  });
}

nke_status nke_kernel_matrix_cross(const nke_matrix* A, const nke_matrix* B, const nke_dual* dual, int depth,
                                   nke_kernel_kind which, nke_matrix** out) {
  return guarded([&] {
    require(dual, "dual");
    require(out, "out");
    const nke::KernelConfig cfg{depth, dual->dual};
    *out = wrap(nke::kernel_matrix_cross(mat(A, "A"), mat(B, "B"), cfg,
                                         which == NKE_NTK ? nke::KernelKind::Ntk : nke::KernelKind::Nngp));
  });
}

void nke_embed_options_default(nke_embed_options* opts) {
  if (!opts) return;
  opts->depth = 2;
  opts->degree = 8;
  opts->sketch_dim = 1024;
  opts->max_degree = 64;
  opts->seed = 0;
}

nke_status nke_embed(const char* name, const double* params, size_t n_params, const nke_matrix* X,
                     const nke_embed_options* opts, nke_matrix** phi, nke_matrix** psi, double* nngp_tail,
                     double* ntk_tail) {
  return guarded([&] {
    require(name, "name");
    require(opts, "options");
    auto polys = nke::dot_product_polys(name, param_span(params, n_params), opts->degree);
    const auto cfg = nke::EmbedConfig::make(polys.first, opts->depth, opts->sketch_dim, opts->max_degree, opts->seed);
    const Eigen::MatrixXd x = mat(X, "X");
    const nke::HomogeneousEmbedder embedder(cfg, static_cast<std::size_t>(x.cols()));
    auto [P, R] = embedder.embed_rows(x);
    if (phi) *phi = wrap(P.transpose());
    if (psi) *psi = wrap(R.transpose());
    if (nngp_tail) *nngp_tail = embedder.nngp_poly().truncation_tail;
    if (ntk_tail) *ntk_tail = embedder.ntk_poly().truncation_tail;
  });
}

void nke_cntk_options_default(nke_cntk_options* opts) {
  if (!opts) return;
  const nke::CntkConfig d;
  opts->depth = d.depth;
  opts->filter = d.filter;
  opts->degree = 8;
  opts->sketch_dim = d.sketch_dim;
  opts->output_sketch_dim = d.output_sketch_dim;
  opts->pixel_budget = d.pixel_budget;
  opts->seed = d.seed;
}

nke_status nke_cntk_pair(const nke_image* y, const nke_image* z, const nke_dual* dual, const nke_cntk_options* opts,
                         double* out) {
  return guarded([&] {
    require(y, "y");
    require(z, "z");
    require(dual, "dual");
    require(out, "out");
    const auto cfg = cntk_config(opts, dual->dual);
    *out = cfg.dual.is_homogeneous ? nke::cntk_exact_homogeneous(y->img, z->img, cfg) : nke::cntk_exact(y->img, z->img, cfg);
  });
}

nke_status nke_cntk_kernel(const nke_image* const* images, size_t count, const char* name, const double* params,
                           size_t n_params, const nke_cntk_options* opts, nke_cntk_mode mode, nke_matrix** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    const auto p = param_span(params, n_params);
    const auto cfg = cntk_config(opts, nke::catalog_lookup(name, p));
    const auto imgs = image_list(images, count);
    if (mode == NKE_CNTK_SKETCH) {
      const auto polys = nke::dot_product_polys(name, p, opts->degree);
      *out = wrap(nke::cntk_kernel_matrix(imgs, cfg, nke::CntkMode::Sketch, &polys.first, &polys.second));
    } else {
      *out = wrap(nke::cntk_kernel_matrix(imgs, cfg, nke::CntkMode::Exact));
    }
  });
}

nke_status nke_cntk_features(const nke_image* const* images, size_t count, const char* name, const double* params,
                             size_t n_params, const nke_cntk_options* opts, nke_matrix** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    const auto p = param_span(params, n_params);
    const auto cfg = cntk_config(opts, nke::catalog_lookup(name, p));
    const auto imgs = image_list(images, count);
    const auto polys = nke::dot_product_polys(name, p, opts->degree);
    for (size_t i = 1; i < imgs.size(); ++i)
      if (imgs[i].c != imgs.front().c) throw nke::Error(nke::ErrorCode::ShapeMismatch, "image channel counts differ", i);
    const nke::CntkSketcher sketcher(cfg, polys.first, polys.second, imgs.front().c);
    auto m = std::make_unique<nke_matrix>();
    m->m.resize(static_cast<Eigen::Index>(imgs.size()), static_cast<Eigen::Index>(sketcher.feature_dim()));
    for (size_t i = 0; i < imgs.size(); ++i) {
      const auto f = sketcher.features(imgs[i]);
      std::copy(f.begin(), f.end(), m->m.row(static_cast<Eigen::Index>(i)).data());
    }
    *out = m.release();
  });
}

nke_status nke_monte_carlo_dual(const char* name, const double* params, size_t n_params, const nke_matrix* X,
                                size_t samples, uint64_t seed, nke_matrix** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = wrap(nke::monte_carlo_dual(nke::activation_spec(name, param_span(params, n_params)), mat(X, "X"), samples, seed));
  });
}

nke_status nke_hermite_dual_matrix(const char* name, const double* params, size_t n_params, const nke_matrix* X,
                                   int degree, nke_matrix** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = wrap(nke::hermite_dual_matrix(nke::activation_spec(name, param_span(params, n_params)), mat(X, "X"), degree));
  });
}

nke_status nke_dual_matrix(const nke_dual* dual, const nke_matrix* X, nke_matrix** out) {
  return guarded([&] {
    require(dual, "dual");
    require(out, "out");
    *out = wrap(nke::dual_matrix(dual->dual, mat(X, "X")));
  });
}

nke_status nke_relative_frobenius_error(const nke_matrix* approx, const nke_matrix* exact, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = nke::relative_frobenius_error(mat(approx, "approx"), mat(exact, "exact"));
  });
}

nke_status nke_statistical_dimension(const nke_matrix* K, double lambda, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = nke::statistical_dimension(mat(K, "K"), lambda);
  });
}

nke_status nke_ridge_kernel(const nke_matrix* K_train, const nke_matrix* K_test, const nke_matrix* Y_train,
                            const nke_matrix* Y_test, const double* lambdas, size_t n_lambdas, nke_ridge** out) {
  return guarded([&] {
    require(out, "out");
    *out = new nke_ridge{nke::ridge_regress_kernel(mat(K_train, "K_train"), mat(K_test, "K_test"), mat(Y_train, "Y_train"),
                                                   mat(Y_test, "Y_test"), lambda_list(lambdas, n_lambdas))};
  });
}

nke_status nke_ridge_features(const nke_matrix* F_train, const nke_matrix* F_test, const nke_matrix* Y_train,
                              const nke_matrix* Y_test, const double* lambdas, size_t n_lambdas, nke_ridge** out) {
  return guarded([&] {
    require(out, "out");
    const Eigen::MatrixXd ftr = mat(F_train, "F_train").transpose();
    const Eigen::MatrixXd fte = mat(F_test, "F_test").transpose();
    *out = new nke_ridge{nke::ridge_regress_features(ftr, fte, mat(Y_train, "Y_train"), mat(Y_test, "Y_test"),
                                                     lambda_list(lambdas, n_lambdas))};
  });
}

size_t nke_ridge_count(const nke_ridge* r) { return r ? r->result.lambdas.size() : 0; }
double nke_ridge_lambda(const nke_ridge* r, size_t i) {
  return r && i < r->result.lambdas.size() ? r->result.lambdas[i] : 0.0;
}
double nke_ridge_accuracy(const nke_ridge* r, size_t i) {
  return r && i < r->result.test_accuracy.size() ? r->result.test_accuracy[i] : 0.0;
}
double nke_ridge_jitter(const nke_ridge* r, size_t i) {
  return r && i < r->result.jitter.size() ? r->result.jitter[i] : 0.0;
}
size_t nke_ridge_best(const nke_ridge* r) { return r ? r->result.best : 0; }

nke_status nke_ridge_predictions(const nke_ridge* r, size_t i, nke_matrix** out) {
  return guarded([&] {
    require(r, "ridge");
    require(out, "out");
    if (i >= r->result.test_predictions.size()) nke::fail(nke::ErrorCode::InvalidArgument, "ridge index out of range");
    *out = wrap(r->result.test_predictions[i]);
  });
}

void nke_ridge_free(nke_ridge* r) { delete r; }

}  // extern "C"
