#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nke/nke.h"

using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

struct Failure {
  int exit_code;
  std::string message;
};

int exit_for(nke_status s) {
  switch (s) {
    case NKE_ERR_IO:
    case NKE_ERR_PARSE:
    case NKE_ERR_SHAPE_MISMATCH:
    case NKE_ERR_DIMENSION_MISMATCH:
    case NKE_ERR_ZERO_NORM_INPUT:
      return kData;
    case NKE_ERR_INVALID_ARGUMENT:
    case NKE_ERR_UNKNOWN_ACTIVATION:
    case NKE_ERR_BAD_PARAMS:
    case NKE_ERR_DEGREE_TOO_LARGE:
    case NKE_ERR_NOT_HOMOGENEOUS:
    case NKE_ERR_NO_SCALAR_FORM:
    case NKE_ERR_BUDGET_EXCEEDED:
      return kUsage;
    default:
      return kNumeric;
  }
}

void check(nke_status s, const std::string& context) {
  if (s == NKE_OK) return;
  std::string msg = context + ": " + nke_status_name(s) + ": " + nke_last_error();
  if (nke_last_error_index() >= 0) msg += " (row " + std::to_string(nke_last_error_index()) + ")";
  throw Failure{exit_for(s), msg};
}

struct MatrixDeleter {
  void operator()(nke_matrix* m) const { nke_matrix_free(m); }
};
struct ImageDeleter {
  void operator()(nke_image* m) const { nke_image_free(m); }
};
struct DualDeleter {
  void operator()(nke_dual* m) const { nke_dual_free(m); }
};
struct RidgeDeleter {
  void operator()(nke_ridge* m) const { nke_ridge_free(m); }
};
using Matrix = std::unique_ptr<nke_matrix, MatrixDeleter>;
using Image = std::unique_ptr<nke_image, ImageDeleter>;
using Dual = std::unique_ptr<nke_dual, DualDeleter>;
using Ridge = std::unique_ptr<nke_ridge, RidgeDeleter>;

Matrix load_matrix(const std::string& path, const std::string& flag) {
  nke_matrix* m = nullptr;
  check(nke_matrix_load(path.c_str(), &m), flag + " " + path);
  return Matrix(m);
}

Dual make_dual(const std::string& name, const std::vector<double>& params) {
  nke_dual* d = nullptr;
  check(nke_dual_create(name.c_str(), params.data(), params.size(), &d), "--activation " + name);
  return Dual(d);
}

void progress(const json& event) { std::cerr << event.dump() << std::endl; }

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Output {
  std::string dir;

  bool enabled() const { return !dir.empty(); }

  void prepare() const {
    if (enabled()) std::filesystem::create_directories(dir);
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(dir) / name).string(); }

  // Returns the file name written, choosing the binary form for large matrices.
  std::string matrix(const std::string& stem, const nke_matrix* m) const {
    const bool big = nke_matrix_rows(m) * nke_matrix_cols(m) > 1000000;
    const std::string name = stem + (big ? ".bin" : ".csv");
    check(nke_matrix_save(m, path(name).c_str()), "writing " + name);
    return name;
  }

  void summary(const json& j) const {
    if (!enabled()) {
      std::cout << j.dump(2) << "\n";
      return;
    }
    std::ofstream f(path("summary.json"));
    if (!f) throw Failure{kData, "cannot write " + path("summary.json")};
    f << j.dump(2) << "\n";
  }
};

std::vector<int> parse_degrees(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots));
      const int hi = std::stoi(text.substr(dots + 2));
      if (lo < 1 || hi < lo) throw std::invalid_argument("range");
      for (int q = lo; q <= hi; ++q) out.push_back(q);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::exception&) {
    throw Failure{kUsage, "--degrees: expected a range like 1..20 or a list like 2,4,8"};
  }
  if (out.empty()) throw Failure{kUsage, "--degrees: empty"};
  return out;
}

Matrix synthetic_gaussian(std::size_t n, std::size_t d, double stddev, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, stddev);
  std::vector<double> data(n * d);
  for (auto& v : data) v = g(eng);
  nke_matrix* m = nullptr;
  check(nke_matrix_create(n, d, data.data(), &m), "synthetic data");
  return Matrix(m);
}

std::vector<Image> load_images(const std::vector<std::string>& paths, const std::string& matrix_path,
                               const std::vector<std::size_t>& shape) {
  std::vector<Image> images;
  for (const auto& p : paths) {
    nke_image* im = nullptr;
    check(nke_image_load(p.c_str(), &im), "--input " + p);
    images.emplace_back(im);
  }
  if (!matrix_path.empty()) {
    if (shape.size() != 3) throw Failure{kUsage, "--shape: expected d1,d2,channels"};
    Matrix m = load_matrix(matrix_path, "--images");
    const std::size_t per = shape[0] * shape[1] * shape[2];
    if (nke_matrix_cols(m.get()) != per)
      throw Failure{kData, "--images: rows have " + std::to_string(nke_matrix_cols(m.get())) + " entries, --shape needs " +
                               std::to_string(per)};
    for (std::size_t r = 0; r < nke_matrix_rows(m.get()); ++r) {
      nke_image* im = nullptr;
      check(nke_image_create(shape[0], shape[1], shape[2], nke_matrix_data(m.get()) + r * per, &im), "--images");
      images.emplace_back(im);
    }
  }
  if (images.empty()) throw Failure{kUsage, "no images: give --input files or --images with --shape"};
  return images;
}

std::vector<const nke_image*> raw(const std::vector<Image>& images) {
  std::vector<const nke_image*> out;
  for (const auto& im : images) out.push_back(im.get());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual kernels, NNGP/NTK kernels and their random-feature embeddings"};
  app.require_subcommand(1);

  std::string activation;
  std::map<CLI::App*, std::string> default_activation;
  std::vector<double> params;
  Output out;
  std::uint64_t seed = 0;

  auto add_activation = [&](CLI::App* sub, const std::string& def) {
    sub->add_option("--activation", activation, "activation name from the catalog")->default_str(def);
    default_activation[sub] = def;
    sub->add_option("--params", params, "activation parameters");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--output", out.dir, "directory for the summary and matrices (summary to stdout if omitted)");
  };

  // dual-eval
  double a = 1, b = 1, c = 0;
  int quad = 40;
  auto* dual_eval = app.add_subcommand("dual-eval", "evaluate a dual activation and its quadrature estimate");
  add_activation(dual_eval, "relu");
  dual_eval->add_option("--a", a)->required();
  dual_eval->add_option("--b", b)->required();
  dual_eval->add_option("--c", c)->required()->check(CLI::Range(-1.0, 1.0));
  dual_eval->add_option("--q", quad, "quadrature nodes per axis")->default_val(40);
  add_output(dual_eval);

  // kernel
  std::string which = "ntk";
  std::string input;
  int depth = 2;
  auto* kernel = app.add_subcommand("kernel", "exact fully connected NNGP or NTK Gram matrix");
  add_activation(kernel, "relu");
  kernel->add_option("--which", which)->check(CLI::IsMember({"nngp", "ntk"}))->default_val("ntk");
  kernel->add_option("--depth", depth)->check(CLI::PositiveNumber)->default_val(2);
  kernel->add_option("--input", input, "data matrix, one row per point")->required();
  add_output(kernel);

  // embed
  int degree = 0;
  std::size_t sketch_dim = 1024;
  int max_degree = 64;
  auto* embed = app.add_subcommand("embed", "random features for the NNGP and NTK of a homogeneous activation");
  add_activation(embed, "normalized_gaussian");
  embed->add_option("--depth", depth)->check(CLI::PositiveNumber)->default_val(2);
  embed->add_option("--degree", degree, "dot-product truncation degree (default ceil(log2 n) + 4)");
  embed->add_option("--sketch-dim", sketch_dim)->check(CLI::PositiveNumber)->default_val(1024);
  embed->add_option("--max-degree", max_degree)->check(CLI::PositiveNumber)->default_val(64);
  embed->add_option("--seed", seed)->default_val(0);
  embed->add_option("--input", input, "data matrix, one row per point")->required();
  add_output(embed);

  // cntk / cntk-embed
  std::vector<std::string> image_paths;
  std::string images_matrix;
  std::vector<std::size_t> shape;
  int filter = 3;
  std::size_t out_sketch_dim = 1024;
  std::size_t pixel_budget = 4096;
  auto add_images = [&](CLI::App* sub) {
    sub->add_option("--input", image_paths, "image files");
    sub->add_option("--images", images_matrix, "matrix with one flattened image per row");
    sub->add_option("--shape", shape, "d1,d2,channels for --images")->delimiter(',');
    sub->add_option("--depth", depth)->check(CLI::PositiveNumber)->default_val(2);
    sub->add_option("--filter", filter)->check(CLI::PositiveNumber)->default_val(3);
  };
  auto* cntk = app.add_subcommand("cntk", "exact convolutional NTK Gram matrix");
  add_activation(cntk, "relu");
  add_images(cntk);
  cntk->add_option("--pixel-budget", pixel_budget)->default_val(4096);
  add_output(cntk);

  auto* cntk_embed = app.add_subcommand("cntk-embed", "sketched convolutional NTK features");
  add_activation(cntk_embed, "normalized_gaussian");
  add_images(cntk_embed);
  cntk_embed->add_option("--degree", degree, "dot-product truncation degree")->default_str("8");
  cntk_embed->add_option("--sketch-dim", sketch_dim)->check(CLI::PositiveNumber)->default_val(1024);
  cntk_embed->add_option("--output-sketch-dim", out_sketch_dim)->check(CLI::PositiveNumber)->default_val(1024);
  cntk_embed->add_option("--seed", seed)->default_val(0);
  add_output(cntk_embed);

  // bench-approx
  std::string degrees_text = "1..20";
  std::size_t n = 200, d = 64, samples = 4096;
  auto* bench = app.add_subcommand("bench-approx", "Hermite and Monte Carlo dual kernel error versus degree");
  add_activation(bench, "relu");
  bench->add_option("--degrees", degrees_text)->default_val("1..20");
  bench->add_option("--n", n)->check(CLI::PositiveNumber)->default_val(200);
  bench->add_option("--d", d)->check(CLI::PositiveNumber)->default_val(64);
  bench->add_option("--samples", samples, "Monte Carlo features")->check(CLI::PositiveNumber)->default_val(4096);
  bench->add_option("--seed", seed)->default_val(0);
  add_output(bench);

  // regress
  std::string k_train, k_test, f_train, f_test, y_train, y_test;
  std::vector<double> lambdas;
  auto* regress = app.add_subcommand("regress", "ridge regression over a grid of regularizers");
  auto* ktr = regress->add_option("--kernel-train", k_train, "n x n training kernel");
  auto* kte = regress->add_option("--kernel-test", k_test, "t x n test-vs-train kernel");
  auto* ftr = regress->add_option("--features-train", f_train, "training features, one row per point");
  auto* fte = regress->add_option("--features-test", f_test, "test features, one row per point");
  regress->add_option("--labels-train", y_train)->required();
  regress->add_option("--labels-test", y_test)->required();
  regress->add_option("--lambdas", lambdas, "regularizers (default: 20 log-spaced from 1e-10 to 1e2)");
  ktr->needs(kte);
  kte->needs(ktr);
  ftr->needs(fte);
  fte->needs(ftr);
  ktr->excludes(ftr);
  add_output(regress);

  // stat-dim
  std::vector<double> stat_lambdas;
  auto* stat_dim = app.add_subcommand("stat-dim", "statistical dimension tr(K (K + lambda I)^-1)");
  stat_dim->add_option("--input", input, "kernel matrix")->required();
  stat_dim->add_option("--lambda", stat_lambdas)->required();
  add_output(stat_dim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  for (const auto& [sub, def] : default_activation)
    if (sub->parsed() && activation.empty()) activation = def;

  try {
    out.prepare();
    json summary;
    Timer timer;

    if (*dual_eval) {
      Dual dual = make_dual(activation, params);
      double closed = 0, q_val = 0;
      check(nke_dual_eval(dual.get(), a, b, c, &closed), "dual-eval");
      check(nke_quadrature_dual(activation.c_str(), params.data(), params.size(), a, b, c, quad, &q_val), "quadrature");
      std::printf("closed_form %.17g\nquadrature  %.17g\ndifference  %.3e\n", closed, q_val, closed - q_val);
      summary = {{"command", "dual-eval"}, {"activation", activation}, {"params", params}, {"a", a}, {"b", b},
                 {"c", c}, {"q", quad}, {"closed_form", closed}, {"quadrature", q_val}, {"difference", closed - q_val}};
      double deriv = 0;
      if (nke_dual_deriv_eval(dual.get(), a, b, c, &deriv) == NKE_OK) {
        summary["derivative"] = deriv;
        summary["derivative_closed_form"] = nke_dual_has_closed_deriv(dual.get()) == 1;
      }
      if (out.enabled()) out.summary(summary);
      return kOk;
    }

    if (*kernel) {
      Dual dual = make_dual(activation, params);
      Matrix X = load_matrix(input, "--input");
      progress({{"event", "kernel"}, {"n", nke_matrix_rows(X.get())}, {"d", nke_matrix_cols(X.get())}});
      nke_matrix* k = nullptr;
      check(nke_kernel_matrix(X.get(), dual.get(), depth, which == "ntk" ? NKE_NTK : NKE_NNGP, &k), "kernel");
      Matrix K(k);
      summary = {{"command", "kernel"}, {"which", which}, {"activation", activation}, {"params", params},
                 {"depth", depth}, {"n", nke_matrix_rows(K.get())}};
      if (out.enabled()) summary["matrix"] = out.matrix("kernel", K.get());
      progress({{"event", "done"}, {"seconds", timer.seconds()}});
      out.summary(summary);
      return kOk;
    }

    if (*embed) {
      Matrix X = load_matrix(input, "--input");
      const std::size_t rows = nke_matrix_rows(X.get());
      if (degree <= 0) degree = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(rows, 2))))) + 4;
      nke_embed_options opts;
      nke_embed_options_default(&opts);
      opts.depth = depth;
      opts.degree = degree;
      opts.sketch_dim = sketch_dim;
      opts.max_degree = max_degree;
      opts.seed = seed;
      progress({{"event", "embed"}, {"n", rows}, {"degree", degree}, {"sketch_dim", sketch_dim}});
      nke_matrix *phi = nullptr, *psi = nullptr;
      double nngp_tail = 0, ntk_tail = 0;
      check(nke_embed(activation.c_str(), params.data(), params.size(), X.get(), &opts, &phi, &psi, &nngp_tail, &ntk_tail),
            "embed");
      Matrix Phi(phi), Psi(psi);
      summary = {{"command", "embed"},  {"activation", activation}, {"depth", depth},
                 {"degree", degree},    {"sketch_dim", sketch_dim}, {"max_degree", max_degree},
                 {"seed", seed},        {"n", rows},                {"nngp_dim", nke_matrix_cols(Phi.get())},
                 {"ntk_dim", nke_matrix_cols(Psi.get())}, {"nngp_truncation_tail", nngp_tail},
                 {"ntk_truncation_tail", ntk_tail}};
      if (out.enabled()) {
        summary["nngp_features"] = out.matrix("nngp_features", Phi.get());
        summary["ntk_features"] = out.matrix("ntk_features", Psi.get());
      }
      progress({{"event", "done"}, {"seconds", timer.seconds()}});
      out.summary(summary);
      return kOk;
    }

    if (*cntk || *cntk_embed) {
      auto images = load_images(image_paths, images_matrix, shape);
      auto ptrs = raw(images);
      nke_cntk_options opts;
      nke_cntk_options_default(&opts);
      opts.depth = depth;
      opts.filter = filter;
      opts.pixel_budget = pixel_budget;
      if (degree <= 0) degree = 8;
      opts.degree = degree;
      opts.sketch_dim = sketch_dim;
      opts.output_sketch_dim = out_sketch_dim;
      opts.seed = seed;
      progress({{"event", *cntk ? "cntk" : "cntk-embed"}, {"images", images.size()}});
      nke_matrix* m = nullptr;
      summary = {{"command", *cntk ? "cntk" : "cntk-embed"}, {"activation", activation}, {"params", params},
                 {"depth", depth}, {"filter", filter}, {"images", images.size()}};
      if (*cntk) {
        check(nke_cntk_kernel(ptrs.data(), ptrs.size(), activation.c_str(), params.data(), params.size(), &opts,
                              NKE_CNTK_EXACT, &m),
              "cntk");
      } else {
        check(nke_cntk_features(ptrs.data(), ptrs.size(), activation.c_str(), params.data(), params.size(), &opts, &m),
              "cntk-embed");
        summary["degree"] = degree;
        summary["sketch_dim"] = sketch_dim;
        summary["output_sketch_dim"] = out_sketch_dim;
        summary["seed"] = seed;
      }
      Matrix M(m);
      summary["cols"] = nke_matrix_cols(M.get());
      if (out.enabled()) summary["matrix"] = out.matrix(*cntk ? "kernel" : "features", M.get());
      progress({{"event", "done"}, {"seconds", timer.seconds()}});
      out.summary(summary);
      return kOk;
    }

    if (*bench) {
      const auto degrees = parse_degrees(degrees_text);
      Dual dual = make_dual(activation, params);
      Matrix X = synthetic_gaussian(n, d, 1.0 / std::sqrt(static_cast<double>(d)), seed);
      nke_matrix* e = nullptr;
      check(nke_dual_matrix(dual.get(), X.get(), &e), "closed-form dual");
      Matrix exact(e);
      nke_matrix* mc = nullptr;
      check(nke_monte_carlo_dual(activation.c_str(), params.data(), params.size(), X.get(), samples, seed, &mc),
            "monte carlo");
      Matrix MC(mc);
      double mc_err = 0;
      check(nke_relative_frobenius_error(MC.get(), exact.get(), &mc_err), "monte carlo error");
      std::vector<double> rows;
      json errors = json::array();
      for (int q : degrees) {
        nke_matrix* h = nullptr;
        check(nke_hermite_dual_matrix(activation.c_str(), params.data(), params.size(), X.get(), q, &h),
              "hermite degree " + std::to_string(q));
        Matrix H(h);
        double err = 0;
        check(nke_relative_frobenius_error(H.get(), exact.get(), &err), "hermite error");
        rows.push_back(q);
        rows.push_back(err);
        errors.push_back({{"degree", q}, {"rel_frobenius_error", err}});
        progress({{"event", "degree"}, {"degree", q}, {"rel_frobenius_error", err}});
      }
      summary = {{"command", "bench-approx"}, {"activation", activation}, {"params", params}, {"n", n}, {"d", d},
                 {"seed", seed}, {"samples", samples}, {"monte_carlo_rel_frobenius_error", mc_err}, {"hermite", errors}};
      if (out.enabled()) {
        std::ofstream f(out.path("errors.csv"));
        if (!f) throw Failure{kData, "cannot write " + out.path("errors.csv")};
        f << "degree,rel_frobenius_error\n";
        char buf[64];
        for (std::size_t i = 0; i < rows.size(); i += 2) {
          std::snprintf(buf, sizeof buf, "%d,%.17g\n", static_cast<int>(rows[i]), rows[i + 1]);
          f << buf;
        }
        summary["table"] = "errors.csv";
        out.summary(summary);
      } else {
        std::printf("degree,rel_frobenius_error\n");
        for (std::size_t i = 0; i < rows.size(); i += 2) std::printf("%d,%.17g\n", static_cast<int>(rows[i]), rows[i + 1]);
      }
      return kOk;
    }

    if (*regress) {
      if (k_train.empty() && f_train.empty())
        throw Failure{kUsage, "regress needs --kernel-train/--kernel-test or --features-train/--features-test"};
      Matrix ytr = load_matrix(y_train, "--labels-train");
      Matrix yte = load_matrix(y_test, "--labels-test");
      nke_ridge* r = nullptr;
      const bool kernel_mode = !k_train.empty();
      if (kernel_mode) {
        Matrix a_ = load_matrix(k_train, "--kernel-train");
        Matrix b_ = load_matrix(k_test, "--kernel-test");
        check(nke_ridge_kernel(a_.get(), b_.get(), ytr.get(), yte.get(), lambdas.data(), lambdas.size(), &r), "regress");
      } else {
        Matrix a_ = load_matrix(f_train, "--features-train");
        Matrix b_ = load_matrix(f_test, "--features-test");
        check(nke_ridge_features(a_.get(), b_.get(), ytr.get(), yte.get(), lambdas.data(), lambdas.size(), &r),
              "regress");
      }
      Ridge ridge(r);
      json runs = json::array();
      for (std::size_t i = 0; i < nke_ridge_count(ridge.get()); ++i)
        runs.push_back({{"lambda", nke_ridge_lambda(ridge.get(), i)},
                        {"regularizer_used", nke_ridge_jitter(ridge.get(), i)},
                        {"test_accuracy", nke_ridge_accuracy(ridge.get(), i)}});
      const std::size_t best = nke_ridge_best(ridge.get());
      summary = {{"command", "regress"}, {"mode", kernel_mode ? "kernel" : "features"}, {"runs", runs},
                 {"best_lambda", nke_ridge_lambda(ridge.get(), best)},
                 {"best_test_accuracy", nke_ridge_accuracy(ridge.get(), best)}};
      if (out.enabled()) {
        nke_matrix* p = nullptr;
        check(nke_ridge_predictions(ridge.get(), best, &p), "predictions");
        Matrix P(p);
        summary["predictions"] = out.matrix("predictions", P.get());
      }
      out.summary(summary);
      return kOk;
    }

    if (*stat_dim) {
      Matrix K = load_matrix(input, "--input");
      json values = json::array();
      for (double lam : stat_lambdas) {
        double s = 0;
        check(nke_statistical_dimension(K.get(), lam, &s), "--lambda " + std::to_string(lam));
        values.push_back({{"lambda", lam}, {"statistical_dimension", s}});
      }
      summary = {{"command", "stat-dim"}, {"n", nke_matrix_rows(K.get())}, {"values", values}};
      out.summary(summary);
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "nke: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "nke: --output: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
