#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nke/bench.hpp"
#include "nke/cntk.hpp"
#include "nke/dual_catalog.hpp"
#include "nke/fc_kernels.hpp"
#include "nke/hermite.hpp"
#include "nke/homogeneous_embed.hpp"
#include "nke/polysketch.hpp"
#include "nke/series_dual.hpp"
#include "oracles.hpp"

using namespace nke;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Eigen::MatrixXd gaussian_rows(std::mt19937_64& eng, int n, int d, double sd) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = g(eng);
  return X;
}

template <class F>
double min_time(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

struct Entry {
  std::string name;
  std::vector<double> params;
  bool smooth;
};

std::string label(const Entry& e) {
  std::string s = e.name;
  if (!e.params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < e.params.size(); ++i) s += (i ? "," : "") + fmt("%g", e.params[i]);
    s += ")";
  }
  return s;
}

Outcome criterion1() {
  std::vector<Entry> entries{{"relu", {}, false},          {"abrelu", {-0.3, 1.2}, false},
                             {"abs", {}, false},           {"erf", {}, true},
                             {"sin", {}, true},            {"cos", {}, true},
                             {"gaussian", {0.7}, true},    {"exponential", {0.6}, true},
                             {"gelu", {}, true},           {"gabor", {}, true},
                             {"rbf", {1.0}, true}};
  for (int n = 0; n <= 5; ++n) entries.push_back({"monomial", {double(n)}, true});
  for (int n = 0; n <= 2; ++n) entries.push_back({"rectified_monomial", {double(n)}, false});

  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> ab(0.3, 2), cc(-1, 1);
  bool pass = true;
  std::string fails, worst_smooth;
  double max_smooth = 0;
  for (const auto& e : entries) {
    const auto d = catalog_lookup(e.name, e.params);
    const auto spec = activation_spec(e.name, e.params);
    double err = 0;
    for (int r = 0; r < 50; ++r) {
      const double a = ab(eng), b = ab(eng), c = cc(eng);
      err = std::max(err, std::abs(gauss_hermite_dual(spec, a, b, c, 60) - d.eval(a, b, c)));
    }
    const double tol = e.smooth ? 1e-6 : 1e-3;
    if (e.smooth && err > max_smooth) {
      max_smooth = err;
      worst_smooth = label(e);
    }
    if (!(err <= tol)) {
      pass = false;
      fails += fmt(" %s=%.2e", label(e).c_str(), err);
    }
  }
  std::string detail = fmt("worst smooth %s %.2e", worst_smooth.c_str(), max_smooth);
  if (!fails.empty()) detail += "; over tolerance:" + fails;
  return {pass, detail};
}

Outcome criterion2() {
  const std::vector<Entry> entries{{"relu", {}, false},
                                   {"abrelu", {-0.3, 1.2}, false},
                                   {"leaky_relu", {0.1}, false},
                                   {"abs", {}, false},
                                   {"rectified_monomial", {1}, false},
                                   {"rectified_monomial", {2}, false},
                                   {"erf", {}, true},
                                   {"sin", {}, true},
                                   {"cos", {}, true},
                                   {"sinusoidal", {1.3, 0.8, 0.4}, true},
                                   {"gaussian", {0.7}, true},
                                   {"exponential", {0.6}, true},
                                   {"gelu", {}, true},
                                   {"gabor", {}, true},
                                   {"monomial", {3}, true},
                                   {"polynomial", {0.5, -1, 0.25}, true},
                                   {"normalized_gaussian", {}, true},
                                   {"rbf", {1.0}, true},
                                   {"sigmoid_like", {}, true}};
  std::mt19937_64 eng(202);
  std::uniform_real_distribution<double> ab(0.3, 2), cc(-0.99, 0.99);
  bool pass = true;
  int checked = 0;
  double worst = 0;
  std::string fails;
  for (const auto& e : entries) {
    const auto d = catalog_lookup(e.name, e.params);
    if (!d.has_deriv()) continue;
    ++checked;
    for (int r = 0; r < 50; ++r) {
      const double a = ab(eng), b = ab(eng), c = cc(eng);
      const double want = d.deriv_eval(a, b, c);
      const double got = derivative_dual_numeric(d, a, b, c);
      const double ratio = std::abs(got - want) / std::max(1e-6, 1e-4 * std::abs(want));
      worst = std::max(worst, ratio);
      if (!(ratio <= 1)) {
        pass = false;
        fails += fmt(" %s@(%.2f,%.2f,%.3f)", label(e).c_str(), a, b, c);
        break;
      }
    }
  }
  const auto ng = catalog_lookup("normalized_gaussian");
  double ng_err = 0;
  for (int r = 0; r < 50; ++r) {
    const double c = cc(eng);
    ng_err = std::max(ng_err, std::abs(derivative_dual_numeric(ng, 1, 1, c) - std::exp(c - 1)));
  }
  if (!(ng_err <= 1e-8)) pass = false;
  std::string detail = fmt("%d entries, worst error/tolerance %.2e; normalized_gaussian vs exp(c-1) %.2e", checked,
                           worst, ng_err);
  if (!fails.empty()) detail += "; failing:" + fails;
  return {pass, detail};
}

Outcome criterion3() {
  std::mt19937_64 eng(303);
  std::uniform_real_distribution<double> norm(0.0, 1.0), cc(-1, 1);
  const auto relu = [](double t) { return std::max(t, 0.0); };
  int violations = 0, checked = 0;
  double max_ratio = 0;
  for (int q : {4, 16, 64}) {
    const auto hc = hermite_expand(relu, q, 1.0, kMaxHermiteDegree);
    for (int r = 0; r < 100; ++r) {
      double a = 0, b = 0;
      while (a <= 0) a = 1.0 - norm(eng);
      while (b <= 0) b = 1.0 - norm(eng);
      const double c = cc(eng);
      const double gap = std::abs(oracle::relu_dual(a, b, c) - dual_kernel_hermite_series(hc, a, b, c));
      const double bound = truncation_error_bound_relu(q, 1.0, a, b);
      max_ratio = std::max(max_ratio, gap / bound);
      ++checked;
      if (gap > bound) ++violations;
    }
  }
  return {violations == 0, fmt("%d pairs, %d violations, max gap/bound %.3f", checked, violations, max_ratio)};
}

Outcome criterion4() {
  struct Act {
    std::string name;
    std::vector<double> params;
    double ratio;  // required err(20) / err(5)
  };
  const std::vector<Act> acts{{"sin", {}, 0.1},      {"gaussian", {0.5}, 0.1}, {"erf", {}, 0.1},
                              {"gelu", {}, 0.1},     {"relu", {}, 0.5},        {"abs", {}, 0.5}};
  const int seeds = 10;
  std::vector<std::vector<double>> e5(acts.size()), e20(acts.size()), mc(acts.size());
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 eng(400 + s);
    const Eigen::MatrixXd X = gaussian_rows(eng, 200, 64, 1.0 / 8);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const auto spec = activation_spec(acts[i].name, acts[i].params);
      const Eigen::MatrixXd K = dual_matrix(catalog_lookup(acts[i].name, acts[i].params), X);
      e5[i].push_back(relative_frobenius_error(hermite_dual_matrix(spec, X, 5), K));
      e20[i].push_back(relative_frobenius_error(hermite_dual_matrix(spec, X, 20), K));
      mc[i].push_back(relative_frobenius_error(monte_carlo_dual(spec, X, 4096, 9000 + s), K));
    }
  }
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const double m5 = median(e5[i]), m20 = median(e20[i]), mmc = median(mc[i]);
    const bool ok = m20 <= acts[i].ratio * m5 && m20 < mmc;
    pass = pass && ok;
    detail += fmt("%s%s deg5 %.1e deg20 %.1e mc %.1e%s", i ? "; " : "", acts[i].name.c_str(), m5, m20, mmc,
                  ok ? "" : " (fails)");
  }
  return {pass, detail};
}

Outcome criterion5() {
  const auto slopes = abrelu_fit_normalized_gaussian();
  const bool slopes_ok = std::lround(slopes.A * 100) == -10 && std::lround(slopes.B * 100) == 141;
  std::vector<DualActivation> duals{catalog_lookup("normalized_gaussian"),
                                    catalog_lookup("abrelu", std::vector<double>{slopes.A, slopes.B})};
  std::mt19937_64 eng(505);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  double worst = 0;
  for (const auto& d : duals)
    for (int L = 1; L <= 5; ++L)
      for (int r = 0; r < 50; ++r) {
        const auto x = oracle::random_vector(eng, 12, scale(eng)), y = oracle::random_vector(eng, 12, scale(eng));
        const auto rec = nngp_ntk_pair(x, y, KernelConfig{L, d});
        const double nngp = nngp_homogeneous(x, y, d.kappa, L);
        const double ntk = ntk_homogeneous(x, y, d.kappa, d.kappa_prime, L);
        const double s = std::sqrt(dot(x, x) * dot(y, y));
        worst = std::max(worst, std::abs(rec.nngp - nngp) / std::max(std::abs(nngp), 1e-300 + 1e-12 * s));
        worst = std::max(worst, std::abs(rec.ntk - ntk) / std::max(std::abs(ntk), 1e-300 + 1e-12 * s));
      }
  return {slopes_ok && worst <= 1e-10,
          fmt("fitted slopes (%.4f, %.4f); max relative difference %.2e", slopes.A, slopes.B, worst)};
}

Outcome criterion6() {
  const std::size_t d = 32;
  std::mt19937_64 eng(606);
  auto unit = [&] {
    auto v = oracle::random_vector(eng, d);
    const double n = std::sqrt(dot(v, v));
    for (auto& t : v) t /= n;
    return v;
  };
  const auto x = unit(), y = unit();
  const double c = dot(x, y);
  const std::vector<double> ms{256, 1024, 4096};
  const int err_seeds = 200, moment_seeds = 1000;
  bool pass = true;
  std::string detail;
  for (int p : {2, 3}) {
    std::vector<double> med;
    for (double m : ms) {
      std::vector<double> errs;
      for (int s = 0; s < err_seeds; ++s) {
        const PolySketch Q(p, d, static_cast<std::size_t>(m), 6000 + s);
        errs.push_back(std::abs(dot(Q.power(x, p), Q.power(y, p)) - std::pow(c, p)));
      }
      med.push_back(median(errs));
    }
    const double slope = loglog_slope(ms, med);
    double sq = 0, cross = 0;
    for (int s = 0; s < moment_seeds; ++s) {
      const PolySketch Q(p, d, 256, 70000 + s);
      const auto qx = Q.power(x, p), qy = Q.power(y, p);
      sq += dot(qx, qx);
      cross += dot(qx, qy);
    }
    sq /= moment_seeds;
    cross /= moment_seeds;
    const bool ok = slope >= -0.6 && slope <= -0.4 && std::abs(sq - 1) <= 0.05 && std::abs(cross - std::pow(c, p)) <= 0.05;
    pass = pass && ok;
    detail += fmt("%sp=%d slope %.3f, mean |Qx|^2 %.4f, mean <Qx,Qy> %.4f vs %.4f", p == 2 ? "" : "; ", p, slope, sq,
                  cross, std::pow(c, p));
  }
  return {pass, detail};
}

Outcome criterion7() {
  const int n = 256, d = 32, L = 2;
  const auto [kappa, kd] = taylor_normalized_gaussian(8);
  const KernelConfig kc{L, catalog_lookup("normalized_gaussian")};
  auto gram_error = [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& K, std::size_t m, std::uint64_t seed) {
    const HomogeneousEmbedder E(EmbedConfig::make(kappa, L, m, 16, seed), d);
    const Eigen::MatrixXd Psi = E.embed_rows(X).second;
    return relative_frobenius_error(Psi.transpose() * Psi, K);
  };
  std::vector<double> errs;
  int monotone = 0;
  for (int s = 0; s < 5; ++s) {
    std::mt19937_64 eng(700 + s);
    const Eigen::MatrixXd X = gaussian_rows(eng, n, d, 1.0 / std::sqrt(double(d)));
    const Eigen::MatrixXd K = kernel_matrix(X, kc, KernelKind::Ntk);
    errs.push_back(gram_error(X, K, 4096, 7100 + s));
    const double a = gram_error(X, K, 512, 7200 + s), b = gram_error(X, K, 2048, 7300 + s),
                 c = gram_error(X, K, 8192, 7400 + s);
    if (a > b && b > c) ++monotone;
  }
  const double med = median(errs);
  return {med <= 0.1 && monotone >= 4, fmt("median error at m=4096 %.4f; monotone in %d/5 seeds", med, monotone)};
}

Outcome criterion8() {
  CntkConfig cfg;
  cfg.depth = 2;
  cfg.filter = 3;
  cfg.dual = catalog_lookup("normalized_gaussian");
  std::mt19937_64 eng(808);
  double worst = 0, worst_diag = 0;
  for (auto [d1, c] : {std::pair<std::size_t, std::size_t>{3, 1}, {5, 3}})
    for (int r = 0; r < 20; ++r) {
      const auto y = oracle::random_image(eng, d1, d1, c), z = oracle::random_image(eng, d1, d1, c);
      const double g = cntk_exact(y, z, cfg), h = cntk_exact_homogeneous(y, z, cfg);
      worst = std::max(worst, std::abs(g - h) / std::max(std::abs(h), 1e-300));
      const auto t = cntk_homogeneous_trace(y, y, cfg);
      const double q2 = double(cfg.filter * cfg.filter);
      for (int lvl = 1; lvl <= cfg.depth; ++lvl)
        for (std::size_t i = 0; i < d1; ++i)
          for (std::size_t j = 0; j < d1; ++j) {
            const double N = t.norms_y[lvl](i, j);
            worst_diag = std::max(worst_diag, std::abs(t.gamma[lvl](i, j, i, j) - N / q2) / std::max(1.0, N));
            if (lvl < cfg.depth) {
              const double Nn = lvl * t.norms_y[lvl + 1](i, j);
              worst_diag = std::max(worst_diag, std::abs(t.pi[lvl](i, j, i, j) - Nn) / std::max(1.0, Nn));
            }
          }
    }
  return {worst <= 1e-10 && worst_diag <= 1e-9,
          fmt("max exact vs homogeneous %.2e; max diagonal identity residual %.2e", worst, worst_diag)};
}

Outcome criterion9() {
  CntkConfig cfg;
  cfg.depth = 2;
  cfg.filter = 3;
  cfg.dual = catalog_lookup("normalized_gaussian");
  cfg.sketch_dim = 4096;
  cfg.output_sketch_dim = 4096;
  const auto [kappa, kd] = taylor_normalized_gaussian(8);
  std::vector<double> seed_medians;
  for (int s = 0; s < 5; ++s) {
    cfg.seed = 9000 + s;
    const CntkSketcher sk(cfg, kappa, kd, 3);
    std::mt19937_64 eng(900 + s);
    std::vector<double> ratios;
    for (int r = 0; r < 20; ++r) {
      const auto y = oracle::random_image(eng, 8, 8, 3), z = oracle::random_image(eng, 8, 8, 3);
      const double theta = cntk_exact_homogeneous(y, z, cfg);
      const double scale = std::sqrt(cntk_exact_homogeneous(y, y, cfg) * cntk_exact_homogeneous(z, z, cfg));
      ratios.push_back(std::abs(dot(sk.features(y), sk.features(z)) - theta) / scale);
    }
    seed_medians.push_back(median(ratios));
  }
  const double med = median(seed_medians);
  std::string per;
  for (double v : seed_medians) per += fmt(" %.4f", v);
  return {med <= 0.15, fmt("median relative error %.4f (per seed:%s)", med, per.c_str())};
}

Outcome criterion10() {
  const int d = 32, L = 2;
  const auto [kappa, kd] = taylor_normalized_gaussian(8);
  const HomogeneousEmbedder E(EmbedConfig::make(kappa, L, 64, 16, 1), d);
  const KernelConfig kc{L, catalog_lookup("normalized_gaussian")};
  std::vector<double> ns{256, 512, 1024, 2048}, t_embed, t_exact;
  std::mt19937_64 eng(1010);
  for (double n : ns) {
    const Eigen::MatrixXd X = gaussian_rows(eng, int(n), d, 1.0 / std::sqrt(double(d)));
    t_embed.push_back(min_time(3, [&] { E.embed_rows(X); }));
    t_exact.push_back(min_time(3, [&] { kernel_matrix(X, kc, KernelKind::Ntk); }));
  }
  CntkConfig cfg;
  cfg.depth = 2;
  cfg.filter = 3;
  cfg.dual = catalog_lookup("normalized_gaussian");
  cfg.sketch_dim = 64;
  cfg.output_sketch_dim = 64;
  cfg.seed = 3;
  const CntkSketcher sk(cfg, kappa, kd, 3);
  std::vector<double> pixels, t_cntk;
  for (std::size_t side : {4, 8, 12, 16}) {
    const auto img = oracle::random_image(eng, side, side, 3);
    pixels.push_back(double(side * side));
    t_cntk.push_back(min_time(3, [&] { sk.features(img); }));
  }
  const double se = loglog_slope(ns, t_embed), sx = loglog_slope(ns, t_exact), sc = loglog_slope(pixels, t_cntk);
  const bool pass = se >= 0.85 && se <= 1.2 && sx >= 1.7 && sx <= 2.3 && sc >= 0.8 && sc <= 1.3;
  return {pass, fmt("embed slope %.3f, exact slope %.3f, cntk sketch slope vs pixels %.3f", se, sx, sc)};
}

Outcome criterion11() {
  const int n_train = 512, n_test = 256, d = 16, L = 2;
  const auto [kappa, kd] = taylor_normalized_gaussian(8);
  const KernelConfig kc{L, catalog_lookup("normalized_gaussian")};
  const auto lambdas = default_lambda_grid();
  std::vector<double> gaps;
  std::string per;
  for (int s = 0; s < 5; ++s) {
    std::mt19937_64 eng(1100 + s);
    const double sd = 1.0 / std::sqrt(double(d));
    auto u = oracle::random_vector(eng, d);
    const double un = std::sqrt(dot(u, u));
    for (auto& v : u) v *= 0.25 / un;
    auto blobs = [&](int n, Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
      X = gaussian_rows(eng, n, d, sd);
      Y.resize(n, 1);
      std::bernoulli_distribution coin(0.5);
      for (int i = 0; i < n; ++i) {
        const double label = coin(eng) ? 1.0 : -1.0;
        Y(i, 0) = label;
        for (int k = 0; k < d; ++k) X(i, k) += label * u[k];
      }
    };
    Eigen::MatrixXd Xtr, Ytr, Xte, Yte;
    blobs(n_train, Xtr, Ytr);
    blobs(n_test, Xte, Yte);
    const auto exact = ridge_regress_kernel(kernel_matrix(Xtr, kc, KernelKind::Ntk),
                                            kernel_matrix_cross(Xte, Xtr, kc, KernelKind::Ntk), Ytr, Yte, lambdas);
    const HomogeneousEmbedder E(EmbedConfig::make(kappa, L, 2048, 16, 1150 + s), d);
    const auto sketch =
        ridge_regress_features(E.embed_rows(Xtr).second, E.embed_rows(Xte).second, Ytr, Yte, lambdas);
    const double a = exact.test_accuracy[exact.best], b = sketch.test_accuracy[sketch.best];
    gaps.push_back(100 * std::abs(a - b));
    per += fmt(" %.1f/%.1f", 100 * a, 100 * b);
  }
  const double med = median(gaps);
  return {med <= 3.0, fmt("median accuracy gap %.2f points (exact/embedded per seed:%s)", med, per.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"dual closed forms vs Gauss-Hermite", criterion1, 30},
      {"derivative dual rule", criterion2, 5},
      {"ReLU truncation bound", criterion3, 10},
      {"Hermite error decay", criterion4, 180},
      {"homogeneous equivalence", criterion5, 5},
      {"PolySketch concentration", criterion6, 120},
      {"embedding Gram accuracy", criterion7, 180},
      {"CNTK exactness", criterion8, 30},
      {"CNTK sketch accuracy", criterion9, 240},
      {"scaling", criterion10, 300},
      {"downstream equivalence", criterion11, 120},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (secs > criteria[i].budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", criteria[i].budget_seconds);
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s: %s [%.1f s] %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
