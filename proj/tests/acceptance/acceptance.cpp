// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "../oracles.hpp"
#include "bvm/bayes.hpp"
#include "bvm/config.hpp"
#include "bvm/design.hpp"
#include "bvm/distances.hpp"
#include "bvm/experiments.hpp"
#include "bvm/truths.hpp"

using namespace bvm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<Outcome()> check;
};

std::string config_dir;
std::string cli_path;
int jobs = 1;

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string join(const std::vector<double>& v, int digits = 4) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], digits);
  return "[" + s + "]";
}

Eigen::VectorXd randn(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(gen);
  return v;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Per-n mean of a metric, in grid order.
std::vector<double> summary_column(const ExperimentResult& r, const std::string& metric) {
  const SummaryTable s = summarize(r);
  const std::size_t c = column_index(s, metric + "_mean");
  std::vector<double> out;
  for (const auto& row : s.rows) out.push_back(row[c]);
  return out;
}

ExperimentResult run_config(const std::string& name) {
  const ExperimentConfig c = load_config(config_dir + "/" + name);
  return run_experiment(c, {jobs});
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

Outcome exact_posterior_oracle() {
  std::mt19937_64 gen(2718);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Eigen::Index k = 1 + inst % 2;
    const Eigen::Index n = k + 1 + inst % (5 - k);
    Eigen::MatrixXd phi(n, k);
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = randn(gen, 1)[0];
    const double sigma = u(gen), tau = u(gen);
    const Eigen::VectorXd y = randn(gen, n);
    const oracle::GridPosterior g = oracle::grid_bayes(phi, tau, sigma, y);
    const GaussianDist p = conjugate_posterior(build_custom_design(phi), tau, sigma, y);
    const Eigen::MatrixXd c = p.covariance_matrix();
    worst_mean = std::max(worst_mean, (p.mean() - g.mean).cwiseAbs().maxCoeff());
    worst_cov = std::max(worst_cov, (c - g.cov).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff());
  }
  return {worst_mean <= 1e-6 && worst_cov <= 1e-6,
          "max mean error " + fmt(worst_mean, 3) + ", max relative cov error " + fmt(worst_cov, 3)};
}

Outcome fourier_gram_identity() {
  std::vector<Eigen::Index> ns;
  for (Eigen::Index n = 3; n <= 101; ++n) ns.push_back(n);
  ns.push_back(501);
  ns.push_back(1001);
  double worst = 0.0;
  long checked = 0;
  for (Eigen::Index n : ns) {
    const Eigen::Index kmax = n % 2 == 0 ? n - 1 : n;
    const double dn = static_cast<double>(n);
    if (n <= 101) {
      for (Eigen::Index k = 1; k <= kmax; ++k) {
        const Design d = build_fourier_design(n, k);
        const Eigen::MatrixXd g = d.columns().transpose() * d.columns();
        worst = std::max(worst, (g - dn * Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() / dn);
        ++checked;
      }
    } else {
      // Designs are nested in k, so the Gram matrix at kmax contains every
      // smaller one as its leading block; nesting is checked on a k sample.
      const Design full = build_fourier_design(n, kmax);
      const Eigen::MatrixXd g = full.columns().transpose() * full.columns();
      worst = std::max(worst,
                       (g - dn * Eigen::MatrixXd::Identity(kmax, kmax)).cwiseAbs().maxCoeff() / dn);
      for (Eigen::Index k : {Eigen::Index{1}, Eigen::Index{2}, Eigen::Index{77}, kmax / 2, kmax - 1}) {
        const Design d = build_fourier_design(n, k);
        if (d.columns() != full.columns().leftCols(k)) worst = std::max(worst, 1.0);
      }
      checked += kmax;
    }
  }
  return {worst <= 1e-9, std::to_string(checked) + " (n, k) pairs, max |G - nI| / n = " + fmt(worst, 3)};
}

Outcome shift_formula() {
  const boost::math::normal_distribution<double> nd;
  const double oracle = boost::math::cdf(nd, 1.0) - boost::math::cdf(nd, -1.0);
  const double v = tv_gaussian_shift(Eigen::Vector3d(0.0, 1.2, 1.6)).value;
  bool ok = std::abs(v - 0.6826894921) <= 1e-9 && std::abs(v - oracle) <= 1e-9;
  std::mt19937_64 gen(99);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd z = randn(gen, 1 + i % 10) * (0.05 + 0.05 * (i % 40));
    if (tv_gaussian_shift(z).value > z.norm() / std::sqrt(2.0 * std::numbers::pi) + 1e-12) {
      ++violations;
    }
  }
  ok = ok && violations == 0;
  return {ok, "TV(||z|| = 2) = " + fmt(v, 12) + ", bound violations " + std::to_string(violations) +
                  "/100"};
}

Outcome scale_formula() {
  std::ostringstream worst;
  bool ok = true;
  double max_ratio = 0.0;
  std::uint64_t seed = 1000;
  for (Eigen::Index k : {1, 4, 16}) {
    for (double c : {0.25, 0.5, 0.9}) {
      std::mt19937_64 gen(seed++);
      std::normal_distribution<double> nd;
      const int draws = 1000000;
      double s = 0.0, s2 = 0.0;
      const auto dk = static_cast<double>(k);
      for (int i = 0; i < draws; ++i) {
        double r2 = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
          const double x = nd(gen);
          r2 += x * x;
        }
        // log N(0, cI) - log N(0, I) at x ~ N(0, I)
        const double lr = -0.5 * r2 * (1.0 / c - 1.0) - 0.5 * dk * std::log(c);
        const double v = std::max(0.0, 1.0 - std::exp(lr));
        s += v;
        s2 += v * v;
      }
      const double m = s / draws;
      const double se = std::sqrt((s2 / draws - m * m) / draws);
      const double exact = tv_gaussian_scale(k, c).value;
      const double ratio = std::abs(exact - m) / se;
      max_ratio = std::max(max_ratio, ratio);
      if (ratio > 3.0) ok = false;
    }
  }
  return {ok, "max |exact - MC| / SE over 9 pairs = " + fmt(max_ratio, 3)};
}

Outcome isotropic_trend() {
  const std::vector<double> tv = summary_column(run_config("bvm_gaussian_sequence.json"), "tv_estimate");
  const bool ok = tv.size() == 4 && strictly_decreasing(tv) && tv.back() < 0.1;
  return {ok, "mean TV over n = 64..4096: " + join(tv)};
}

Outcome split_prior_negative() {
  const std::vector<double> tv = summary_column(run_config("bvm_split_prior.json"), "tv_estimate");
  bool ok = tv.size() == 3;
  for (double v : tv) ok = ok && v > 0.15;
  ok = ok && tv.back() > 0.8 * tv.front();
  return {ok, "mean TV over n = 256, 1024, 4096: " + join(tv)};
}

Outcome translation_invariance() {
  std::mt19937_64 gen(4242);
  double worst = 0.0;
  int failures = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const Eigen::Index n = 5 + inst % 40;
    const Eigen::Index k = 1 + inst % std::min<Eigen::Index>(n - 1, 9);
    Design d = build_identity_design(n, k);
    switch (inst % 4) {
      case 0: break;
      case 1: d = build_fourier_design(n % 2 == 0 ? n + 1 : n, k); break;
      case 2: d = build_bspline_design(uniform_points(n + 20), std::max<Eigen::Index>(k, 3), 3); break;
      case 3: {
        Eigen::MatrixXd phi(n, k);
        for (Eigen::Index i = 0; i < phi.size(); ++i) phi.data()[i] = randn(gen, 1)[0];
        d = build_custom_design(phi);
        break;
      }
    }
    const Eigen::VectorXd y = randn(gen, d.n());
    const Eigen::VectorXd r = randn(gen, d.n()) * 3.0;
    const Eigen::VectorXd a = r - d.apply_projection(r);
    const double sigma = 0.2 + 0.01 * inst;
    PriorSpec prior = IsotropicGaussianPrior{0.1 + 0.05 * inst};
    if (inst % 8 == 1 || inst % 8 == 4) {
      // Diagonal Gram matrices admit coordinate priors.
      prior = CoordinateGaussianPrior{(randn(gen, d.k()).array().square() + 0.1).matrix()};
    }
    const InvarianceReport rep = check_translation_invariance(d, prior, sigma, y, a);
    worst = std::max({worst, rep.max_mean_difference, rep.max_cov_difference});
    if (!rep.identical) ++failures;
  }
  return {failures == 0 && worst <= 1e-10,
          "max parameter difference " + fmt(worst, 3) + ", failures " + std::to_string(failures)};
}

Outcome contraction_rates() {
  const ExperimentResult r = run_config("contraction_gaussian_sequence.json");
  const std::vector<double> outside = summary_column(r, outside_column(3.0));
  bool ok = outside.size() == 3 && strictly_decreasing(outside);

  // Truths at the edge of the alpha = 1 ellipsoid: coefficients j^-p with p
  // slightly above alpha + 1/2.
  const std::vector<double> ks{8, 16, 32};
  std::vector<double> slopes;
  for (double p : {1.55, 1.6, 1.65}) {
    const SobolevTruth t = make_sobolev_truth(1.0, 1.0, PowerDecay{p}, 1 << 14);
    std::vector<double> bias;
    for (double k : ks) {
      const Design d = build_fourier_design(513, static_cast<Eigen::Index>(k));
      bias.push_back(projection_bias(render_truth_vector(t, d), d));
    }
    slopes.push_back(slope(ks, bias));
  }
  for (double s : slopes) ok = ok && s >= -1.2 && s <= -0.8;
  return {ok, "outside mass at lambda = 3: " + join(outside, 3) + "; bias slopes " + join(slopes, 3)};
}

Outcome linear_coverage() {
  const std::vector<double> cov =
      summary_column(run_config("functional_linear_coverage.json"), "coverage");
  const bool ok = cov.size() == 1 && std::abs(cov[0] - 0.95) <= 0.035;
  return {ok, "coverage " + fmt(cov.at(0), 4)};
}

Outcome quadratic_adaptivity() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"functional_quadratic_norm.json", "functional_theta_quadratic.json"}) {
    const ExperimentResult r = run_config(name);
    const std::vector<double> sup = summary_column(r, "posterior_interval_sup");
    std::vector<double> bias = summary_column(r, "bias_term");
    for (double& b : bias) b = std::abs(b);
    ok = ok && sup.size() == 3 && strictly_decreasing(sup) && strictly_decreasing(bias);
    detail += std::string(name) + ": sup " + join(sup, 3) + " |bias| " + join(bias, 3) + "; ";
  }
  for (const char* name :
       {"functional_quadratic_norm_negative.json", "functional_theta_quadratic_negative.json"}) {
    const std::vector<double> sup = summary_column(run_config(name), "posterior_interval_sup");
    ok = ok && sup.size() == 3 && sup.back() >= sup.front();
    detail += std::string(name) + ": sup " + join(sup, 3) + "; ";
  }
  return {ok, detail};
}

Outcome tail_bounds() {
  int cells = 0, violations = 0;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Index k = 1 + 3 * i;
    for (int j = 0; j < 20; ++j) {
      const double x = 0.25 * j * (1.0 + 0.1 * i);
      const TailCheck t = cirelson_tail(k, x);
      if (t.exact > t.bound) ++violations;
      // M ranges over (4k, 20k]: where the truncation bound applies.
      const double M = 4.0 * static_cast<double>(k) * (1.0 + 0.2 * (j + 1));
      const TVResult tr = tv_truncation(k, M, 0.0);
      if (!tr.bound || tr.value > *tr.bound) ++violations;
      cells += 2;
    }
  }
  return {violations == 0, std::to_string(cells) + " cells, violations " + std::to_string(violations)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "bvmlab_acceptance";
  fs::create_directories(dir);
  const std::string config = config_dir + "/smoke.json";
  std::vector<std::string> outputs;
  for (const auto& [tag, j] : {std::pair{"a", 1}, std::pair{"b", 8}, std::pair{"c", 8}}) {
    const std::string out = (dir / (std::string(tag) + ".csv")).string();
    fs::remove(out);
    const std::string cmd = "\"" + cli_path + "\" run \"" + config + "\" --jobs " +
                            std::to_string(j) + " --output \"" + out + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    outputs.push_back(out);
  }
  const std::string first = read_file(outputs[0]);
  const std::string first_summary = read_file(outputs[0] + ".summary.csv");
  bool same = !first.empty();
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    same = same && read_file(outputs[i]) == first &&
           read_file(outputs[i] + ".summary.csv") == first_summary;
  }
  return {same, "smoke config, --jobs 1 / 8 / 8: " + std::string(same ? "byte-identical" : "differ") +
                    " (" + std::to_string(first.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--configs", config_dir, "Directory with the experiment configs")->required();
  app.add_option("--cli", cli_path, "Path to the bvmlab executable")->required();
  app.add_option("--jobs", jobs, "Worker threads for experiment runs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "conjugate posterior matches grid Bayes", 5, exact_posterior_oracle},
      {2, "Fourier Gram matrix equals n I", 10, fourier_gram_identity},
      {3, "Gaussian shift TV formula and bound", 1, shift_formula},
      {4, "Gaussian scale TV against Monte Carlo", 30, scale_formula},
      {5, "isotropic prior TV decreases (sequence model)", 120, isotropic_trend},
      {6, "split-variance prior TV stays bounded away from 0", 120, split_prior_negative},
      {7, "posterior invariant to orthogonal translations", 5, translation_invariance},
      {8, "contraction mass and projection-bias rate", 60, contraction_rates},
      {9, "linear functional credible-interval coverage", 60, linear_coverage},
      {10, "quadratic functional normality and negative control", 300, quadratic_adaptivity},
      {11, "chi-square tail bounds", 1, tail_bounds},
      {12, "results identical across worker counts", 10, determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), o.detail.c_str(), secs, c.time_limit_s,
                in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
