// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "wienerlab/cli.hpp"
#include "wienerlab/experiments.hpp"
#include "wienerlab/io.hpp"

using namespace wienerlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[failed] ";
    }
    detail += what + "; ";
  }
};

std::string fmt(double v, int digits = 4) { return io::format_number(v, digits); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome quadrature_exactness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n = 1; n <= 64; ++n) {
    const auto r = hermite_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      long double s = 0.0L;
      for (int i = 0; i < n; ++i) s += static_cast<long double>(r.weights[i]) * std::pow((long double)r.nodes[i], k);
      const double exact = oracle::hermite_moment(k);
      // Odd moments vanish; measure them against the even neighbour's scale.
      const double scale = exact != 0.0 ? exact : std::tgamma(0.5 * (k + 2));
      worst = std::max(worst, std::abs(static_cast<double>(s) - exact) / scale);
    }
  }
  const double t = seconds_since(t0);
  o.require(worst <= 1e-9, "max relative error " + fmt(worst, 3));
  o.require(t < 1.0, "runtime " + fmt(t, 3) + " s");
  return o;
}

Outcome linear_row() {
  Outcome o;
  const std::vector<double> published{0.0141, 0.0224, 0.0316, 0.0387, 0.0447};
  Table1Options opts;
  opts.rows = {Table1Row::linear};
  const auto t = table1(opts);
  for (int i = 0; i < 5; ++i) {
    const double v = t.lines[0].values[i];
    o.require(std::abs(v - published[i]) <= 5e-5, fmt(v) + " vs " + fmt(published[i]));
  }
  return o;
}

Outcome cubic_row() {
  Outcome o;
  const std::vector<double> published{0.0133, 0.0239, 0.0396, 0.0532, 0.0660};
  for (int i = 0; i < 5; ++i) {
    const double v = sensor_row_std(PolynomialSensor::cubic(), kTable1NoiseLevels[i], 1000, false);
    o.require(std::abs(v / published[i] - 1.0) <= 0.03, fmt(v) + " vs " + fmt(published[i]));
  }
  const auto r = fim_result4(PolynomialSensor::cubic(), 1, 1, 1);
  o.detail += "gamma(1) = " + fmt(*r.gamma, 3) + "; ";
  return o;
}

Outcome quadratic_row() {
  Outcome o;
  const auto q = PolynomialSensor::quadratic();
  const double at1 = sensor_row_std(q, 1.0, 1000, false);
  o.require(std::abs(at1 / 0.0461 - 1.0) <= 0.01, "sigma2=1: " + fmt(at1) + " vs 0.0461");
  const double kappa = fim_result4(q, 1, 1, 1).kappa_max;
  o.require(std::abs(kappa - 2.2) <= 0.01, "kappa(1) = " + fmt(kappa));
  const std::vector<double> published{0.0105, 0.0179, 0.0280, 0.0371};
  std::string general = "general formula:";
  for (int i = 0; i < 4; ++i) {
    const double variant = sensor_row_std(q, kTable1NoiseLevels[i], 1000, true);
    o.require(std::abs(variant / published[i] - 1.0) <= 0.01,
              "printed variant " + fmt(variant) + " vs " + fmt(published[i]));
    general += " " + fmt(sensor_row_std(q, kTable1NoiseLevels[i], 1000, false));
  }
  // Both readings must be reported side by side.
  Table1Options opts;
  opts.rows = {Table1Row::quadratic};
  opts.printed_variant = true;
  const auto t = table1(opts);
  o.require(t.lines.size() == 2 && t.lines[1].label == "Quadratic (printed variant)",
            "table reports both rows");
  o.detail += general + "; ";
  return o;
}

Outcome ml_rows() {
  Outcome o;
  const std::vector<double> ml2{0.0132, 0.0219, 0.0314, 0.0452, 0.0478};
  const std::vector<double> ml3{0.0129, 0.0214, 0.0281, 0.0330, 0.0449};
  Table1Options opts;
  opts.rows = {Table1Row::ml2, Table1Row::ml3};
  auto t0 = std::chrono::steady_clock::now();
  const auto t = table1(opts);
  const double full = seconds_since(t0);
  for (int row = 0; row < 2; ++row) {
    const auto& published = row == 0 ? ml2 : ml3;
    std::string cells = t.lines[row].label + ":";
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
      const double v = t.lines[row].values[i];
      const bool cell_ok = std::abs(v / published[i] - 1.0) <= 0.15;
      ok = ok && cell_ok;
      cells += " " + fmt(v) + (cell_ok ? "" : "(!)") + "/" + fmt(published[i]);
    }
    o.require(ok, cells);
  }
  o.require(full <= 15 * 60, "R=250 runtime " + fmt(full, 3) + " s");
  opts.realizations = 50;
  t0 = std::chrono::steady_clock::now();
  table1(opts);
  const double smoke = seconds_since(t0);
  o.require(smoke <= 3 * 60, "R=50 runtime " + fmt(smoke, 3) + " s");
  return o;
}

Outcome consistency() {
  Outcome o;
  for (const auto& h : {PolynomialSensor::quadratic(), PolynomialSensor::cubic()}) {
    for (double s2 : {0.25, 1.0}) {
      ConsistencyOptions opts;
      opts.samples = 10000;
      opts.realizations = 500;
      const auto r = consistency_check(WienerModel{{1.0}, h, s2, s2}, MeanVarKind::cmp, opts);
      o.require(r.ratio >= 0.9 && r.ratio <= 1.1,
                std::string(h.degree() == 2 ? "quadratic" : "cubic") + " sigma2=" + fmt(s2) +
                    " ratio " + fmt(r.ratio) + " (kappa-only J: " +
                    fmt(r.sample_std / r.theory_std_kappa_only) + ")");
    }
  }
  return o;
}

Outcome identities() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c(-1, 1), m(0.2, 2), var(0.05, 1.0);

  double worst12 = 0.0;
  int cases = 0;
  while (cases < 50) {
    const PolynomialSensor h({c(rng), 1.0 + 0.5 * c(rng), c(rng), c(rng)});
    const double m0 = m(rng), vv = var(rng);
    const double h1 = h.eval(m0, 1);
    if (std::abs(h1) < 0.05) continue;
    const double a = fim_result1(h, m0, vv, h1 * h1 * vv), b = fim_result2(h, m0, vv, h1 * h1 * vv);
    worst12 = std::max(worst12, std::abs(a - b) / std::max(1.0, std::abs(a)));
    ++cases;
  }
  o.require(worst12 <= 1e-10, "FIM1 = FIM2 on 50 cases, max diff " + fmt(worst12, 3));

  bool same = true;
  for (int trial = 0; trial < 20; ++trial) {
    const WienerModel q{{c(rng), c(rng)}, PolynomialSensor({c(rng), c(rng), c(rng)}), var(rng), var(rng)};
    std::vector<double> u(50);
    for (auto& x : u) x = c(rng);
    const auto g2 = meanvar_gauss2(q, q.theta, u), cm = meanvar_cmp(q, q.theta, u);
    for (std::size_t t = 0; t < u.size(); ++t) {
      same = same && std::abs(g2.means[t] - cm.means[t]) <= 1e-14 * std::max(1.0, std::abs(cm.means[t])) &&
             std::abs(g2.variances[t] - cm.variances[t]) <= 1e-14 * cm.variances[t];
    }
  }
  o.require(same, "gauss2 = cmp for quadratic sensors");

  double worst_nll = 0.0;
  const auto rule = hermite_rule(kDefaultLikelihoodOrder);
  for (int trial = 0; trial < 20; ++trial) {
    const WienerModel cub{{m(rng)}, PolynomialSensor::cubic(), var(rng), var(rng)};
    const auto u = constant_input(100);
    const auto d = simulate(cub, u, 1000 + trial);
    worst_nll = std::max(worst_nll, std::abs(exact_nll(cub, u, d.y, rule) - invertible_nll(cub, u, d.y)));
  }
  o.require(worst_nll <= 1e-6, "exact = invertible nll, max diff " + fmt(worst_nll, 3));

  const double kappa =
      fourth_and_kappa(WienerModel{{0}, PolynomialSensor({0, 0, 1}), 1.0, 0.0}, 0.0).kappa;
  o.require(std::abs(kappa - 7.0) <= 1e-12, "pure square kappa " + fmt(kappa, 17));
  return o;
}

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> c(-1, 1), var(0.05, 1);
  std::uniform_int_distribution<int> nb(1, 4), deg(1, 4);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> th(nb(rng)), co(deg(rng) + 1), u(30);
    for (auto& x : th) x = c(rng);
    for (auto& x : co) x = c(rng);
    for (auto& x : u) x = n01(rng);
    const WienerModel model{th, PolynomialSensor(co), var(rng), var(rng)};
    for (auto kind : {MeanVarKind::gauss1, MeanVarKind::gauss2, MeanVarKind::cmp}) {
      const auto seq = meanvar(kind, model, th, u);
      const auto num = numeric_meanvar_gradients(kind, model, th, u);
      const double sm = std::max(1.0, seq.mean_gradients->cwiseAbs().maxCoeff());
      const double sv = std::max(1.0, seq.variance_gradients->cwiseAbs().maxCoeff());
      worst = std::max(worst, (*seq.mean_gradients - num.mean).cwiseAbs().maxCoeff() / sm);
      worst = std::max(worst, (*seq.variance_gradients - num.variance).cwiseAbs().maxCoeff() / sv);
    }
  }
  o.require(worst <= 1e-5, "max relative gradient error " + fmt(worst, 3));
  return o;
}

std::string run_to_file(std::vector<std::string> args, const std::filesystem::path& out_file) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) return "exit " + std::to_string(code) + ": " + err.str();
  std::ofstream(out_file) << out.str();
  return {};
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wienerlab_determinism";
  fs::create_directories(dir);
  const fs::path model = dir / "model.json";
  std::ofstream(model) << R"({"theta":[1],"sensor":{"kind":"cubic"},"var_v":0.5,"var_e":0.5})";
  const std::string mp = model.string();
  const std::string data = (dir / "data.csv").string();
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--model", mp, "--samples", "500", "--seed", "11", "--out", data},
      {"estimate", "--method", "exact-ml", "--model", mp, "--data", data, "--positive"},
      {"estimate", "--method", "cmp", "--model", mp, "--data", data},
      {"nll", "--method", "exact", "--model", mp, "--data", data},
      {"table1", "--rows", "linear,quadratic,ml2,cubic,ml3", "--realizations", "4", "--eq45-variant"},
      {"consistency", "--model", mp, "--method", "cmp", "--samples", "1000", "--realizations", "50"},
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path f = dir / ("out" + std::to_string(i) + "_" + std::to_string(rep));
      const std::string e = run_to_file(commands[i], f);
      if (!e.empty()) {
        o.require(false, commands[i][0] + " " + e);
        continue;
      }
      // simulate writes through --out; compare that file.
      bytes[rep] = i == 0 ? read_bytes(data) : read_bytes(f);
    }
    o.require(!bytes[0].empty() && bytes[0] == bytes[1], commands[i][0] + " identical");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 quadrature exactness n<=64", quadrature_exactness},
      {"2 linear row", linear_row},
      {"3 cubic asymptotic row", cubic_row},
      {"4 quadratic asymptotic row (general and printed variant)", quadratic_row},
      {"5 ML2/ML3 Monte Carlo rows", ml_rows},
      {"6 CMP sandwich self-consistency", consistency},
      {"7 identities", identities},
      {"8 gradient checks", gradients},
      {"9 determinism of seeded commands", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
