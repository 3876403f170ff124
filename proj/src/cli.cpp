#include "wienerlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "wienerlab/errors.hpp"
#include "wienerlab/experiments.hpp"
#include "wienerlab/io.hpp"

namespace wienerlab::cli {

namespace {

using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rounds every number to `digits` significant digits so the shortest
// round-trip printer emits no more than that.
void round_numbers(Json& j, int digits) {
  if (digits >= 17) return;
  if (j.is_number_float()) {
    j = std::strtod(io::format_number(j.get<double>(), digits).c_str(), nullptr);
  } else if (j.is_array() || j.is_object()) {
    for (auto& v : j) round_numbers(v, digits);
  }
}

void emit_json(std::ostream& out, Json j, int digits) {
  round_numbers(j, digits);
  out << j.dump(2) << '\n';
}

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("--seed must be an unsigned integer or 'random'");
  }
  return v;
}

void apply_thread_env() {
  const char* env = std::getenv("WIENERLAB_THREADS");
  if (env == nullptr || *env == '\0') return;
  int n = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 0) {
    throw UsageError("WIENERLAB_THREADS must be a non-negative integer");
  }
  set_thread_limit(n);
}

// Output sink: the named file, or `out` when the path is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error("cli", "cannot write '" + path + "'");
  fn(file);
}

KappaSource parse_kappa(const std::string& s) {
  return s == "model" ? KappaSource::model_residual : KappaSource::true_residual;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic Wiener system identification"};
  app.name("wienerlab");
  app.require_subcommand(1, 1);
  app.fallthrough();

  int digits = 17;
  app.add_option("--digits", digits, "Significant digits of numeric output")
      ->check(CLI::Range(1, 17));

  const std::vector<std::string> kappa_choices{"true", "model"};

  // gh-nodes
  int gh_order = 2;
  auto* gh = app.add_subcommand("gh-nodes", "Gauss-Hermite nodes and weights as CSV");
  gh->add_option("--order", gh_order, "Number of nodes")
      ->required()
      ->check(CLI::Range(1, kMaxHermiteOrder));

  // moments
  std::string model_path;
  double z = 0.0;
  std::string kappa = "true";
  auto* mo = app.add_subcommand("moments", "Output moments and κ at a linear output z");
  mo->add_option("--model", model_path, "Model JSON")->required();
  mo->add_option("--z", z, "Linear output z")->required();
  mo->add_option("--kappa", kappa, "Residual κ is taken from")
      ->check(CLI::IsMember(kappa_choices));

  // nll
  std::string method = "cmp";
  std::string data_path;
  int order = kDefaultLikelihoodOrder;
  auto* nl = app.add_subcommand("nll", "Negative log-likelihood of the model's θ");
  nl->add_option("--method", method, "exact, invertible, gauss1, gauss2 or cmp")
      ->required()
      ->check(CLI::IsMember({"exact", "invertible", "gauss1", "gauss2", "cmp"}));
  nl->add_option("--model", model_path, "Model JSON")->required();
  nl->add_option("--data", data_path, "Dataset CSV (t,u,y)")->required();
  nl->add_option("--gh-order", order, "Quadrature order of the exact likelihood")
      ->check(CLI::Range(1, kMaxHermiteOrder));

  // analyze
  std::string u_path;
  bool constant = false;
  std::size_t samples = 1000;
  auto* an = app.add_subcommand("analyze", "Fisher information and sandwich covariance");
  an->add_option("--model", model_path, "Model JSON with the true θ")->required();
  auto* an_u = an->add_option("--u", u_path, "Input series CSV");
  auto* an_c = an->add_flag("--constant-input", constant, "Constant input of 1");
  an_u->excludes(an_c);
  an->add_option("--method", method, "gauss1, gauss2 or cmp")
      ->required()
      ->check(CLI::IsMember({"gauss1", "gauss2", "cmp"}));
  an->add_option("--kappa", kappa, "Residual κ is taken from")
      ->check(CLI::IsMember(kappa_choices));
  auto* an_n = an->add_option("--samples", samples, "N (default 1000, or the length of --u)")
                   ->check(CLI::PositiveNumber);
  bool kappa_only = false;
  an->add_flag("--kappa-only", kappa_only, "Drop the residual-skewness term from J");

  // estimate
  bool positive = false;
  auto* es = app.add_subcommand("estimate", "Fit θ with one of the estimators");
  es->add_option("--method", method, "exact-ml, gauss1, gauss2 or cmp")
      ->required()
      ->check(CLI::IsMember({"exact-ml", "gauss1", "gauss2", "cmp"}));
  es->add_option("--model", model_path, "Model JSON; θ is only a template")->required();
  es->add_option("--data", data_path, "Dataset CSV (t,u,y)")->required();
  es->add_flag("--positive", positive, "Restrict scalar θ to be positive");
  es->add_option("--gh-order", order, "Quadrature order of the exact likelihood")
      ->check(CLI::Range(1, kMaxHermiteOrder));

  // simulate
  std::string seed_text = std::to_string(kDefaultSeed);
  std::string out_path;
  double level = 1.0;
  auto* si = app.add_subcommand("simulate", "Simulate a dataset");
  si->add_option("--model", model_path, "Model JSON")->required();
  auto* si_u = si->add_option("--u", u_path, "Input series CSV");
  auto* si_n = si->add_option("--samples", samples, "N for a constant input")
                   ->check(CLI::PositiveNumber);
  si_u->excludes(si_n);
  si->add_option("--level", level, "Constant input level");
  si->add_option("--seed", seed_text, "Seed, or 'random'");
  si->add_option("--out", out_path, "Output CSV (default: standard output)");

  // table1
  std::string rows_text = "linear,quadratic,ml2,cubic,ml3";
  std::size_t realizations = 250;
  bool printed_variant = false;
  int table_order = kDefaultLikelihoodOrder;
  auto* tb = app.add_subcommand("table1", "Normalized standard deviations for m = 1");
  tb->add_option("--rows", rows_text, "Comma-separated: linear,quadratic,ml2,cubic,ml3");
  tb->add_option("--realizations", realizations, "Monte Carlo realizations")
      ->check(CLI::PositiveNumber);
  tb->add_option("--samples", samples, "N")->check(CLI::PositiveNumber);
  tb->add_option("--gh-order", table_order, "Quadrature order of the exact likelihood")
      ->check(CLI::Range(1, kMaxHermiteOrder));
  tb->add_flag("--printed-variant,--eq45-variant", printed_variant,
               "Also report the quadratic variance-term variant (4σ_v^2 numerator)");
  tb->add_option("--seed", seed_text, "Seed, or 'random'");
  tb->add_option("--out", out_path, "Output CSV (default: standard output)");

  // consistency
  bool kappa_one = false;
  std::size_t cons_samples = 10000;
  std::size_t cons_realizations = 500;
  auto* co = app.add_subcommand("consistency", "Monte Carlo std against the sandwich formula");
  co->add_option("--model", model_path, "Model JSON, scalar θ")->required();
  co->add_option("--method", method, "gauss1, gauss2 or cmp")
      ->required()
      ->check(CLI::IsMember({"gauss1", "gauss2", "cmp"}));
  co->add_option("--samples", cons_samples, "N")->check(CLI::PositiveNumber);
  co->add_option("--realizations", cons_realizations, "R")->check(CLI::PositiveNumber);
  co->add_option("--kappa", kappa, "Residual κ is taken from")
      ->check(CLI::IsMember(kappa_choices));
  co->add_flag("--kappa-one", kappa_one, "Use κ = 1 in the theory");
  co->add_option("--seed", seed_text, "Seed, or 'random'");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    apply_thread_env();
    if (*gh) {
      const QuadratureRule rule = hermite_rule(gh_order);
      out << "node,weight\n";
      for (int i = 0; i < rule.order; ++i) {
        out << io::format_number(rule.nodes[i], digits) << ','
            << io::format_number(rule.weights[i], digits) << '\n';
      }
    } else if (*mo) {
      const WienerModel model = io::read_model(model_path);
      emit_json(out, io::to_json(fourth_and_kappa(model, z, parse_kappa(kappa))), digits);
    } else if (*nl) {
      const WienerModel model = io::read_model(model_path);
      const Dataset data = io::read_dataset(data_path);
      double value = 0.0;
      if (method == "exact") {
        value = exact_nll(model, data.u, data.y, hermite_rule(order));
      } else if (method == "invertible") {
        value = invertible_nll(model, data.u, data.y);
      } else {
        value = gaussian_nll(meanvar(parse_meanvar_kind(method), model, model.theta, data.u),
                             data.y);
      }
      out << io::format_number(value, digits) << '\n';
    } else if (*an) {
      const WienerModel model = io::read_model(model_path);
      std::vector<double> u;
      if (!u_path.empty()) {
        u = io::read_series(u_path);
        if (an_n->count() > 0) u.resize(std::min(u.size(), samples));
      } else {
        u = constant_input(samples);
      }
      FisherOptions opts;
      opts.kappa = parse_kappa(kappa);
      opts.third_moment = !kappa_only;
      const FisherReport fr =
          fisher_report(model, model.theta, u, parse_meanvar_kind(method), opts);
      emit_json(out, io::to_json(fr, u.size()), digits);
    } else if (*es) {
      const WienerModel model = io::read_model(model_path);
      const Dataset data = io::read_dataset(data_path);
      FitOptions opts;
      opts.positive = positive;
      opts.gh_order = order;
      emit_json(out, io::to_json(fit(data, model, parse_method(method), opts)), digits);
    } else if (*si) {
      const WienerModel model = io::read_model(model_path);
      const std::vector<double> u =
          u_path.empty() ? constant_input(samples, level) : io::read_series(u_path);
      const Dataset data = simulate(model, u, resolve_seed(seed_text));
      with_output(out_path, out, [&](std::ostream& s) { io::write_dataset(s, data, digits); });
    } else if (*tb) {
      Table1Options opts;
      opts.rows.clear();
      std::istringstream list(rows_text);
      for (std::string name; std::getline(list, name, ',');) {
        try {
          opts.rows.push_back(parse_table1_row(name));
        } catch (const InvalidArgument&) {
          throw UsageError("--rows: unknown row '" + name + "'");
        }
      }
      opts.samples = samples;
      opts.realizations = realizations;
      opts.gh_order = table_order;
      opts.printed_variant = printed_variant;
      opts.seed = resolve_seed(seed_text);
      const auto start = std::chrono::steady_clock::now();
      const Table1 table = table1(opts);
      with_output(out_path, out, [&](std::ostream& s) { io::write_table1_csv(s, table, digits); });
      err << "runtime: "
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
          << " s\n";
    } else if (*co) {
      const WienerModel model = io::read_model(model_path);
      ConsistencyOptions opts;
      opts.samples = cons_samples;
      opts.realizations = cons_realizations;
      opts.seed = resolve_seed(seed_text);
      opts.kappa = parse_kappa(kappa);
      opts.kappa_one = kappa_one;
      const ConsistencyReport rep = consistency_check(model, parse_meanvar_kind(method), opts);
      Json j;
      j["samples"] = opts.samples;
      j["realizations"] = opts.realizations;
      j["failed"] = rep.monte_carlo.failed.size();
      j["sample_mean"] = rep.monte_carlo.sample_mean[0];
      j["sample_std"] = rep.sample_std;
      j["theory_std"] = rep.theory_std;
      j["theory_std_kappa_only"] = rep.theory_std_kappa_only;
      j["ratio"] = rep.ratio;
      emit_json(out, j, digits);
      err << "runtime: " << rep.monte_carlo.runtime_seconds << " s\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    err << "input error [" << e.module() << "]: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error [" << e.module() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error [cli]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace wienerlab::cli
