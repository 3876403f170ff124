#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wienerlab/cli.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/io.hpp"

using namespace wienerlab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "wienerlab_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("sensor json") {
  using io::Json;
  CHECK(io::sensor_from_json(Json::parse(R"({"kind":"linear","gain":3})")).eval(1.0) == 3.0);
  CHECK(io::sensor_from_json(Json::parse(R"({"kind":"quadratic"})")).eval(2.0) == 2.0);
  CHECK(io::sensor_from_json(Json::parse(R"({"kind":"cubic"})")).eval(3.0) == 9.0);
  CHECK(io::sensor_from_json(Json::parse(R"({"kind":"poly","coefficients":[1,2]})")).eval(1.0) == 3.0);
  CHECK_THROWS_AS(io::sensor_from_json(Json::parse(R"({"kind":"tanh"})")), FormatError);
  CHECK_THROWS_AS(io::sensor_from_json(Json::parse(R"({"kind":"linear"})")), FormatError);
  const auto m = io::model_from_json(io::to_json(WienerModel{{1, 2}, PolynomialSensor::cubic(), 0.1, 0.2}));
  CHECK(m.theta == std::vector<double>{1, 2});
  CHECK(m.var_e == 0.2);
}

TEST_CASE("dataset csv round trip") {
  const auto d = simulate(WienerModel{{1}, PolynomialSensor::cubic(), 0.3, 0.3}, constant_input(20), 2);
  std::stringstream s;
  io::write_dataset(s, d);
  const auto back = io::read_dataset(s);
  CHECK(back.u == d.u);
  CHECK(back.y == d.y);
  std::stringstream bad("t,u,y\n1,1,2\n2,1\n");
  CHECK_THROWS_AS(io::read_dataset(bad), FormatError);
  std::stringstream hdr("t,y\n1,2\n");
  CHECK_THROWS_AS(io::read_dataset(hdr), FormatError);
}

TEST_CASE("gh-nodes") {
  const auto r = run({"gh-nodes", "--order", "2"});
  CHECK(r.code == 0);
  CHECK(r.out == "node,weight\n-0.70710678118654757,0.88622692545275794\n"
                 "0.70710678118654757,0.88622692545275794\n");
  CHECK(run({"gh-nodes", "--order", "2", "--digits", "4"}).out ==
        "node,weight\n-0.7071,0.8862\n0.7071,0.8862\n");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"gh-nodes"}).code == 2);
  CHECK(run({"gh-nodes", "--order", "2", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"table1", "--rows", "linear,ml9"}).code == 2);
  CHECK(run({"table1", "--seed", "abc"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("table1") != std::string::npos);
}

TEST_CASE("estimate with mismatched columns exits 2") {
  const auto model = write("m.json", R"({"theta":[1],"sensor":{"kind":"cubic"},"var_v":0.1,"var_e":0.1})");
  const auto data = write("bad.csv", "t,u,y\n1,1,0.3\n2,1,0.4,9\n");
  const auto r = run({"estimate", "--method", "cmp", "--model", model, "--data", data});
  CHECK(r.code == 2);
  CHECK(r.err.find('\n') == r.err.size() - 1);
}

TEST_CASE("computation errors exit 1 and name the module") {
  const auto model = write("q.json", R"({"theta":[1],"sensor":{"kind":"quadratic"},"var_v":0.1,"var_e":0.1})");
  const auto data = write("q.csv", "t,u,y\n1,1,0.3\n2,1,0.4\n");
  const auto r = run({"nll", "--method", "invertible", "--model", model, "--data", data});
  CHECK(r.code == 1);
  CHECK(r.err.find("likelihood") != std::string::npos);
  const auto z = write("z.json", R"({"theta":[1],"sensor":{"kind":"cubic"},"var_v":0,"var_e":0})");
  CHECK(run({"moments", "--model", z, "--z", "1"}).code == 1);
}

TEST_CASE("subcommands are thin adapters") {
  const auto model = write("c.json", R"({"theta":[1],"sensor":{"kind":"cubic"},"var_v":0.5,"var_e":0.5})");
  const auto csv = (scratch() / "sim.csv").string();
  REQUIRE(run({"simulate", "--model", model, "--samples", "200", "--seed", "9", "--out", csv}).code == 0);
  const auto d = io::read_dataset(csv);
  const auto truth = io::read_model(model);
  CHECK(d.y == simulate(truth, constant_input(200), 9).y);

  const auto nll = run({"nll", "--method", "cmp", "--model", model, "--data", csv});
  CHECK(nll.out == io::format_number(gaussian_nll(meanvar_cmp(truth, truth.theta, d.u), d.y)) + "\n");

  const auto est = run({"estimate", "--method", "cmp", "--model", model, "--data", csv, "--positive"});
  REQUIRE(est.code == 0);
  FitOptions opts;
  opts.positive = true;
  const auto direct = fit(d, truth, Method::cmp, opts);
  CHECK(io::Json::parse(est.out)["theta_hat"][0].get<double>() == direct.theta_hat[0]);

  const auto mom = run({"moments", "--model", model, "--z", "1"});
  CHECK(io::Json::parse(mom.out)["kappa"].get<double>() == fourth_and_kappa(truth, 1.0).kappa);

  const auto an = run({"analyze", "--model", model, "--constant-input", "--method", "cmp", "--samples", "1000"});
  REQUIRE(an.code == 0);
  const auto j = io::Json::parse(an.out);
  ScalarFisherOptions full;
  full.third_moment = true;
  const auto fr = fim_result4(PolynomialSensor::cubic(), 1.0, 0.5, 0.5, full);
  CHECK(j["normalized_std"].get<double>() == doctest::Approx(std::sqrt(fr.ascov(0, 0) / 1000)).epsilon(1e-13));
  CHECK(j["fim_label"] == "approximation-model information");
  const auto ko = run({"analyze", "--model", model, "--constant-input", "--method", "cmp", "--kappa-only"});
  REQUIRE(ko.code == 0);
  const auto tab = fim_result4(PolynomialSensor::cubic(), 1.0, 0.5, 0.5);
  CHECK(io::Json::parse(ko.out)["normalized_std"].get<double>() ==
        doctest::Approx(std::sqrt(tab.ascov(0, 0) / 1000)).epsilon(1e-13));
}

TEST_CASE("table1 linear row") {
  const auto r = run({"table1", "--rows", "linear", "--samples", "1000", "--digits", "3"});
  CHECK(r.code == 0);
  CHECK(r.out == "row,0.1,0.25,0.5,0.75,1\nLinear,0.0141,0.0224,0.0316,0.0387,0.0447\n");
  const auto v = run({"table1", "--rows", "quadratic", "--eq45-variant", "--digits", "3"});
  CHECK(v.out.find("Quadratic (printed variant),0.0105,0.0179,0.028,0.0372,0.0461") != std::string::npos);
}

TEST_CASE("seeded commands are reproducible") {
  const auto model = write("r.json", R"({"theta":[1],"sensor":{"kind":"quadratic"},"var_v":1,"var_e":1})");
  const auto a = run({"consistency", "--model", model, "--method", "cmp", "--samples", "500", "--realizations", "20"});
  const auto b = run({"consistency", "--model", model, "--method", "cmp", "--samples", "500", "--realizations", "20"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run({"consistency", "--model", model, "--method", "cmp", "--samples", "500", "--realizations", "20",
                      "--seed", "7"});
  CHECK(c.out != a.out);
}
