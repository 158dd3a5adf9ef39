#include <doctest.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "otmap/cli.hpp"
#include "otmap/serialize.hpp"

using namespace otmap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("otmap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Mat uniform_cloud(int n, int d, std::uint64_t seed) {
  Mat m(n, d);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) m.row(i) = rng.uniform_vec(d).transpose();
  return m;
}

void check_transport_roundtrip(const TransportModel& a, const TransportModel& b, int d) {
  Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    const Vec x = rng.uniform_vec(d);
    const Vec ta = a.transport(x), tb = b.transport(x);
    CHECK((ta - tb).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

}  // namespace

TEST_CASE("smoothness map JSON round trips") {
  for (const auto& m :
       {SmoothnessMap::sobolev(3, 2), SmoothnessMap::mixed(WeightRule::power(0.6, 0.1)),
        SmoothnessMap::anisotropic(WeightRule::geometric(2, 3))}) {
    const SmoothnessMap back = map_from_json(map_to_json(m));
    CHECK(back.str() == m.str());
    CHECK(back.alpha() == m.alpha());
  }
  CHECK_THROWS(map_from_json(json{{"family", "nope"}, {"params", json::object()}}));
}

TEST_CASE("fourier potential JSON round trips bitwise") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential phi(m, 9, 3);
  Rng rng(5);
  for (int i = 0; i < phi.num_coeffs(); ++i) phi.set_coeff(i, rng.uniform(-1, 1));
  const FourierPotential back = potential_from_json(potential_to_json(phi));
  CHECK(back.coeffs() == phi.coeffs());
  CHECK(back.ambient_dim() == phi.ambient_dim());
}

TEST_CASE("model save/load round trips for every estimator family") {
  TempDir tmp;
  const Mat X = uniform_cloud(24, 3, 1);
  const Mat Y = uniform_cloud(24, 3, 2);

  SUBCASE("fourier") {
    const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
    SemidualConfig cfg;
    cfg.max_iter = 3;
    const TransportModel model = TransportModel::from_fourier(fit_fourier(X, Y, m, cfg));
    save_model(model, tmp.file("fourier.json"));
    const TransportModel back = load_model(tmp.file("fourier.json"));
    check_transport_roundtrip(model, back, 3);
    CHECK(back.fourier->objective_trace == model.fourier->objective_trace);
  }

  SUBCASE("nn") {
    const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
    NnConfig cfg;
    cfg.iterations = 4;
    cfg.batch = 12;
    cfg.hidden = {6};
    cfg.embed_dim = 2;
    const TransportModel model = TransportModel::from_nn(train_nn(X, Y, m, cfg), 3);
    save_model(model, tmp.file("nn.json"));
    const TransportModel back = load_model(tmp.file("nn.json"));
    check_transport_roundtrip(model, back, 3);
    for (std::size_t l = 0; l < model.nn->net.weights().size(); ++l)
      CHECK(back.nn->net.weights()[l] == model.nn->net.weights()[l]);
  }

  SUBCASE("nnplan") {
    const TransportModel model = TransportModel::from_plan(solve_assignment(X, Y), X, Y);
    save_model(model, tmp.file("plan.json"));
    check_transport_roundtrip(model, load_model(tmp.file("plan.json")), 3);
  }

  SUBCASE("linear") {
    const TransportModel model = TransportModel::from_linear(linear_ot_baseline(X, Y), 3);
    save_model(model, tmp.file("lin.json"));
    check_transport_roundtrip(model, load_model(tmp.file("lin.json")), 3);
  }
}

TEST_CASE("model loading failure modes") {
  TempDir tmp;

  SUBCASE("corrupted JSON reports a parse location") {
    write_text_file(tmp.file("bad.json"), "{\"format_version\": 1, \"kind\": ");
    try {
      load_model(tmp.file("bad.json"));
      FAIL("expected a parse error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("parse") != std::string::npos);
    }
  }

  SUBCASE("format_version mismatch refuses with an upgrade hint") {
    json j = {{"format_version", 99}, {"kind", "linear"}, {"data_dim", 1}};
    write_text_file(tmp.file("v99.json"), j.dump());
    CHECK_THROWS_WITH_AS(load_model(tmp.file("v99.json")),
                         doctest::Contains("format_version 99"), NumericalError);
  }
}

TEST_CASE("CSV matrices round trip bitwise") {
  TempDir tmp;
  const Mat M = uniform_cloud(13, 4, 9);
  write_csv_matrix(tmp.file("m.csv"), M);
  const Mat back = read_csv_matrix(tmp.file("m.csv"));
  CHECK(back == M);
  CHECK_THROWS_AS(read_csv_matrix(tmp.file("missing.csv")), UsageError);
}

TEST_CASE("function CSV round trips") {
  TempDir tmp;
  FunctionSample fs;
  fs.grid = Vec::LinSpaced(32, 0.0, 1.0);
  fs.values = uniform_cloud(3, 32, 4);
  write_function_csv(tmp.file("f.csv"), fs);
  const FunctionSample back = read_function_csv(tmp.file("f.csv"));
  CHECK(back.grid == fs.grid);
  CHECK(back.values == fs.values);
}

TEST_CASE("cli exit codes") {
  TempDir tmp;

  SUBCASE("--help exits 0") { CHECK(run_cli({"--help"}) == 0); }
  SUBCASE("unknown flag exits 1") { CHECK(run_cli({"gen-data", "--nope", "3"}) == 1); }
  SUBCASE("missing required option exits 1") { CHECK(run_cli({"fit-fourier"}) == 1); }
  SUBCASE("missing input file exits 1") {
    CHECK(run_cli({"transport", "--model", tmp.file("absent.json"), "--x",
                   tmp.file("absent.csv")}) == 1);
  }
  SUBCASE("corrupted model exits 2") {
    write_text_file(tmp.file("bad.json"), "{broken");
    write_csv_matrix(tmp.file("x.csv"), Mat::Constant(2, 2, 0.5));
    CHECK(run_cli({"transport", "--model", tmp.file("bad.json"), "--x", tmp.file("x.csv"),
                   "--out", tmp.file("o.csv")}) == 2);
  }
}

TEST_CASE("cli end-to-end on a tiny task") {
  TempDir tmp;
  CHECK(run_cli({"gen-data", "--q", "1", "--d", "3", "--n", "30", "--seed", "5", "--out-x",
                 tmp.file("x.csv"), "--out-y", tmp.file("y.csv")}) == 0);
  CHECK(run_cli({"fit-nnplan", "--x", tmp.file("x.csv"), "--y", tmp.file("y.csv"), "--out",
                 tmp.file("plan.json")}) == 0);
  CHECK(run_cli({"transport", "--model", tmp.file("plan.json"), "--x", tmp.file("x.csv"),
                 "--out", tmp.file("tx.csv")}) == 0);
  CHECK(run_cli({"eval", "--model", tmp.file("plan.json"), "--x", tmp.file("x.csv"), "--y",
                 tmp.file("y.csv"), "--out", tmp.file("metrics.json")}) == 0);

  // the plan pushes the training points exactly onto a permutation of Y
  const json metrics = json::parse(read_text_file(tmp.file("metrics.json")));
  CHECK(metrics.at("w2_transported_vs_y").get<double>() <= 1e-12);
  CHECK(metrics.at("w2_x_vs_y").get<double>() > 0);

  // manifests exist next to every artifact
  CHECK(fs::exists(tmp.file("plan.json.manifest.json")));
  const json manifest = json::parse(read_text_file(tmp.file("plan.json.manifest.json")));
  CHECK(manifest.at("library_version").get<std::string>() == kVersion);
  CHECK(manifest.at("input_checksums").size() == 2);
}

TEST_CASE("cli fda pipeline runs") {
  TempDir tmp;
  FunctionSample src, dst;
  src.grid = Vec::LinSpaced(64, 0.0, 1.0);
  src.values.resize(8, 64);
  dst.grid = src.grid;
  dst.values.resize(8, 64);
  Rng rng(11);
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 64; ++k) {
      const double t = src.grid[k];
      src.values(i, k) = 0.3 * std::cos(M_PI * t) * rng.uniform(0.8, 1.2);
      dst.values(i, k) = src.values(i, k) + 0.2 * std::cos(2 * M_PI * t);
    }
  }
  write_function_csv(tmp.file("src.csv"), src);
  write_function_csv(tmp.file("dst.csv"), dst);
  CHECK(run_cli({"fda", "--src", tmp.file("src.csv"), "--dst", tmp.file("dst.csv"),
                 "--n-coeffs", "6", "--estimator", "linear", "--outdir",
                 tmp.file("out")}) == 0);
  CHECK(fs::exists(tmp.file("out/transported.csv")));
  CHECK(fs::exists(tmp.file("out/metrics.json")));
  CHECK(fs::exists(tmp.file("out/run_manifest.json")));
}

TEST_CASE("sim7 replay from the resolved config is bitwise identical") {
  TempDir tmp;
  fs::create_directories(tmp.file("a"));
  fs::create_directories(tmp.file("b"));
  CHECK(run_cli({"sim7", "--estimator", "linear", "--q", "1", "--d", "3", "--ns", "20,40",
                 "--seeds", "2", "--mc", "100", "--seed", "9", "--out",
                 tmp.file("a/report.json")}) == 0);
  CHECK(run_cli({"sim7", "--config", tmp.file("a/resolved_config.json"), "--out",
                 tmp.file("b/report.json")}) == 0);
  CHECK(read_text_file(tmp.file("a/report.json")) == read_text_file(tmp.file("b/report.json")));
  CHECK(read_text_file(tmp.file("a/errors.csv")) == read_text_file(tmp.file("b/errors.csv")));
  CHECK(read_text_file(tmp.file("a/plot_data.csv")) == read_text_file(tmp.file("b/plot_data.csv")));
}
