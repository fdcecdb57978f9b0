#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "cli/config.hpp"
#include "gate_datasets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kTmp = CRC_TEST_TMPDIR;

struct Run {
  int code = -1;
  std::string output;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Run run(const std::string& args) {
  fs::create_directories(kTmp);
  const fs::path log = kTmp / "last_run.log";
  const std::string cmd = std::string(CRCDECON_BINARY) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

fs::path fresh(const std::string& name) {
  const fs::path p = kTmp / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("simulate") {
  const fs::path a = fresh("sim_a"), b = fresh("sim_b");
  REQUIRE(run("--spec a --n 2000 --seed 1 --out " + a.string() + " simulate").code == 0);
  REQUIRE(run("--spec a --n 2000 --seed 1 --out " + b.string() + " simulate").code == 0);
  CHECK(line_count(a / "sample.csv") == 2001);
  CHECK(line_count(a / "panel.csv") == 4001);
  CHECK(slurp(a / "sample.csv") == slurp(b / "sample.csv"));
  CHECK(slurp(a / "latent.csv") == slurp(b / "latent.csv"));
  const json meta = read_json(a / "simulate.json");
  CHECK(meta.contains("version"));
  CHECK(meta["config"]["seed"] == 1);

  const fs::path d = fresh("sim_d");
  REQUIRE(run("--spec d --n 50 --out " + d.string() + " simulate").code == 0);
  const json md = read_json(d / "simulate.json");
  CHECK(md["spec"]["laplace_b1"].get<double>() == doctest::Approx(std::sqrt(0.5)));
  CHECK(md["spec"]["laplace_b2"].get<double>() == doctest::Approx(1.0));
  CHECK(md["spec"]["mixture"].contains("note"));
}

TEST_CASE("estimate and reproduce from the embedded config") {
  const fs::path sim = fresh("est_sim");
  REQUIRE(run("--spec a --n 1500 --seed 3 --out " + sim.string() + " simulate").code == 0);
  const fs::path cfg = sim / "estimate.json";
  write_file(cfg, R"({ "tuning": { "h_x": 0.8, "sieve_dimension": 3 } })");

  const fs::path out = fresh("est_out");
  const Run r = run("--config " + cfg.string() + " --input " + (sim / "sample.csv").string() + " --out " +
                    out.string() + " estimate");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json d = read_json(out / "density.json");
  CHECK(d["first_stage"]["m_hat_at_zero"][0] == 1.0);
  CHECK(d["first_stage"]["m_hat_at_zero"][1] == 0.0);
  CHECK(d["tuning"]["h_x"] == 0.8);
  CHECK(d["input_format"] == "differenced");
  CHECK(d["density"]["grid"].size() == 401);

  const fs::path embedded = out / "embedded.json";
  write_file(embedded, d["config"].dump());
  const fs::path again = fresh("est_again");
  REQUIRE(run("--config " + embedded.string() + " --out " + again.string() + " estimate").code == 0);
  CHECK(slurp(out / "density.csv") == slurp(again / "density.csv"));
  CHECK(slurp(out / "first_stage.csv") == slurp(again / "first_stage.csv"));

  // The long panel differences to the same sample.
  const fs::path lp = fresh("est_long");
  REQUIRE(run("--config " + cfg.string() + " --input " + (sim / "panel.csv").string() + " --out " + lp.string() +
              " estimate")
              .code == 0);
  const json dl = read_json(lp / "density.json");
  CHECK(dl["input_format"] == "long");
  CHECK(dl["density"]["processed"] == d["density"]["processed"]);

  const fs::path diag = fresh("diag");
  REQUIRE(run("--input " + (sim / "sample.csv").string() + " --out " + diag.string() + " diagnose").code == 0);
  const json dj = read_json(diag / "diagnose.json");
  CHECK(dj["beta_support"]["lo"].get<double>() <= dj["beta_support"]["hi"].get<double>());
  CHECK(dj["stayers"].get<int>() + dj["movers"].get<int>() == 1500);
}

TEST_CASE("exit codes") {
  const fs::path out = fresh("codes");
  Run r = run("--input " + (kTmp / "does_not_exist.csv").string() + " --out " + out.string() + " estimate");
  CHECK(r.code == 2);
  CHECK(r.output.find("does_not_exist") != std::string::npos);
  CHECK(run("--design sideways estimate").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("--version").code == 0);

  const fs::path sim = fresh("codes_sim");
  REQUIRE(run("--spec a --n 800 --out " + sim.string() + " simulate").code == 0);
  write_file(sim / "huge.json", R"({ "tuning": { "h_x": 0.8, "sieve_dimension": 60 } })");
  r = run("--config " + (sim / "huge.json").string() + " --input " + (sim / "sample.csv").string() + " --out " +
          out.string() + " estimate");
  CHECK(r.code == 4);

  const auto g = crc::testing::gate_case(crc::FeasibilityCondition::kDegenerateFrequency);
  std::string csv = "id,y,x\n";
  for (std::size_t i = 0; i < g.sample.size(); ++i) {
    std::ostringstream row;
    row.precision(17);
    row << "g" << i << "," << g.sample.y[i] << "," << g.sample.x[i] << "\n";
    csv += row.str();
  }
  write_file(out / "gate.csv", csv);
  write_file(out / "gate.json", R"({
    "seed": 17,
    "tuning": { "tau_x": 0.5, "h0": 1.0, "tau_den": 1e-4 },
    "cv": { "repetitions": 1, "bandwidths": [0.5], "sieve_dimensions": [3] }
  })");
  r = run("--config " + (out / "gate.json").string() + " --input " + (out / "gate.csv").string() + " --out " +
          out.string() + " cv");
  CHECK(r.code == 3);
  CHECK(r.output.find("degenerate frequency") != std::string::npos);
}

TEST_CASE("cross-validation, bootstrap and Monte Carlo smoke runs") {
  const fs::path sim = fresh("smoke_sim");
  REQUIRE(run("--spec a --n 600 --seed 5 --out " + sim.string() + " simulate").code == 0);
  const std::string input = " --input " + (sim / "sample.csv").string();

  write_file(sim / "cv.json", R"({ "cv": { "repetitions": 2, "bandwidths": [0.7], "sieve_dimensions": [3],
                                           "gamma_max": 1e6 } })");
  const fs::path cv = fresh("smoke_cv");
  Run r = run("--config " + (sim / "cv.json").string() + input + " --out " + cv.string() + " cv");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json cj = read_json(cv / "cv.json");
  CHECK(cj["selected"]["bandwidth"] == 0.7);
  CHECK(cj["one_se_set"].size() == 1);
  CHECK(cj["feasibility"]["folds"].size() == 10);

  write_file(sim / "boot.json", R"({ "tuning": { "h_x": 0.8, "sieve_dimension": 3 } })");
  const fs::path boot = fresh("smoke_boot");
  r = run("--config " + (sim / "boot.json").string() + input + " --draws 4 --out " + boot.string() + " bootstrap");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json bj = read_json(boot / "bootstrap.json");
  CHECK(bj["frozen_tuning"]["asserted"] == true);
  CHECK(bj["draws"] == 4);
  CHECK(bj["config"]["bootstrap"]["draws"] == 4);
  CHECK(bj["moments"]["sd"]["note"] == "delta method");
  CHECK(line_count(boot / "bootstrap.csv") == 402);
  CHECK(crc::cli::RunConfig{}.bootstrap.draws == 499);

  write_file(sim / "mc.json", R"({ "simulation": { "n": 400 }, "montecarlo": { "use_cv": false },
                                    "tuning": { "h_x": 0.8, "sieve_dimension": 3 } })");
  const fs::path mc = fresh("smoke_mc");
  r = run("--config " + (sim / "mc.json").string() + " --spec a --reps 2 --out " + mc.string() + " montecarlo");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json mj = read_json(mc / "montecarlo.json");
  CHECK(mj["reps"].size() == 2);
  CHECK(mj["failures"] == 0);
  CHECK(line_count(mc / "montecarlo.csv") == 402);
}

TEST_CASE("regular design from a stacked CSV") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  std::ostringstream csv;
  csv.precision(17);
  csv << "id,y1,y2,x1,x2\n";
  for (int i = 0; i < 600; ++i) {
    const double x1 = z(rng), x2 = z(rng), beta = 0.5 + 0.3 * z(rng);
    const double d1 = 0.5 * z(rng), d2 = d1 + 0.5 * z(rng);
    csv << "r" << i << "," << beta * x1 + d1 << "," << beta * x2 + d2 << "," << x1 << "," << x2 << "\n";
  }
  const fs::path dir = fresh("regular");
  write_file(dir / "stacked.csv", csv.str());
  write_file(dir / "reg.json", R"({ "design": "regular", "tuning": { "h_S": 0.3, "h_X": 0.5, "sieve_dimension": 3 } })");
  const Run r = run("--config " + (dir / "reg.json").string() + " --input " + (dir / "stacked.csv").string() +
                    " --out " + dir.string() + " estimate");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const json d = read_json(dir / "density.json");
  CHECK(d["first_stage"]["m_hat_at_zero"][0] == 1.0);
  CHECK(d["tuning"]["h_S"] == 0.3);
  CHECK(run("--input " + (dir / "stacked.csv").string() + " --out " + dir.string() + " estimate").code == 2);
}

TEST_CASE("configuration template round trip") {
  const fs::path dir = fresh("template");
  REQUIRE(run("init-config").code == 0);
  const std::string text = slurp(kTmp / "last_run.log");
  write_file(dir / "template.json", text);
  const crc::cli::RunConfig c = crc::cli::load_config((dir / "template.json").string());
  CHECK(c.cv.folds == 5);
  CHECK(c.cv.repetitions == 20);
  CHECK(c.bootstrap.draws == 499);
  CHECK(c.tuning.tau_den == 1e-4);
  const crc::cli::RunConfig back = crc::cli::config_from_json(crc::cli::to_json(c));
  CHECK(crc::cli::to_json(back) == crc::cli::to_json(c));
}
