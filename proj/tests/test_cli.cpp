// End-to-end exercises of the command-line tool through a subprocess: exit
// codes, the machine-readable error envelope, emitted files, and the
// byte-identity of payloads across worker counts.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef _WIN32
#include <sys/wait.h>
#endif

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string cli_path() {
  if (const char* p = std::getenv("RUINLAB_CLI_PATH")) return p;
#ifdef RUINLAB_CLI_PATH
  return RUINLAB_CLI_PATH;
#else
  FAIL("RUINLAB_CLI_PATH is not set and no build-time default exists");
  return {};
#endif
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ruinlab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(f.good());
  f << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

CliRun run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = cli_path() + " " + args + " 1>" + out.string() +
                          " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  CliRun r;
#ifndef _WIN32
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#else
  r.exit_code = raw;
#endif
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string cl1_config(const fs::path& out_dir, int n_paths, int horizon) {
  std::ostringstream j;
  j << "{\n"
    << "  \"model\": {\n"
    << "    \"mode\": \"cl_network\",\n"
    << "    \"d\": 1,\n"
    << "    \"premium_rates\": [1.25],\n"
    << "    \"lambdas\": [1.0],\n"
    << "    \"claims\": [{\"kind\": \"exponential\", \"mean\": 1.0}]\n"
    << "  },\n"
    << "  \"horizon\": " << horizon << ",\n"
    << "  \"n_paths\": " << n_paths << ",\n"
    << "  \"seed\": 3,\n"
    << "  \"kmax\": 6,\n"
    << "  \"output\": {\"dir\": \"" << out_dir.string()
    << "\", \"formats\": [\"json\", \"csv\"]}\n"
    << "}\n";
  return j.str();
}

}  // namespace

TEST_CASE("help exits cleanly") {
  const fs::path dir = scratch_dir("help");
  const CliRun r = run_cli("--help", dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("validate") != std::string::npos);
  REQUIRE(r.out.find("estimate") != std::string::npos);
}

TEST_CASE("validate prints the hypothesis report") {
  const fs::path dir = scratch_dir("validate_good");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, cl1_config(dir / "out", 100, 16));
  const CliRun r = run_cli("validate " + cfg.string(), dir);
  REQUIRE(r.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.contains("hypotheses"));
  REQUIRE(doc.contains("matrix"));
  REQUIRE(doc["config"]["model"]["mode"] == "cl_network");
}

TEST_CASE("validate rejects unknown keys with the error envelope") {
  const fs::path dir = scratch_dir("validate_unknown");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, "{\"model\": {\"mode\": \"plus_minus_walk\", \"q\": 0.25},"
                  " \"bogus\": 1}");
  const CliRun r = run_cli("validate " + cfg.string(), dir);
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.err.find("InvalidConfig") != std::string::npos);
  REQUIRE(r.err.find("bogus") != std::string::npos);
  const nlohmann::json env = nlohmann::json::parse(r.err);
  REQUIRE(env["error"]["code"] == "InvalidConfig");
}

TEST_CASE("validate rejects a routing matrix at the stability boundary") {
  const fs::path dir = scratch_dir("validate_spectral");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"matrix\": {\"P\": [[0.0, 1.0], [1.0, 0.0]]},\n"
             " \"model\": {\"mode\": \"cl_network\", \"d\": 2,\n"
             "  \"premium_rates\": [1.5, 1.5], \"lambdas\": [1.0, 1.0],\n"
             "  \"claims\": [{\"kind\": \"exponential\", \"mean\": 1.0},\n"
             "              {\"kind\": \"exponential\", \"mean\": 1.0}]}}");
  const CliRun r = run_cli("validate " + cfg.string(), dir);
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.err.find("SpectralRadiusNotLessThanOne") != std::string::npos);
}

TEST_CASE("strict validation enforces positive safety loadings") {
  const fs::path dir = scratch_dir("validate_strict");
  const fs::path cfg = dir / "config.json";
  write_file(cfg,
             "{\"model\": {\"mode\": \"cl_network\", \"d\": 1,\n"
             "  \"premium_rates\": [0.95], \"lambdas\": [1.0],\n"
             "  \"claims\": [{\"kind\": \"exponential\", \"mean\": 1.0}]}}");
  const CliRun relaxed = run_cli("validate " + cfg.string(), dir);
  REQUIRE(relaxed.exit_code == 0);
  const CliRun strict = run_cli("validate --strict " + cfg.string(), dir);
  REQUIRE(strict.exit_code == 1);
  REQUIRE(strict.err.find("NetProfitViolated") != std::string::npos);
}

TEST_CASE("simulate-path writes both walks and the verdict") {
  const fs::path dir = scratch_dir("simulate");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, "{\"model\": {\"mode\": \"plus_minus_walk\", \"q\": 0.25}}");
  const fs::path dump = dir / "sim";
  const CliRun r = run_cli("simulate-path " + cfg.string() +
                               " --n 32 --seed 11 --dump " + dump.string(),
                           dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(dump / "primal_path.csv"));
  REQUIRE(fs::exists(dump / "dual_path.csv"));
  REQUIRE(fs::exists(dump / "duality_verdict.json"));
  REQUIRE(fs::exists(dump / "run_metadata.json"));
  const nlohmann::json doc =
      nlohmann::json::parse(read_file(dump / "duality_verdict.json"));
  REQUIRE(doc.contains("verdict"));
  REQUIRE(doc["horizon"] == 32);
  // The primal CSV has a header plus one row per step, dimension 1.
  const std::string csv = read_file(dump / "primal_path.csv");
  REQUIRE(csv.rfind("k,u_1,z_1,dy_1,y_1\n", 0) == 0);
}

TEST_CASE("duality-check reports zero failures") {
  const fs::path dir = scratch_dir("duality");
  const fs::path out_dir = dir / "out";
  const fs::path cfg = dir / "config.json";
  write_file(cfg, cl1_config(out_dir, 100, 16));
  const CliRun r =
      run_cli("duality-check " + cfg.string() + " --instances 400", dir);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("failures: 0") != std::string::npos);
  REQUIRE(fs::exists(out_dir / "duality_check.json"));

  const CliRun empty =
      run_cli("duality-check " + cfg.string() + " --instances 0", dir);
  REQUIRE(empty.exit_code == 0);
  REQUIRE(empty.out.find("instances: 0") != std::string::npos);
}

TEST_CASE("estimate emits a parsable claims report") {
  const fs::path dir = scratch_dir("estimate_direct");
  const fs::path out_dir = dir / "out";
  const fs::path cfg = dir / "config.json";
  write_file(cfg, cl1_config(out_dir, 1500, 48));
  const CliRun r =
      run_cli("estimate " + cfg.string() + " --method direct", dir);
  REQUIRE(r.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.contains("claims"));
  REQUIRE(doc["estimates"].contains("direct"));
  REQUIRE(doc["estimates"].contains("oracle_ruin"));
  REQUIRE(fs::exists(out_dir / "estimate.json"));
  const nlohmann::json payload =
      nlohmann::json::parse(read_file(out_dir / "estimate.json"));
  REQUIRE(payload["method"] == "direct");
}

TEST_CASE("estimate payloads are byte-identical across worker counts") {
  const fs::path dir = scratch_dir("estimate_workers");
  const fs::path out_dir = dir / "out";
  const fs::path cfg = dir / "config.json";
  write_file(cfg, cl1_config(out_dir, 1500, 48));
  const std::string args =
      "estimate " + cfg.string() + " --method all --sweep 0:2:1";

  const CliRun one = run_cli(args + " --workers 1", dir);
  REQUIRE(one.exit_code == 0);
  const std::string estimate_1 = read_file(out_dir / "estimate.json");
  const std::string per_horizon_1 = read_file(out_dir / "per_horizon.csv");
  const std::string sigma_1 = read_file(out_dir / "sigma_table.csv");
  const std::string sweep_1 = read_file(out_dir / "sweep.csv");

  const CliRun three = run_cli(args + " --workers 3", dir);
  REQUIRE(three.exit_code == 0);
  REQUIRE(read_file(out_dir / "estimate.json") == estimate_1);
  REQUIRE(read_file(out_dir / "per_horizon.csv") == per_horizon_1);
  REQUIRE(read_file(out_dir / "sigma_table.csv") == sigma_1);
  REQUIRE(read_file(out_dir / "sweep.csv") == sweep_1);
  REQUIRE(three.out == one.out);

  // A repeat with the original worker count reproduces the same bytes again.
  const CliRun again = run_cli(args + " --workers 1", dir);
  REQUIRE(again.exit_code == 0);
  REQUIRE(read_file(out_dir / "estimate.json") == estimate_1);
}

TEST_CASE("missing and malformed configs fail with exit code 1") {
  const fs::path dir = scratch_dir("bad_configs");
  const CliRun missing = run_cli("validate " + (dir / "nope.json").string(),
                                 dir);
  REQUIRE(missing.exit_code == 1);
  REQUIRE(missing.err.find("InvalidConfig") != std::string::npos);

  const fs::path cfg = dir / "malformed.json";
  write_file(cfg, "{ this is not json");
  const CliRun malformed = run_cli("validate " + cfg.string(), dir);
  REQUIRE(malformed.exit_code == 1);
  REQUIRE(malformed.err.find("InvalidConfig") != std::string::npos);
}

TEST_CASE("estimate rejects bad method and sweep arguments") {
  const fs::path dir = scratch_dir("bad_args");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, cl1_config(dir / "out", 100, 16));
  const CliRun method =
      run_cli("estimate " + cfg.string() + " --method bogus", dir);
  REQUIRE(method.exit_code == 1);
  REQUIRE(method.err.find("InvalidConfig") != std::string::npos);

  const CliRun sweep =
      run_cli("estimate " + cfg.string() + " --sweep 5:1:1", dir);
  REQUIRE(sweep.exit_code == 1);
  REQUIRE(sweep.err.find("InvalidConfig") != std::string::npos);
}
