#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "casimir/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using casimir::cli::run;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "casimir_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("compute writes a result document") {
  const auto r = call({"compute", "--radius", "3e-6", "--gap", "1e-6", "--temperature", "300",
                       "--material", "perfect", "--matsubara-tol", "1e-6", "--m-tol", "1e-6"});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["force_N"].get<double>() < 0.0);
  CHECK(j["correction"].get<double>() > 0.0);
  CHECK(j["free_energy_J"].get<double>() < 0.0);
  CHECK(j["spec"]["R_m"].get<double>() == 3e-6);
  CHECK(j["spec"]["ell_dim"].get<int>() == 20);
  CHECK(j["diagnostics"]["ell_dim"].get<int>() == 20);
  CHECK(j["constants"]["hbar_J_s"].get<double>() == 1.054571817e-34);
  CHECK(j["ledger"].size() > 0);
}

TEST_CASE("automatic truncation follows the aspect ratio") {
  const auto r = call({"compute", "--radius", "30e-6", "--gap", "1e-6", "--temperature", "300",
                       "--ldim", "auto", "--quantity", "free-energy", "--no-ledger",
                       "--m-tol", "1e-4", "--matsubara-tol", "1e-4"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["diagnostics"]["ell_dim"].get<int>() == 150);
  CHECK(j["force_N"].is_null());
  CHECK_FALSE(j.contains("ledger"));
}

TEST_CASE("configuration errors") {
  const fs::path bad = scratch("bad.dat");
  {
    std::ofstream f(bad);
    f << "# xi eps\n1e14 100\n1e15 oops\n";
  }
  auto r = call({"compute", "--radius", "1e-6", "--gap", "1e-6", "--material", "file:" + bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.out.empty());

  CHECK(call({"compute", "--radius", "1e-6"}).code == 2);
  CHECK(call({"compute", "--radius", "1e-6", "--gap", "-1"}).code == 2);
  CHECK(call({"compute", "--radius", "1e-6", "--gap", "1e-6", "--ldim", "zero"}).code == 2);
  CHECK(call({"compute", "--radius", "1e-6", "--gap", "1e-6", "--material", "unobtainium"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"compute", "--radius", "1e-6", "--gap", "1e-6", "--material", "file:/no/such/file"}).code == 4);
  CHECK(call({"compute", "--help"}).code == 0);
}

TEST_CASE("config file values sit below command-line flags") {
  const fs::path cfg = scratch("job.cfg");
  {
    std::ofstream f(cfg);
    f << "# geometry\nradius = 2e-6\ngap = 1e-6\ntemperature = 300\nldim = 12\n"
         "quantity = free-energy\n";
  }
  auto r = call({"compute", "--config", cfg.string(), "--ldim", "14", "--no-ledger"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["spec"]["R_m"].get<double>() == 2e-6);
  CHECK(j["spec"]["ell_dim"].get<int>() == 14);

  {
    std::ofstream f(cfg);
    f << "radius = 2e-6\ngap = 1e-6\ncolour = blue\n";
  }
  r = call({"compute", "--config", cfg.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);
  CHECK(call({"compute", "--config", scratch("missing.cfg").string()}).code == 4);
}

TEST_CASE("sweep grid with a failing cell") {
  const auto r = call({"sweep", "--radii", "2e-6,3e-6,4e-6", "--gaps", "1e-6,2e-6,-1",
                       "--xi-tol", "1e-6"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 1 + 9);
  CHECK(r.out.rfind("R_m,L_m,T_K,correction,free_energy_J,force_N,f_pfa_N", 0) == 0);
  int failed = 0;
  std::istringstream s(r.out);
  std::string line;
  while (std::getline(s, line)) failed += line.find(",error: ") != std::string::npos;
  CHECK(failed == 3);
  CHECK(r.err.find("failed") != std::string::npos);
}

TEST_CASE("sweep level sets") {
  const fs::path ls = scratch("levels.csv");
  const auto r = call({"sweep", "--radii", "4e-6", "--gaps", "0.5e-6,1e-6,2e-6", "--xi-tol", "1e-6",
                       "--level-sets", ls.string(), "--targets", "0.2"});
  REQUIRE(r.code == 0);
  std::ifstream in(ls);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str().rfind("target,R_m,L_m\n", 0) == 0);
  CHECK(lines(buf.str()) == 2);
}

TEST_CASE("bench table") {
  auto r = call({"bench", "--dims", "64,128", "--repeats", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("N,t_cholesky_s,t_hodlr_s,logdet_cholesky,logdet_hodlr\n", 0) == 0);
  CHECK(r.out.find("# fit exponent") != std::string::npos);
  r = call({"bench", "--dims", "64", "--repeats", "1"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 2);
  CHECK(r.out.find("fit") == std::string::npos);
}

TEST_CASE("matrix dumps") {
  auto r = call({"dump-matrix", "--radius", "10e-6", "--gap", "1e-6", "--m", "1"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 1 + 4 * 50 * 50);
  r = call({"dump-matrix", "--radius", "10e-6", "--gap", "1e-6", "--unsymmetrized", "--ldim", "8"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("row,col,pair,log10_abs_value\n", 0) == 0);
  r = call({"dump-matrix", "--radius", "10e-6", "--gap", "1e-6", "--ldim", "5", "--material",
            "constant:1"});
  REQUIRE(r.code == 0);
  std::istringstream s(r.out);
  std::string line;
  std::getline(s, line);
  while (std::getline(s, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");
}

TEST_CASE("output file") {
  const fs::path out = scratch("result.json");
  const auto r = call({"compute", "--radius", "2e-6", "--gap", "1e-6", "--temperature", "300",
                       "--quantity", "free-energy", "-o", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::file_size(out) > 100);
  CHECK(call({"compute", "--radius", "2e-6", "--gap", "1e-6", "-o", "/no/such/dir/x.json"}).code == 4);
}
