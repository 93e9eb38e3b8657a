#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "slra/io.hpp"

using namespace slra;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SLRA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Reports must be byte-identical modulo the timing block.
std::string strip_timing(std::string s) {
  return std::regex_replace(s, std::regex("\"timing\"[^}]*\\}"), "");
}

}  // namespace

TEST_CASE("gen writes deterministic instance files") {
  REQUIRE(run_cli("gen --planted --n 16 --s 2 --k 1 --seed 7 --out tmp_cli_a") == 0);
  REQUIRE(run_cli("gen --planted --n 16 --s 2 --k 1 --seed 7 --out tmp_cli_b") == 0);
  CHECK(slurp("tmp_cli_a.mtx") == slurp("tmp_cli_b.mtx"));
  CHECK(slurp("tmp_cli_a.factor") == slurp("tmp_cli_b.factor"));
  CHECK(strip_timing(slurp("tmp_cli_a.json")) == strip_timing(slurp("tmp_cli_b.json")));
  DenseMatrix a = read_matrix_text("tmp_cli_a.mtx");
  CHECK(a.rows() == 16);

  // Binary container round trip through the flag.
  REQUIRE(run_cli("gen --planted --n 16 --s 2 --k 1 --seed 7 --out tmp_cli_c --binary") == 0);
  DenseMatrix c = read_matrix_binary("tmp_cli_c.bin");
  DenseMatrix diff = a;
  diff.add_scaled(c, -1.0);
  CHECK(diff.max_abs() == 0.0);
}

TEST_CASE("randomized subcommands refuse to run without a seed") {
  CHECK(run_cli("gen --planted --n 8 --s 1 --k 1 --out tmp_cli_noseed") != 0);
  CHECK(run_cli("detect --input tmp_cli_a.mtx --s 2") != 0);
}

TEST_CASE("sparse-svd report with oracle comparison") {
  REQUIRE(run_cli("sparse-svd --input tmp_cli_a.mtx --k 1 --s 2 --eps 0.2 --seed 5 "
                  "--report tmp_cli_svd.json --oracle") == 0);
  const std::string rep = slurp("tmp_cli_svd.json");
  CHECK(rep.find("\"certified_err\"") != std::string::npos);
  CHECK(rep.find("\"exact_err\"") != std::string::npos);
  CHECK(rep.find("\"sigma_k1\"") != std::string::npos);
  CHECK(rep.find("\"schema\": 1") != std::string::npos);
}

TEST_CASE("stream subcommand with oracle and determinism") {
  DenseMatrix a(12, 12);
  a(2, 5) = 6.0;
  a(7, 3) = 0.5;
  write_stream(matrix_to_stream(a), "tmp_cli_stream.txt");
  REQUIRE(run_cli("stream --algo rel --n 12 --d 12 --s 1 --k 1 --eps 0.25 --seed 9 "
                  "--input tmp_cli_stream.txt --report tmp_cli_r1.json --oracle") == 0);
  REQUIRE(run_cli("stream --algo rel --n 12 --d 12 --s 1 --k 1 --eps 0.25 --seed 9 "
                  "--input tmp_cli_stream.txt --report tmp_cli_r2.json --oracle") == 0);
  CHECK(strip_timing(slurp("tmp_cli_r1.json")) == strip_timing(slurp("tmp_cli_r2.json")));
  const std::string rep = slurp("tmp_cli_r1.json");
  CHECK(rep.find("\"true_cost\"") != std::string::npos);
  CHECK(rep.find("\"oracle\"") != std::string::npos);
  CHECK(rep.find("\"ledger\"") != std::string::npos);

  REQUIRE(run_cli("stream --algo net --n 12 --d 12 --s 1 --k 1 --eps 0.5 --seed 9 "
                  "--input tmp_cli_stream.txt --report tmp_cli_net.json "
                  "--factor-out tmp_cli_net.factor") == 0);
  SparseRankKFactor f = read_factor("tmp_cli_net.factor");
  CHECK(!f.components.empty());
}

TEST_CASE("detect and estimate reports") {
  REQUIRE(run_cli("gen --planted --n 48 --s 2 --k 1 --lambda 14 --seed 3 --out tmp_cli_p") == 0);
  REQUIRE(run_cli("detect --input tmp_cli_p.mtx --regime small --s 2 --k 1 --seed 4 "
                  "--report tmp_cli_det.json --csv tmp_cli_det.csv") == 0);
  const std::string rep = slurp("tmp_cli_det.json");
  CHECK(rep.find("\"verdict\"") != std::string::npos);
  const std::string csv = slurp("tmp_cli_det.csv");
  CHECK(csv.find("branch,level,stat,threshold,fired,skipped") != std::string::npos);

  REQUIRE(run_cli("estimate --input tmp_cli_p.mtx --s 2 --k 1 --eps 0.5 --seed 4 "
                  "--report tmp_cli_est.json") == 0);
  const std::string est = slurp("tmp_cli_est.json");
  CHECK(est.find("\"hypothesis_ok\"") != std::string::npos);
  CHECK(est.find("\"factor\"") != std::string::npos);
}

TEST_CASE("calibrate reports an empirical false-positive rate") {
  REQUIRE(run_cli("calibrate --regime small --n 48 --s 2 --k 1 --seeds 8 --seed 5 --jobs 2 "
                  "--report tmp_cli_cal.json") == 0);
  const std::string rep = slurp("tmp_cli_cal.json");
  CHECK(rep.find("\"empirical_fpr\"") != std::string::npos);
  std::remove("tmp_cli_cal.json");
}

TEST_CASE("bench emits a measurement csv") {
  REQUIRE(run_cli("bench --algo add --n 32 --d 32 --eps 0.3 --s-list 1,2 --k-list 1,2 "
                  "--csv tmp_cli_bench.csv") == 0);
  const std::string csv = slurp("tmp_cli_bench.csv");
  CHECK(csv.find("algo,n,d,eps,s,k,total_measurements") != std::string::npos);
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 5);
}

TEST_CASE("cleanup") {
  for (const char* f :
       {"tmp_cli_a.mtx", "tmp_cli_a.factor", "tmp_cli_a.json", "tmp_cli_b.mtx", "tmp_cli_b.factor",
        "tmp_cli_b.json", "tmp_cli_c.bin", "tmp_cli_c.factor", "tmp_cli_c.json",
        "tmp_cli_svd.json", "tmp_cli_stream.txt", "tmp_cli_r1.json", "tmp_cli_r2.json",
        "tmp_cli_net.json", "tmp_cli_net.factor", "tmp_cli_p.mtx", "tmp_cli_p.factor",
        "tmp_cli_p.json", "tmp_cli_det.json", "tmp_cli_det.csv", "tmp_cli_est.json",
        "tmp_cli_bench.csv"})
    std::remove(f);
  CHECK(true);
}
