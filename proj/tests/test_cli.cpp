#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "jpen/io.hpp"

#ifndef JPEN_CLI_PATH
#error "JPEN_CLI_PATH must point at the jpen binary"
#endif

using jpen::read_text;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d("cli_scratch");
    fs::create_directories(d);
    return d;
  }();
  return dir / name;
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch("stdout" + std::to_string(counter));
  const fs::path err = scratch("stderr" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string("\"") + JPEN_CLI_PATH + "\" " + args +
                          " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
#ifdef _WIN32
  const int code = status;
#else
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
  return RunResult{code, read_text(out), read_text(err)};
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return read_text(a) == read_text(b);
}

std::string pfx(const std::string& name) { return scratch(name).string(); }

}  // namespace

TEST_CASE("bad invocations exit with code 2") {
  REQUIRE(run_cli("").code == 2);
  REQUIRE(run_cli("frobnicate").code == 2);
  REQUIRE(run_cli("simulate --p 5 --n 10 --out-prefix x").code == 2);
  REQUIRE(run_cli("--help").code == 0);
}

TEST_CASE("simulate writes a reproducible bundle") {
  const std::string base = "simulate --family toeplitz --p 6 --n 20 --seed 3";
  REQUIRE(run_cli(base + " --out-prefix " + pfx("sim_a")).code == 0);
  REQUIRE(run_cli(base + " --out-prefix " + pfx("sim_b")).code == 0);
  for (const char* suffix : {"_sigma.csv", "_omega.csv", "_pattern.csv",
                             "_data.csv", "_truth.json"}) {
    REQUIRE(fs::exists(scratch("sim_a" + std::string(suffix))));
    REQUIRE(same_bytes(scratch("sim_a" + std::string(suffix)),
                       scratch("sim_b" + std::string(suffix))));
  }
  const std::string truth = read_text(scratch("sim_a_truth.json"));
  REQUIRE(truth.find("\"family\": \"toeplitz\"") != std::string::npos);
  REQUIRE(truth.find("\"zeroPairs\"") != std::string::npos);

  // A different seed must change the data.
  REQUIRE(run_cli("simulate --family toeplitz --p 6 --n 20 --seed 4 "
                  "--out-prefix " + pfx("sim_c")).code == 0);
  REQUIRE_FALSE(same_bytes(scratch("sim_a_data.csv"), scratch("sim_c_data.csv")));
}

TEST_CASE("simulate rejects impossible models") {
  REQUIRE(run_cli("simulate --family block --p 10 --n 20 --blocks 5 "
                  "--out-prefix " + pfx("bad1")).code == 2);
  REQUIRE(run_cli("simulate --family banded --p 10 --n 20 --out-prefix " +
                  pfx("bad2")).code == 2);
  REQUIRE(run_cli("simulate --family hub --p 10 --n 20 --groups 11 "
                  "--out-prefix " + pfx("bad3")).code == 2);
}

TEST_CASE("estimate with explicit penalties") {
  REQUIRE(run_cli("simulate --family hub --p 8 --n 40 --groups 4 --seed 9 "
                  "--out-prefix " + pfx("est_in")).code == 0);
  const std::string data = pfx("est_in") + "_data.csv";

  const std::string fit = "estimate --input " + data +
                          " --variant correlation --lambda 0.2 --gamma 0.5 "
                          "--out-prefix ";
  REQUIRE(run_cli(fit + pfx("est_a")).code == 0);
  REQUIRE(run_cli(fit + pfx("est_b")).code == 0);
  REQUIRE(same_bytes(scratch("est_a_estimate.csv"), scratch("est_b_estimate.csv")));
  REQUIRE(same_bytes(scratch("est_a_estimate.json"), scratch("est_b_estimate.json")));
  const std::string meta = read_text(scratch("est_a_estimate.json"));
  REQUIRE(meta.find("\"admissible\": true") != std::string::npos);
  REQUIRE(meta.find("\"offDiagZeroPairs\"") != std::string::npos);

  // Covariance-matrix input path.
  REQUIRE(run_cli("estimate --input " + pfx("est_in") + "_sigma.csv" +
                  " --input-kind covariance --variant direct --lambda 0.1 "
                  "--gamma 0.3 --out-prefix " + pfx("est_cov")).code == 0);

  // Weighted variant records its weights.
  REQUIRE(run_cli("estimate --input " + data +
                  " --variant weighted --lambda 0.2 --gamma 0.5 "
                  "--out-prefix " + pfx("est_w")).code == 0);
  REQUIRE(read_text(scratch("est_w_estimate.json")).find("\"weights\"") !=
          std::string::npos);
}

TEST_CASE("estimate refuses an inadmissible pair with an actionable message") {
  REQUIRE(run_cli("simulate --family toeplitz --p 6 --n 30 --seed 2 "
                  "--out-prefix " + pfx("adm_in")).code == 0);
  const RunResult r = run_cli("estimate --input " + pfx("adm_in") +
                              "_data.csv --variant correlation --lambda 50 "
                              "--gamma 0.01 --out-prefix " + pfx("adm_out"));
  REQUIRE(r.code == 2);
  REQUIRE(r.err.find("lambda_max") != std::string::npos);
  REQUIRE(r.err.find("boundary") != std::string::npos);
}

TEST_CASE("estimate can tune itself and tune reports the surface") {
  REQUIRE(run_cli("simulate --family hub --p 8 --n 40 --groups 4 --seed 5 "
                  "--out-prefix " + pfx("tune_in")).code == 0);
  const std::string data = pfx("tune_in") + "_data.csv";

  REQUIRE(run_cli("estimate --input " + data +
                  " --variant correlation --tune --grid-points 4 --seed 1 "
                  "--out-prefix " + pfx("tuned")).code == 0);
  const std::string meta = read_text(scratch("tuned_estimate.json"));
  REQUIRE(meta.find("\"cv\"") != std::string::npos);
  REQUIRE(meta.find("\"tuned\": true") != std::string::npos);

  // Tuning needs rows, not a covariance matrix.
  REQUIRE(run_cli("estimate --input " + pfx("tune_in") + "_sigma.csv" +
                  " --input-kind covariance --variant correlation --tune "
                  "--out-prefix " + pfx("tuned_bad")).code == 2);

  REQUIRE(run_cli("tune --input " + data +
                  " --variant correlation --grid-points 4 --seed 1 "
                  "--out-prefix " + pfx("cvout")).code == 0);
  const std::string cv = read_text(scratch("cvout_cv.json"));
  REQUIRE(cv.find("\"selectedLambda\"") != std::string::npos);
  REQUIRE(cv.find("\"lossSurface\"") != std::string::npos);
  REQUIRE(cv.find("\"admissibleMask\"") != std::string::npos);
}

TEST_CASE("benchmark writes per-replicate rows and a summary") {
  const std::string cmd =
      "benchmark --family hub --p 12 --n 24 --groups 4 --replicates 2 "
      "--methods jpen-correlation,baseline-soft --grid-points 4 --seed 6 "
      "--out-prefix ";
  REQUIRE(run_cli(cmd + pfx("bench_a")).code == 0);
  REQUIRE(run_cli(cmd + pfx("bench_b")).code == 0);
  REQUIRE(same_bytes(scratch("bench_a_replicates.csv"),
                     scratch("bench_b_replicates.csv")));
  REQUIRE(same_bytes(scratch("bench_a_summary.json"),
                     scratch("bench_b_summary.json")));

  const std::string csv = read_text(scratch("bench_a_replicates.csv"));
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  REQUIRE(lines == 1 + 2 * 2);  // header + methods x replicates
  REQUIRE(csv.rfind("method,family,p,n,replicate,seed,lambda,gamma,are,", 0) == 0);
  const std::string summary = read_text(scratch("bench_a_summary.json"));
  REQUIRE(summary.find("\"jpen-correlation\"") != std::string::npos);
  REQUIRE(summary.find("\"cell\"") != std::string::npos);
}

TEST_CASE("classify runs a repeated stratified benchmark") {
  // Hand-rolled separable data: column 0 carries the class.
  std::string rows;
  for (int i = 0; i < 12; ++i) {
    const double a = 0.1 * i;
    rows += jpen::format_double(3.0 + a) + "," + jpen::format_double(1.0 - a) +
            ",0\n";
    rows += jpen::format_double(-3.0 - a) + "," + jpen::format_double(a) +
            ",1\n";
  }
  jpen::atomic_write_text(scratch("cls.csv"), rows);

  const std::string cmd = "classify --input " + pfx("cls.csv") +
                          " --train0 5 --train1 5 --repeats 3 --seed 4 "
                          "--method diagonal --out-prefix ";
  REQUIRE(run_cli(cmd + pfx("cls_a")).code == 0);
  REQUIRE(run_cli(cmd + pfx("cls_b")).code == 0);
  REQUIRE(same_bytes(scratch("cls_a_classification.json"),
                     scratch("cls_b_classification.json")));
  const std::string meta = read_text(scratch("cls_a_classification.json"));
  REQUIRE(meta.find("\"meanError\": 0.0") != std::string::npos);
  REQUIRE(meta.find("\"perSplit\"") != std::string::npos);

  REQUIRE(run_cli("classify --input " + pfx("cls.csv") +
                  " --train0 5 --train1 5 --repeats 2 --method identity "
                  "--lambda 0.1 --out-prefix " + pfx("cls_c")).code == 2);
}

TEST_CASE("spectrum stacks eigenvalues in long form") {
  REQUIRE(run_cli("simulate --family toeplitz --p 5 --n 10 --seed 1 "
                  "--out-prefix " + pfx("spec_in")).code == 0);
  REQUIRE(run_cli("spectrum --input " + pfx("spec_in") + "_sigma.csv" +
                  " --input " + pfx("spec_in") + "_omega.csv" + " --output " +
                  pfx("spec.csv")).code == 0);
  const std::string csv = read_text(scratch("spec.csv"));
  REQUIRE(csv.rfind("source,index,eigenvalue\n", 0) == 0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  REQUIRE(lines == 1 + 2 * 5);
  REQUIRE(csv.find("spec_in_sigma.csv,0,") != std::string::npos);

  REQUIRE(run_cli("spectrum --input " + pfx("nonexistent.csv") + " --output " +
                  pfx("spec2.csv")).code == 2);
}

TEST_CASE("malformed inputs exit with code 2") {
  jpen::atomic_write_text(scratch("ragged.csv"), "1,2,3\n4,5\n");
  REQUIRE(run_cli("estimate --input " + pfx("ragged.csv") +
                  " --lambda 0.1 --gamma 0.1 --out-prefix " +
                  pfx("ragged_out")).code == 2);
  REQUIRE(run_cli("estimate --input " + pfx("does_not_exist.csv") +
                  " --lambda 0.1 --gamma 0.1 --out-prefix " +
                  pfx("missing_out")).code == 2);
}

TEST_CASE("timing file is opt-in and leaves primary outputs unchanged") {
  REQUIRE(run_cli("simulate --family toeplitz --p 5 --n 16 --seed 8 "
                  "--out-prefix " + pfx("time_in")).code == 0);
  const std::string fit = "estimate --input " + pfx("time_in") +
                          "_data.csv --variant correlation --lambda 0.2 "
                          "--gamma 0.4 --out-prefix ";
  REQUIRE(run_cli(fit + pfx("time_a")).code == 0);
  REQUIRE(run_cli("--timing-file " + pfx("timing.csv") + " " + fit +
                  pfx("time_b")).code == 0);
  REQUIRE(same_bytes(scratch("time_a_estimate.csv"),
                     scratch("time_b_estimate.csv")));
  REQUIRE(same_bytes(scratch("time_a_estimate.json"),
                     scratch("time_b_estimate.json")));
  const std::string timing = read_text(scratch("timing.csv"));
  REQUIRE(timing.rfind("label,milliseconds\n", 0) == 0);
  REQUIRE(timing.find("estimate,") != std::string::npos);
}
