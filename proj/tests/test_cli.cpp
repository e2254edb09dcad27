#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "protophon/lp_format.hpp"

// Drives the installed binary end to end. PROTOPHON_CLI_PATH is injected by
// the build so the tests always exercise the freshly linked tool.

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "protophon_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::path out = scratch / "stdout.txt";
  fs::path err = scratch / "stderr.txt";
  std::string cmd = std::string(PROTOPHON_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string report_value(const std::string& report, const std::string& key) {
  std::size_t at = report.find(key + "=");
  REQUIRE(at != std::string::npos);
  std::size_t end = report.find('\n', at);
  return report.substr(at + key.size() + 1, end - at - key.size() - 1);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("zero-noise synthesis reconstructs its own truth") {
  fs::path dir = fresh_dir("cli_zero_noise");
  std::string ds = (dir / "ds").string();
  std::string rec = (dir / "rec").string();

  RunResult r = run_cli("synth --out " + ds +
                            " --seed 1 --m-min 5 --m-max 5 --n-min 3 "
                            "--n-max 4 --num-varieties 3 --p-fq 0 --p-dia 0 "
                            "--p-char 0",
                        dir);
  REQUIRE(r.code == 0);
  r = run_cli("reconstruct --data " + ds + " --out " + rec, dir);
  REQUIRE(r.code == 0);
  CHECK(report_value(r.out, "equal_rate") == "1");
  CHECK(report_value(r.out, "status") == "optimal");

  std::string ev = (dir / "ev").string();
  r = run_cli("eval --recon " + rec + "/reconstruction.tsv --data " + ds +
                  " --out " + ev,
              dir);
  REQUIRE(r.code == 0);
  CHECK(report_value(r.out, "equal_rate") == "1");
  CHECK(report_value(r.out, "avg_l1") == "0");
}

TEST_CASE("pair weight changes the objective, manifests restore both") {
  fs::path dir = fresh_dir("cli_lambda");
  std::string ds = (dir / "ds").string();
  RunResult r = run_cli("synth --out " + ds +
                            " --seed 11 --m-min 4 --m-max 4 --n-min 2 "
                            "--n-max 3 --num-varieties 2 --p-fq 0.3 "
                            "--p-dia 0.3 --p-char 0.1",
                        dir);
  REQUIRE(r.code == 0);

  std::string a = (dir / "a").string();
  std::string b = (dir / "b").string();
  RunResult ra =
      run_cli("reconstruct --data " + ds + " --out " + a + " --lambda-fq 0",
              dir);
  RunResult rb =
      run_cli("reconstruct --data " + ds + " --out " + b + " --lambda-fq 0.5",
              dir);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(report_value(ra.out, "objective") != report_value(rb.out, "objective"));

  for (const std::string& run : {a, b}) {
    std::string again = run + "_again";
    RunResult rr = run_cli(
        "reconstruct --from-manifest " + run + "/manifest.json --out " + again,
        dir);
    REQUIRE(rr.code == 0);
    CHECK(slurp(run + "/reconstruction.tsv") ==
          slurp(again + "/reconstruction.tsv"));
    CHECK(slurp(run + "/report.txt") == slurp(again + "/report.txt"));
  }
}

TEST_CASE("held-out runs repeat exactly under one seed") {
  fs::path dir = fresh_dir("cli_heldout");
  std::string ds = (dir / "ds").string();
  RunResult r = run_cli("synth --out " + ds +
                            " --seed 3 --m-min 5 --m-max 5 --n-min 4 "
                            "--n-max 5 --num-varieties 3 --p-fq 0.1 "
                            "--p-dia 0.2 --p-char 0.1",
                        dir);
  REQUIRE(r.code == 0);

  std::string h1 = (dir / "h1").string();
  std::string h2 = (dir / "h2").string();
  RunResult r1 = run_cli("heldout --data " + ds + " --out " + h1 +
                             " --fraction 0.3 --split-seed 7",
                         dir);
  RunResult r2 = run_cli("heldout --data " + ds + " --out " + h2 +
                             " --fraction 0.3 --split-seed 7",
                         dir);
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(slurp(h1 + "/report.txt") == slurp(h2 + "/report.txt"));
  CHECK(report_value(r1.out, "held_out_pairs") ==
        report_value(r2.out, "held_out_pairs"));
}

TEST_CASE("generation reruns from its manifest byte for byte") {
  fs::path dir = fresh_dir("cli_synth_rerun");
  std::string d1 = (dir / "d1").string();
  std::string d2 = (dir / "d2").string();
  RunResult r = run_cli("synth --out " + d1 +
                            " --seed 42 --m-min 6 --m-max 8 --n-min 3 "
                            "--n-max 6 --num-varieties 4 --p-fq 0.2 "
                            "--p-dia 0.3 --p-char 0.1",
                        dir);
  REQUIRE(r.code == 0);
  r = run_cli("synth --from-manifest " + d1 + "/manifest.json --out " + d2,
              dir);
  REQUIRE(r.code == 0);
  for (const auto& de : fs::directory_iterator(d1)) {
    std::string name = de.path().filename().string();
    if (name == "manifest.json") continue;  // carries wall time
    CHECK(slurp(d1 + "/" + name) == slurp(d2 + "/" + name));
  }
}

TEST_CASE("clustering and geometry read what reconstruct wrote") {
  fs::path dir = fresh_dir("cli_downstream");
  std::string ds = (dir / "ds").string();
  std::string rec = (dir / "rec").string();
  RunResult r = run_cli("synth --out " + ds +
                            " --seed 9 --m-min 4 --m-max 4 --n-min 3 "
                            "--n-max 4 --num-varieties 3 --p-fq 0 --p-dia 0 "
                            "--p-char 0",
                        dir);
  REQUIRE(r.code == 0);
  r = run_cli("reconstruct --data " + ds + " --out " + rec, dir);
  REQUIRE(r.code == 0);

  std::string cl = (dir / "cl").string();
  r = run_cli("cluster --recon " + rec + "/reconstruction.tsv --data " + ds +
                  " --out " + cl + " --restarts 4",
              dir);
  REQUIRE(r.code == 0);
  CHECK(report_value(r.out, "ami") == "1");  // perfect recovery, zero noise
  CHECK(report_value(r.out, "k") == "4");    // derived from the categories

  std::string ge = (dir / "ge").string();
  r = run_cli("geometry --data " + ds + " --out " + ge, dir);
  REQUIRE(r.code == 0);
  CHECK(report_value(r.out, "p_dia_lower_bound") == "0");  // identical readings
}

TEST_CASE("exported models parse back with the same shape") {
  fs::path dir = fresh_dir("cli_export");
  std::string ds = (dir / "ds").string();
  std::string xl = (dir / "xl").string();
  RunResult r = run_cli("synth --out " + ds +
                            " --seed 2 --m-min 4 --m-max 4 --n-min 3 "
                            "--n-max 3 --num-varieties 2 --p-fq 0.2 "
                            "--p-dia 0.2 --p-char 0.1",
                        dir);
  REQUIRE(r.code == 0);
  r = run_cli("export-lp --data " + ds + " --out " + xl, dir);
  REQUIRE(r.code == 0);

  protophon::ParsedLp lp = protophon::parse_lp(slurp(xl + "/model.lp"));
  CHECK(std::to_string(lp.problem.num_cols()) ==
        report_value(r.out, "variables"));
  CHECK(std::to_string(lp.binary_cols.size()) ==
        report_value(r.out, "binaries"));
}

TEST_CASE("validation failures exit with code 2") {
  fs::path dir = fresh_dir("cli_errors");
  RunResult r =
      run_cli("reconstruct --data " + (dir / "missing").string() + " --out " +
                  (dir / "o").string(),
              dir);
  CHECK(r.code == 2);

  r = run_cli("synth --out " + (dir / "o").string() + " --p-fq 1.5", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("p_fq") != std::string::npos);

  // an unparseable reading names the symbol and the location
  fs::path bad = dir / "bad_ds";
  fs::create_directories(bad);
  std::ofstream(bad / "entries.tsv") << "e1\tx\n";
  std::ofstream(bad / "variety_a.tsv") << "e1\tʘq!\n";
  r = run_cli("reconstruct --data " + bad.string() + " --out " +
                  (dir / "o2").string(),
              dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("variety_a.tsv:1") != std::string::npos);
  CHECK(r.err.find("ʘq!") != std::string::npos);

  r = run_cli("definitely-not-a-subcommand", dir);
  CHECK(r.code == 2);
}

}  // TEST_SUITE
