// Black-box checks of the command-line front end: exit codes, file
// formats, config-file defaults. Takes the CLI binary path as argv[1].
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "smci/io.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "  [ok] " << what << "\n";
  } else {
    std::cout << "  [FAIL] " << what << "\n";
    ++g_failures;
  }
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

RunResult run(const std::string& cli, const std::string& args,
              const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = cli + " " + args + " >" + out.string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: smci_test_cli <path-to-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path dir = fs::temp_directory_path() / "smci_cli_tests";
  fs::create_directories(dir);
  const std::string coarse = " --delta-step 0.01 --nuisance-points 101";

  // Usage errors exit with 64.
  expect(run(cli, "", dir).exit_code == 64, "no subcommand exits 64");
  expect(run(cli, "table --m 1", dir).exit_code == 64,
         "missing required flag exits 64");
  expect(run(cli, "table --n 2 --m 1 --ordering nope" + coarse, dir)
                 .exit_code == 64,
         "unknown ordering exits 64");
  expect(run(cli, "frobnicate", dir).exit_code == 64,
         "unknown subcommand exits 64");
  expect(run(cli, "--help", dir).exit_code == 0, "help exits 0");
  expect(run(cli, "poisson --x -1 --y 2", dir).exit_code == 64,
         "negative count exits 64");
  expect(run(cli, "table --n 2 --m 1 --alpha 1.5" + coarse, dir).exit_code ==
             64,
         "alpha out of range exits 64");

  // Table to stdout, CSV and JSON round-trips.
  {
    const auto r = run(cli, "table --n 2 --m 1 --alpha 0.1 --format csv" +
                                coarse, dir);
    expect(r.exit_code == 0, "table to stdout exits 0");
    const auto t = smci::io::table_from_csv(r.out);
    expect(t.n == 2 && t.m == 1, "stdout CSV shape");
    expect(t.min_limit() == -1.0, "stdout CSV minimum limit");
  }
  {
    const fs::path f = dir / "t.json";
    const auto r = run(cli, "table --n 2 --m 1 --alpha 0.1 --format json --out " +
                                f.string() + coarse, dir);
    expect(r.exit_code == 0, "table to file exits 0");
    const auto t = smci::io::load_table(f.string());
    expect(t.alpha == 0.1, "JSON table keeps alpha");
    expect(t.n == 2 && t.m == 1, "JSON table shape");
  }

  // Config file supplies defaults; explicit flags win.
  {
    const fs::path cfg = dir / "cfg.json";
    write_file(cfg, "{\"alpha\": 0.3, \"format\": \"csv\"}");
    const auto direct =
        run(cli, "table --n 2 --m 1 --alpha 0.3 --format csv" + coarse, dir);
    const auto via_cfg = run(cli, "table --config " + cfg.string() +
                                      " --n 2 --m 1" + coarse, dir);
    expect(via_cfg.exit_code == 0, "config-driven run exits 0");
    expect(via_cfg.out == direct.out, "config supplies flag defaults");
    const auto override_cfg =
        run(cli, "table --config " + cfg.string() + " --n 2 --m 1 --alpha 0.1" +
                     coarse, dir);
    const auto plain =
        run(cli, "table --n 2 --m 1 --alpha 0.1 --format csv" + coarse, dir);
    expect(override_cfg.out == plain.out, "explicit flag beats config");
    // Config placed before the subcommand works the same way.
    const auto front_cfg = run(cli, "--config " + cfg.string() +
                                        " table --n 2 --m 1" + coarse, dir);
    expect(front_cfg.out == via_cfg.out, "config accepted before subcommand");
    write_file(cfg, "{\"alpha\": ");
    expect(run(cli, "table --config " + cfg.string() + " --n 2 --m 1", dir)
                   .exit_code == 64,
           "broken config exits 64");
  }

  // Compare verdicts and --expect.
  {
    const fs::path f = dir / "t.json";
    const std::string both = "compare --a " + f.string() + " --b " + f.string();
    const auto r = run(cli, both, dir);
    expect(r.exit_code == 0, "compare exits 0");
    expect(r.out.find("\"equal\"") != std::string::npos,
           "identical tables compare equal");
    expect(run(cli, both + " --expect equal", dir).exit_code == 0,
           "--expect match exits 0");
    expect(run(cli, both + " --expect A_dominates", dir).exit_code == 2,
           "--expect mismatch exits 2");
    expect(run(cli, both + " --expect sideways", dir).exit_code == 64,
           "unknown --expect value exits 64");
  }

  // Verification failures exit with 2.
  {
    const fs::path bad = dir / "bad.csv";
    write_file(bad,
               "x,y,lower\n0,0,0.5\n0,1,0.5\n1,0,0.5\n1,1,0.5\n2,0,0.5\n2,1,"
               "0.5\n");
    const auto r =
        run(cli, "verify --table " + bad.string() + " --alpha 0.05" + coarse,
            dir);
    expect(r.exit_code == 2, "coverage violation exits 2");
    expect(run(cli, "verify --table " + bad.string() + coarse, dir).exit_code ==
               64,
           "CSV table without --alpha exits 64");
  }

  // Trace output header.
  {
    const auto r = run(cli, "barnard-trace --n 2 --m 1" + coarse, dir);
    expect(r.exit_code == 0, "trace exits 0");
    expect(r.out.rfind("step,block,neighbors,candidates,candidate_limits,"
                       "tie_merged,limit\n", 0) == 0,
           "trace header");
  }

  // MED end to end from a study file.
  {
    const fs::path study = dir / "study.csv";
    write_file(study, "dose,x,n\n0,1,4\n1,3,4\n2,4,4\n");
    const auto r = run(cli, "med --study " + study.string() + coarse, dir);
    expect(r.exit_code == 0, "med exits 0");
    const auto j = nlohmann::json::parse(r.out);
    expect(j["med"] == 2, "med decision");
    expect(j["doses"].size() == 2, "med dose count");
  }

  if (g_failures == 0) {
    std::cout << "cli: all checks passed\n";
    return 0;
  }
  std::cout << "cli: " << g_failures << " check(s) failed\n";
  return 1;
}
