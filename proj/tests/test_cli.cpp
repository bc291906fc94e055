#include <doctest.h>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "pgpp/experiment.hpp"
#include "pgpp/kv_config.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("pgpp_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const fs::path log = workdir() / "last_output.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && '" PGPP_CLI_PATH "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSweep =
    "synth.n_sites = 120\nsynth.ta_count = 12\nsynth.extent_km = 25\nn_cars = 20\nn_pedestrians = 20\n"
    "duration_ticks = 60\nmodes = conventional, tal\ntal_lengths = 4\nseed = 3\n";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("no-such-command").code == 2);
  CHECK(cli("metrics --degree 0.5 10").code == 2);
  write(workdir() / "bad.conf", "colour = blue\n");
  const Run bad = cli("simulate bad.conf");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("colour") != std::string::npos);
  write(workdir() / "bad2.conf", "tal_lengths = 40\n");
  CHECK(cli("simulate bad2.conf").code == 2);
}

TEST_CASE("degree of anonymity") {
  const Run r = cli("metrics --degree 223.09 50000");
  CHECK(r.code == 0);
  CHECK(std::abs(std::stod(r.out) - 0.50) <= 0.005);
}

TEST_CASE("sweep, metrics and figures") {
  write(workdir() / "sweep.conf", kSweep);
  const Run sim = cli("simulate sweep.conf --output-dir out");
  REQUIRE_MESSAGE(sim.code == 0, sim.out);
  CHECK(fs::exists(workdir() / "out" / "manifest.json"));
  const Run m = cli("metrics --manifest out/manifest.json --json");
  CHECK(m.code == 0);
  CHECK(m.out.find("d_global") != std::string::npos);
  const Run f = cli("figures out/manifest.json --out figs");
  CHECK(f.code == 0);
  for (const char* name : {"control_cdf.csv", "capacity.csv", "anonymity.csv", "area_cdf.csv", "attach_delay.csv"}) {
    CHECK(fs::exists(workdir() / "figs" / name));
  }
  const Run topo = cli("topology --n-sites 60 --ta-count 6 --out topo.json --sites-out sites.csv");
  CHECK(topo.code == 0);
  const Run relabel = cli("topology --sites sites.csv --custom-tas 3 --out topo3.json");
  CHECK(relabel.code == 0);
}

TEST_CASE("partial sweep failure exits with 3") {
  write(workdir() / "partial.conf", kSweep);
  const pgpp::ExperimentConfig cfg = pgpp::experiment_from_kv(pgpp::KvConfig::parse_string(kSweep));
  const auto points = pgpp::expand_sweep(cfg);
  fs::create_directories(workdir() / "partial" / "runs");
  write(workdir() / "partial" / "runs" / pgpp::point_hash(cfg, points.back()), "blocked");
  const Run r = cli("simulate partial.conf --output-dir partial");
  CHECK(r.code == 3);
  CHECK(fs::exists(workdir() / "partial" / "manifest.json"));
}

TEST_CASE("paging log analysis and attach simulation") {
  write(workdir() / "log.csv", "timestamp,identifier\n0.0,a\n0.5,a\n2.0,a\n3.0,b\n");
  const Run r = cli("analyze-log log.csv --out-dir logout");
  CHECK(r.code == 0);
  CHECK(fs::exists(workdir() / "logout" / "page_counts.csv"));
  const Run a = cli("aka simulate --ues 20 --sequential --out attach.jsonl --histogram hist.csv");
  CHECK(a.code == 0);
  std::ifstream in(workdir() / "attach.jsonl");
  int lines = 0;
  for (std::string line; std::getline(in, line);) lines += line.empty() ? 0 : 1;
  CHECK(lines == 20);
  CHECK(cli("aka simulate --ues 0").code == 2);
}

TEST_CASE("token issue, wallet and gateway round trip") {
  REQUIRE(cli("billing issue --period p1 --slices 24 --bits 1024 --keys-dir keys").code == 0);
  CHECK(fs::exists(workdir() / "keys" / "public.json"));
  CHECK((fs::status(workdir() / "keys" / "private.json").permissions() & fs::perms::group_read) == fs::perms::none);
  REQUIRE(cli("client request --keys keys/public.json --pending pending.json --requests requests.json").code == 0);
  REQUIRE(cli("billing issue --period p1 --keys-dir keys --requests requests.json --out responses.json").code == 0);
  REQUIRE(cli("client finalize --keys keys/public.json --pending pending.json --responses responses.json "
               "--wallet wallet.bin")
              .code == 0);
  const Run v = cli("tokens verify --keys keys/public.json --wallet wallet.bin");
  CHECK(v.code == 0);
  CHECK(v.out.find("24/24") != std::string::npos);
  CHECK(cli("billing issue --period other --keys-dir keys").code != 0);

  // Gateway in a child process on an ephemeral port.
  int pipefd[2];
  REQUIRE(::pipe(pipefd) == 0);
  const pid_t child = ::fork();
  REQUIRE(child >= 0);
  if (child == 0) {
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::close(pipefd[0]);
    if (::chdir(workdir().c_str()) != 0) ::_exit(127);
    ::execl(PGPP_CLI_PATH, PGPP_CLI_PATH, "gateway", "serve", "--keys", "keys/public.json", "--store", "spent.db",
            "--port", "0", "--log", "decisions.jsonl", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(pipefd[1]);
  FILE* out = ::fdopen(pipefd[0], "r");
  std::string port;
  std::string pin;
  char buf[512];
  while ((port.empty() || pin.empty()) && std::fgets(buf, sizeof buf, out) != nullptr) {
    const std::string line(buf);
    if (line.rfind("listening on ", 0) == 0) port = line.substr(line.rfind(':') + 1, line.find('\n') - line.rfind(':') - 1);
    if (line.rfind("certificate sha256 ", 0) == 0) pin = line.substr(19, 64);
  }
  REQUIRE_FALSE(port.empty());
  REQUIRE(pin.size() == 64);

  const Run ok = cli("client authenticate --wallet wallet.bin --port " + port + " --pin " + pin);
  CHECK(ok.code == 0);
  CHECK(ok.out.find("authorized") != std::string::npos);
  const Run again = cli("client authenticate --wallet wallet.bin --port " + port + " --pin " + pin);
  CHECK(again.code == 1);
  CHECK(again.out.find("double-spend") != std::string::npos);
  const Run wrong_pin = cli("client authenticate --wallet wallet.bin --port " + port + " --pin " + std::string(64, 'a'));
  CHECK(wrong_pin.code == 1);

  ::kill(child, SIGTERM);
  int status = 0;
  ::waitpid(child, &status, 0);
  std::fclose(out);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);

  const Run audit = cli("gateway audit --log decisions.jsonl --store spent.db --keys keys/public.json");
  CHECK(audit.code == 0);
  CHECK(audit.out.find(" 0 violations") != std::string::npos);
}
