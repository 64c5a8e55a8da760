#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("COORDLAB_CLI_BIN");
  REQUIRE(bin != nullptr);
  static int counter = 0;
  fs::path out_file = fs::temp_directory_path() / ("coordlab_out_" + std::to_string(counter));
  fs::path err_file = fs::temp_directory_path() / ("coordlab_err_" + std::to_string(counter));
  ++counter;
  std::string cmd = std::string(bin) + " " + args + " > " + out_file.string() + " 2> " +
                    err_file.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_file);
  r.err = read_file(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("coordlab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// two speakers with reply exchanges plus labels
void write_fixture_corpus(const fs::path& dir) {
  std::ostringstream utt;
  for (int i = 0; i < 6; ++i) {
    bool t_art = i < 3;
    bool r_art = i < 2;
    utt << R"({"id":"t)" << i << R"(","conv_id":"c)" << i
        << R"(","speaker":"adm","reply_to":null,"ts":)" << 1000 + i * 100 << R"(,"text":")"
        << (t_art ? "the cat is very much of it" : "cat goes blorp mumble")
        << R"("})" << "\n";
    utt << R"({"id":"r)" << i << R"(","conv_id":"c)" << i
        << R"(","speaker":"usr","reply_to":"t)" << i << R"(","ts":)" << 1050 + i * 100
        << R"(,"text":")" << (r_art ? "the dog was very much of that" : "dog goes blemble")
        << R"("})" << "\n";
  }
  write(dir / "utterances.jsonl", utt.str());
  write(dir / "participants.jsonl",
        R"({"id":"adm","labels":["admins"]})"
        "\n"
        R"({"id":"usr","labels":["non-admins"]})"
        "\n");
}

json parse_error(const std::string& stderr_text) {
  json j = json::parse(stderr_text, nullptr, false);
  REQUIRE(!j.is_discarded());
  return j["error"];
}

}  // namespace

TEST_CASE("coordinate writes the profile table and is deterministic") {
  fs::path dir = fresh_dir("coordinate");
  write_fixture_corpus(dir);
  fs::path out = dir / "run";
  std::string cmd = "coordinate --corpus " + (dir / "utterances.jsonl").string() +
                    " --participants " + (dir / "participants.jsonl").string() +
                    " --speakers non-admins --targets admins --svg --out " + out.string();
  RunResult r1 = run_cli(cmd);
  CHECK(r1.exit_code == 0);
  std::map<std::string, std::string> first_run;
  for (const char* name : {"profile.csv", "profile.json", "config.json", "profile.svg"}) {
    first_run[name] = read_file(out / name);
    CHECK(!first_run[name].empty());
  }
  RunResult r2 = run_cli(cmd);  // identical config, same output directory
  CHECK(r2.exit_code == 0);
  for (const auto& [name, content] : first_run) {
    CHECK(read_file(out / name) == content);
  }
  CHECK(r1.out == r2.out);

  std::string csv = first_run["profile.csv"];
  // 8 marker rows + 3 aggregate rows
  int rows = 0;
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("speaker_group", 0) != 0) ++rows;
  }
  CHECK(rows == 11);
  CHECK(csv.find("articles") != std::string::npos);
  CHECK(csv.find("agg3") != std::string::npos);
}

TEST_CASE("coordinate with an empty group exits 2 with EmptyGroup") {
  fs::path dir = fresh_dir("emptygroup");
  write_fixture_corpus(dir);
  RunResult r = run_cli("coordinate --corpus " + (dir / "utterances.jsonl").string() +
                        " --participants " + (dir / "participants.jsonl").string() +
                        " --speakers bureaucrats --targets admins --out " +
                        (dir / "out").string());
  CHECK(r.exit_code == 2);
  json err = parse_error(r.err);
  CHECK(err["code"] == "EmptyGroup");
}

TEST_CASE("validate reports malformed data with exit 3") {
  fs::path dir = fresh_dir("malformed");
  write(dir / "utterances.jsonl", "{broken\n");
  RunResult r = run_cli("validate --corpus " + (dir / "utterances.jsonl").string());
  CHECK(r.exit_code == 3);
  json err = parse_error(r.err);
  CHECK(err["code"] == "MalformedRecord");
}

TEST_CASE("simulate is deterministic and validates the spec") {
  fs::path dir = fresh_dir("simulate");
  std::string genspec = R"({
    "seed": 5, "domain": "op",
    "groups": [
      {"name": "tgt", "size": 3, "labels": ["t"], "p": 0.2, "delta": 0.0, "q": 0.5},
      {"name": "spk", "size": 3, "labels": ["s"], "p": 0.2, "delta": 0.4, "q": 0.5}
    ],
    "lanes": [{"speakers": "spk", "targets": "tgt", "exchanges_per_speaker": 8}]
  })";
  write(dir / "genspec.json", genspec);
  std::string cmd =
      "simulate --genspec " + (dir / "genspec.json").string() + " --out " + (dir / "a").string();
  RunResult r1 = run_cli(cmd);
  CHECK(r1.exit_code == 0);
  std::map<std::string, std::string> first_run;
  for (const char* name : {"utterances.jsonl", "participants.jsonl", "oracle.json",
                           "genspec.json", "config.json"}) {
    first_run[name] = read_file(dir / "a" / name);
  }
  RunResult r2 = run_cli(cmd);
  CHECK(r2.exit_code == 0);
  for (const auto& [name, content] : first_run) {
    CHECK(read_file(dir / "a" / name) == content);
  }
  json oracle = json::parse(read_file(dir / "a" / "oracle.json"));
  CHECK(oracle["lanes"][0]["expected_coordination"]["articles"].get<double>() ==
        doctest::Approx(0.2));

  // invalid delta: p + delta > 1
  std::string bad = R"({
    "seed": 1, "domain": "bad",
    "groups": [{"name": "g", "size": 2, "p": 0.8, "delta": 0.4, "q": 0.5}],
    "lanes": [{"speakers": "g", "targets": "g", "exchanges_per_speaker": 2}]
  })";
  write(dir / "bad.json", bad);
  RunResult rb = run_cli("simulate --genspec " + (dir / "bad.json").string() + " --out " +
                         (dir / "c").string());
  CHECK(rb.exit_code == 2);
  CHECK(parse_error(rb.err)["code"] == "InvalidSpec");
}

TEST_CASE("hypotheses command on a planted corpus") {
  fs::path dir = fresh_dir("hyp");
  std::string genspec = R"({
    "seed": 9, "domain": "hyp",
    "groups": [
      {"name": "high_t", "size": 6, "labels": ["admin"], "p": 0.2, "delta": 0.0, "q": 0.5},
      {"name": "low_t", "size": 6, "labels": ["user"], "p": 0.2, "delta": 0.0, "q": 0.5},
      {"name": "u_hi", "size": 25, "labels": ["u"], "p": 0.2, "delta": 0.45, "q": 0.5},
      {"name": "u_lo", "size": 25, "labels": ["u"], "p": 0.2, "delta": 0.1, "q": 0.5},
      {"name": "s_hi", "size": 25, "labels": ["admin"], "p": 0.2, "delta": 0.1, "q": 0.5},
      {"name": "s_lo", "size": 25, "labels": ["user"], "p": 0.2, "delta": 0.45, "q": 0.5},
      {"name": "u_t", "size": 6, "labels": ["u"], "p": 0.2, "delta": 0.0, "q": 0.5}
    ],
    "lanes": [
      {"speakers": "u_hi", "targets": "high_t", "exchanges_per_speaker": 60},
      {"speakers": "u_lo", "targets": "low_t", "exchanges_per_speaker": 60},
      {"speakers": "s_hi", "targets": "u_t", "exchanges_per_speaker": 60},
      {"speakers": "s_lo", "targets": "u_t", "exchanges_per_speaker": 60}
    ]
  })";
  write(dir / "genspec.json", genspec);
  REQUIRE(run_cli("simulate --genspec " + (dir / "genspec.json").string() + " --out " +
                  (dir / "corpus").string())
              .exit_code == 0);
  std::string base = "hypotheses --corpus " + (dir / "corpus" / "utterances.jsonl").string() +
                     " --participants " + (dir / "corpus" / "participants.jsonl").string() +
                     " --universe u --out ";
  RunResult r = run_cli(base + (dir / "out").string() + " --high admin --low user");
  CHECK(r.exit_code == 0);
  json report = json::parse(read_file(dir / "out" / "hypotheses.json"));
  CHECK(report["P_target"]["verdict"] == "supported");
  CHECK(report["P_speaker"]["verdict"] == "supported");

  // swapping the labels flips both verdicts
  RunResult swapped = run_cli(base + (dir / "swap").string() + " --high user --low admin");
  CHECK(swapped.exit_code == 0);
  json flipped = json::parse(read_file(dir / "swap" / "hypotheses.json"));
  CHECK(flipped["P_target"]["verdict"] == "contradicted");
  CHECK(flipped["P_speaker"]["verdict"] == "contradicted");
}

TEST_CASE("timeline command aligns bucket zero at the event") {
  fs::path dir = fresh_dir("timeline");
  const long long event = 1000000000LL;
  const long long day = 86400LL;
  std::ostringstream utt;
  int id = 0;
  // five movers so the default population threshold is met
  for (int mover = 0; mover < 5; ++mover) {
    for (int k = -3; k < 3; ++k) {
      long long ts = event + k * 30 * day + 5 * day;
      utt << R"({"id":"t)" << id << R"(","conv_id":"c)" << id
          << R"(","speaker":"o","reply_to":null,"ts":)" << ts
          << R"(,"text":"the cat is very much of it and some i know"})" << "\n";
      utt << R"({"id":"r)" << id << R"(","conv_id":"c)" << id << R"(","speaker":"m)" << mover
          << R"(","reply_to":"t)" << id << R"(","ts":)" << ts + 60
          << R"(,"text":"the dog was actually under that and all you got"})" << "\n";
      ++id;
    }
  }
  std::ostringstream parts;
  for (int mover = 0; mover < 5; ++mover) {
    parts << R"({"id":"m)" << mover
          << R"(","labels":[],"status_events":[{"role":"admin","at":)" << event
          << R"(,"outcome":"promoted"}]})" << "\n";
  }
  write(dir / "utterances.jsonl", utt.str());
  write(dir / "participants.jsonl", parts.str());
  RunResult r = run_cli("timeline --corpus " + (dir / "utterances.jsonl").string() +
                        " --participants " + (dir / "participants.jsonl").string() +
                        " --role admin --window 3 --out " + (dir / "out").string());
  CHECK(r.exit_code == 0);
  json series = json::parse(read_file(dir / "out" / "timeline.json"));
  REQUIRE(series["buckets"].size() == 6);
  CHECK(series["buckets"][0]["bucket"] == -3);
  // exchange 5 days after the event lands in bucket 0
  for (const auto& b : series["buckets"]) {
    CHECK(b["speaker_population"].get<int>() == 5);
  }
}

TEST_CASE("predict command produces the accuracy grid") {
  fs::path dir = fresh_dir("predict");
  // marginal marker rates equalized: 0.325 + 0.05*0.5 = 0.1 + 0.5*0.5
  auto genspec = [&](const std::string& domain, const std::string& vocab, int seed) {
    return std::string(R"({"seed": )") + std::to_string(seed) + R"(, "domain": ")" + domain +
           R"(", "base_vocab": {"prefix": ")" + vocab + R"(", "size": 120},
      "groups": [
        {"name": "high", "size": 30, "labels": ["boss"], "p": 0.325, "delta": 0.05, "q": 0.5,
         "vocab": {"prefix": ")" + vocab + R"(hi", "size": 30}},
        {"name": "low", "size": 30, "labels": ["worker"], "p": 0.1, "delta": 0.5, "q": 0.5,
         "vocab": {"prefix": ")" + vocab + R"(lo", "size": 30}}
      ],
      "pair_lanes": [{"high": "high", "low": "low", "pairs": 30, "exchanges_each_way": 50}]})";
  };
  write(dir / "g1.json", genspec("alpha", "aa", 3));
  write(dir / "g2.json", genspec("beta", "bb", 4));
  REQUIRE(run_cli("simulate --genspec " + (dir / "g1.json").string() + " --out " +
                  (dir / "alpha").string())
              .exit_code == 0);
  REQUIRE(run_cli("simulate --genspec " + (dir / "g2.json").string() + " --out " +
                  (dir / "beta").string())
              .exit_code == 0);
  json spec;
  spec["seed"] = 11;
  spec["folds"] = 5;
  spec["kinds"] = {"coordination", "bow"};
  spec["domains"] = json::array();
  for (const std::string d : {"alpha", "beta"}) {
    spec["domains"].push_back({{"tag", d},
                               {"utterances", (dir / d / "utterances.jsonl").string()},
                               {"participants", (dir / d / "participants.jsonl").string()},
                               {"high_label", "boss"},
                               {"low_label", "worker"}});
  }
  write(dir / "predict.json", spec.dump());
  RunResult r = run_cli("predict --spec " + (dir / "predict.json").string() + " --out " +
                        (dir / "out").string());
  CHECK(r.exit_code == 0);
  json grid = json::parse(read_file(dir / "out" / "grid.json"));
  // 2 domains x 2 kinds in-domain + 2 directions x 2 kinds cross-domain
  CHECK(grid["grid"].size() == 8);
  double coord_cross = -1, bow_cross = -1;
  for (const auto& cell : grid["grid"]) {
    if (cell["protocol"] == "cross_domain" && cell["train_domain"] == "alpha") {
      if (cell["features"] == "coordination") coord_cross = cell["accuracy"].get<double>();
      if (cell["features"] == "bow") bow_cross = cell["accuracy"].get<double>();
    }
  }
  CHECK(coord_cross >= 0.9);
  CHECK(bow_cross <= 0.6);

  // a single-domain config has no cross-domain cells
  json single = spec;
  single["domains"] = json::array({spec["domains"][0]});
  write(dir / "single.json", single.dump());
  RunResult rs = run_cli("predict --spec " + (dir / "single.json").string() + " --out " +
                         (dir / "out_single").string());
  CHECK(rs.exit_code == 0);
  json sgrid = json::parse(read_file(dir / "out_single" / "grid.json"));
  for (const auto& cell : sgrid["grid"]) CHECK(cell["protocol"] == "in_domain");

  // missing label metadata -> exit 2
  json bad = spec;
  bad["domains"][0].erase("high_label");
  write(dir / "bad.json", bad.dump());
  RunResult rbad = run_cli("predict --spec " + (dir / "bad.json").string() + " --out " +
                           (dir / "out_bad").string());
  CHECK(rbad.exit_code == 2);
}

TEST_CASE("COORDLAB_SEED is the seed fallback and is recorded in the config") {
  fs::path dir = fresh_dir("seedenv");
  write_fixture_corpus(dir);
  const char* bin = std::getenv("COORDLAB_CLI_BIN");
  REQUIRE(bin != nullptr);
  std::string cmd = std::string("COORDLAB_SEED=1234 ") + bin + " coordinate --corpus " +
                    (dir / "utterances.jsonl").string() + " --participants " +
                    (dir / "participants.jsonl").string() +
                    " --speakers non-admins --targets admins --out " + (dir / "out").string() +
                    " > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  json config = json::parse(read_file(dir / "out" / "config.json"));
  CHECK(config["seed"].get<std::uint64_t>() == 1234);
}
