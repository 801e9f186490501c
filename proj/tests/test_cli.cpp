#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using conflate::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct Workdir {
  Workdir() : path(fs::temp_directory_path() / "conflate_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  fs::path path;
};

const std::vector<std::string> kQuick = {"--negatives", "20", "--batch-size", "20", "--max-epochs", "3",
                                         "--embedding-dim", "16", "--feature-maps", "16",
                                         "--lstm-hidden", "8", "--boc-hidden", "16"};

std::vector<std::string> with_quick(std::vector<std::string> args) {
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  return args;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("generate writes the corpus, a sidecar and statistics") {
    Workdir w;
    const auto r = run({"generate", "--pairs", "10000", "--seed", "7", "--out", w / "d.tsv"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(slurp(w / "d.tsv")) == 10000);
    CHECK(r.out.find("mean length: 1") != std::string::npos);
    const auto meta = nlohmann::json::parse(slurp(w / "d.tsv.meta.json"));
    CHECK(meta["run_config"]["seed"] == 7);
    const double mean = meta["length_statistics"]["all"]["mean"];
    CHECK(mean > 13.5);
    CHECK(mean < 15.5);
  }

  TEST_CASE("generate is deterministic for a seed") {
    Workdir w;
    REQUIRE(run({"generate", "--pairs", "50", "--seed", "3", "--out", w / "a.tsv"}).code == 0);
    REQUIRE(run({"generate", "--pairs", "50", "--seed", "3", "--out", w / "b.tsv"}).code == 0);
    CHECK(slurp(w / "a.tsv") == slurp(w / "b.tsv"));
  }

  TEST_CASE("usage errors exit with 2") {
    Workdir w;
    const auto missing = run({"train", "--data", w / "absent.tsv"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("absent.tsv") != std::string::npos);
    CHECK(run({"train", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"train", "--model", "rnn", "--data", w / "x"}).code == 2);
    CHECK(run({"generate", "--config", w / "none.conf"}).code == 2);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("train, evaluate and query round trip") {
    Workdir w;
    REQUIRE(run({"generate", "--pairs", "100", "--seed", "1", "--out", w / "d.tsv"}).code == 0);
    const auto t = run(with_quick({"train", "--model", "boc", "--data", w / "d.tsv", "--seed", "1", "--out",
                                   w / "m.model", "--csv", w / "ranks.csv"}));
    REQUIRE(t.code == 0);
    CHECK(fs::exists(w / "m.model"));
    CHECK(t.err.find("epoch 3") != std::string::npos);
    CHECK(t.out.find("Using clean strings to query corrupted strings") != std::string::npos);
    const auto train_report = nlohmann::json::parse(slurp(w / "m.model.report.json"));
    CHECK(train_report["run_config"]["model"] == "boc");
    CHECK(count_lines(slurp(w / "ranks.csv")) == 1 + 2 * 10);

    const auto e = run({"evaluate", "--model-path", w / "m.model", "--data", w / "d.tsv", "--direction", "both",
                        "--report", w / "eval.json"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("Using clean strings to query corrupted strings") != std::string::npos);
    CHECK(e.out.find("Using corrupted strings to query clean strings") != std::string::npos);
    const auto ej = nlohmann::json::parse(slurp(w / "eval.json"));
    CHECK(ej["directions"].size() == 2);
    // Metrics after save/load match the ones computed right after training.
    CHECK(ej["directions"][0]["recall_at_1"] == train_report["directions"][0]["mean"]["recall_at_1"]);
    CHECK(ej["directions"][1]["mean_rank"] == train_report["directions"][1]["mean"]["mean_rank"]);

    {
      std::ofstream c(w / "cands.txt");
      c << "paleer mehaffep\nMr. john smith\nalpha beta\n";
    }
    const auto q = run({"query", "--model-path", w / "m.model", "--query", "alpha beta", "--candidates",
                        w / "cands.txt", "--top-k", "10"});
    REQUIRE(q.code == 0);
    CHECK(q.out.rfind("1  alpha beta  1.000  *\n", 0) == 0);
    CHECK(q.out.find("\n3  ") != std::string::npos);
    CHECK(q.out.find("\n4  ") == std::string::npos);

    const auto bad = run({"query", "--model-path", w / "m.model", "--query", "alpha Beta", "--candidates",
                          w / "cands.txt"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("'B' at position 6") != std::string::npos);
    CHECK(run({"query", "--model-path", w / "m.model", "--query", "alpha Beta", "--candidates", w / "cands.txt",
               "--lowercase-fold"}).code == 0);
  }

  TEST_CASE("evaluate rejects a corrupted artifact") {
    Workdir w;
    REQUIRE(run({"generate", "--pairs", "100", "--seed", "2", "--out", w / "d.tsv"}).code == 0);
    REQUIRE(run(with_quick({"train", "--model", "cnn", "--data", w / "d.tsv", "--out", w / "m.model"})).code == 0);
    std::string bytes = slurp(w / "m.model");
    bytes[bytes.size() / 2] ^= 0x5a;
    {
      std::ofstream out(w / "m.model", std::ios::binary);
      out << bytes;
    }
    const auto e = run({"evaluate", "--model-path", w / "m.model", "--data", w / "d.tsv"});
    CHECK(e.code == 1);
    CHECK(e.err.find("checksum") != std::string::npos);
  }

  TEST_CASE("evaluate reports a dataset outside the vocabulary") {
    Workdir w;
    REQUIRE(run({"generate", "--pairs", "100", "--seed", "2", "--out", w / "d.tsv"}).code == 0);
    REQUIRE(run(with_quick({"train", "--model", "boc", "--data", w / "d.tsv", "--out", w / "m.model"})).code == 0);
    {
      std::ofstream out(w / "d.tsv", std::ios::app);
      out << "100\tJohn smith\tsmith john\t0\n";
    }
    const auto e = run({"evaluate", "--model-path", w / "m.model", "--data", w / "d.tsv"});
    CHECK(e.code == 1);
    CHECK(e.err.find("vocabulary mismatch") != std::string::npos);
    CHECK(e.err.find("'J'") != std::string::npos);
  }

  TEST_CASE("cross-validation writes a report with both directions") {
    Workdir w;
    REQUIRE(run({"generate", "--pairs", "300", "--seed", "4", "--out", w / "d.tsv"}).code == 0);
    auto args = with_quick({"train", "--model", "boc", "--cv", "--jobs", "2", "--data", w / "d.tsv", "--report",
                            w / "cv.json", "--max-epochs", "1"});
    const auto r = run(args);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(w / "cv.json"));
    CHECK(j["fold_count"] == 10);
    CHECK(j["directions"].size() == 2);
    CHECK(j["directions"][0]["mean"].contains("recall_at_10"));
  }

  TEST_CASE("flags override the config file") {
    Workdir w;
    {
      std::ofstream c(w / "run.conf");
      c << "pairs = 30\nseed = 9\n";
    }
    REQUIRE(run({"generate", "--config", w / "run.conf", "--out", w / "a.tsv"}).code == 0);
    CHECK(count_lines(slurp(w / "a.tsv")) == 30);
    REQUIRE(run({"generate", "--config", w / "run.conf", "--pairs", "40", "--out", w / "b.tsv"}).code == 0);
    CHECK(count_lines(slurp(w / "b.tsv")) == 40);
    const auto meta = nlohmann::json::parse(slurp(w / "b.tsv.meta.json"));
    CHECK(meta["run_config"]["seed"] == 9);
    CHECK(meta["run_config"]["pairs"] == 40);
  }
}
