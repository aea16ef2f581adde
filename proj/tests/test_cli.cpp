#include "doctest.h"

#include "bleep/cli.hpp"
#include "bleep/io.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

using namespace bleep;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() / ("bleep_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }

    ~TempDir() { fs::remove_all(path); }

    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/** Synthesizes, normalizes, trains, indexes and imputes a small dataset under `tmp`. */
void small_pipeline(const TempDir& tmp, const std::string& seed = "3") {
    write_file(tmp / "synth.json", R"({"n_spots": 64, "n_query": 24, "n_genes": 30, "n_zonated": 8, "d_img": 10, "seed": 11})");
    REQUIRE(run({"synth", "--config", tmp / "synth.json", "--out", tmp / "raw"}).code == 0);
    REQUIRE(run({"preprocess", "--in", tmp / "raw/reference/manifest.json", "--in", tmp / "raw/query/manifest.json", "--hvg", "20", "--out", tmp / "norm"}).code == 0);
    auto train = run({"train", "--data", tmp / "norm/slice0/manifest.json", "--batch-size", "32", "--epochs", "3", "--hidden", "16",
                      "--embedding-dim", "8", "--seed", seed, "--quiet", "--out", tmp / "model.blpc"});
    REQUIRE(train.code == 0);
    REQUIRE(run({"index", "--ckpt", tmp / "model.blpc", "--reference", tmp / "norm/slice0/manifest.json", "--out", tmp / "ref.blix"}).code == 0);
    REQUIRE(run({"impute", "--ckpt", tmp / "model.blpc", "--index", tmp / "ref.blix", "--queries", tmp / "norm/slice1/manifest.json",
                 "--k", "10", "--out", tmp / "pred.bmat"}).code == 0);
}

}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"train", "--no-such-flag"}).code == 2);
    CHECK(run({"train", "--data", "x", "--out", "y"}).code == 2);
    CHECK(run({"impute", "--k", "abc"}).code == 2);
}

TEST_CASE("help exits cleanly") {
    auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("impute") != std::string::npos);
}

TEST_CASE("missing input files exit with code 3 and a machine-parsable line") {
    TempDir tmp;
    auto outcome = run({"train", "--data", tmp / "absent.json", "--seed", "1", "--out", tmp / "m.blpc"});
    CHECK(outcome.code == 3);
    CHECK(outcome.err.rfind("error kind=io code=3 message=\"", 0) == 0);
    CHECK(count_lines(outcome.err) == 1);
    CHECK(!fs::exists(tmp / "m.blpc"));
}

TEST_CASE("invalid synth configuration exits with code 4") {
    TempDir tmp;
    write_file(tmp / "bad.json", R"({"n_spots": 10, "n_genes": 5, "n_zonated": 9, "seed": 1})");
    CHECK(run({"synth", "--config", tmp / "bad.json", "--out", tmp / "o"}).code == 4);
    write_file(tmp / "noseed.json", R"({"n_spots": 10})");
    CHECK(run({"synth", "--config", tmp / "noseed.json", "--out", tmp / "o"}).code == 4);
}

TEST_CASE("full pipeline on 64 spots produces a per-gene table with one row per gene") {
    TempDir tmp;
    small_pipeline(tmp);
    CHECK(fs::exists(tmp / "pred.bmat.json"));
    auto eval = run({"eval", "--pred", tmp / "pred.bmat", "--truth", tmp / "norm/slice1/manifest.json", "--sets", "heg,hvg," + (tmp / "raw/zonated.txt"),
                     "--set-size", "10", "--clusters", "3", "--seed", "2", "--out", tmp / "report"});
    REQUIRE(eval.code == 0);
    auto lines = read_lines(tmp / "report/per_gene_r.csv");
    CHECK(lines.front() == "gene,r,valid");
    CHECK(lines.size() == 30 + 1);
    CHECK(fs::exists(tmp / "report/report.json"));
    CHECK(fs::exists(tmp / "report/ggc_pred.csv"));
    CHECK(fs::exists(tmp / "report/moments.csv"));
    CHECK(eval.out.find("HEG") != std::string::npos);
}

TEST_CASE("impute with k larger than the reference exits with code 4 and writes nothing") {
    TempDir tmp;
    small_pipeline(tmp);
    auto outcome = run({"impute", "--ckpt", tmp / "model.blpc", "--index", tmp / "ref.blix", "--queries", tmp / "norm/slice1/manifest.json",
                        "--k", "65", "--out", tmp / "too_many.bmat"});
    CHECK(outcome.code == 4);
    CHECK(outcome.err.find("kind=validation") != std::string::npos);
    CHECK(!fs::exists(tmp / "too_many.bmat"));
}

TEST_CASE("impute rejects an index built from another checkpoint") {
    TempDir tmp;
    small_pipeline(tmp);
    REQUIRE(run({"train", "--data", tmp / "norm/slice0/manifest.json", "--batch-size", "32", "--epochs", "1", "--hidden", "16",
                 "--embedding-dim", "8", "--seed", "99", "--quiet", "--out", tmp / "other.blpc"}).code == 0);
    auto outcome = run({"impute", "--ckpt", tmp / "other.blpc", "--index", tmp / "ref.blix", "--queries", tmp / "norm/slice1/manifest.json",
                        "--k", "5", "--out", tmp / "p.bmat"});
    CHECK(outcome.code == 3);
    CHECK(!fs::exists(tmp / "p.bmat"));
}

TEST_CASE("tampered data files exit with code 3") {
    TempDir tmp;
    small_pipeline(tmp);
    auto path = tmp / "norm/slice0/expression.bmat";
    auto bytes = read_file(path);
    bytes[30] ^= 0x5;
    write_file(path, bytes);
    auto outcome = run({"index", "--ckpt", tmp / "model.blpc", "--reference", tmp / "norm/slice0/manifest.json", "--out", tmp / "x.blix"});
    CHECK(outcome.code == 3);
    CHECK(outcome.err.find("sha256") != std::string::npos);
}

TEST_CASE("training twice with the same seed prints the same hash") {
    TempDir tmp;
    small_pipeline(tmp);
    std::vector<std::string> args{"train", "--data", tmp / "norm/slice0/manifest.json", "--batch-size", "32", "--epochs", "2", "--hidden", "16",
                                  "--embedding-dim", "8", "--seed", "5", "--quiet", "--out"};
    auto a = args, b = args;
    a.push_back(tmp / "a.blpc");
    b.push_back(tmp / "b.blpc");
    auto first = run(a), second = run(b);
    REQUIRE(first.code == 0);
    CHECK(first.out.rfind("checkpoint ", 0) == 0);
    CHECK(first.out == second.out);
}

TEST_CASE("format checker subcommand") {
    TempDir tmp;
    save_matrix(tmp / "good.bmat", DenseMatrix::Ones(3, 2));
    write_file(tmp / "bad.bmat", "BMAT\x01");
    CHECK(run({"check", tmp / "good.bmat"}).code == 0);
    CHECK(run({"check", tmp / "good.bmat", tmp / "bad.bmat"}).code == 3);
}

TEST_CASE("ablate writes a replicate table") {
    TempDir tmp;
    small_pipeline(tmp);
    std::string grid = R"({"train": {"epochs": 2, "batch_size": 32, "hidden_dims": [16], "embedding_dim": 8},
                           "rows": [{"objective": "smoothed", "k": 10, "aggregation": "average"}, {"aggregation": "simple"}],
                           "sets": [")" + (tmp / "raw/zonated.txt") + R"("]})";
    write_file(tmp / "grid.json", grid);
    auto outcome = run({"ablate", "--data", tmp / "norm/slice0/manifest.json", "--queries", tmp / "norm/slice1/manifest.json", "--grid", tmp / "grid.json",
                        "--replicates", "2", "--seed", "1", "--out", tmp / "table.csv"});
    REQUIRE(outcome.code == 0);
    auto lines = read_lines(tmp / "table.csv");
    CHECK(lines.size() == 3);
    CHECK(read_lines(tmp / "table_replicates.csv").size() == 5);
}

TEST_CASE("the installed binary reports errors on stderr with the documented exit code") {
    const char* exe = std::getenv("BLEEP_CLI");
    if (!exe) {
        MESSAGE("BLEEP_CLI not set; skipping subprocess check");
        return;
    }
    TempDir tmp;
    std::string cmd = std::string("\"") + exe + "\" check \"" + (tmp / "nope.bmat") + "\" 2> \"" + (tmp / "err.txt") + "\"";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 3);
    auto err = read_file(tmp / "err.txt");
    CHECK(err.rfind("error kind=io code=3", 0) == 0);
}
