#include "jpr/cli.hpp"
#include "jpr/data.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace jpr;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "jpr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "jpr_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

// Drops the wall-clock columns (wall_time_s, fixed_iter_time_s) from bench CSV text.
std::string strip_times(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    for (std::string line; std::getline(in, line);) {
        std::stringstream ls(line);
        std::vector<std::string> cells;
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (i != 11 && i != 12) out << cells[i] << ',';
        out << '\n';
    }
    return out.str();
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("estimate with lambda 0 recovers the inverse sample covariance") {
    const Matrix v = oracle::gaussian_matrix(200, 10, 77);
    const auto input = scratch("gauss.csv");
    write_csv(input, DataMatrix(v));
    const auto prefix = scratch("gauss").string();
    auto r = run_cli({"estimate", "--input", input.string(), "--output", prefix, "--lambda", "0"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(r.out.find(prefix + ".omega.csv") != std::string::npos);

    const Matrix c = oracle::centered(v);
    const Matrix inv = (c.transpose() * c / 200.0).inverse();
    const Matrix omega = read_matrix_csv(prefix + ".omega.csv");
    CHECK(oracle::relative_frobenius(omega, inv) <= 1e-3);

    const auto diag = nlohmann::json::parse(slurp(prefix + ".diagnostics.json"));
    CHECK(diag["converged"].get<bool>());
    CHECK(diag["tau"].size() == 10);
    CHECK(diag["lambdas"][0].get<double>() == 0.0);

    // Matrix CSV output round-trips through the data loader.
    const auto reread = load_csv(prefix + ".q.csv", false);
    CHECK(reread.values() == read_matrix_csv(prefix + ".q.csv"));
    for (Eigen::Index j = 0; j < 10; ++j) CHECK(reread.values()(j, j) == -1.0);
}

TEST_CASE("estimate json and edge-tsv formats") {
    const auto input = scratch("small.csv");
    write_csv(input, DataMatrix(oracle::gaussian_matrix(60, 4, 5), {"a", "b", "c", "d"}));
    const auto prefix = scratch("small").string();
    auto r = run_cli({"estimate", "--input", input.string(), "--output", prefix, "--format", "json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(slurp(prefix + ".json"));
    CHECK(doc["omega"].size() == 4);
    CHECK(doc["q"].size() == 4);

    r = run_cli({"estimate", "--input", input.string(), "--output", prefix, "--format", "edge-tsv",
                 "--lambda", "0"});
    CHECK(r.code == 0);
    const auto tsv = slurp(prefix + ".edges.tsv");
    CHECK(tsv.rfind("source\ttarget\tweight\n", 0) == 0);
    CHECK(count_lines(tsv) == 1 + 6);
    CHECK(tsv.find("a\tb\t") != std::string::npos);
}

TEST_CASE("estimate reports malformed input as a parse error") {
    const auto input = scratch("bad.csv");
    write_text(input, "1,2,3\n4,,6\n7,8,9\n");
    auto r = run_cli({"estimate", "--input", input.string(), "--output", scratch("bad").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: parse", 0) == 0);
}

TEST_CASE("estimate with one iteration exits 2 and still writes outputs") {
    const auto input = scratch("hard.csv");
    write_csv(input, DataMatrix(oracle::gaussian_matrix(80, 6, 9)));
    const auto prefix = scratch("hard").string();
    fs::remove(prefix + ".omega.csv");
    auto r = run_cli({"estimate", "--input", input.string(), "--output", prefix, "--max-iter", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("warning:", 0) == 0);
    CHECK(fs::exists(prefix + ".omega.csv"));
    const auto diag = nlohmann::json::parse(slurp(prefix + ".diagnostics.json"));
    CHECK_FALSE(diag["converged"].get<bool>());
    CHECK(diag["iterations"].get<int>() == 1);
}

TEST_CASE("flag validation") {
    const auto input = scratch("flags.csv");
    write_csv(input, DataMatrix(oracle::gaussian_matrix(30, 3, 1)));
    auto r = run_cli({"estimate", "--input", input.string(), "--output", scratch("flags").string(),
                      "--huber-rho", "2"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error:", 0) == 0);

    r = run_cli({"estimate", "--input", input.string()});
    CHECK(r.code == 1);
    r = run_cli({"frobnicate"});
    CHECK(r.code == 1);
    r = run_cli({"estimate", "--input", "/nonexistent/x.csv", "--output", scratch("none").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: io", 0) == 0);
}

TEST_CASE("help exits 0 and documents exit codes") {
    auto r = run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("estimate") != std::string::npos);
    CHECK(r.out.find("2") != std::string::npos);
}

TEST_CASE("bench is deterministic apart from timings") {
    const std::vector<std::string> args{"bench", "--model", "ar1", "--p", "20", "--n", "200",
                                        "--reps", "2", "--seed", "7"};
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(count_lines(a.out) == 1 + 2 * 3);
    CHECK(strip_times(a.out) == strip_times(b.out));
}

TEST_CASE("bench validation and row counts") {
    auto bad = run_cli({"bench", "--model", "er", "--edge-prob", "1.5"});
    CHECK(bad.code == 1);
    CHECK(bad.err.rfind("error:", 0) == 0);

    const auto out = scratch("hub.csv");
    auto r = run_cli({"bench", "--model", "hub", "--p", "50", "--n", "500", "--reps", "3",
                      "--output", out.string()});
    CHECK(r.code == 0);
    CHECK(count_lines(slurp(out)) == 1 + 3 * 3);

    r = run_cli({"bench", "--model", "er", "--p", "10", "--n", "50", "--reps", "1", "--estimators",
                 "jpr", "--format", "jsonl"});
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 1);
    CHECK(nlohmann::json::parse(r.out)["estimator"] == "jpr");
}

TEST_CASE("network from a partial correlation matrix") {
    const auto q = scratch("q.csv");
    write_matrix_csv(q, -Matrix::Identity(3, 3));
    auto r = run_cli({"network", "--input", q.string()});
    CHECK(r.code == 0);
    CHECK(r.out == "source\ttarget\tweight\n");

    Matrix one = -Matrix::Identity(3, 3);
    one(0, 2) = one(2, 0) = 0.25;
    write_matrix_csv(q, one);
    r = run_cli({"network", "--input", q.string()});
    CHECK(r.out == "source\ttarget\tweight\n1\t3\t0.25\n");
    r = run_cli({"network", "--input", q.string(), "--threshold", "0.3"});
    CHECK(r.out == "source\ttarget\tweight\n");

    write_text(q, "x,y\n-1,0.5\n0.5,-1\n");
    r = run_cli({"network", "--input", q.string()});
    CHECK(r.out == "source\ttarget\tweight\nx\ty\t0.5\n");

    write_text(q, "-1,0.5,0\n0.5,-1,0\n");
    r = run_cli({"network", "--input", q.string()});
    CHECK(r.code == 1);
}

TEST_CASE("network from raw data matches estimate edge-tsv") {
    const auto input = scratch("net.csv");
    write_csv(input, DataMatrix(oracle::gaussian_matrix(80, 5, 21), {"v", "w", "x", "y", "z"}));
    const auto prefix = scratch("net").string();
    auto e = run_cli({"estimate", "--input", input.string(), "--output", prefix, "--format", "edge-tsv"});
    REQUIRE(e.code == 0);
    auto n = run_cli({"network", "--input", input.string(), "--input-kind", "data"});
    CHECK(n.code == 0);
    CHECK(n.out == slurp(prefix + ".edges.tsv"));
}
