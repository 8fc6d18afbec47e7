#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks of the command-line surface: exit codes, the CSV
// contract, and byte-level determinism.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("heunbeta_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(HEUNBETA_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = (raw >= 256) ? raw / 256 : raw; // WEXITSTATUS without <sys/wait.h>
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    };
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string write_params(const std::string& name, const std::string& json) {
    const fs::path p = work_dir() / name;
    std::ofstream out(p, std::ios::binary);
    out << json;
    return p.string();
}

} // namespace

TEST_CASE("series: terminated one-term family A") {
    const std::string f = write_params("a0.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "family": "A"})");
    const RunResult r = run_cli("series --params " + f);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("terminated: true") != std::string::npos);
    CHECK(r.out.find("N: 0") != std::string::npos);
    CHECK(r.out.find("coefficients: 1") != std::string::npos);
    CHECK(r.out.find("a[0] = [1, 0]") != std::string::npos);
}

TEST_CASE("series: constraint violation names the relation and exits 2") {
    const std::string f = write_params("bad_alpha.json",
        R"({"p": 0.3, "alpha": 0.4, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "family": "A"})");
    const RunResult r = run_cli("series --params " + f);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("alpha = 0 required") != std::string::npos);
}

TEST_CASE("series: family B listing and unknown keys") {
    const std::string f = write_params("b1.json",
        R"({"p": 0.25, "alpha": -0.5, "gamma": 0.5, "delta": 1.0, "sigma": 0, "family": "B"})");
    const RunResult r = run_cli("series --params " + f);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("coefficients: 2") != std::string::npos);
    CHECK(r.out.find("a[1] = [-1, 0]") != std::string::npos);

    const std::string g = write_params("unknown.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "bogus": 1})");
    const RunResult rb = run_cli("series --params " + g + " --family A");
    CHECK(rb.exit_code == 2);
    CHECK(rb.err.find("unknown key") != std::string::npos);
}

TEST_CASE("eval: CSV contract, z = 0 row, tiny residuals, determinism") {
    const std::string f = write_params("a0_eval.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "family": "A"})");
    const RunResult r = run_cli("eval --params " + f + " --grid 0:0.95:20");
    REQUIRE(r.exit_code == 0);

    std::stringstream ss(r.out);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "z_re,z_im,u_re,u_im,residual_abs,residual_rel");

    std::string first_row;
    std::getline(ss, first_row);
    CHECK(first_row.rfind("0,0,0,0,", 0) == 0); // z = 0 row carries u = 0
    CHECK(first_row.find("nan") != std::string::npos);

    // every interior residual_rel is tiny for a terminated solution
    std::string row;
    int checked = 0;
    while (std::getline(ss, row)) {
        const auto pos = row.rfind(',');
        const std::string rel = row.substr(pos + 1);
        if (rel == "nan") continue;
        CHECK(std::stod(rel) < 1e-9);
        ++checked;
    }
    CHECK(checked >= 18);

    const RunResult again = run_cli("eval --params " + f + " --grid 0:0.95:20");
    CHECK(again.out == r.out); // byte-identical reruns
}

TEST_CASE("eval: JSON format parses and mirrors the CSV data") {
    const std::string f = write_params("a0_eval_json.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "family": "A"})");
    const fs::path out = work_dir() / "rows.json";
    const RunResult r =
        run_cli("eval --params " + f + " --grid 0.05:0.95:7 --format json --out " + out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    nlohmann::json rows;
    in >> rows;
    REQUIRE(rows.is_array());
    REQUIRE(rows.size() == 7);
    CHECK(rows[0]["z"][0].get<double>() == 0.05);
    CHECK(rows[0]["u"].is_array());
    CHECK(rows[0]["residual_rel"].get<double>() < 1e-9);
}

TEST_CASE("terminate: family A quadratic and roots") {
    const std::string f = write_params("a1.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 2.5, "sigma": 0, "family": "A"})");
    const RunResult r = run_cli("terminate --params " + f);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("relation: gamma + delta - 2 = N") != std::string::npos);
    CHECK(r.out.find("N: 1") != std::string::npos);
    CHECK(r.out.find("sigma_polynomial degree: 2") != std::string::npos);
    // coefficients of sigma^0 and sigma^1: 16 p^2 (2 - 3g + g^2) = 1.08, 1 + 12p - 8pg = 3.4
    CHECK(r.out.find("c[0] = [1.0800000000000001, 0]") != std::string::npos);
    CHECK(r.out.find("c[1] = [3.3999999999999999, 0]") != std::string::npos);
    CHECK(r.out.find("roots: 2") != std::string::npos);
    CHECK(r.out.find("elementary A") != std::string::npos);
}

TEST_CASE("terminate: single root printed for N = 0") {
    const std::string f = write_params("a0t.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": 0, "family": "A"})");
    const RunResult r = run_cli("terminate --params " + f);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("root[0] = [-0.59999999999999998, 0]") != std::string::npos);
}

TEST_CASE("terminate: family B N = 0 is surfaced as degenerate") {
    // gamma + delta - alpha - 1 = 0 but the scalar condition needs p = 0
    const std::string f = write_params("b0.json",
        R"({"p": 0.3, "alpha": 0.2, "gamma": 0.5, "delta": 0.7, "sigma": 0, "family": "B"})");
    const RunResult r = run_cli("terminate --params " + f);
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("N: 0") != std::string::npos);
    CHECK(r.out.find("note: N = 0 requires p = 0") != std::string::npos);
    CHECK(r.out.find("satisfied: false") != std::string::npos);

    // with p = 0 it degenerates to a one-term pure Beta solution
    const std::string g = write_params("b0p0.json",
        R"({"p": 0, "alpha": 0.2, "gamma": 0.5, "delta": 0.7, "sigma": 0, "family": "B"})");
    const RunResult ok = run_cli("terminate --params " + g);
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("satisfied: true") != std::string::npos);
    CHECK(ok.out.find("a[0] = [1, 0]") != std::string::npos);
}

TEST_CASE("terminate: no integer relation exits 3") {
    const std::string f = write_params("no_term.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 0.7, "sigma": 0, "family": "A"})");
    const RunResult r = run_cli("terminate --params " + f + " --n-max 5");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("no termination") != std::string::npos);
}

TEST_CASE("terminate: family D lists (delta, sigma) pairs with the family A cross-reference") {
    const std::string f = write_params("d.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 0, "sigma": 0, "family": "D"})");
    const RunResult r = run_cli("terminate --params " + f + " --n-max 1");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("solutions (N=0): 1") != std::string::npos);
    CHECK(r.out.find("solutions (N=1): 3") != std::string::npos);
    CHECK(r.out.find("family A termination: N' = 0") != std::string::npos);
    CHECK(r.out.find("family A termination: N' = 1") != std::string::npos);
}

TEST_CASE("verify: exact solution passes, perturbed sigma fails with exit 4") {
    const std::string f = write_params("v_ok.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.6, "family": "A"})");
    const RunResult ok = run_cli("verify --params " + f + " --tol 1e-10");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("result: pass") != std::string::npos);

    // a perturbed sigma no longer terminates, so the truncated series misses
    // the true trajectory by far more than the threshold
    const std::string g = write_params("v_bad.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 1.5, "sigma": -0.5, "family": "A"})");
    const RunResult bad = run_cli("verify --params " + g + " --tol 1e-10 --max-terms 80");
    CHECK(bad.exit_code == 4);
    CHECK(bad.out.find("result: fail") != std::string::npos);
}

TEST_CASE("verify: pure Beta case passes") {
    const std::string f = write_params("v_beta.json",
        R"({"p": 0, "alpha": 0, "gamma": 0.5, "delta": 0.5, "sigma": 0, "family": "A"})");
    const RunResult r = run_cli("verify --params " + f);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("result: pass") != std::string::npos);
}

TEST_CASE("complex parameters round-trip through the file format") {
    const std::string f = write_params("cplx.json",
        R"({"p": [0.2, 0.1], "alpha": 0, "gamma": [0.4, -0.2], "delta": 0.6, "sigma": 0.3, "family": "A"})");
    const RunResult r = run_cli("series --params " + f + " --max-terms 60 --tail-tol 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("terminated: false") != std::string::npos);
    CHECK(r.out.find("coefficients: 60") != std::string::npos);
    // listing caps at 50 entries plus a remainder count
    CHECK(r.out.find("a[49] = ") != std::string::npos);
    CHECK(r.out.find("a[50] = ") == std::string::npos);
    CHECK(r.out.find("... (10 more coefficients)") != std::string::npos);
}

TEST_CASE("terminate: reruns are byte-identical") {
    const std::string f = write_params("d_det.json",
        R"({"p": 0.3, "alpha": 0, "gamma": 0.5, "delta": 0, "sigma": 0, "family": "D"})");
    const RunResult a = run_cli("terminate --params " + f + " --n-max 1");
    const RunResult b = run_cli("terminate --params " + f + " --n-max 1");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
}
