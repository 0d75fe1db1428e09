#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code{-1};
    std::string out;
};

// runs the binary with stderr discarded
Result run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + STOCHLIM_CLI_PATH + "\" " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("stochlim_cli_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kSmallRate = "run: {mode: rate, momenta: {start: 0, stop: 2.5, count: 6}}\n";

}  // namespace

TEST_CASE("rate runs are byte-identical across repeats and thread counts") {
    TempDir d;
    const std::string cfg = d.file("rate.yaml", kSmallRate);
    const Result a = run_cli("--config " + cfg + " --threads 1");
    const Result b = run_cli("--config " + cfg + " --threads 3");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("# mode: rate") != std::string::npos);
    CHECK(a.out.find("p,re,im") != std::string::npos);
}

TEST_CASE("output file and json format") {
    TempDir d;
    const std::string cfg = d.file("rate.yaml", kSmallRate);
    const std::string out = d.path("rate.json");
    REQUIRE(run_cli("--config " + cfg + " --format json --output " + out).code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["meta"]["mode"] == "rate");
    REQUIRE(j["rows"].size() == 6);
    CHECK(j["rows"][0][0] == 0.0);
}

TEST_CASE("mode override") {
    TempDir d;
    const std::string cfg = d.file("q.yaml", "run:\n  qcheck: {lambdas: [0.5, 0.25, 0.125]}\n");
    const Result r = run_cli("--config " + cfg + " --mode qcheck");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# mode: qcheck") != std::string::npos);
    CHECK(r.out.find("q_limit") != std::string::npos);
}

TEST_CASE("print-config echoes the canonical document") {
    TempDir d;
    const std::string cfg = d.file("c.yaml", "smearing: {B: 7.5}\n");
    const Result r = run_cli("--config " + cfg + " --print-config");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("B: 7.5") != std::string::npos);
    const std::string again = d.file("again.yaml", r.out);
    CHECK(run_cli("--config " + again + " --print-config").out == r.out);
}

TEST_CASE("exit codes") {
    TempDir d;
    CHECK(run_cli("--config " + d.file("bad.yaml", "smearing: {B: -1}\n")).code == 2);
    CHECK(run_cli("--config " + d.file("typo.yaml", "smearing: {b: 1}\n")).code == 2);
    CHECK(run_cli("--bogus-flag").code == 2);
    CHECK(run_cli("--config " + d.path("missing.yaml")).code == 4);
    const std::string cfg = d.file("rate.yaml", kSmallRate);
    CHECK(run_cli("--config " + cfg + " --output " + d.path("no/such/dir/out.csv")).code == 4);
    const std::string nc = d.file("nc.yaml",
                                  "quadrature: {rel_tol: 1e-14, abs_tol: 1e-300, max_subdivisions: 1}\n"
                                  "run: {mode: rate, momenta: [2.0]}\n");
    CHECK(run_cli("--config " + nc).code == 3);
    CHECK(run_cli("--version").code == 0);
}

TEST_CASE("shipped configurations parse") {
    for (const auto& e : fs::directory_iterator(STOCHLIM_CONFIG_DIR)) {
        if (e.path().extension() != ".yaml") continue;
        CAPTURE(e.path().string());
        CHECK(run_cli("--config " + e.path().string() + " --print-config").code == 0);
    }
}
