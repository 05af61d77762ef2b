#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(GKDV_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string("/tmp/gkdv_cli_test_") + name;
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("wave subcommand solves and reports") {
    const auto r = run("wave --nl kdv --a 0 --E -0.12 --c 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("period T") != std::string::npos);
}

TEST_CASE("exit codes for failure modes") {
    CHECK(run("wave --nl kdv --a 0 --E -0.5 --c 1").exit_code == 2);   // below well minimum
    CHECK(run("wave --nl kdv --a 0 --E 0 --c 1").exit_code == 3);      // homoclinic level
    CHECK(run("wave --nl bogus --a 0 --E 0 --c 1").exit_code == 1);    // bad tag
    CHECK(run("frobnicate").exit_code != 0);
}

TEST_CASE("stability formats") {
    const auto pretty = run("stability --nl kdv --a 0 --E -0.12 --c 1");
    CHECK(pretty.exit_code == 0);
    CHECK(pretty.out.find("outcome      : Stable") != std::string::npos);

    const auto csv = run("stability --nl kdv --a 0 --E -0.12 --c 1 --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.out.rfind("a,E,c,outcome,", 0) == 0);

    const auto json = run("stability --nl kdv --a 0 --E -0.12 --c 1 --format json");
    CHECK(json.exit_code == 0);
    CHECK(json.out.find("\"outcome\":\"Stable\"") != std::string::npos);

    const auto unstable = run("stability --nl mkdv+ --a 0 --E 0.1 --c 1 --whitham --evans");
    CHECK(unstable.exit_code == 0);
    CHECK(unstable.out.find("outcome      : Unstable") != std::string::npos);
}

TEST_CASE("config file with flag precedence") {
    const auto path = write_temp("cfg.json",
                                 R"({"nl":"kdv","a":0.0,"E":-0.12,"c":5.0,"format":"json"})");
    // the --c flag must win over the config value
    const auto r = run("wave --config " + path + " --c 1.0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"c\":1.0") != std::string::npos);

    const auto bad = write_temp("bad.json", R"({"nl":"kdv","speed":1.0})");
    const auto rb = run("wave --config " + bad);
    CHECK(rb.exit_code == 1);
    CHECK(rb.out.find("unknown config key") != std::string::npos);

    const auto broken = write_temp("broken.json", "{nope");
    CHECK(run("wave --config " + broken).exit_code == 1);
}

TEST_CASE("scan grid and output file") {
    const std::string out = "/tmp/gkdv_cli_test_scan.csv";
    const auto r = run("scan --nl kdv --grid a=0:0:1,E=-0.2:-0.05:3,c=0.9:1.1:2 --workers 2 --out " +
                       out);
    CHECK(r.exit_code == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("a,E,c,outcome", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
}

TEST_CASE("whitham and evans subcommands") {
    const auto w = run("whitham --nl kdv --a 0 --E -0.12 --c 1");
    CHECK(w.exit_code == 0);
    CHECK(w.out.find("eig(A)") != std::string::npos);

    const auto e = run("evans --nl kdv --a 0 --E -0.12 --c 1");
    CHECK(e.exit_code == 0);
    CHECK(e.out.find("c30") != std::string::npos);
}

TEST_CASE("verify suite passes and catches tampering") {
    const auto ok = run("verify --nl kdv --a 0 --E -0.12 --c 1");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);

    const auto sym = run("verify --nl mkdv- --a 0 --E 0.1 --c -1");
    CHECK(sym.exit_code == 0);
    CHECK(sym.out.find("symmetric well") != std::string::npos);

    const auto bad = run("verify --nl kdv --a 0 --E -0.12 --c 1 --tamper-ma");
    CHECK(bad.exit_code != 0);
    CHECK(bad.out.find("FAIL") != std::string::npos);
}
