// end-to-end tests of the command-line binary: worked examples, exit codes,
// output formats, and rerun determinism
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string temp_path(const std::string& name) {
    return "/tmp/regulus_cli_" + std::to_string(::getpid()) + "_" + name;
}

CliResult run_cli(const std::string& args) {
    const std::string errfile = temp_path("stderr.txt");
    const std::string cmd = std::string(REGULUS_CLI_PATH) + " " + args + " 2>" + errfile;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int rc = ::pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream ef(errfile);
    std::stringstream ss;
    ss << ef.rdbuf();
    r.err = ss.str();
    std::remove(errfile.c_str());
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("surfaces lists the catalogue") {
    const CliResult r = run_cli("surfaces");
    REQUIRE(r.status == 0);
    REQUIRE(r.out.find("sphere") != std::string::npos);
    REQUIRE(r.out.find("hyperbolic") != std::string::npos);
    REQUIRE(r.out.find("perturbed-flat") != std::string::npos);
}

TEST_CASE("curvature prints fixed six-decimal values") {
    const CliResult hyp = run_cli("curvature --surface hyperbolic --k 1 --at 0.5,0");
    REQUIRE(hyp.status == 0);
    REQUIRE(hyp.out == "-1.000000\n");

    const CliResult sph = run_cli("curvature --surface sphere --param 1.0 --at 0.3,0.2");
    REQUIRE(sph.status == 0);
    REQUIRE(sph.out == "1.000000\n");
}

TEST_CASE("distance on flat matches the Euclidean value") {
    const CliResult r = run_cli("distance --surface flat --from 0,0 --to 3,4");
    REQUIRE(r.status == 0);
    REQUIRE(r.out == "5.000000\n");
}

TEST_CASE("norm command covers all three kinds") {
    const CliResult curv = run_cli("norm --surface sphere --R 1 --kind curvature --delta 0.3");
    REQUIRE(curv.status == 0);
    REQUIRE(std::stod(curv.out) == Catch::Approx(1.0).margin(1e-3));

    const CliResult nat = run_cli(
        "norm --surface sphere --R 1 --kind native-deviation --delta 0.1 --rays 16 --radial 8");
    REQUIRE(nat.status == 0);
    REQUIRE(std::stod(nat.out) > 0.0);
    REQUIRE(std::stod(nat.out) < 1.0);

    const CliResult iso = run_cli(
        "norm --surface sphere --R 1 --kind isothermal-deviation --delta 0.1 --rays 16 --radial 8");
    REQUIRE(iso.status == 0);
    // at the stereographic origin the two constructions coincide
    REQUIRE(std::stod(iso.out) == Catch::Approx(std::stod(nat.out)).margin(1e-9));
}

TEST_CASE("rho-int matches the worked example") {
    const CliResult r = run_cli("rho-int --surface sphere --R 1 --alpha 0.5 --tol 1e-3");
    REQUIRE(r.status == 0);
    REQUIRE(std::stod(r.out) == Catch::Approx(1.0).margin(2e-3));
    REQUIRE(r.out.find("bisection, predicate monotone-checked") != std::string::npos);
}

TEST_CASE("rho-ext names the winning construction") {
    const CliResult r =
        run_cli("rho-ext --surface sphere --R 1 --alpha 0.5 --rays 16 --radial 8");
    REQUIRE(r.status == 0);
    REQUIRE(r.out.find("native") != std::string::npos);
    REQUIRE(std::stod(r.out) > 0.1);
}

TEST_CASE("verify on one surface passes and prints a summary") {
    const CliResult r = run_cli("verify --surface sphere --param 1.0 --delta 0.3");
    REQUIRE(r.status == 0);
    REQUIRE(r.out.find("summary: 9 cases") != std::string::npos);
    REQUIRE(r.out.find(" 0 failed") != std::string::npos);
}

TEST_CASE("verify writes byte-identical reports across reruns") {
    const std::string f1 = temp_path("rerun1.json");
    const std::string f2 = temp_path("rerun2.json");
    const CliResult a = run_cli("verify --suite ratios --surface flat --out " + f1);
    const CliResult b = run_cli("verify --suite ratios --surface flat --out " + f2);
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    const std::string doc1 = slurp(f1);
    REQUIRE(doc1 == slurp(f2));

    const nlohmann::json j = nlohmann::json::parse(doc1);
    for (const auto& c : j.at("cases")) {
        REQUIRE((c.at("pass").get<bool>() || c.at("skipped").get<bool>()));
    }

    // the stored report re-renders without recomputation
    const CliResult csv = run_cli("report --in " + f1 + " --format csv");
    REQUIRE(csv.status == 0);
    REQUIRE(csv.out.rfind("check_id,surface,alpha,delta", 0) == 0);
    const CliResult text = run_cli("report --in " + f1);
    REQUIRE(text.status == 0);
    REQUIRE(text.out.find("verification report") != std::string::npos);

    std::remove(f1.c_str());
    std::remove(f2.c_str());
}

TEST_CASE("single-check suite emits json to stdout") {
    const CliResult r = run_cli("verify --suite delta-diam --surface flat --format json");
    REQUIRE(r.status == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    REQUIRE(j.at("cases").size() == 1);
    REQUIRE(j.at("cases")[0].at("check_id") == "delta-diam");
    REQUIRE(j.at("cases")[0].at("pass") == true);
    REQUIRE(j.at("ratios").empty());
}

TEST_CASE("usage errors exit with code two and print usage") {
    const CliResult unknown_cmd = run_cli("frobnicate");
    REQUIRE(unknown_cmd.status == 2);
    REQUIRE(unknown_cmd.err.find("Usage") != std::string::npos);

    const CliResult unknown_surface = run_cli("curvature --surface nosuch --at 0,0");
    REQUIRE(unknown_surface.status == 2);
    REQUIRE(unknown_surface.err.find("unknown builtin surface") != std::string::npos);

    const CliResult bad_alpha = run_cli("rho-int --surface sphere --alpha 1.5");
    REQUIRE(bad_alpha.status == 2);
    REQUIRE(bad_alpha.err.find("alpha") != std::string::npos);

    const CliResult bad_point = run_cli("curvature --surface flat --at '1;2'");
    REQUIRE(bad_point.status == 2);

    const CliResult bad_suite = run_cli("verify --surface flat --suite no-such-check");
    REQUIRE(bad_suite.status == 2);
    REQUIRE(bad_suite.err.find("unknown check id") != std::string::npos);

    const CliResult missing_report = run_cli("report --in /nonexistent/nope.json");
    REQUIRE(missing_report.status == 2);

    const CliResult help = run_cli("--help");
    REQUIRE(help.status == 0);
    REQUIRE(help.out.find("Usage") != std::string::npos);
}
