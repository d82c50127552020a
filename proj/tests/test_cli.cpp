#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "varsample/io.hpp"
#include "varsample/mindist.hpp"

// subprocess-level checks of the command-line pipeline
namespace {

const char* kBin = VARSAMPLE_BIN;

std::string tmpdir() {
    char tmpl[] = "/tmp/varsample_cli_XXXXXX";
    REQUIRE(mkdtemp(tmpl) != nullptr);
    return tmpl;
}

int run(const std::string& cmd) {
    int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("cli: circle sample -> persist -> infer") {
    auto dir = tmpdir();
    write_file(dir + "/circle.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    std::string base = std::string(kBin);

    CHECK(run(base + " sample --system " + dir + "/circle.txt --box=-2,2,-2,2 --epsilon 0.2" +
              " --delta 1e-6 --seed 5 --out " + dir) == 0);
    auto cloud = varsample::io::read_sample_csv(dir + "/sample.csv");
    CHECK(!cloud.points.empty());
    CHECK(cloud.certificate.epsilon == 0.2);

    CHECK(run(base + " persist --sample " + dir + "/sample.csv --pmax 1 --out " + dir) == 0);
    auto diag = varsample::tda::read_diagram_csv(dir + "/diagram.csv");
    CHECK(!diag.points.empty());

    CHECK(run(base + " infer --diagram " + dir + "/diagram.csv --out " + dir) == 0);
    std::string verdict = varsample::io::read_file(dir + "/verdict.txt");
    CHECK(verdict.find("beta_0=1") != std::string::npos);
    CHECK(verdict.find("beta_1=1") != std::string::npos);

    CHECK(run("rm -r " + dir) == 0);
}

TEST_CASE("cli: missing system file gives the parse-failure exit code") {
    auto dir = tmpdir();
    int rc = run(std::string(kBin) + " sample --system " + dir +
                 "/nope.txt --box=-1,1 --epsilon 0.1 --out " + dir);
    CHECK(rc == 2);
    run("rm -r " + dir);
}

TEST_CASE("cli: malformed system gives the parse-failure exit code") {
    auto dir = tmpdir();
    write_file(dir + "/bad.txt", "vars: x1\nx1^^2\n");
    int rc = run(std::string(kBin) + " sample --system " + dir +
                 "/bad.txt --box=-1,1 --epsilon 0.1 --out " + dir);
    CHECK(rc == 2);
    run("rm -r " + dir);
}

TEST_CASE("cli: empty variety exits zero with an empty sample") {
    auto dir = tmpdir();
    write_file(dir + "/empty.txt", "vars: x1 x2\nx1^2 + x2^2 + 1\n");
    CHECK(run(std::string(kBin) + " sample --system " + dir +
              "/empty.txt --box=-2,2,-2,2 --epsilon 0.2 --delta 1e-6 --out " + dir) == 0);
    auto cloud = varsample::io::read_sample_csv(dir + "/sample.csv");
    CHECK(cloud.points.empty());
    run("rm -r " + dir);
}

TEST_CASE("cli: subsample thins and reports the weakened certificate") {
    auto dir = tmpdir();
    write_file(dir + "/circle.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    std::string base = std::string(kBin);
    REQUIRE(run(base + " sample --system " + dir + "/circle.txt --box=-2,2,-2,2 --epsilon 0.2" +
                " --delta 1e-6 --seed 5 --out " + dir) == 0);
    CHECK(run(base + " subsample --sample " + dir + "/sample.csv --r 0.12 --seed 1 --out " +
              dir) == 0);
    auto thin = varsample::io::read_sample_csv(dir + "/subsample.csv");
    auto orig = varsample::io::read_sample_csv(dir + "/sample.csv");
    CHECK(thin.points.size() < orig.points.size());
    CHECK(thin.certificate.epsilon == doctest::Approx(0.32));
    run("rm -r " + dir);
}

TEST_CASE("cli: verify accepts the cloud and rejects a corrupted one") {
    auto dir = tmpdir();
    write_file(dir + "/circle.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    std::string base = std::string(kBin);
    REQUIRE(run(base + " sample --system " + dir + "/circle.txt --box=-2,2,-2,2 --epsilon 0.2" +
                " --delta 1e-6 --seed 5 --out " + dir) == 0);

    // oracle CSV: dense circle parametrization
    {
        std::ofstream out(dir + "/oracle.csv");
        out.precision(17);
        for (int k = 0; k < 2000; ++k) {
            double a = 2 * M_PI * k / 2000;
            out << std::cos(a) << "," << std::sin(a) << "\n";
        }
    }
    CHECK(run(base + " verify --sample " + dir + "/sample.csv --system " + dir +
              "/circle.txt --oracle " + dir + "/oracle.csv") == 0);

    // corrupt a point off the variety: verification must fail
    {
        std::ofstream out(dir + "/bad.csv");
        out << "# vars: x1 x2\n# epsilon: 0.2\n# delta: 1e-06\n";
        out << "# certificate: (1e-06, 0.2)\n";
        out << "1.5,1.5\n";
    }
    CHECK(run(base + " verify --sample " + dir + "/bad.csv --system " + dir +
              "/circle.txt --oracle " + dir + "/oracle.csv") != 0);
    run("rm -r " + dir);
}

TEST_CASE("cli: external solver backend through the wire format") {
    auto dir = tmpdir();
    write_file(dir + "/circle.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    // the solver contract is `solver input.json output.json`; self-host it
    write_file(dir + "/solver.sh",
               std::string("#!/bin/sh\nexec ") + kBin + " solve-square \"$1\" \"$2\"\n");
    REQUIRE(std::system(("chmod +x " + dir + "/solver.sh").c_str()) == 0);

    std::string base = std::string(kBin);
    CHECK(run(base + " sample --system " + dir + "/circle.txt --box=-2,2,-2,2 --epsilon 0.3" +
              " --delta 1e-6 --seed 5 --backend " + dir + "/solver.sh --out " + dir) == 0);
    auto cloud = varsample::io::read_sample_csv(dir + "/sample.csv");
    CHECK(!cloud.points.empty());
    for (const auto& p : cloud.points) CHECK(std::abs(p.x.norm() - 1.0) < 1e-6);
    run("rm -r " + dir);
}

TEST_CASE("external backend agrees with the internal one on min distance") {
    auto dir = tmpdir();
    write_file(dir + "/solver.sh",
               std::string("#!/bin/sh\nexec ") + kBin + " solve-square \"$1\" \"$2\"\n");
    REQUIRE(std::system(("chmod +x " + dir + "/solver.sh").c_str()) == 0);

    auto sys = testutil::circle_system();
    varsample::mindist::MinDistanceConfig cfg;
    varsample::mindist::SubprocessBackend external(dir + "/solver.sh");
    varsample::Rng rng(8);
    for (int k = 0; k < 5; ++k) {
        Eigen::VectorXd y(2);
        y << rng.uniform(-2, 2), rng.uniform(-2, 2);
        auto internal = varsample::mindist::min_distance(sys, y, cfg, 100 + k);
        auto ext = varsample::mindist::min_distance(sys, y, cfg, 100 + k, &external);
        REQUIRE(!internal.failed);
        REQUIRE(!ext.failed);
        CHECK(std::abs(internal.min_distance - ext.min_distance) < 1e-9);
        CHECK(internal.witnesses.size() == ext.witnesses.size());
    }
    run("rm -r " + dir);
}

TEST_CASE("cli: config file keys with flag overrides") {
    auto dir = tmpdir();
    write_file(dir + "/circle.txt", "vars: x1 x2\nx1^2 + x2^2 - 1\n");
    write_file(dir + "/cfg.ini",
               "[sample]\nepsilon=0.5\ndelta=1e-6\nbox=\"-2,2,-2,2\"\nsystem=" + dir +
                   "/circle.txt\n");
    std::string base = std::string(kBin);
    // flag overrides the config epsilon
    CHECK(run(base + " sample --config " + dir + "/cfg.ini --epsilon 0.4 --out " + dir) == 0);
    auto cloud = varsample::io::read_sample_csv(dir + "/sample.csv");
    CHECK(cloud.epsilon == 0.4);
    run("rm -r " + dir);
}
