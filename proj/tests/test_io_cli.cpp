#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "gt/correspond.hpp"
#include "gt/io.hpp"
#include "gt/tensor.hpp"
#include "gt/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Scratch directory per test run; removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gt_io_" + std::to_string(static_cast<unsigned>(::getpid())) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GTENSOR_CLI_PATH) + " " + args + " 2>&1";
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe))
        res.output.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("config json round trip") {
    const gt::CameraConfig cfg = gt::random_config(3, {2, 2}, 11);
    const json j = gt::config_json(cfg);
    const gt::CameraConfig back = gt::config_from_json(j);
    CHECK(back.n == cfg.n);
    CHECK(back.m == cfg.m);
    for (int i = 0; i < cfg.r(); ++i)
        CHECK((back.cameras[i] - cfg.cameras[i]).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("tensor json round trip through a file") {
    TempDir dir;
    const gt::CameraConfig cfg = gt::random_config(3, {2, 2, 2}, 4);
    const gt::Profile p{3, {2, 2, 2}, {2, 1, 1}};
    const gt::GrassmannTensor t = gt::compute_tensor(cfg, p);
    gt::save_json(dir.file("t.json"), gt::tensor_json(t));
    const gt::GrassmannTensor back = gt::tensor_from_json(gt::load_json(dir.file("t.json")));
    CHECK(back.profile.n == p.n);
    CHECK(back.profile.alpha == p.alpha);
    CHECK((back.entries - t.entries).norm() <= 1e-15);
}

TEST_CASE("correspondence json round trip preserves incidence") {
    TempDir dir;
    const gt::Profile p{3, {2, 2}, {2, 2}};
    const gt::CameraConfig cfg = gt::random_config(p.n, p.m, 9);
    const gt::CorrespondenceSet cs = gt::make_correspondence_set(cfg, p, 10, 5);
    gt::save_json(dir.file("cs.json"), gt::correspondences_json(cs));
    const gt::CorrespondenceSet back =
        gt::correspondences_from_json(gt::load_json(dir.file("cs.json")));
    REQUIRE(back.tuples.size() == cs.tuples.size());
    const gt::GrassmannTensor t = gt::compute_tensor(cfg, p);
    for (const auto& u : back.tuples)
        CHECK(std::abs(gt::incidence_value(t, u)) <= 1e-10);
}

TEST_CASE("malformed documents raise validation errors") {
    CHECK_THROWS_AS(gt::config_from_json(json{{"n", 3}}), gt::validation_error);
    CHECK_THROWS_AS(gt::config_from_json(json::parse(R"({"n":3,"m":[2],"cameras":[[[1,2]]]})")),
                    gt::validation_error);
    CHECK_THROWS_AS(gt::tensor_from_json(json::parse(
                        R"({"profile":{"n":3,"m":[2,2],"alpha":[2,2]},"entries":[1,2]})")),
                    gt::validation_error);
    CHECK_THROWS_AS(gt::profile_from_json(json::parse(R"({"n":3,"m":[2,2],"alpha":[3,1]})")),
                    gt::validation_error);
    TempDir dir;
    {
        std::ofstream out(dir.file("broken.json"));
        out << "not json at all";
    }
    CHECK_THROWS_AS(gt::load_json(dir.file("broken.json")), gt::validation_error);
    CHECK_THROWS_AS(gt::load_json(dir.file("missing.json")), gt::validation_error);
}

TEST_CASE("cli generate is deterministic and artifacts chain") {
    TempDir dir;
    const std::string base = "generate --n 3 --m 2,2 --alpha 2,2 --seed 11 --outdir ";
    CHECK(run_cli(base + dir.file("a")).exit_code == 0);
    CHECK(run_cli(base + dir.file("b")).exit_code == 0);
    for (const char* name : {"config.json", "tensor.json", "correspondences.json"})
        CHECK(slurp(dir.file("a") + "/" + name) == slurp(dir.file("b") + "/" + name));

    // generate -> estimate -> reconstruct against the generated truth
    const CliResult est = run_cli("estimate --correspondences " + dir.file("a") +
                                  "/correspondences.json --out " + dir.file("est.json"));
    CHECK(est.exit_code == 0);
    const gt::GrassmannTensor truth =
        gt::tensor_from_json(gt::load_json(dir.file("a") + "/tensor.json"));
    const gt::GrassmannTensor est_t = gt::tensor_from_json(gt::load_json(dir.file("est.json")));
    CHECK(gt::proj_distance(truth.entries, est_t.entries) <= 1e-8);

    const CliResult rec = run_cli("reconstruct --tensor " + dir.file("est.json") +
                                  " --restarts 20 --seed 5 --out " + dir.file("rec.json"));
    CHECK(rec.exit_code == 0);
    const json r = gt::load_json(dir.file("rec.json"));
    CHECK(r.at("converged").get<bool>());
    REQUIRE(r.at("orbits").size() == 1);
    CHECK(r.at("orbits")[0].at("residual").get<double>() <= 1e-8);
    CHECK(r.at("version").get<std::string>() == std::string(gt::kVersion));
}

TEST_CASE("cli rejects inadmissible profiles with an enumeration") {
    TempDir dir;
    const CliResult res =
        run_cli("generate --n 3 --m 2,2 --alpha 3,1 --seed 1 --outdir " + dir.file("x"));
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("(2,2)") != std::string::npos);

    const CliResult res2 =
        run_cli("generate --n 3 --m 2,2,2 --alpha 2,2,2 --seed 1 --outdir " + dir.file("y"));
    CHECK(res2.exit_code == 2);
    CHECK(res2.output.find("(2,1,1)") != std::string::npos);
    CHECK(res2.output.find("(1,2,1)") != std::string::npos);
    CHECK(res2.output.find("(1,1,2)") != std::string::npos);
}

TEST_CASE("cli usage and numeric exit codes") {
    TempDir dir;
    CHECK(run_cli("generate --n 3 --m 2,2 --alpha 2,2").exit_code == 1); // no seed
    CHECK(run_cli("no_such_command").exit_code == 1);
    CHECK(run_cli("--version").exit_code == 0);

    {
        std::ofstream out(dir.file("broken.json"));
        out << "{ nope";
    }
    CHECK(run_cli("estimate --correspondences " + dir.file("broken.json") + " --out " +
                  dir.file("o.json"))
              .exit_code == 2);

    // Rank-deficient cameras make every tensor entry vanish: numeric error.
    json deg;
    deg["n"] = 3;
    deg["m"] = {2, 2};
    const json row = {1.0, 2.0, 3.0, 4.0};
    deg["cameras"] = {{row, row, row}, {row, row, row}};
    gt::save_json(dir.file("deg.json"), deg);
    CHECK(run_cli("tensor --config " + dir.file("deg.json") + " --alpha 2,2 --out " +
                  dir.file("t.json"))
              .exit_code == 3);
}

TEST_CASE("cli square pipeline reports both orbits") {
    TempDir dir;
    const CliResult res = run_cli("pipeline --n 2 --m 1,1,1 --alpha 1,1,1 --seed 3 --restarts 40 "
                                  "--samples 60 --outdir " +
                                  dir.file("sq"));
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("orbits_found: 2") != std::string::npos);
    const json rep = gt::load_json(dir.file("sq") + "/report.json");
    CHECK(rep.at("orbits_found").get<int>() == 2);
    CHECK(rep.at("pass").get<bool>());
    // every named check appears exactly once
    std::map<std::string, int> seen;
    for (const auto& c : rep.at("checks"))
        ++seen[c.at("name").get<std::string>()];
    for (const char* name : {"tensor_matches_cameras", "estimation_error",
                             "reconstruction_round_trip", "hypersurface_equality",
                             "orbit_distinctness", "system_dimensions", "cremona_consistency"})
        CHECK(seen[name] == 1);
}

TEST_CASE("cli noisy pipeline exempts degraded checks") {
    TempDir dir;
    const CliResult res =
        run_cli("pipeline --seed 7 --noise 1e-3 --outdir " + dir.file("noisy"));
    CHECK(res.exit_code == 0);
    const json rep = gt::load_json(dir.file("noisy") + "/report.json");
    CHECK(rep.at("pass").get<bool>());
    bool saw_exempt = false;
    for (const auto& c : rep.at("checks"))
        saw_exempt = saw_exempt || c.at("noise_exempt").get<bool>();
    CHECK(saw_exempt);
}

TEST_CASE("cli params file merges under explicit flags") {
    TempDir dir;
    json params;
    params["n"] = 2;
    params["m"] = {1, 1, 1};
    params["alpha"] = {1, 1, 1};
    params["seed"] = 3;
    params["outdir"] = dir.file("from_file");
    gt::save_json(dir.file("params.json"), params);
    CHECK(run_cli("generate --params " + dir.file("params.json")).exit_code == 0);
    CHECK(run_cli("generate --n 2 --m 1,1,1 --alpha 1,1,1 --seed 3 --outdir " +
                  dir.file("from_flags"))
              .exit_code == 0);
    CHECK(slurp(dir.file("from_file") + "/config.json") ==
          slurp(dir.file("from_flags") + "/config.json"));

    // flag wins over the file
    CHECK(run_cli("generate --params " + dir.file("params.json") + " --seed 4 --outdir " +
                  dir.file("override"))
              .exit_code == 0);
    CHECK(slurp(dir.file("override") + "/config.json") !=
          slurp(dir.file("from_file") + "/config.json"));

    json junk = params;
    junk["typo_key"] = 1;
    gt::save_json(dir.file("junk.json"), junk);
    CHECK(run_cli("generate --params " + dir.file("junk.json")).exit_code == 2);
}

TEST_CASE("cli twist emits the four named checks") {
    TempDir dir;
    CHECK(run_cli("generate --n 2 --m 1,1,1 --alpha 1,1,1 --seed 3 --outdir " + dir.file("sq"))
              .exit_code == 0);
    // --verify without --seed runs at the default seed and still passes
    const CliResult bare = run_cli("twist --config " + dir.file("sq") + "/config.json --out " +
                                   dir.file("twin.json") + " --verify --samples 60");
    CHECK(bare.exit_code == 0);
    CHECK(bare.output.find("hypersurface_equality") != std::string::npos);
    const CliResult res = run_cli("twist --config " + dir.file("sq") + "/config.json --out " +
                                  dir.file("twin.json") + " --verify --seed 9 --samples 60 "
                                  "--report " +
                                  dir.file("twist_report.json"));
    CHECK(res.exit_code == 0);
    const json rep = gt::load_json(dir.file("twist_report.json"));
    REQUIRE(rep.at("checks").size() == 4);
    std::map<std::string, int> seen;
    for (const auto& c : rep.at("checks")) {
        ++seen[c.at("name").get<std::string>()];
        CHECK(c.at("pass").get<bool>());
        CHECK(c.at("wall_ms").get<double>() >= 0.0);
    }
    for (const char* name : {"hypersurface_equality", "orbit_distinctness", "system_dimensions",
                             "cremona_consistency"})
        CHECK(seen[name] == 1);

    // the emitted twin is a valid config of the same shape
    const gt::CameraConfig twin = gt::config_from_json(gt::load_json(dir.file("twin.json")));
    CHECK(twin.n == 2);
    CHECK(twin.m == std::vector<int>{1, 1, 1});

    // non-square configs are rejected before any file is written
    CHECK(run_cli("generate --n 3 --m 2,2 --alpha 2,2 --seed 1 --outdir " + dir.file("ns"))
              .exit_code == 0);
    CHECK(run_cli("twist --config " + dir.file("ns") + "/config.json --out " +
                  dir.file("nope.json"))
              .exit_code == 2);
}

TEST_CASE("cli verify passes on generated configs") {
    TempDir dir;
    CHECK(run_cli("generate --n 3 --m 2,2 --alpha 2,2 --seed 11 --outdir " + dir.file("a"))
              .exit_code == 0);
    const CliResult res = run_cli("verify --config " + dir.file("a") +
                                  "/config.json --alpha 2,2 --seed 21 --samples 100 --out " +
                                  dir.file("verify.json"));
    CHECK(res.exit_code == 0);
    const json rep = gt::load_json(dir.file("verify.json"));
    CHECK(rep.at("pass").get<bool>());
    REQUIRE(rep.at("checks").size() == 4);
}
