#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gt/io.hpp"
#include "gt/reconstruct.hpp"
#include "gt/twist.hpp"
#include "gt/version.hpp"

namespace {

using nlohmann::json;
using namespace gt;

// One verification item of a report: named once, pass/fail, the decisive
// number, and wall time. noise_exempt items are recorded but do not gate the
// exit code (they measure quantities that legitimately degrade with noise).
struct Check {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    bool noise_exempt = false;
    double wall_ms = 0.0;
};

class Checklist {
  public:
    template <typename F>
    void run(const std::string& name, bool noise_exempt, F&& f) {
        Check c;
        c.name = name;
        c.noise_exempt = noise_exempt;
        const auto start = std::chrono::steady_clock::now();
        const auto [pass, margin] = f();
        c.pass = pass;
        c.margin = margin;
        c.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        std::printf("[%s] %s (margin=%.3e, %.1f ms)%s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.margin, c.wall_ms, c.noise_exempt ? " [noise-exempt]" : "");
        items_.push_back(std::move(c));
    }

    bool gating_pass() const {
        for (const auto& c : items_)
            if (!c.pass && !c.noise_exempt)
                return false;
        return true;
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& c : items_)
            arr.push_back(json{{"name", c.name},
                               {"pass", c.pass},
                               {"margin", c.margin},
                               {"noise_exempt", c.noise_exempt},
                               {"wall_ms", c.wall_ms}});
        return arr;
    }

  private:
    std::vector<Check> items_;
};

json report_stub(const std::string& command, json resolved) {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = std::move(resolved);
    return j;
}

// The admissibility gate shared by every subcommand that takes a raw profile.
// The error message enumerates the valid profiles for the given shape.
Profile checked_profile(int n, const std::vector<int>& m, const std::vector<int>& alpha) {
    const Profile p{n, m, alpha};
    try {
        validate(p);
    } catch (const validation_error&) {
        std::string msg = "alpha is not an admissible profile for n=" + std::to_string(n) + ", m=(";
        for (std::size_t i = 0; i < m.size(); ++i)
            msg += (i ? "," : "") + std::to_string(m[i]);
        msg += "); valid profiles:";
        const auto all = enumerate_B_interior(m, n);
        if (all.empty())
            msg += " none";
        for (const auto& q : all) {
            msg += " (";
            for (std::size_t i = 0; i < q.alpha.size(); ++i)
                msg += (i ? "," : "") + std::to_string(q.alpha[i]);
            msg += ")";
        }
        throw validation_error(msg);
    }
    return p;
}

long long minimal_count(const Profile& p) {
    return make_layout(p).size() - 1;
}

struct GenerateArtifacts {
    CameraConfig cfg;
    GrassmannTensor tensor;
    CorrespondenceSet observed; // clean data plus any requested noise
};

// Streams: seed for the cameras, seed+1 for correspondence sampling, seed+2
// for observation noise. Keeping them apart makes every artifact a pure
// function of (shape, seed).
GenerateArtifacts make_artifacts(const Profile& p, std::uint64_t seed, long long count,
                                 double noise) {
    GenerateArtifacts a;
    a.cfg = random_config(p.n, p.m, seed);
    a.tensor = compute_tensor(a.cfg, p);
    a.observed = make_correspondence_set(a.cfg, p, static_cast<int>(count), seed + 1);
    if (noise > 0.0)
        a.observed = add_noise(a.observed, noise, seed + 2);
    return a;
}

void write_artifacts(const GenerateArtifacts& a, const std::string& outdir) {
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    save_json(outdir + "/config.json", config_json(a.cfg));
    save_json(outdir + "/tensor.json", tensor_json(a.tensor));
    save_json(outdir + "/correspondences.json", correspondences_json(a.observed));
}

int cmd_generate(const Profile& p, std::uint64_t seed, long long count, double noise,
                 const std::string& outdir) {
    const GenerateArtifacts a = make_artifacts(p, seed, count, noise);
    write_artifacts(a, outdir);
    std::printf("wrote %s/config.json %s/tensor.json %s/correspondences.json (%zu tuples)\n",
                outdir.c_str(), outdir.c_str(), outdir.c_str(), a.observed.tuples.size());
    return 0;
}

int cmd_tensor(const std::string& config_path, const std::vector<int>& alpha,
               const std::string& out) {
    const CameraConfig cfg = config_from_json(load_json(config_path));
    const Profile p = checked_profile(cfg.n, cfg.m, alpha);
    save_json(out, tensor_json(compute_tensor(cfg, p)));
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_estimate(const std::string& cs_path, const std::string& out, long long min_count,
                 const std::string& report_path) {
    CorrespondenceSet cs = correspondences_from_json(load_json(cs_path));
    if (min_count > 0) {
        if (static_cast<std::size_t>(min_count) > cs.tuples.size())
            throw validation_error("--min-count exceeds the " +
                                   std::to_string(cs.tuples.size()) + " available tuples");
        cs.tuples.resize(static_cast<std::size_t>(min_count));
        if (!cs.provenance.empty())
            cs.provenance.resize(cs.tuples.size());
    }
    const EstimateResult est = estimate_tensor(cs);
    save_json(out, tensor_json(est.tensor));
    double worst_row = 0.0;
    for (double rr : est.diagnostics.row_residuals)
        worst_row = std::max(worst_row, std::abs(rr));
    std::printf("wrote %s (tuples=%zu corank=%d sigma_last=%.3e worst_row=%.3e)\n", out.c_str(),
                cs.tuples.size(), est.diagnostics.corank, est.diagnostics.sigma_last, worst_row);
    if (!report_path.empty()) {
        json rep = report_stub("estimate", json{{"correspondences", cs_path},
                                                {"min_count", min_count},
                                                {"tuples_used", cs.tuples.size()}});
        rep["diagnostics"] = json{{"sigma_last", est.diagnostics.sigma_last},
                                  {"sigma_second_last", est.diagnostics.sigma_second_last},
                                  {"corank", est.diagnostics.corank},
                                  {"worst_row_residual", worst_row}};
        save_json(report_path, rep);
    }
    return 0;
}

json orbit_json(const ReconstructionResult& r) {
    json j;
    j["residual"] = r.residual;
    j["restart"] = r.restarts_used;
    j["orbit_label"] = r.orbit_label;
    j["cameras"] = config_json(gauge_fix(r.config));
    return j;
}

int cmd_reconstruct(const std::string& tensor_path, int restarts, std::uint64_t seed,
                    const std::string& out) {
    const GrassmannTensor a = tensor_from_json(load_json(tensor_path));
    const ReconstructionOutcome res = reconstruct_from_tensor(a, restarts, seed);
    json rep = report_stub("reconstruct",
                           json{{"tensor", tensor_path}, {"restarts", restarts}, {"seed", seed}});
    rep["converged"] = res.converged;
    rep["best_residual"] = res.best_residual;
    json orbits = json::array();
    for (const auto& orbit : res.orbits)
        orbits.push_back(orbit_json(orbit));
    rep["orbits"] = std::move(orbits);
    rep["orbits_found"] = res.orbits.size();
    save_json(out, rep);
    std::printf("orbits_found: %zu (best_residual=%.3e)\n", res.orbits.size(), res.best_residual);
    if (!res.converged)
        std::printf("no candidate reached the residual threshold\n");
    return 0;
}

// The four twisted-pair checks shared by `twist --verify` and square pipelines.
void twist_checks(const CameraConfig& cfg, int samples, std::uint64_t seed, Checklist& checks) {
    const CameraConfig dual = dual_config(cfg);

    checks.run("hypersurface_equality", false, [&] {
        const HypersurfaceReport rep = verify_same_hypersurface(cfg, dual, samples, seed);
        return std::pair(rep.pass, rep.max_abs);
    });
    checks.run("orbit_distinctness", false, [&] {
        const auto w = pgl_equivalent(cfg, identified_dual(cfg));
        return std::pair(!w.has_value(), w ? w->residual : 1.0);
    });
    checks.run("system_dimensions", false, [&] {
        std::vector<int> all;
        for (int i = 1; i <= cfg.r(); ++i)
            all.push_back(i);
        bool ok = vanishing_system(cfg, cfg.n, all).dimension() == cfg.n + 1;
        for (int skip = 1; skip <= cfg.r() && ok; ++skip) {
            std::vector<int> rest;
            for (int i = 1; i <= cfg.r(); ++i)
                if (i != skip)
                    rest.push_back(i);
            ok = vanishing_system(cfg, cfg.n - 1, rest).dimension() == 1;
        }
        ok = ok && vanishing_system(cfg, cfg.n - 1, all).dimension() == 0;
        return std::pair(ok, ok ? 1.0 : 0.0);
    });
    checks.run("cremona_consistency", false, [&] {
        const CremonaMap map = make_cremona(cfg, dual, seed + 1);
        Rng rng(seed + 2);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            for (int attempt = 0;; ++attempt) {
                try {
                    const Vec z = random_point(cfg.n, rng);
                    const Vec w = cremona_apply(map, z);
                    worst = std::max(worst,
                                     proj_distance(w, triangulate_dual(dual, project(cfg, z))));
                    break;
                } catch (const numeric_error&) {
                    if (attempt >= 100)
                        throw;
                }
            }
        }
        return std::pair(worst <= 1e-8, worst);
    });
}

int cmd_twist(const std::string& config_path, const std::string& out, bool verify, int samples,
              std::uint64_t seed, const std::string& report_path) {
    const CameraConfig cfg = config_from_json(load_json(config_path));
    require_twist_shape(cfg);
    save_json(out, config_json(dual_config(cfg)));
    std::printf("wrote %s\n", out.c_str());
    if (!verify)
        return 0;

    Checklist checks;
    twist_checks(cfg, samples, seed, checks);
    json rep =
        report_stub("twist", json{{"config", config_path}, {"samples", samples}, {"seed", seed}});
    rep["checks"] = checks.to_json();
    rep["pass"] = checks.gating_pass();
    if (!report_path.empty())
        save_json(report_path, rep);
    return checks.gating_pass() ? 0 : 4;
}

int cmd_verify(const std::string& config_path, const std::vector<int>& alpha, std::uint64_t seed,
               int samples, const std::string& out) {
    const CameraConfig cfg = config_from_json(load_json(config_path));
    const Profile p = checked_profile(cfg.n, cfg.m, alpha);
    Checklist checks;

    checks.run("genericity", false, [&] {
        const GenericityReport rep = validate_genericity(cfg);
        double margin = 1.0;
        for (const auto& c : rep.checks)
            margin = std::min(margin, c.margin);
        return std::pair(rep.pass, margin);
    });
    const GrassmannTensor t = compute_tensor(cfg, p);
    checks.run("incidence_oracle_agreement", false, [&] {
        // The canonical tensor and the raw stacked-determinant oracle differ
        // by one global factor, so their ratio must be constant over generic
        // tuples (incident tuples make both sides vanish and prove nothing).
        double lo = 0.0, hi = 0.0;
        for (int k = 0; k < samples; ++k) {
            Rng rng(seed, static_cast<std::uint64_t>(k));
            CodimSubspaceTuple u;
            for (int i = 0; i < p.r(); ++i)
                u.forms.push_back(rng.gaussian_matrix(p.alpha[i], p.m[i] + 1));
            const double ratio = incidence_value(t, u) / incidence_oracle(cfg, u);
            if (k == 0)
                lo = hi = ratio;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        const double spread = (hi - lo) / std::max(std::abs(lo), std::abs(hi));
        return std::pair(spread <= 1e-8, spread);
    });
    checks.run("minimal_estimation", false, [&] {
        const CorrespondenceSet cs =
            make_correspondence_set(cfg, p, static_cast<int>(minimal_count(p)), seed + 1);
        const EstimateResult est = estimate_tensor(cs);
        const double d = proj_distance(est.tensor.entries, t.entries);
        return std::pair(d <= 1e-8 && est.diagnostics.corank == 1, d);
    });
    checks.run("rank_stratification", false, [&] {
        Rng rng(seed + 2);
        int worst = p.n;
        for (int k = 0; k < std::min(samples, 200); ++k) {
            for (int attempt = 0;; ++attempt) {
                try {
                    const int r = rank_profile_at(cfg, project(cfg, random_point(p.n, rng)));
                    worst = std::max(worst, r);
                    break;
                } catch (const numeric_error&) {
                    if (attempt >= 100)
                        throw;
                }
            }
        }
        return std::pair(worst == p.n, static_cast<double>(worst));
    });

    json rep = report_stub("verify", json{{"config", config_path},
                                          {"alpha", alpha},
                                          {"samples", samples},
                                          {"seed", seed}});
    rep["checks"] = checks.to_json();
    rep["pass"] = checks.gating_pass();
    if (!out.empty())
        save_json(out, rep);
    return checks.gating_pass() ? 0 : 4;
}

int cmd_pipeline(const Profile& p, std::uint64_t seed, long long count, double noise,
                 int restarts, int samples, const std::string& outdir, const std::string& out) {
    const bool square = p.r() == p.n + 1 && *std::max_element(p.m.begin(), p.m.end()) == 1;
    const bool noisy = noise > 0.0;

    const GenerateArtifacts a = make_artifacts(p, seed, count, noise);
    write_artifacts(a, outdir);

    Checklist checks;
    checks.run("tensor_matches_cameras", false, [&] {
        const double d = proj_distance(compute_tensor(a.cfg, p).entries, a.tensor.entries);
        return std::pair(d <= 1e-12, d);
    });

    GrassmannTensor estimated = a.tensor;
    checks.run("estimation_error", noisy, [&] {
        const EstimateResult est = estimate_tensor(a.observed);
        estimated = est.tensor;
        const double d = proj_distance(est.tensor.entries, a.tensor.entries);
        return std::pair(d <= 1e-8 && est.diagnostics.corank == 1, d);
    });

    std::size_t orbits_found = 0;
    checks.run("reconstruction_round_trip", noisy, [&] {
        const ReconstructionOutcome res = reconstruct_from_tensor(estimated, restarts, seed + 3);
        orbits_found = res.orbits.size();
        bool hit_truth = false;
        for (const auto& orbit : res.orbits)
            hit_truth = hit_truth || pgl_equivalent(orbit.config, a.cfg).has_value();
        const std::size_t expected = square ? 2 : 1;
        return std::pair(hit_truth && orbits_found == expected, res.best_residual);
    });

    if (square) {
        std::printf("orbits_found: %zu\n", orbits_found);
        twist_checks(a.cfg, samples, seed + 4, checks);
    }

    json rep = report_stub("pipeline", json{{"n", p.n},
                                            {"m", p.m},
                                            {"alpha", p.alpha},
                                            {"seed", seed},
                                            {"count", count},
                                            {"noise", noise},
                                            {"restarts", restarts},
                                            {"samples", samples},
                                            {"outdir", outdir}});
    rep["checks"] = checks.to_json();
    if (square)
        rep["orbits_found"] = orbits_found;
    rep["pass"] = checks.gating_pass();
    save_json(out, rep);
    std::printf("report: %s (%s)\n", out.c_str(), checks.gating_pass() ? "pass" : "fail");
    return checks.gating_pass() ? 0 : 4;
}

// Experiment settings resolved from defaults, then a params file, then flags.
struct Params {
    int n = 3;
    std::vector<int> m{2, 2, 2};
    std::vector<int> alpha{2, 1, 1};
    std::uint64_t seed = 0;
    long long count = 0; // 0 means the minimal count for the profile
    double noise = 0.0;
    int restarts = 50;
    int samples = 200;
    std::string outdir = ".";
};

// Flags beat the file; the file beats built-in defaults. Returns whether the
// file carries a seed, so the caller can enforce the reproducibility rule.
bool merge_params_file(const std::string& path, const CLI::App& sub, Params& v) {
    const json j = load_json(path);
    if (!j.is_object())
        throw validation_error(path + ": params file must be a JSON object");
    const auto take = [&](const char* key, const char* flag, auto& slot) {
        if (j.contains(key) && sub.get_option(flag)->count() == 0) {
            try {
                slot = j.at(key).get<std::decay_t<decltype(slot)>>();
            } catch (const json::exception&) {
                throw validation_error(path + ": bad value for \"" + std::string(key) + "\"");
            }
        }
    };
    take("n", "--n", v.n);
    take("m", "--m", v.m);
    take("alpha", "--alpha", v.alpha);
    take("seed", "--seed", v.seed);
    take("count", "--count", v.count);
    take("noise", "--noise", v.noise);
    if (sub.get_option_no_throw("--restarts"))
        take("restarts", "--restarts", v.restarts);
    if (sub.get_option_no_throw("--samples"))
        take("samples", "--samples", v.samples);
    take("outdir", "--outdir", v.outdir);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        static const char* known[] = {"n",     "m",        "alpha",   "seed",  "count",
                                      "noise", "restarts", "samples", "outdir"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw validation_error(path + ": unknown key \"" + key + "\"");
    }
    return j.contains("seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grassmann tensor toolkit"};
    app.set_version_flag("--version", gt::kVersion);
    app.require_subcommand(1);

    Params prm;
    std::string params_path;
    std::uint64_t seed = 0;
    long long count = 0;
    int restarts = 50;
    int samples = 200;
    std::vector<int> alpha;
    std::string config_path, tensor_path, cs_path, out, report_path;
    bool verify_flag = false;

    const auto add_experiment_flags = [&](CLI::App* sub, bool with_solver) {
        sub->add_option("--params", params_path, "params JSON file (flags override it)");
        sub->add_option("--n", prm.n, "scene dimension");
        sub->add_option("--m", prm.m, "target dimensions")->delimiter(',');
        sub->add_option("--alpha", prm.alpha, "tensor profile")->delimiter(',');
        sub->add_option("--seed", prm.seed, "rng seed");
        sub->add_option("--count,--min-count", prm.count,
                        "correspondence count (default: minimal for the profile)");
        sub->add_option("--noise", prm.noise, "observation noise sigma");
        if (with_solver) {
            sub->add_option("--restarts", prm.restarts, "reconstruction restarts");
            sub->add_option("--samples", prm.samples, "verification sample count");
        }
        sub->add_option("--outdir", prm.outdir, "artifact directory");
    };

    CLI::App* gen = app.add_subcommand("generate", "emit config, tensor and correspondences");
    add_experiment_flags(gen, false);

    CLI::App* ten = app.add_subcommand("tensor", "compute the tensor of a config file");
    ten->add_option("--config", config_path, "camera config JSON")->required();
    ten->add_option("--alpha", alpha, "tensor profile")->required()->delimiter(',');
    ten->add_option("--out", out, "output tensor JSON")->required();

    CLI::App* est = app.add_subcommand("estimate", "estimate a tensor from correspondences");
    est->add_option("--correspondences", cs_path, "correspondences JSON")->required();
    est->add_option("--out", out, "output tensor JSON")->required();
    est->add_option("--min-count", count, "use only the first k tuples");
    est->add_option("--report", report_path, "diagnostics report JSON");

    CLI::App* rec = app.add_subcommand("reconstruct", "recover cameras from a tensor");
    rec->add_option("--tensor", tensor_path, "tensor JSON")->required();
    rec->add_option("--restarts", restarts, "number of random restarts");
    rec->add_option("--seed", seed, "rng seed")->required();
    rec->add_option("--out", out, "result JSON")->required();

    CLI::App* twi = app.add_subcommand("twist", "dual configuration and its verification");
    twi->add_option("--config", config_path, "camera config JSON")->required();
    twi->add_option("--out", out, "output dual config JSON")->required();
    twi->add_flag("--verify", verify_flag, "run the twisted-pair verification checks");
    twi->add_option("--seed", seed, "rng seed for the verification samples (default 0)");
    twi->add_option("--samples", samples, "hypersurface sample count");
    twi->add_option("--report", report_path, "verification report JSON");

    CLI::App* ver = app.add_subcommand("verify", "check a config against its contracts");
    ver->add_option("--config", config_path, "camera config JSON")->required();
    ver->add_option("--alpha", alpha, "tensor profile")->required()->delimiter(',');
    ver->add_option("--seed", seed, "rng seed")->required();
    ver->add_option("--samples", samples, "sample count");
    ver->add_option("--out", out, "report JSON");

    CLI::App* pipe = app.add_subcommand("pipeline", "generate, estimate, reconstruct, verify");
    add_experiment_flags(pipe, true);
    pipe->add_option("--out", out, "report JSON path (default <outdir>/report.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (gen->parsed() || pipe->parsed()) {
            CLI::App* sub = gen->parsed() ? gen : pipe;
            bool seed_given = sub->get_option("--seed")->count() > 0;
            if (!params_path.empty())
                seed_given = merge_params_file(params_path, *sub, prm) || seed_given;
            if (!seed_given) {
                std::cerr << "--seed is required (flag or params file)\n";
                return 1;
            }
            const Profile p = checked_profile(prm.n, prm.m, prm.alpha);
            if (prm.count <= 0)
                prm.count = minimal_count(p);
            if (prm.noise < 0.0)
                throw validation_error("--noise must be non-negative");
            if (gen->parsed())
                return cmd_generate(p, prm.seed, prm.count, prm.noise, prm.outdir);
            if (out.empty())
                out = prm.outdir + "/report.json";
            return cmd_pipeline(p, prm.seed, prm.count, prm.noise, prm.restarts, prm.samples,
                                prm.outdir, out);
        }
        if (ten->parsed())
            return cmd_tensor(config_path, alpha, out);
        if (est->parsed())
            return cmd_estimate(cs_path, out, count, report_path);
        if (rec->parsed())
            return cmd_reconstruct(tensor_path, restarts, seed, out);
        if (twi->parsed())
            return cmd_twist(config_path, out, verify_flag, samples, seed, report_path);
        if (ver->parsed())
            return cmd_verify(config_path, alpha, seed, samples, out);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const gt::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const gt::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
}
