// Command-line driver: geodesic enumeration, index computation, a priori
// bound verification, flow diagnostics, Morse complex assembly, homology,
// reference comparison, perturbation invariance, and the full pipeline.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "lorentzmorse/pipeline.hpp"

using namespace lmc;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string resolve_out_dir(const RunConfig& cfg, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (cfg.out_dir == ".") {
        if (const char* env = std::getenv("LM_OUT_DIR")) return env;
    }
    return cfg.out_dir;
}

RunConfig load_with_out(const std::string& config_path,
                        const std::string& cli_out) {
    RunConfig cfg = load_config(config_path);
    cfg.out_dir = resolve_out_dir(cfg, cli_out);
    return cfg;
}

std::vector<GeodesicRecord> load_records(const RunConfig& cfg) {
    auto p = fs::path(cfg.out_dir) / "records.json";
    if (!fs::exists(p))
        throw ConfigError("no records.json in " + cfg.out_dir +
                          " (run `geodesics find` first)");
    return records_from_json(read_json(p.string()));
}

int flow_selftest() {
    // descent-property fuzz on random paths of the mixed catalog metric
    std::mt19937 rng(2024);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SplitMetric m(Manifold(ManifoldKind::Circle), gauss_profile(1.0, 0.4),
                  cos_profile(1.1, 0.2), "selftest");
    FlowConfig fc;
    fc.lambda = 8.0;
    fc.c0 = -2.0;
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        DiscretePath p(m.manifold(), 8, Vec::Zero(1), Vec::Constant(1, 1.0),
                       0.0, 0.3);
        p.linear_init();
        for (int j = 1; j <= 8; ++j)
            p.set_interior(j, p.node_x(j).array() + 0.5 * gauss(rng),
                           p.node_y(j) + 0.4 * gauss(rng));
        PathChart chart(p);
        auto f = pseudo_gradient_F(m, p, chart, fc);
        if (f.F_norm > 1.0 + 1e-12) ++bad;
        auto dE = path_denergy(m, p, chart);
        if (dE.stacked().dot(f.F.stacked()) > 1e-10) ++bad;
        if (f.E_aux <= fc.c0 - 1.0) {
            auto dA = path_denergy(m, p, chart, fc.lambda);
            if (dA.stacked().dot(f.F.stacked()) > 1e-10) ++bad;
        }
    }
    std::cout << "flow selftest: " << (200 - bad) << "/200 descent checks ok"
              << std::endl;
    return bad == 0 ? kExitPass : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morse homology of split Lorentzian geodesics"};
    app.require_subcommand(1);
    std::string config_path, config_path1, out_dir, complex_path, reference;
    int record_id = -1, n_metrics = 20, jobs = 1;
    unsigned seed = 0;
    bool resume = false, seed_set = false;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", config_path, "run configuration file")
                ->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", jobs, "max worker count");
        sub->add_option("--seed", seed, "random seed override")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* sc_geod = app.add_subcommand("geodesics", "geodesic operations");
    auto* sc_find = sc_geod->add_subcommand("find", "enumerate geodesics");
    add_common(sc_find);
    auto* sc_index = app.add_subcommand("index", "grade found geodesics");
    add_common(sc_index);
    auto* sc_bounds = app.add_subcommand("bounds", "a priori bounds");
    auto* sc_bverify = sc_bounds->add_subcommand("verify", "check records");
    add_common(sc_bverify);
    auto* sc_flow = app.add_subcommand("flow", "pseudo-gradient flow");
    auto* sc_frun = sc_flow->add_subcommand("run", "flow a perturbed record");
    add_common(sc_frun);
    sc_frun->add_option("--record", record_id, "record id (default: first)");
    auto* sc_fself =
        sc_flow->add_subcommand("selftest", "descent-property fuzz");
    auto* sc_complex = app.add_subcommand("complex", "Morse complex");
    auto* sc_cbuild = sc_complex->add_subcommand("build", "assemble complex");
    add_common(sc_cbuild);
    auto* sc_hom = app.add_subcommand("homology", "homology of a complex");
    sc_hom->add_option("--complex", complex_path, "complex JSON")->required();
    auto* sc_cmp = app.add_subcommand("compare", "compare with references");
    sc_cmp->add_option("--complex", complex_path, "complex JSON")->required();
    sc_cmp->add_option("--reference", reference, "reference base manifold")
        ->required();
    auto* sc_inv = app.add_subcommand("invariance", "perturbation invariance");
    sc_inv->add_option("--config0", config_path, "first metric config")
        ->required();
    sc_inv->add_option("--config1", config_path1, "second metric config")
        ->required();
    sc_inv->add_option("--out", out_dir, "output directory");
    auto* sc_pipe = app.add_subcommand("pipeline", "full run");
    add_common(sc_pipe);
    sc_pipe->add_flag("--resume", resume, "skip stages with artifacts");
    auto* sc_camp = app.add_subcommand("campaign", "bound campaign");
    add_common(sc_camp);
    sc_camp->add_option("--n", n_metrics, "number of sampled metrics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sc_fself->parsed()) return flow_selftest();

        if (sc_find->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            SplitMetric m = metric_from_config(cfg);
            GammaBounds g = bounds_from_config(cfg, m);
            ShootingLog log;
            auto recs = solve_bvp(m, endpoints_from_config(cfg), g,
                                  search_from_config(cfg), &log);
            fs::create_directories(cfg.out_dir);
            write_json((fs::path(cfg.out_dir) / "records.json").string(),
                       records_to_json(recs));
            std::cout << "found " << recs.size() << " geodesics ("
                      << log.seeds_tried << " seeds, " << log.newton_failures
                      << " failures, " << log.duplicates << " duplicates)"
                      << std::endl;
            return kExitPass;
        }
        if (sc_index->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            SplitMetric m = metric_from_config(cfg);
            auto recs = load_records(cfg);
            bool ok = true;
            for (auto& r : recs) {
                r.index = compute_index(m, r, cfg.mesh_n);
                ok = ok && r.index.agreement && r.index.certified;
                std::cout << "record " << r.id << ": i_con=" << r.index.i_con
                          << " i_disc=" << r.index.i_disc
                          << (r.index.certified ? "" : " (uncertified)")
                          << std::endl;
            }
            write_json((fs::path(cfg.out_dir) / "index.json").string(),
                       records_to_json(recs));
            return ok ? kExitPass : kExitChecksFailed;
        }
        if (sc_bverify->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            SplitMetric m = metric_from_config(cfg);
            GammaBounds g = bounds_from_config(cfg, m);
            auto recs = load_records(cfg);
            bool ok = true;
            for (auto& r : recs) {
                r.bound_report = verify_stima(r, g);
                for (const auto& c : r.bound_report) {
                    if (!c.holds(1e-8)) ok = false;
                    std::cout << "record " << r.id << " " << c.id << ": lhs="
                              << format_double(c.lhs)
                              << " rhs=" << format_double(c.rhs)
                              << (c.holds(1e-8) ? " ok" : " VIOLATED")
                              << std::endl;
                }
            }
            write_json((fs::path(cfg.out_dir) / "bounds.json").string(),
                       records_to_json(recs));
            return ok ? kExitPass : kExitChecksFailed;
        }
        if (sc_frun->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            SplitMetric m = metric_from_config(cfg);
            GammaBounds g = bounds_from_config(cfg, m);
            auto recs = load_records(cfg);
            if (recs.empty()) throw ConfigError("no records to flow");
            const auto& rec = (record_id >= 0 &&
                               record_id < static_cast<int>(recs.size()))
                                  ? recs[record_id]
                                  : recs[0];
            auto p = path_from_record(m, rec, cfg.mesh_n);
            std::mt19937 rng(seed_set ? seed : cfg.seed);
            std::uniform_real_distribution<double> u(-0.1, 0.1);
            for (int j = 1; j <= p.N(); ++j) {
                Vec dx = Vec::NullaryExpr(m.manifold().ambient_dim(),
                                          [&] { return u(rng); });
                p.set_interior(j, p.node_x(j) + dx, p.node_y(j));
            }
            FlowConfig fc;
            fc.lambda = g.lambda;
            fc.c0 = g.c0;
            fc.rest_tol = cfg.rest_tol;
            auto fr = flow(m, p, fc);
            bool mono = true;
            for (size_t i = 1; i < fr.trace.size(); ++i)
                if (fr.trace[i].E > fr.trace[i - 1].E + 1e-12) mono = false;
            std::cout << "flow: converged=" << fr.converged << " t=" << fr.t
                      << " steps=" << fr.steps
                      << " E_end=" << format_double(path_energy(m, fr.end))
                      << " monotone=" << mono << std::endl;
            return (mono && fr.converged) ? kExitPass : kExitChecksFailed;
        }
        if (sc_cbuild->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            SplitMetric m = metric_from_config(cfg);
            GammaBounds g = bounds_from_config(cfg, m);
            auto recs = load_records(cfg);
            ComplexBuildConfig ccfg;
            ccfg.N = cfg.mesh_n;
            ccfg.coeff = cfg.coeff == "z" ? CoeffMode::Z : CoeffMode::Z2;
            ccfg.cap = cfg.cap;
            auto data = build_complex(m, recs, g, ccfg);
            write_json((fs::path(cfg.out_dir) / "complex.json").string(),
                       complex_to_json(data));
            std::cout << "generators per degree:";
            for (size_t k = 0; k < data.chain.dims.size(); ++k)
                std::cout << " " << data.chain.dims[k];
            std::cout << std::endl;
            return kExitPass;
        }
        if (sc_hom->parsed()) {
            auto data = complex_from_json(read_json(complex_path));
            auto H = complex_homology(data);
            for (size_t k = 0; k < H.groups.size(); ++k) {
                std::cout << "H_" << k << ": betti=" << H.groups[k].betti;
                for (const auto& t : H.groups[k].torsion)
                    std::cout << " Z/" << t.str();
                std::cout << std::endl;
            }
            return kExitPass;
        }
        if (sc_cmp->parsed()) {
            auto data = complex_from_json(read_json(complex_path));
            auto H = complex_homology(data);
            Manifold base(manifold_from_string(reference));
            auto rep = compare_reference(H, data, base);
            std::cout << (rep.window_empty
                              ? "window empty (vacuous pass)"
                              : (rep.match ? "reference match"
                                           : "reference MISMATCH"))
                      << std::endl;
            return (rep.match || rep.window_empty) ? kExitPass
                                                   : kExitChecksFailed;
        }
        if (sc_inv->parsed()) {
            RunConfig c0 = load_config(config_path);
            RunConfig c1 = load_config(config_path1);
            SplitMetric m0 = metric_from_config(c0);
            SplitMetric m1 = metric_from_config(c1);
            GammaBounds g = bounds_from_config(c0, m0);
            ComplexBuildConfig ccfg;
            ccfg.N = c0.mesh_n;
            ccfg.coeff = c0.coeff == "z" ? CoeffMode::Z : CoeffMode::Z2;
            ccfg.cap = c0.cap;
            auto rep = perturbation_invariance(m0, m1, g,
                                               endpoints_from_config(c0),
                                               search_from_config(c0), ccfg);
            std::cout << "C0 distance " << format_double(rep.distance)
                      << " (radius " << format_double(rep.radius) << "), "
                      << (rep.equal ? "homology invariant"
                                    : "homology CHANGED")
                      << std::endl;
            return rep.equal ? kExitPass : kExitChecksFailed;
        }
        if (sc_pipe->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            if (seed_set) cfg.seed = seed;
            auto res = run_pipeline(cfg, resume);
            for (const auto& [k, v] : res.summary["checks"].items())
                std::cout << k << ": " << (v.get<bool>() ? "pass" : "FAIL")
                          << std::endl;
            return res.all_pass ? kExitPass : kExitChecksFailed;
        }
        if (sc_camp->parsed()) {
            RunConfig cfg = load_with_out(config_path, out_dir);
            auto res = verify_bounds_campaign(
                cfg, n_metrics, seed_set ? seed : cfg.seed);
            fs::create_directories(cfg.out_dir);
            std::ofstream csv(fs::path(cfg.out_dir) / "campaign.csv");
            csv << res.csv;
            std::cout << "campaign: " << res.metrics << " metrics, "
                      << res.geodesics << " geodesics, " << res.violations
                      << " violations" << std::endl;
            return res.violations == 0 ? kExitPass : kExitChecksFailed;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return kExitUsage;
    } catch (const PipelineError& e) {
        std::cerr << "pipeline halt: " << e.what() << std::endl;
        for (const auto& a : e.completed_artifacts)
            std::cerr << "  completed: " << a << std::endl;
        return e.stage == "certify_nonconjugate" ? kExitChecksFailed
                                                 : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << std::endl;
        return kExitNumerical;
    }
    return kExitUsage;
}
