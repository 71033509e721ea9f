#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorentzmorse/bounds.hpp"
#include "lorentzmorse/config.hpp"
#include "lorentzmorse/json_io.hpp"

namespace lmc {

struct PipelineError : std::runtime_error {
    PipelineError(std::string stage, const std::string& what,
                  std::vector<std::string> artifacts)
        : std::runtime_error("stage " + stage + ": " + what),
          stage(std::move(stage)),
          completed_artifacts(std::move(artifacts)) {}
    std::string stage;
    std::vector<std::string> completed_artifacts;
};

struct PipelineResult {
    Json summary;
    std::vector<std::string> artifacts;
    bool all_pass = false;
};

inline GammaBounds bounds_from_config(const RunConfig& cfg,
                                      const SplitMetric& m) {
    GammaBounds g;
    g.s0 = cfg.s0;
    estimate_ranges(m, g);
    estimate_ab(m, g);
    if (cfg.ab_a >= 0) g.a = cfg.ab_a;
    if (cfg.ab_b >= 0) g.b = cfg.ab_b;
    return derive_constants(g, cfg.y0, cfg.y1);
}

inline EndpointPair endpoints_from_config(const RunConfig& cfg) {
    EndpointPair ep;
    ep.x0 = Vec::Map(cfg.x0.data(), static_cast<int>(cfg.x0.size()));
    ep.x1 = Vec::Map(cfg.x1.data(), static_cast<int>(cfg.x1.size()));
    ep.y0 = cfg.y0;
    ep.y1 = cfg.y1;
    return ep;
}

inline SearchSpec search_from_config(const RunConfig& cfg) {
    SearchSpec s;
    s.c_max = cfg.cap;
    s.halton_seeds = cfg.halton_seeds;
    s.newton_tol = cfg.newton_tol;
    s.ivp_tol = cfg.ivp_tol;
    s.s0 = cfg.s0;
    return s;
}

// Stage order: enumerate -> certify -> index -> bounds -> complex ->
// homology -> compare; each stage writes its JSON artifact; with `resume`
// an existing artifact is loaded instead of recomputed.
inline PipelineResult run_pipeline(const RunConfig& cfg, bool resume = false) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    auto path = [&](const std::string& name) {
        return (fs::path(cfg.out_dir) / name).string();
    };
    PipelineResult res;
    auto stage_done = [&](const std::string& name) {
        res.artifacts.push_back(path(name));
    };

    SplitMetric m = metric_from_config(cfg);
    GammaBounds g = bounds_from_config(cfg, m);
    EndpointPair ep = endpoints_from_config(cfg);
    auto convexity = check_convexity(m, cfg.s0, cfg.s0 + 2.0, 201);

    // enumerate
    std::vector<GeodesicRecord> records;
    ShootingLog log;
    if (resume && fs::exists(path("records.json"))) {
        records = records_from_json(read_json(path("records.json")));
    } else {
        try {
            records = solve_bvp(m, ep, g, search_from_config(cfg), &log);
        } catch (const std::exception& e) {
            throw PipelineError("enumerate", e.what(), res.artifacts);
        }
        write_json(path("records.json"), records_to_json(records));
    }
    stage_done("records.json");

    // certify endpoint non-conjugacy
    CertifyResult cert;
    if (resume && fs::exists(path("certify.json"))) {
        Json cj = read_json(path("certify.json"));
        cert.all_nonconjugate = cj.at("all_nonconjugate").get<bool>();
        cert.failed_ids = cj.at("failed_ids").get<std::vector<int>>();
        cert.end_dets = cj.at("end_dets").get<std::vector<double>>();
    } else {
        try {
            cert = certify_nonconjugate(m, records);
        } catch (const std::exception& e) {
            throw PipelineError("certify_nonconjugate", e.what(),
                                res.artifacts);
        }
        Json cj;
        cj["all_nonconjugate"] = cert.all_nonconjugate;
        cj["failed_ids"] = cert.failed_ids;
        cj["end_dets"] = cert.end_dets;
        write_json(path("certify.json"), cj);
    }
    stage_done("certify.json");
    if (!cert.all_nonconjugate) {
        std::ostringstream os;
        os << "endpoints conjugate along record(s)";
        for (int id : cert.failed_ids) os << " " << id;
        throw PipelineError("certify_nonconjugate", os.str(), res.artifacts);
    }

    // index
    if (resume && fs::exists(path("index.json"))) {
        auto loaded = records_from_json(read_json(path("index.json")));
        for (size_t i = 0; i < records.size() && i < loaded.size(); ++i)
            records[i].index = loaded[i].index;
    } else {
        try {
            for (auto& r : records) r.index = compute_index(m, r, cfg.mesh_n);
        } catch (const std::exception& e) {
            throw PipelineError("index", e.what(), res.artifacts);
        }
        write_json(path("index.json"), records_to_json(records));
    }
    stage_done("index.json");

    // a priori bounds
    for (auto& r : records) r.bound_report = verify_stima(r, g);
    write_json(path("bounds.json"), records_to_json(records));
    stage_done("bounds.json");

    // complex / homology / comparison
    MorseComplexData data;
    if (resume && fs::exists(path("complex.json"))) {
        data = complex_from_json(read_json(path("complex.json")));
    } else {
        ComplexBuildConfig ccfg;
        ccfg.N = cfg.mesh_n;
        ccfg.coeff = cfg.coeff == "z" ? CoeffMode::Z : CoeffMode::Z2;
        ccfg.cap = cfg.cap;
        ccfg.compute_indices = false;  // stage above already graded them
        try {
            data = build_complex(m, records, g, ccfg);
        } catch (const std::exception& e) {
            throw PipelineError("complex", e.what(), res.artifacts);
        }
        write_json(path("complex.json"), complex_to_json(data));
    }
    stage_done("complex.json");

    HomologyResult H = complex_homology(data);
    write_json(path("homology.json"), homology_to_json(H));
    stage_done("homology.json");

    auto rep = compare_reference(H, data, m.manifold());
    Json repj;
    repj["supported"] = rep.supported;
    repj["match"] = rep.match;
    repj["morse_inequalities"] = rep.morse_inequalities;
    repj["window_empty"] = rep.window_empty;
    repj["expected_betti"] = rep.expected_betti;
    repj["got_betti"] = rep.got_betti;
    repj["note"] = rep.note;
    write_json(path("compare.json"), repj);
    stage_done("compare.json");

    // summary
    bool indices_ok = true, bounds_ok = true;
    for (const auto& r : records) {
        if (!r.index.agreement || !r.index.certified) indices_ok = false;
        for (const auto& c : r.bound_report)
            if (!c.holds(1e-8)) bounds_ok = false;
    }
    bool census_ok = true;
    for (const auto& ce : data.census)
        if (!ce.count_stable || ce.transversality_flag) census_ok = false;

    Json s;
    s["config"] = serialize_config(cfg);
    s["records"] = records.size();
    s["checks"]["slab_convexity"] = convexity.convex;
    s["checks"]["endpoints_nonconjugate"] = cert.all_nonconjugate;
    s["checks"]["index_agreement"] = indices_ok;
    s["checks"]["a_priori_bounds"] = bounds_ok;
    s["checks"]["census_stable"] = census_ok;
    s["checks"]["boundary_square_zero"] = true;  // assemble_boundary throws
    s["checks"]["homology_match"] = rep.match || rep.window_empty;
    s["checks"]["morse_inequalities"] = rep.morse_inequalities;
    bool all = true;
    for (const auto& [k, v] : s["checks"].items())
        if (!v.get<bool>()) all = false;
    s["all_pass"] = all;
    write_json(path("summary.json"), s);
    stage_done("summary.json");
    res.summary = s;
    res.all_pass = all;
    return res;
}

// ---------------------------------------------------------------------------
// A priori bound campaign over randomized catalog metrics

struct CampaignResult {
    std::string csv;
    int metrics = 0;
    int geodesics = 0;
    int violations = 0;
};

inline Profile shifted_profile(const Profile& p, double mu) {
    return {[p, mu](double y) { return p.f(y) + mu; }, p.df, p.ddf};
}

// Randomized perturbed metrics inside the declared Gamma family; every found
// geodesic is checked against the three a priori inequalities, and the
// shifted-energy bound is checked for mu in {0, lambda/2, lambda}.
inline CampaignResult verify_bounds_campaign(const RunConfig& cfg,
                                             int n_metrics, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ueps(0.05, 0.3);
    std::uniform_int_distribution<int> ufreq(1, 3);
    std::uniform_real_distribution<double> ua(0.0, 0.15);
    std::ostringstream csv;
    csv << "metric,geodesic,inequality,lhs,rhs,slack\n";
    CampaignResult out;
    EndpointPair ep = endpoints_from_config(cfg);
    Manifold M(manifold_from_string(cfg.manifold));

    auto emit = [&](int mid, int gid, const BoundCheck& c) {
        csv << mid << "," << gid << "," << c.id << "," << format_double(c.lhs)
            << "," << format_double(c.rhs) << "," << format_double(c.slack())
            << "\n";
        if (!c.holds(1e-8)) ++out.violations;
    };

    for (int mid = 0; mid < n_metrics; ++mid) {
        double ea = ua(rng), eb = ueps(rng);
        int freq = ufreq(rng);
        SplitMetric m(M, gauss_profile(1.0, ea),
                      cos_profile(1.0, eb, freq), "campaign");
        GammaBounds g;
        g.s0 = cfg.s0;
        estimate_ranges(m, g);
        estimate_ab(m, g);
        g = derive_constants(g, cfg.y0, cfg.y1);
        SearchSpec spec = search_from_config(cfg);
        auto recs = solve_bvp(m, ep, g, spec);
        out.geodesics += static_cast<int>(recs.size());
        for (const auto& r : recs)
            for (const auto& c : verify_stima(r, g)) emit(mid, r.id, c);
        for (double mu : {0.0, g.lambda / 2.0, g.lambda}) {
            Profile pa{[&m](double y) { return m.a(y); },
                       [&m](double y) { return m.da(y); },
                       [&m](double y) { return m.dda(y); }};
            Profile pb{[&m](double y) { return m.b(y); },
                       [&m](double y) { return m.db(y); },
                       [&m](double y) { return m.ddb(y); }};
            SplitMetric ms(M, pa, shifted_profile(pb, mu), "campaign-shift");
            auto recs_mu = solve_bvp(ms, ep, g, spec);
            for (const auto& r : recs_mu)
                emit(mid, r.id, verify_stima2(r, mu, g));
        }
        ++out.metrics;
    }
    out.csv = csv.str();
    return out;
}

}  // namespace lmc
