#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "lorentzmorse/complex.hpp"
#include "lorentzmorse/geodesic.hpp"

namespace lmc {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vec vec_from_json(const Json& a) {
    Vec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
    return v;
}

inline Json record_to_json(const GeodesicRecord& r) {
    Json j;
    j["id"] = r.id;
    j["x0"] = to_json(r.x0);
    j["x1"] = to_json(r.x1);
    j["y0"] = r.y0;
    j["y1"] = r.y1;
    j["v0"] = to_json(r.v0);
    j["eta0"] = r.eta0;
    j["energy"] = r.energy;
    j["residual"] = r.residual;
    j["winding"] = r.winding;
    Json idx;
    idx["i_con"] = r.index.i_con;
    idx["i_disc"] = r.index.i_disc;
    idx["agreement"] = r.index.agreement;
    idx["nondegenerate"] = r.index.nondegenerate;
    idx["certified"] = r.index.certified;
    idx["mesh_n"] = r.index.mesh_N;
    idx["conjugate_times"] = r.index.conjugate_times;
    j["index"] = idx;
    Json checks = Json::array();
    for (const auto& c : r.bound_report) {
        Json cj;
        cj["id"] = c.id;
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        checks.push_back(cj);
    }
    j["bounds"] = checks;
    Json xs = Json::array();
    for (const auto& x : r.x_samples) xs.push_back(to_json(x));
    j["x_samples"] = xs;
    j["y_samples"] = r.y_samples;
    j["eta_samples"] = r.eta_samples;
    return j;
}

inline GeodesicRecord record_from_json(const Json& j) {
    GeodesicRecord r;
    r.id = j.at("id").get<int>();
    r.x0 = vec_from_json(j.at("x0"));
    r.x1 = vec_from_json(j.at("x1"));
    r.y0 = j.at("y0").get<double>();
    r.y1 = j.at("y1").get<double>();
    r.v0 = vec_from_json(j.at("v0"));
    r.eta0 = j.at("eta0").get<double>();
    r.energy = j.at("energy").get<double>();
    r.residual = j.at("residual").get<double>();
    r.winding = j.at("winding").get<std::vector<int>>();
    const Json& idx = j.at("index");
    r.index.i_con = idx.at("i_con").get<int>();
    r.index.i_disc = idx.at("i_disc").get<int>();
    r.index.agreement = idx.at("agreement").get<bool>();
    r.index.nondegenerate = idx.at("nondegenerate").get<bool>();
    r.index.certified = idx.at("certified").get<bool>();
    r.index.mesh_N = idx.at("mesh_n").get<int>();
    r.index.conjugate_times =
        idx.at("conjugate_times").get<std::vector<double>>();
    for (const auto& cj : j.at("bounds"))
        r.bound_report.push_back({cj.at("id").get<std::string>(),
                                  cj.at("lhs").get<double>(),
                                  cj.at("rhs").get<double>()});
    for (const auto& xj : j.at("x_samples"))
        r.x_samples.push_back(vec_from_json(xj));
    r.y_samples = j.at("y_samples").get<std::vector<double>>();
    r.eta_samples = j.at("eta_samples").get<std::vector<double>>();
    return r;
}

inline Json records_to_json(const std::vector<GeodesicRecord>& recs) {
    Json j = Json::array();
    for (const auto& r : recs) j.push_back(record_to_json(r));
    return j;
}

inline std::vector<GeodesicRecord> records_from_json(const Json& j) {
    std::vector<GeodesicRecord> out;
    for (const auto& rj : j) out.push_back(record_from_json(rj));
    return out;
}

inline Json complex_to_json(const MorseComplexData& d) {
    Json j;
    j["coeff"] = d.coeff == CoeffMode::Z ? "z" : "z2";
    Json gens;
    for (const auto& [k, ids] : d.generators)
        gens[std::to_string(k)] = ids;
    j["generators"] = gens;
    j["gen_index"] = d.gen_index;
    j["gen_energy"] = d.gen_energy;
    j["dims"] = d.chain.dims;
    Json bnd;
    for (const auto& [k, M] : d.chain.boundary) {
        Json rows = Json::array();
        for (const auto& row : M) {
            Json rj = Json::array();
            for (const auto& v : row) rj.push_back(v.str());
            rows.push_back(rj);
        }
        bnd[std::to_string(k)] = rows;
    }
    j["boundary"] = bnd;
    Json census = Json::array();
    for (const auto& ce : d.census) {
        Json cj;
        cj["from"] = ce.from;
        cj["to"] = ce.to;
        cj["count"] = ce.orbits.size();
        Json orbs = Json::array();
        for (const auto& o : ce.orbits) {
            Json oj;
            oj["sign"] = o.sign;
            oj["miss"] = o.miss;
            oj["crossing"] = to_json(o.crossing);
            orbs.push_back(oj);
        }
        cj["orbits"] = orbs;
        cj["transversality_flag"] = ce.transversality_flag;
        cj["count_stable"] = ce.count_stable;
        census.push_back(cj);
    }
    j["census"] = census;
    j["validity_window"] = d.validity_window;
    return j;
}

inline MorseComplexData complex_from_json(const Json& j) {
    MorseComplexData d;
    d.coeff = j.at("coeff").get<std::string>() == "z" ? CoeffMode::Z
                                                      : CoeffMode::Z2;
    for (const auto& [k, ids] : j.at("generators").items())
        d.generators[std::stoi(k)] = ids.get<std::vector<int>>();
    d.gen_index = j.at("gen_index").get<std::vector<int>>();
    d.gen_energy = j.at("gen_energy").get<std::vector<double>>();
    d.chain.dims = j.at("dims").get<std::vector<int>>();
    for (const auto& [k, rows] : j.at("boundary").items()) {
        IntMat M;
        for (const auto& rj : rows) {
            std::vector<BigInt> row;
            for (const auto& v : rj) row.push_back(BigInt(v.get<std::string>()));
            M.push_back(std::move(row));
        }
        d.chain.boundary[std::stoi(k)] = std::move(M);
    }
    d.validity_window = j.at("validity_window").get<int>();
    return d;
}

inline Json homology_to_json(const HomologyResult& h) {
    Json j;
    j["coeff"] = h.coeff == CoeffMode::Z ? "z" : "z2";
    j["validity_window"] = h.validity_window;
    Json groups = Json::array();
    for (const auto& g : h.groups) {
        Json gj;
        gj["betti"] = g.betti;
        Json t = Json::array();
        for (const auto& d : g.torsion) t.push_back(d.str());
        gj["torsion"] = t;
        groups.push_back(gj);
    }
    j["groups"] = groups;
    return j;
}

inline HomologyResult homology_from_json(const Json& j) {
    HomologyResult h;
    h.coeff = j.at("coeff").get<std::string>() == "z" ? CoeffMode::Z
                                                      : CoeffMode::Z2;
    h.validity_window = j.at("validity_window").get<int>();
    for (const auto& gj : j.at("groups")) {
        HomologyGroup g;
        g.betti = gj.at("betti").get<int>();
        for (const auto& t : gj.at("torsion"))
            g.torsion.push_back(BigInt(t.get<std::string>()));
        h.groups.push_back(std::move(g));
    }
    return h;
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return Json::parse(in);
}

}  // namespace lmc
