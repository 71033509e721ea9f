#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzmorse/metric.hpp"

namespace lmc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value run configuration ("key = value" lines, '#' comments).
struct RunConfig {
    std::string manifold = "circle";
    std::string metric_a = "const:1";   // profile specs, see parse_profile
    std::string metric_b = "const:1";
    std::vector<double> x0, x1;
    double y0 = 0.0, y1 = 0.0;
    double s0 = 1.0;
    double ab_a = -1.0, ab_b = -1.0;    // < 0: estimate from the metric
    int mesh_n = 32;
    double cap = 10.0;
    int halton_seeds = 100;
    unsigned seed = 1;
    std::string coeff = "z2";
    std::string out_dir = ".";
    double newton_tol = 1e-10;
    double ivp_tol = 1e-11;
    double rest_tol = 1e-7;
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v[i]);
    }
    return s;
}

inline std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace detail

// "const:<c>", "cos:<c0>,<eps>[,<freq>]", "gauss:<c0>,<eps>",
// "poly:<c0>,<c1>,..."
inline Profile parse_profile(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("profile spec missing ':' in \"" + spec + "\"");
    std::string kind = spec.substr(0, colon);
    auto args = detail::split_doubles(spec.substr(colon + 1));
    if (kind == "const" && args.size() == 1) return constant_profile(args[0]);
    if (kind == "cos" && args.size() == 2)
        return cos_profile(args[0], args[1]);
    if (kind == "cos" && args.size() == 3)
        return cos_profile(args[0], args[1], args[2]);
    if (kind == "gauss" && args.size() == 2)
        return gauss_profile(args[0], args[1]);
    if (kind == "poly" && !args.empty()) return poly_profile(args);
    throw ConfigError("bad profile spec \"" + spec + "\"");
}

inline SplitMetric metric_from_config(const RunConfig& c) {
    SplitMetric m(Manifold(manifold_from_string(c.manifold)),
                  parse_profile(c.metric_a), parse_profile(c.metric_b),
                  c.metric_a + "|" + c.metric_b);
    m.mark_product(c.metric_a.rfind("const:", 0) == 0 &&
                   c.metric_b.rfind("const:", 0) == 0);
    return m;
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "manifold = " << c.manifold << "\n"
       << "metric_a = " << c.metric_a << "\n"
       << "metric_b = " << c.metric_b << "\n"
       << "x0 = " << detail::join_doubles(c.x0) << "\n"
       << "x1 = " << detail::join_doubles(c.x1) << "\n"
       << "y0 = " << format_double(c.y0) << "\n"
       << "y1 = " << format_double(c.y1) << "\n"
       << "s0 = " << format_double(c.s0) << "\n"
       << "ab_a = " << format_double(c.ab_a) << "\n"
       << "ab_b = " << format_double(c.ab_b) << "\n"
       << "mesh_n = " << c.mesh_n << "\n"
       << "cap = " << format_double(c.cap) << "\n"
       << "halton_seeds = " << c.halton_seeds << "\n"
       << "seed = " << c.seed << "\n"
       << "coeff = " << c.coeff << "\n"
       << "out_dir = " << c.out_dir << "\n"
       << "newton_tol = " << format_double(c.newton_tol) << "\n"
       << "ivp_tol = " << format_double(c.ivp_tol) << "\n"
       << "rest_tol = " << format_double(c.rest_tol) << "\n";
    return os.str();
}

inline RunConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto strip = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            size_t b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    auto require = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw ConfigError("missing required key: " + key);
        return it->second;
    };
    auto optional = [&](const std::string& key, const std::string& dflt) {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : it->second;
    };
    RunConfig c;
    c.manifold = require("manifold");
    c.metric_a = require("metric_a");
    c.metric_b = require("metric_b");
    c.x0 = detail::split_doubles(require("x0"));
    c.x1 = detail::split_doubles(require("x1"));
    c.y0 = std::stod(require("y0"));
    c.y1 = std::stod(require("y1"));
    c.s0 = std::stod(require("s0"));
    c.ab_a = std::stod(optional("ab_a", "-1"));
    c.ab_b = std::stod(optional("ab_b", "-1"));
    c.mesh_n = std::stoi(optional("mesh_n", "32"));
    c.cap = std::stod(optional("cap", "10"));
    c.halton_seeds = std::stoi(optional("halton_seeds", "100"));
    c.seed = static_cast<unsigned>(std::stoul(optional("seed", "1")));
    c.coeff = optional("coeff", "z2");
    c.out_dir = optional("out_dir", ".");
    c.newton_tol = std::stod(optional("newton_tol", "1e-10"));
    c.ivp_tol = std::stod(optional("ivp_tol", "1e-11"));
    c.rest_tol = std::stod(optional("rest_tol", "1e-7"));

    if (c.newton_tol <= 0 || c.ivp_tol <= 0 || c.rest_tol <= 0)
        throw ConfigError("tolerances must be positive");
    if (c.s0 <= 0) throw ConfigError("s0 must be positive");
    if (std::abs(c.y0) >= c.s0 || std::abs(c.y1) >= c.s0)
        throw ConfigError("endpoints must lie inside the open slab |y| < s0");
    if (c.coeff != "z" && c.coeff != "z2")
        throw ConfigError("coeff must be z or z2");
    // validates the manifold / profile names early
    metric_from_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace lmc
