#pragma once

// File formats: CSV field export with 17-significant-digit values, JSON run
// configuration, dislocation config schema and solution manifests. All
// output is deterministic for a fixed config and seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cracklat/crack_solver.hpp"
#include "cracklat/dislocation.hpp"
#include "cracklat/greens.hpp"

namespace cracklat {

using ordered_json = nlohmann::ordered_json;

inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Green's field CSV: header comments, then one `l1,l2,value` row per stored
// site inside the truncation disk.
inline std::string greens_csv(const GreensField& f) {
    std::ostringstream out;
    out << "# source=" << f.source.i << "," << f.source.j << " radius=" << f.radius
        << " tol=" << format17(f.tol) << " residual=" << format17(f.solve_residual) << "\n";
    if (!f.boundary_scheme.empty()) out << "# boundary=" << f.boundary_scheme << "\n";
    out << "l1,l2,value\n";
    const std::int64_t R2 = std::int64_t(f.radius) * f.radius;
    f.field.for_each_stored([&](DualSite l, CellKind, double v) {
        if (std::int64_t(l.i) * l.i + std::int64_t(l.j) * l.j > R2) return;
        out << l.i << "," << l.j << "," << format17(v) << "\n";
    });
    return out.str();
}

inline void write_greens_csv(const std::filesystem::path& path, const GreensField& f) {
    write_text_file(path, greens_csv(f));
}

struct FieldCsv {
    std::map<std::string, std::string> meta;
    std::vector<std::tuple<int, int, double>> rows;
};

inline FieldCsv read_field_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    FieldCsv out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string token;
            while (ls >> token) {
                const auto eq = token.find('=');
                if (eq != std::string::npos)
                    out.meta[token.substr(0, eq)] = token.substr(eq + 1);
            }
            continue;
        }
        if (line.rfind("l1,", 0) == 0 || line.rfind("i,", 0) == 0) continue;  // column header
        std::istringstream ls(line);
        int a, b;
        double v;
        char comma;
        if (ls >> a >> comma >> b >> comma >> v) out.rows.push_back({a, b, v});
    }
    return out;
}

// Displacement CSV: `i,j,value` rows over the field's occupied sites.
inline std::string displacement_csv(const DisplacementField& y) {
    std::ostringstream out;
    out << "# field=displacement gauge=" << y.gauge.i << "," << y.gauge.j
        << " window=" << format17(y.values.window_radius()) << "\n";
    out << "i,j,value\n";
    y.values.for_each(
        [&](PrimalSite s, double v) { out << s.i << "," << s.j << "," << format17(v) << "\n"; });
    return out.str();
}

inline void write_displacement_csv(const std::filesystem::path& path, const DisplacementField& y) {
    write_text_file(path, displacement_csv(y));
}

inline DisplacementField read_displacement_csv(const std::filesystem::path& path) {
    const FieldCsv csv = read_field_csv(path);
    DisplacementField y;
    const auto g = csv.meta.find("gauge");
    if (g != csv.meta.end()) std::sscanf(g->second.c_str(), "%d,%d", &y.gauge.i, &y.gauge.j);
    double window = 0.0;
    const auto w = csv.meta.find("window");
    if (w != csv.meta.end()) window = std::stod(w->second);
    y.values = PrimalField(window);
    for (const auto& [i, j, v] : csv.rows) y.values.set({i, j}, v);
    return y;
}

// Strain CSV: one `tail_i,tail_j,dir,alpha` row per positively oriented bond.
inline std::string strain_csv(const StrainForm& alpha) {
    std::ostringstream out;
    out << "# field=strain radius=" << alpha.radius() << "\n";
    out << "tail_i,tail_j,dir,alpha\n";
    alpha.for_each_present([&](const Bond& b, double a) {
        out << b.tail.i << "," << b.tail.j << "," << to_string(b.dir) << "," << format17(a) << "\n";
    });
    return out.str();
}

inline void write_strain_csv(const std::filesystem::path& path, const StrainForm& alpha) {
    write_text_file(path, strain_csv(alpha));
}

inline StrainForm read_strain_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    int radius = 0;
    std::vector<std::tuple<int, int, bool, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("radius=");
            if (pos != std::string::npos) radius = std::atoi(line.c_str() + pos + 7);
            continue;
        }
        if (line.rfind("tail_i", 0) == 0) continue;
        int i, j;
        char dir[8] = {};
        double a;
        if (std::sscanf(line.c_str(), "%d,%d,%7[^,],%lf", &i, &j, dir, &a) == 4)
            rows.push_back({i, j, std::string(dir) == "+e2", a});
    }
    StrainForm alpha(radius);
    for (const auto& [i, j, vertical, a] : rows) {
        if (vertical)
            alpha.set_vertical(i, j, a);
        else
            alpha.set_horizontal(i, j, a);
    }
    return alpha;
}

inline ordered_json cores_to_json(const DislocationConfig& cfg) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : cfg.cores)
        arr.push_back(ordered_json{{"x", c.site.i}, {"y", c.site.j}, {"b", c.b}});
    return arr;
}

inline DislocationConfig cores_from_json(const ordered_json& arr) {
    DislocationConfig cfg;
    for (const auto& item : arr)
        cfg.cores.push_back({{item.at("x").get<int>(), item.at("y").get<int>()},
                             item.at("b").get<int>()});
    cfg.validate();
    return cfg;
}

struct RunConfig {
    double lambda = 1.0;
    double K = 0.0;
    int radius = 128;
    double tol = 1e-10;
    long max_iter = 100;
    double min_separation = 0.0;  // 0 disables the core-separation check
    DislocationConfig cores;
    std::filesystem::path output_dir = ".";
    std::uint64_t seed = 1;
    bool radius_from_config = false;

    void validate() const {
        if (radius < 32) throw std::invalid_argument("config: radius must be at least 32");
        if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
        if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be positive");
        if (K < 0.0) throw std::invalid_argument("config: K must be nonnegative");
        cores.validate();
        for (const auto& c : cores.cores)
            if (c.site.position().norm() >= 0.5 * radius)
                throw std::invalid_argument("config: core not inside radius/2");
        if (min_separation > 0.0 && !min_separation_ok(cores.core_sites(), min_separation))
            throw std::invalid_argument("config: cores violate the minimum separation");
    }
};

inline RunConfig parse_run_config(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    RunConfig c;
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("K")) c.K = j["K"].get<double>();
    if (j.contains("radius")) {
        c.radius = j["radius"].get<int>();
        c.radius_from_config = true;
    }
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<long>();
    if (j.contains("min_separation")) c.min_separation = j["min_separation"].get<double>();
    if (j.contains("cores")) c.cores = cores_from_json(j["cores"]);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
}

inline ordered_json solution_manifest(const Solution& sol, const std::string& displacement_file) {
    ordered_json j;
    j["K"] = sol.K;
    j["lambda"] = sol.lambda;
    j["radius"] = sol.radius;
    j["tol"] = sol.tol;
    j["cores"] = cores_to_json(sol.config);
    j["residual"] = sol.residual_max;
    j["support_residual"] = sol.support_residual;
    j["margin"] = sol.margin;
    j["newton_iterations"] = sol.newton_iterations;
    j["linear_iterations"] = sol.linear_iterations;
    j["green_residual"] = sol.green_residual;
    j["displacement_csv"] = displacement_file;
    return j;
}

}  // namespace cracklat
