#pragma once

// Run configuration: strict JSON parsing, resolution of defaults, and the
// config hash stamped on every emitted record.

#include "gou/convexity.hpp"
#include "gou/diffusion.hpp"
#include "gou/errors.hpp"
#include "gou/harmonics.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gou {

using Json = nlohmann::json;

enum class Command { solve, verify, simulate, convexity };
enum class Format { csv, json };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::solve: return "solve";
        case Command::verify: return "verify";
        case Command::simulate: return "simulate";
        case Command::convexity: return "convexity";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    if (s == "solve") return Command::solve;
    if (s == "verify") return Command::verify;
    if (s == "simulate") return Command::simulate;
    if (s == "convexity") return Command::convexity;
    throw ConfigError("command: unknown command '" + s + "' (solve, verify, simulate, convexity)");
}

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ConfigError("format: expected 'csv' or 'json', got '" + s + "'");
}

struct GridSpec {
    std::vector<double> radii{1.0, 5.0, 50.0};
    int n_dirs = 8;
    bool residual = false;  ///< add the FD residual column
};

struct ExperimentSpec {
    std::string name;
    Json params = Json::object();
};

struct RunConfig {
    Command command = Command::verify;
    int dim = 2;
    Json boundary = Json{{"type", "builtin"}, {"name", "constant"}};
    int lmax = -1;  ///< < 0: tail-bound rule on the largest grid radius
    GridSpec grid;
    McConfig mc;
    ProbeConfig probe;
    std::map<std::string, double> tolerances{{"z_score", 3.0}, {"residual", 1e-5}};
    ExperimentSpec experiment;
    std::string output_path;
    Format format = Format::json;
};

namespace detail {

/// Rejects keys of `obj` outside `allowed`, naming the path.
inline void require_known(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!ok.count(it.key())) {
            throw ConfigError((where.empty() ? "" : where + ".") + it.key() + ": unknown field");
        }
    }
}

template <class T>
T get_field(const Json& obj, const std::string& where, const char* key) {
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + ": missing or of the wrong type");
    }
}

inline std::optional<Direction> parse_axis(const Json& obj, const std::string& where) {
    if (!obj.contains("axis")) return std::nullopt;
    const auto v = get_field<std::vector<double>>(obj, where, "axis");
    try {
        return Direction::from_vector(v);
    } catch (const std::exception& e) {
        throw ConfigError(where + ".axis: " + e.what());
    }
}

}  // namespace detail

/// Builds boundary data from its document; errors name the offending field.
inline BoundarySpec parse_boundary(const Json& doc, int dim, const std::string& where = "boundary") {
    if (!doc.is_object()) throw ConfigError(where + ": expected an object");
    const std::string type = detail::get_field<std::string>(doc, where, "type");
    if (doc.contains("d") && detail::get_field<int>(doc, where, "d") != dim) {
        throw ConfigError(where + ".d: does not match dim = " + std::to_string(dim));
    }
    const auto axis = detail::parse_axis(doc, where);
    if (axis && axis->dim() != dim) throw ConfigError(where + ".axis: wrong dimension");
    try {
        if (type == "builtin") {
            detail::require_known(doc, where, {"type", "name", "scale", "axis", "d"});
            const std::string name = detail::get_field<std::string>(doc, where, "name");
            Builtin b;
            try {
                b = parse_builtin(name);
            } catch (const std::exception& e) {
                throw ConfigError(where + ".name: " + e.what());
            }
            const double scale = doc.contains("scale") ? detail::get_field<double>(doc, where, "scale") : 1.0;
            return BoundarySpec::builtin(dim, b, scale, axis);
        }
        if (type == "spectrum") {
            detail::require_known(doc, where, {"type", "d", "terms", "axis"});
            if (!doc.contains("terms") || !doc["terms"].is_array()) throw ConfigError(where + ".terms: expected an array");
            std::vector<SpectrumTerm> terms;
            for (std::size_t i = 0; i < doc["terms"].size(); ++i) {
                const Json& t = doc["terms"][i];
                const std::string tw = where + ".terms[" + std::to_string(i) + "]";
                detail::require_known(t, tw, {"l", "kind", "coef"});
                const std::string kind = detail::get_field<std::string>(t, tw, "kind");
                TermKind k;
                if (kind == "cos") k = TermKind::cos;
                else if (kind == "sin") k = TermKind::sin;
                else if (kind == "zonal") k = TermKind::zonal;
                else throw ConfigError(tw + ".kind: expected cos, sin or zonal");
                terms.push_back({detail::get_field<int>(t, tw, "l"), k, detail::get_field<double>(t, tw, "coef")});
            }
            return BoundarySpec::spectrum(dim, std::move(terms), axis);
        }
        if (type == "zonal") {
            detail::require_known(doc, where, {"type", "d", "axis", "profile_coeffs"});
            return BoundarySpec::zonal(dim, detail::get_field<std::vector<double>>(doc, where, "profile_coeffs"), axis);
        }
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ".type: expected builtin, spectrum or zonal, got '" + type + "'");
}

inline McConfig parse_mc(const Json& doc, McConfig mc = {}) {
    detail::require_known(doc, "mc", {"n_paths", "dt", "t_max", "seed", "worker_streams", "max_exit_time", "exit_bridge"});
    if (doc.contains("n_paths")) mc.n_paths = detail::get_field<long>(doc, "mc", "n_paths");
    if (doc.contains("dt")) mc.dt = detail::get_field<double>(doc, "mc", "dt");
    if (doc.contains("t_max")) mc.t_max = detail::get_field<double>(doc, "mc", "t_max");
    if (doc.contains("seed")) mc.seed = detail::get_field<std::uint64_t>(doc, "mc", "seed");
    if (doc.contains("worker_streams")) mc.workers = detail::get_field<int>(doc, "mc", "worker_streams");
    if (doc.contains("max_exit_time")) mc.max_exit_time = detail::get_field<double>(doc, "mc", "max_exit_time");
    if (doc.contains("exit_bridge")) mc.exit_bridge = detail::get_field<bool>(doc, "mc", "exit_bridge");
    return mc;
}

inline ProbeConfig parse_probe(const Json& doc, ProbeConfig p = {}) {
    detail::require_known(doc, "probe", {"r_min", "r_max", "n_radii", "n_dirs", "h_fd", "eig_tol", "n_triples",
                                         "sample_radius", "tol_rel", "seed"});
    if (doc.contains("r_min")) p.r_min = detail::get_field<double>(doc, "probe", "r_min");
    if (doc.contains("r_max")) p.r_max = detail::get_field<double>(doc, "probe", "r_max");
    if (doc.contains("n_radii")) p.n_radii = detail::get_field<int>(doc, "probe", "n_radii");
    if (doc.contains("n_dirs")) p.n_dirs = detail::get_field<int>(doc, "probe", "n_dirs");
    if (doc.contains("h_fd")) p.h_fd = detail::get_field<double>(doc, "probe", "h_fd");
    if (doc.contains("eig_tol")) p.eig_tol = detail::get_field<double>(doc, "probe", "eig_tol");
    if (doc.contains("n_triples")) p.n_triples = detail::get_field<long>(doc, "probe", "n_triples");
    if (doc.contains("sample_radius")) p.sample_radius = detail::get_field<double>(doc, "probe", "sample_radius");
    if (doc.contains("tol_rel")) p.tol_rel = detail::get_field<double>(doc, "probe", "tol_rel");
    if (doc.contains("seed")) p.seed = detail::get_field<std::uint64_t>(doc, "probe", "seed");
    return p;
}

/// Strict parse of a run document. Unknown fields anywhere are errors.
inline RunConfig parse_run_config(const Json& doc) {
    detail::require_known(doc, "", {"command", "dim", "boundary", "lmax", "grid", "mc", "probe", "tolerances",
                                    "experiment", "output_path", "format"});
    RunConfig cfg;
    if (doc.contains("command")) cfg.command = parse_command(detail::get_field<std::string>(doc, "", "command"));
    if (doc.contains("dim")) cfg.dim = detail::get_field<int>(doc, "", "dim");
    if (cfg.dim < 2) throw ConfigError("dim: must be >= 2");
    if (doc.contains("boundary")) cfg.boundary = doc["boundary"];
    if (doc.contains("lmax")) cfg.lmax = detail::get_field<int>(doc, "", "lmax");
    if (cfg.lmax > kTailDegree) throw ConfigError("lmax: at most " + std::to_string(kTailDegree));
    if (doc.contains("grid")) {
        const Json& g = doc["grid"];
        detail::require_known(g, "grid", {"radii", "n_dirs", "residual"});
        if (g.contains("radii")) cfg.grid.radii = detail::get_field<std::vector<double>>(g, "grid", "radii");
        if (g.contains("n_dirs")) cfg.grid.n_dirs = detail::get_field<int>(g, "grid", "n_dirs");
        if (g.contains("residual")) cfg.grid.residual = detail::get_field<bool>(g, "grid", "residual");
        if (cfg.grid.radii.empty()) throw ConfigError("grid.radii: must not be empty");
        for (double r : cfg.grid.radii) if (!(r >= 0.0)) throw ConfigError("grid.radii: radii must be >= 0");
        if (cfg.grid.n_dirs < 1) throw ConfigError("grid.n_dirs: must be >= 1");
    }
    if (doc.contains("mc")) cfg.mc = parse_mc(doc["mc"]);
    if (doc.contains("probe")) cfg.probe = parse_probe(doc["probe"]);
    if (doc.contains("tolerances")) {
        const Json& t = doc["tolerances"];
        detail::require_known(t, "tolerances", {"z_score", "residual"});
        for (auto it = t.begin(); it != t.end(); ++it) {
            cfg.tolerances[it.key()] = detail::get_field<double>(t, "tolerances", it.key().c_str());
        }
    }
    if (doc.contains("experiment")) {
        const Json& e = doc["experiment"];
        detail::require_known(e, "experiment", {"name", "params"});
        cfg.experiment.name = detail::get_field<std::string>(e, "experiment", "name");
        if (e.contains("params")) cfg.experiment.params = e["params"];
        if (!cfg.experiment.params.is_object()) throw ConfigError("experiment.params: expected an object");
    }
    if (doc.contains("output_path")) cfg.output_path = detail::get_field<std::string>(doc, "", "output_path");
    if (doc.contains("format")) cfg.format = parse_format(detail::get_field<std::string>(doc, "", "format"));
    parse_boundary(cfg.boundary, cfg.dim);  // validate early
    cfg.mc.validate();
    cfg.probe.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    Json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

/// Resolved configuration with every default filled in. The worker count is
/// left out: it changes scheduling only, never results.
inline Json resolved_config(const RunConfig& cfg) {
    Json tol = Json::object();
    for (const auto& [k, v] : cfg.tolerances) tol[k] = v;
    return Json{
        {"command", command_name(cfg.command)},
        {"dim", cfg.dim},
        {"boundary", cfg.boundary},
        {"lmax", cfg.lmax},
        {"grid", {{"radii", cfg.grid.radii}, {"n_dirs", cfg.grid.n_dirs}, {"residual", cfg.grid.residual}}},
        {"mc",
         {{"n_paths", cfg.mc.n_paths},
          {"dt", cfg.mc.dt},
          {"t_max", cfg.mc.t_max},
          {"seed", cfg.mc.seed},
          {"max_exit_time", cfg.mc.max_exit_time},
          {"exit_bridge", cfg.mc.exit_bridge}}},
        {"probe",
         {{"r_min", cfg.probe.r_min},
          {"r_max", cfg.probe.r_max},
          {"n_radii", cfg.probe.n_radii},
          {"n_dirs", cfg.probe.n_dirs},
          {"h_fd", cfg.probe.h_fd},
          {"eig_tol", cfg.probe.eig_tol},
          {"n_triples", cfg.probe.n_triples},
          {"sample_radius", cfg.probe.sample_radius},
          {"tol_rel", cfg.probe.tol_rel},
          {"seed", cfg.probe.seed}}},
        {"tolerances", tol},
        {"experiment", {{"name", cfg.experiment.name}, {"params", cfg.experiment.params}}},
        {"format", cfg.format == Format::csv ? "csv" : "json"},
    };
}

/// 64-bit FNV-1a of the canonical dump of the resolved config, as 16 hex digits.
inline std::string config_hash(const Json& resolved) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : resolved.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gou
