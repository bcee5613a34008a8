#include "gsmpm/config.hpp"

#include "gsmpm/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsmpm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw ValidationError("config field " + path + ": " + what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ValidationError("config: unknown key \"" + (path.empty() ? key : path + "." + key) +
                                  "\"");
        }
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) bad_field(path, "expected an array of 3 numbers");
    return Vec3(get_number(j[0], path), get_number(j[1], path), get_number(j[2], path));
}

ForceDirective parse_directive(const json& j, const std::string& path) {
    if (!j.is_object()) bad_field(path, "expected an object");
    reject_unknown_keys(j, {"kind", "vector", "window", "region"}, path);

    ForceDirective d;
    if (!j.contains("kind")) bad_field(path + ".kind", "required");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "set_velocity") {
        d.kind = ForceKind::SetVelocity;
    } else if (kind == "newtonian_force") {
        d.kind = ForceKind::NewtonianForce;
    } else {
        bad_field(path + ".kind", "must be set_velocity or newtonian_force");
    }

    if (!j.contains("vector")) bad_field(path + ".vector", "required");
    d.vector = get_vec3(j.at("vector"), path + ".vector");

    if (!j.contains("window")) bad_field(path + ".window", "required");
    const json& window = j.at("window");
    if (!window.is_array() || window.size() != 2) {
        bad_field(path + ".window", "expected [t_start, t_end]");
    }
    d.t_start = get_number(window[0], path + ".window");
    d.t_end = get_number(window[1], path + ".window");

    if (j.contains("region") && !(j.at("region").is_string() && j.at("region") == "all")) {
        const json& region = j.at("region");
        if (!region.is_object() || !region.contains("box")) {
            bad_field(path + ".region", "expected \"all\" or {\"box\": {\"min\": [...], \"max\": [...]}}");
        }
        reject_unknown_keys(region, {"box"}, path + ".region");
        const json& box = region.at("box");
        reject_unknown_keys(box, {"min", "max"}, path + ".region.box");
        if (!box.contains("min") || !box.contains("max")) {
            bad_field(path + ".region.box", "min and max are required");
        }
        BoxRegion b;
        b.min = get_vec3(box.at("min"), path + ".region.box.min");
        b.max = get_vec3(box.at("max"), path + ".region.box.max");
        d.region = b;
    }

    try {
        d.validate();
    } catch (const ValidationError& e) {
        bad_field(path, e.what());
    }
    return d;
}

}  // namespace

SimulationConfig SimulationConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config root must be a JSON object");

    reject_unknown_keys(j,
                        {"input_ply", "output_dir", "frames", "frame_dt", "grid", "material",
                         "gravity", "dt_max", "forces", "deterministic", "seed"},
                        "");

    SimulationConfig cfg;
    if (!j.contains("input_ply")) bad_field("input_ply", "required");
    if (!j.at("input_ply").is_string()) bad_field("input_ply", "expected a string path");
    cfg.input_ply = j.at("input_ply").get<std::string>();
    if (!j.contains("output_dir")) bad_field("output_dir", "required");
    if (!j.at("output_dir").is_string()) bad_field("output_dir", "expected a string path");
    cfg.output_dir = j.at("output_dir").get<std::string>();

    if (j.contains("frames")) {
        if (!j.at("frames").is_number_integer()) bad_field("frames", "expected an integer");
        cfg.frames = j.at("frames").get<int>();
    }
    if (j.contains("frame_dt")) cfg.frame_dt = get_number(j.at("frame_dt"), "frame_dt");
    if (j.contains("dt_max")) cfg.dt_max = get_number(j.at("dt_max"), "dt_max");
    if (j.contains("gravity")) cfg.gravity = get_vec3(j.at("gravity"), "gravity");
    if (j.contains("deterministic")) {
        if (!j.at("deterministic").is_boolean()) bad_field("deterministic", "expected a boolean");
        cfg.deterministic = j.at("deterministic").get<bool>();
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
            bad_field("seed", "expected an integer");
        }
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (!g.is_object()) bad_field("grid", "expected an object");
        reject_unknown_keys(g, {"resolution", "boundary_width", "boundary_kind"}, "grid");
        if (g.contains("resolution")) {
            if (!g.at("resolution").is_number_integer()) {
                bad_field("grid.resolution", "expected an integer");
            }
            cfg.grid.resolution = g.at("resolution").get<int>();
        }
        if (g.contains("boundary_width")) {
            if (!g.at("boundary_width").is_number_integer()) {
                bad_field("grid.boundary_width", "expected an integer");
            }
            cfg.grid.boundary_width = g.at("boundary_width").get<int>();
        }
        if (g.contains("boundary_kind")) {
            const std::string kind = g.at("boundary_kind").get<std::string>();
            if (kind == "sticky") {
                cfg.grid.boundary_kind = BoundaryKind::Sticky;
            } else if (kind == "slip") {
                cfg.grid.boundary_kind = BoundaryKind::Slip;
            } else {
                bad_field("grid.boundary_kind", "must be sticky or slip");
            }
        }
    }

    if (j.contains("material")) {
        const json& m = j.at("material");
        if (!m.is_object()) bad_field("material", "expected an object");
        reject_unknown_keys(m, {"density", "youngs_modulus", "poissons_ratio"}, "material");
        if (m.contains("density")) cfg.material.density = get_number(m.at("density"), "material.density");
        if (m.contains("youngs_modulus")) {
            cfg.material.youngs_modulus = get_number(m.at("youngs_modulus"), "material.youngs_modulus");
        }
        if (m.contains("poissons_ratio")) {
            cfg.material.poissons_ratio = get_number(m.at("poissons_ratio"), "material.poissons_ratio");
        }
    }

    if (j.contains("forces")) {
        const json& forces = j.at("forces");
        if (!forces.is_array()) bad_field("forces", "expected an array");
        for (std::size_t i = 0; i < forces.size(); ++i) {
            cfg.forces.directives.push_back(
                parse_directive(forces[i], "forces[" + std::to_string(i) + "]"));
        }
    }

    cfg.validate();
    return cfg;
}

SimulationConfig SimulationConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void SimulationConfig::validate() const {
    if (frames < 1) bad_field("frames", "must be >= 1");
    if (!(frame_dt > 0.0)) bad_field("frame_dt", "must be > 0");
    if (!(dt_max > 0.0)) bad_field("dt_max", "must be > 0");
    if (!gravity.allFinite()) bad_field("gravity", "must be finite");
    try {
        grid.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config field ") + e.what());
    }
    try {
        material.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config field ") + e.what());
    }
    forces.validate();
}

std::string SimulationConfig::to_canonical_json() const {
    ordered_json forces_json = ordered_json::array();
    for (const ForceDirective& d : forces.directives) {
        ordered_json dj;
        dj["kind"] = d.kind == ForceKind::SetVelocity ? "set_velocity" : "newtonian_force";
        dj["vector"] = {d.vector.x(), d.vector.y(), d.vector.z()};
        dj["window"] = {d.t_start, d.t_end};
        if (d.region) {
            dj["region"] = {{"box",
                             {{"min", {d.region->min.x(), d.region->min.y(), d.region->min.z()}},
                              {"max", {d.region->max.x(), d.region->max.y(), d.region->max.z()}}}}};
        } else {
            dj["region"] = "all";
        }
        forces_json.push_back(dj);
    }

    ordered_json j;
    j["input_ply"] = input_ply.string();
    j["output_dir"] = output_dir.string();
    j["frames"] = frames;
    j["frame_dt"] = frame_dt;
    j["grid"] = {{"resolution", grid.resolution},
                 {"boundary_width", grid.boundary_width},
                 {"boundary_kind", grid.boundary_kind == BoundaryKind::Sticky ? "sticky" : "slip"}};
    j["material"] = {{"density", material.density},
                     {"youngs_modulus", material.youngs_modulus},
                     {"poissons_ratio", material.poissons_ratio}};
    j["gravity"] = {gravity.x(), gravity.y(), gravity.z()};
    j["dt_max"] = dt_max;
    j["forces"] = forces_json;
    j["deterministic"] = deterministic;
    j["seed"] = seed;
    return j.dump();
}

std::uint64_t SimulationConfig::fingerprint() const {
    // FNV-1a 64-bit over the canonical JSON text.
    const std::string text = to_canonical_json();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

int worker_threads() {
    const char* env = std::getenv("GSPLATMPM_THREADS");
    if (env == nullptr || *env == '\0') return static_cast<int>(std::thread::hardware_concurrency());
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
        throw ValidationError("GSPLATMPM_THREADS must be a non-negative integer");
    }
    if (v == 0) return static_cast<int>(std::thread::hardware_concurrency());
    return static_cast<int>(v);
}

void apply_thread_cap() {
#ifdef _OPENMP
    omp_set_num_threads(worker_threads());
#endif
}

}  // namespace gsmpm
