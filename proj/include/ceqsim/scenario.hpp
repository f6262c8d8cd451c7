#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ceqsim/common.hpp"
#include "ceqsim/control.hpp"
#include "ceqsim/dynamics.hpp"
#include "ceqsim/network.hpp"

namespace ceqsim {

// Raw parsed scenario document: ordered sections of key/value pairs.
// Section names: network, demand, simulation, experiment, controller.<name>.
struct ScenarioDoc {
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections;

    Section* find(const std::string& name) {
        for (auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const Section* find(const std::string& name) const {
        for (auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        Section* s = find(section);
        if (!s) {
            sections.push_back({section, {}});
            s = &sections.back();
        }
        for (auto& [k, v] : s->entries)
            if (k == key) {
                v = value;
                return;
            }
        s->entries.emplace_back(key, value);
    }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto& s : sections) {
            os << "[" << s.name << "]\n";
            for (const auto& [k, v] : s.entries) os << k << " = " << v << "\n";
            os << "\n";
        }
        return os.str();
    }

    // FNV-1a over the canonical serialization.
    std::string hash_hex() const {
        std::string text = serialize();
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : text) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

inline ScenarioDoc parse_scenario_text(const std::string& text) {
    ScenarioDoc doc;
    std::istringstream is(text);
    std::string line;
    std::string current;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
        s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
        return s;
    };
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("scenario line " + std::to_string(lineno) + ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ConfigError("scenario line " + std::to_string(lineno) + ": empty section name");
            if (!doc.find(current)) doc.sections.push_back({current, {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("scenario line " + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            throw ConfigError("scenario line " + std::to_string(lineno) + ": key outside any section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("scenario line " + std::to_string(lineno) + ": empty key");
        for (auto& [k, v] : doc.find(current)->entries)
            if (k == key)
                throw ConfigError("scenario: duplicate key '" + key + "' in [" + current + "]");
        doc.find(current)->entries.emplace_back(key, value);
    }
    return doc;
}

inline ScenarioDoc parse_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_scenario_text(buf.str());
}

// Dotted-key override: section.key, controller.<name>.key, demand.onramp.<id>.
inline void apply_override(ScenarioDoc& doc, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be KEY=VALUE: " + spec);
    std::string key = spec.substr(0, eq);
    std::string value = spec.substr(eq + 1);
    auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError("override key must be dotted: " + key);
    std::string section = key.substr(0, dot);
    std::string rest = key.substr(dot + 1);
    if (section == "controller") {
        auto dot2 = rest.find('.');
        if (dot2 == std::string::npos)
            throw ConfigError("controller override needs controller.<name>.<key>: " + key);
        section = "controller." + rest.substr(0, dot2);
        rest = rest.substr(dot2 + 1);
    }
    doc.set(section, rest, value);
}

enum class ControllerKind { NoControl, Alinea, Metaline, CeqAlinea };

inline std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::NoControl: return "no_control";
        case ControllerKind::Alinea: return "alinea";
        case ControllerKind::Metaline: return "metaline";
        case ControllerKind::CeqAlinea: return "ceq_alinea";
    }
    return "?";
}

struct ControllerSpec {
    std::string name;
    ControllerKind kind = ControllerKind::NoControl;
    ControllerConfig cfg;
    MetalineConfig metaline;
};

enum class Objective { MaxThroughput, MinTotalDelay };

struct GridSpec {
    std::map<std::string, std::vector<std::string>> values; // param -> candidates
    Objective objective = Objective::MaxThroughput;
    int seeds_per_point = 1;
    int budget = 256; // max (point, seed) runs
    std::string base_controller;
};

struct SimParams {
    double dt_s = 6.0;
    double horizon_s = 7800.0;
    double warmup_s = 600.0;
    double cycle_s = 60.0;
    double eval_start_s = -1; // default: warmup_s
    double eval_end_s = -1;   // default: horizon_s
    double min_demand_share = 0.005;
    double max_queue_veh = 0.0;
    double cohort_bin_s = 300.0; // departure-bin width for trip aggregation
    std::vector<double> distance_bins_km;
};

struct Scenario {
    ScenarioDoc doc; // effective document (after overrides), for hashing
    Topology topology = Topology::Ring;
    int cells = 0;
    Cell cell;
    double discharge_headway_s = 0.5;
    int detector_offset_cells = 1;
    std::vector<RampNode> ramps;
    DemandProfile demand;
    double noise_frac = 0.1;
    SimParams sim;
    std::map<std::string, ControllerSpec> controllers;
    std::vector<std::uint64_t> seeds;
    std::string default_controller;
    std::vector<std::string> benchmark_controllers;
    GridSpec grid;

    FreewayNetwork build_network() const {
        return FreewayNetwork(topology, cells, cell.length_m, ramps);
    }
};

namespace detail {

inline double to_double(const std::string& section, const std::string& key,
                        const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": not a number: '" + v + "'");
    }
}

inline int to_int(const std::string& section, const std::string& key, const std::string& v) {
    double d = to_double(section, key, v);
    if (d != std::floor(d)) throw ConfigError("[" + section + "] " + key + ": not an integer");
    return static_cast<int>(d);
}

inline std::vector<std::string> tokens(const std::string& v) {
    std::istringstream is(v);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
    std::vector<std::uint64_t> out;
    for (const auto& t : tokens(v)) {
        auto dots = t.find("..");
        if (dots != std::string::npos) {
            std::uint64_t a = std::stoull(t.substr(0, dots));
            std::uint64_t b = std::stoull(t.substr(dots + 2));
            for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
        } else {
            out.push_back(std::stoull(t));
        }
    }
    return out;
}

inline bool starts_with(const std::string& s, const std::string& p) {
    return s.rfind(p, 0) == 0;
}

} // namespace detail

// Typed scenario construction with strict key validation: unknown sections
// or keys are errors, named in the diagnostic.
inline Scenario build_scenario(const ScenarioDoc& doc) {
    using detail::to_double;
    using detail::to_int;
    using detail::tokens;
    Scenario sc;
    sc.doc = doc;

    auto require = [&](const char* name) -> const ScenarioDoc::Section& {
        const auto* s = doc.find(name);
        if (!s) throw ConfigError("scenario: missing [" + std::string(name) + "] section");
        return *s;
    };

    // --- [network] ---
    {
        const auto& s = require("network");
        std::vector<std::pair<std::string, double>> on, off;
        for (const auto& [k, v] : s.entries) {
            if (k == "topology") {
                if (v == "ring") sc.topology = Topology::Ring;
                else if (v == "line") sc.topology = Topology::Line;
                else throw ConfigError("[network] topology: must be ring or line");
            } else if (k == "cells") sc.cells = to_int("network", k, v);
            else if (k == "cell_length_m") sc.cell.length_m = to_double("network", k, v);
            else if (k == "lanes") sc.cell.lanes = to_int("network", k, v);
            else if (k == "free_speed_kmh") sc.cell.free_speed_kmh = to_double("network", k, v);
            else if (k == "jam_density_vpkpl") sc.cell.jam_density_vpkpl = to_double("network", k, v);
            else if (k == "capacity_vphpl") sc.cell.capacity_vphpl = to_double("network", k, v);
            else if (k == "backward_wave_kmh") sc.cell.backward_wave_kmh = to_double("network", k, v);
            else if (k == "discharge_headway_s") sc.discharge_headway_s = to_double("network", k, v);
            else if (k == "detector_offset_cells") sc.detector_offset_cells = to_int("network", k, v);
            else if (k == "on_ramps" || k == "off_ramps") {
                for (const auto& t : tokens(v)) {
                    auto colon = t.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("[network] " + k + ": expected id:position_m, got '" + t + "'");
                    std::string id = t.substr(0, colon);
                    double pos = to_double("network", k, t.substr(colon + 1));
                    (k == "on_ramps" ? on : off).emplace_back(id, pos);
                }
            } else
                throw ConfigError("[network] unknown key: " + k);
        }
        if (sc.cells <= 0) throw ConfigError("[network] cells: required and positive");
        auto make_ramp = [&](const std::string& id, double pos, RampKind kind) {
            RampNode r;
            r.id = id;
            r.kind = kind;
            r.position_m = pos;
            r.attach_cell = static_cast<int>(pos / sc.cell.length_m);
            if (r.attach_cell >= sc.cells) r.attach_cell = sc.cells - 1;
            r.detector_cell = r.attach_cell;
            if (kind == RampKind::OnRamp) {
                r.metered = true;
                int det = r.attach_cell + sc.detector_offset_cells;
                r.detector_cell = (sc.topology == Topology::Ring)
                                      ? det % sc.cells
                                      : std::min(det, sc.cells - 1);
            }
            return r;
        };
        for (const auto& [id, pos] : on) sc.ramps.push_back(make_ramp(id, pos, RampKind::OnRamp));
        for (const auto& [id, pos] : off) sc.ramps.push_back(make_ramp(id, pos, RampKind::OffRamp));
    }

    // --- [demand] ---
    {
        const auto& s = require("demand");
        for (const auto& [k, v] : s.entries) {
            if (k == "noise_frac") sc.noise_frac = to_double("demand", k, v);
            else if (detail::starts_with(k, "onramp.") || k == "mainline") {
                std::string origin = (k == "mainline") ? "mainline" : k.substr(7);
                if (origin != "mainline") {
                    bool known = false;
                    for (const auto& r : sc.ramps)
                        if (r.id == origin && r.kind == RampKind::OnRamp) known = true;
                    if (!known) throw ConfigError("[demand] " + k + ": unknown on-ramp");
                }
                std::vector<DemandProfile::Piece> pieces;
                for (const auto& t : tokens(v)) {
                    auto colon = t.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("[demand] " + k + ": expected time:flow, got '" + t + "'");
                    pieces.push_back({to_double("demand", k, t.substr(0, colon)),
                                      to_double("demand", k, t.substr(colon + 1))});
                }
                sc.demand.inflow[origin] = std::move(pieces);
            } else if (detail::starts_with(k, "offramp.")) {
                std::string id = k.substr(8);
                bool known = false;
                for (const auto& r : sc.ramps)
                    if (r.id == id && r.kind == RampKind::OffRamp) known = true;
                if (!known) throw ConfigError("[demand] " + k + ": unknown off-ramp");
                sc.demand.off_split[id] = to_double("demand", k, v);
            } else
                throw ConfigError("[demand] unknown key: " + k);
        }
        sc.demand.validate();
    }

    // --- [simulation] ---
    {
        const auto& s = require("simulation");
        for (const auto& [k, v] : s.entries) {
            if (k == "dt_s") sc.sim.dt_s = to_double("simulation", k, v);
            else if (k == "horizon_s") sc.sim.horizon_s = to_double("simulation", k, v);
            else if (k == "warmup_s") sc.sim.warmup_s = to_double("simulation", k, v);
            else if (k == "cycle_s") sc.sim.cycle_s = to_double("simulation", k, v);
            else if (k == "eval_start_s") sc.sim.eval_start_s = to_double("simulation", k, v);
            else if (k == "eval_end_s") sc.sim.eval_end_s = to_double("simulation", k, v);
            else if (k == "min_demand_share") sc.sim.min_demand_share = to_double("simulation", k, v);
            else if (k == "max_queue_veh") sc.sim.max_queue_veh = to_double("simulation", k, v);
            else if (k == "cohort_bin_s") sc.sim.cohort_bin_s = to_double("simulation", k, v);
            else if (k == "distance_bins_km") {
                for (const auto& t : tokens(v))
                    sc.sim.distance_bins_km.push_back(to_double("simulation", k, t));
            } else
                throw ConfigError("[simulation] unknown key: " + k);
        }
        if (sc.sim.eval_start_s < 0) sc.sim.eval_start_s = sc.sim.warmup_s;
        if (sc.sim.eval_end_s < 0) sc.sim.eval_end_s = sc.sim.horizon_s;
        if (sc.sim.warmup_s >= sc.sim.horizon_s)
            throw ConfigError("[simulation] warmup_s must be below horizon_s");
        if (sc.sim.eval_start_s < sc.sim.warmup_s || sc.sim.eval_end_s > sc.sim.horizon_s ||
            sc.sim.eval_start_s >= sc.sim.eval_end_s)
            throw ConfigError("[simulation] evaluation window must lie within the post-warmup horizon");
        double ratio = sc.sim.cycle_s / sc.sim.dt_s;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ConfigError("[simulation] cycle_s must be an integer multiple of dt_s");
    }

    // --- [controller.<name>] sections ---
    for (const auto& s : doc.sections) {
        if (!detail::starts_with(s.name, "controller.")) continue;
        ControllerSpec spec;
        spec.name = s.name.substr(11);
        if (spec.name.empty()) throw ConfigError("scenario: empty controller name");
        spec.cfg.cycle_s = sc.sim.cycle_s;
        spec.cfg.gamma_s_per_veh = sc.discharge_headway_s;
        bool kind_seen = false;
        std::map<std::string, std::string> matrix_rows_k1, matrix_rows_k2;
        for (const auto& [k, v] : s.entries) {
            const std::string sect = s.name;
            if (k == "kind") {
                kind_seen = true;
                if (v == "no_control") spec.kind = ControllerKind::NoControl;
                else if (v == "alinea") spec.kind = ControllerKind::Alinea;
                else if (v == "metaline") spec.kind = ControllerKind::Metaline;
                else if (v == "ceq_alinea") spec.kind = ControllerKind::CeqAlinea;
                else throw ConfigError("[" + sect + "] kind: unknown controller kind '" + v + "'");
            } else if (k == "K") spec.cfg.K = to_double(sect, k, v);
            else if (k == "o_hat") spec.cfg.o_hat = to_double(sect, k, v);
            else if (k == "K_c") spec.cfg.K_c = to_double(sect, k, v);
            else if (k == "m") spec.cfg.m = to_int(sect, k, v);
            else if (k == "norm_mode") {
                if (v == "global") spec.cfg.norm_mode = NormMode::Global;
                else if (v == "local") spec.cfg.norm_mode = NormMode::Local;
                else throw ConfigError("[" + sect + "] norm_mode: must be global or local");
            } else if (k == "gamma_s_per_veh") spec.cfg.gamma_s_per_veh = to_double(sect, k, v);
            else if (k == "q_min") spec.cfg.q_min = to_double(sect, k, v);
            else if (k == "q_max") spec.cfg.q_max = to_double(sect, k, v);
            else if (k == "r_min") spec.cfg.r_min = to_double(sect, k, v);
            else if (k == "r_max") spec.cfg.r_max = to_double(sect, k, v);
            else if (k == "k1") spec.metaline.k1 = to_double(sect, k, v);
            else if (k == "k2") spec.metaline.k2 = to_double(sect, k, v);
            else if (detail::starts_with(k, "K1_row.")) matrix_rows_k1[k.substr(7)] = v;
            else if (detail::starts_with(k, "K2_row.")) matrix_rows_k2[k.substr(7)] = v;
            else
                throw ConfigError("[" + sect + "] unknown key: " + k);
        }
        if (!kind_seen) throw ConfigError("[" + s.name + "] missing key: kind");
        spec.metaline.base = spec.cfg;
        if (!matrix_rows_k1.empty() || !matrix_rows_k2.empty()) {
            // explicit matrices: rows keyed by on-ramp id, corridor order
            std::vector<std::string> order;
            for (const auto& r : sc.ramps)
                if (r.kind == RampKind::OnRamp) order.push_back(r.id);
            std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                double pa = 0, pb = 0;
                for (const auto& r : sc.ramps) {
                    if (r.id == a) pa = r.position_m;
                    if (r.id == b) pb = r.position_m;
                }
                return pa < pb;
            });
            auto parse_rows = [&](const std::map<std::string, std::string>& rows,
                                  std::size_t width) {
                std::vector<std::vector<double>> mat;
                for (const auto& id : order) {
                    auto it = rows.find(id);
                    if (it == rows.end())
                        throw ConfigError("[" + s.name + "] missing gain row for ramp " + id);
                    std::vector<double> row;
                    for (const auto& t : tokens(it->second))
                        row.push_back(to_double(s.name, "row " + id, t));
                    if (row.size() != width)
                        throw ConfigError("[" + s.name + "] gain row for " + id +
                                          " has wrong length");
                    mat.push_back(std::move(row));
                }
                return mat;
            };
            if (!matrix_rows_k1.empty())
                spec.metaline.K1 = parse_rows(matrix_rows_k1, static_cast<std::size_t>(sc.cells));
            if (!matrix_rows_k2.empty())
                spec.metaline.K2 = parse_rows(matrix_rows_k2, order.size());
        }
        sc.controllers[spec.name] = std::move(spec);
    }

    // --- [experiment] ---
    if (const auto* s = doc.find("experiment")) {
        for (const auto& [k, v] : s->entries) {
            if (k == "seeds") sc.seeds = detail::parse_seeds(v);
            else if (k == "controller") sc.default_controller = v;
            else if (k == "controllers") sc.benchmark_controllers = tokens(v);
            else if (k == "objective") {
                if (v == "max_throughput") sc.grid.objective = Objective::MaxThroughput;
                else if (v == "min_total_delay") sc.grid.objective = Objective::MinTotalDelay;
                else throw ConfigError("[experiment] objective: unknown '" + v + "'");
            } else if (k == "grid_seeds") sc.grid.seeds_per_point = to_int("experiment", k, v);
            else if (k == "budget") sc.grid.budget = to_int("experiment", k, v);
            else if (k == "grid_controller") sc.grid.base_controller = v;
            else if (detail::starts_with(k, "grid.")) sc.grid.values[k.substr(5)] = tokens(v);
            else
                throw ConfigError("[experiment] unknown key: " + k);
        }
    }
    if (sc.seeds.empty()) sc.seeds = {1};

    for (const auto& name : sc.benchmark_controllers)
        if (!sc.controllers.count(name))
            throw ConfigError("[experiment] controllers: no [controller." + name + "] section");
    if (!sc.default_controller.empty() && !sc.controllers.count(sc.default_controller))
        throw ConfigError("[experiment] controller: no [controller." + sc.default_controller +
                          "] section");

    // fail fast on geometry/CFL problems
    FreewayNetwork net = sc.build_network();
    sc.cell.validate();
    if (sc.sim.dt_s > sc.cell.length_m / (sc.cell.free_speed_kmh / 3.6) + 1e-12)
        throw ConfigError("[simulation] dt_s violates CFL: dt <= cell length / free speed");
    (void)net;
    return sc;
}

inline std::unique_ptr<Controller> make_controller(const FreewayNetwork& net,
                                                   const ControllerSpec& spec) {
    switch (spec.kind) {
        case ControllerKind::NoControl:
            return std::make_unique<NoControlController>(net, spec.cfg);
        case ControllerKind::Alinea:
            return std::make_unique<AlineaController>(net, spec.cfg);
        case ControllerKind::CeqAlinea:
            return std::make_unique<CeqAlineaController>(net, spec.cfg);
        case ControllerKind::Metaline:
            return std::make_unique<MetalineController>(net, spec.metaline);
    }
    throw ConfigError("unknown controller kind");
}

} // namespace ceqsim
