#include "ionsim/experiment.hpp"

#include "ionsim/couplings.hpp"
#include "ionsim/decoherence.hpp"
#include "ionsim/dense_solver.hpp"
#include "ionsim/dmrg.hpp"
#include "ionsim/mpo.hpp"
#include "ionsim/observables.hpp"
#include "ionsim/spinwave.hpp"
#include "ionsim/trap.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

namespace ionsim {

namespace {

using nlohmann::json;

// ===== JSON schema helpers ===================================================

void reject_unknown_keys(const json& j, const char* block,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known)
            throw std::invalid_argument("config: unknown key '" + item.key() +
                                        "' in " + block + " block");
    }
}

const json& require_key(const json& j, const char* block, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::invalid_argument(std::string("config: missing key '") + key +
                                    "' in " + block + " block");
    return *it;
}

double as_number(const json& j, const char* where) {
    if (!j.is_number())
        throw std::invalid_argument(std::string("config: ") + where +
                                    " must be a number");
    return j.get<double>();
}

int as_int(const json& j, const char* where) {
    if (!j.is_number_integer())
        throw std::invalid_argument(std::string("config: ") + where +
                                    " must be an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const char* where) {
    if (!j.is_string())
        throw std::invalid_argument(std::string("config: ") + where +
                                    " must be a string");
    return j.get<std::string>();
}

// ===== Numeric formatting ====================================================

/// Shortest text that parses back to the same double; used for both the CSV
/// cells and the canonical config dump so outputs are byte-stable.
std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ===== Field grid ============================================================

std::vector<double> expand_field_range(double from, double to, double step) {
    if (!(step > 0.0))
        throw std::invalid_argument("config: field_range step must be positive");
    if (to < from)
        throw std::invalid_argument("config: field_range needs to >= from");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        double b = from + k * step;
        if (b > to + 0.5 * step) break;
        grid.push_back(std::min(b, to));
    }
    return grid;
}

} // namespace

// ===== Quantities ============================================================

const std::vector<std::string>& experiment_quantities() {
    static const std::vector<std::string> names = {
        "magnetization", "profile", "correlation", "entropy",
        "couplings",     "neel",    "fluct_x",     "spinwave",
    };
    return names;
}

// ===== Parsing ===============================================================

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: root must be an object");
    reject_unknown_keys(j, "root", {"model", "solver", "observables", "noise",
                                    "output", "seed"});
    ExperimentConfig cfg;

    const json& jm = require_key(j, "root", "model");
    if (!jm.is_object()) throw std::invalid_argument("config: model must be an object");
    reject_unknown_keys(jm, "model",
                        {"kind", "n", "variants", "field_grid", "field_range"});
    cfg.model.kind = as_string(require_key(jm, "model", "kind"), "model.kind");
    cfg.model.n = as_int(require_key(jm, "model", "n"), "model.n");

    const json& jv = require_key(jm, "model", "variants");
    if (!jv.is_array())
        throw std::invalid_argument("config: model.variants must be an array");
    for (const json& v : jv) {
        if (!v.is_object())
            throw std::invalid_argument("config: each variant must be an object");
        reject_unknown_keys(v, "variant",
                            {"label", "source", "exponent", "strength", "beta_x",
                             "normalize_center_bond"});
        CouplingVariant cv;
        cv.label = as_string(require_key(v, "variant", "label"), "variant.label");
        cv.source = as_string(require_key(v, "variant", "source"), "variant.source");
        if (v.contains("exponent")) cv.exponent = as_number(v["exponent"], "variant.exponent");
        if (v.contains("strength")) cv.strength = as_number(v["strength"], "variant.strength");
        if (v.contains("beta_x")) cv.beta_x = as_number(v["beta_x"], "variant.beta_x");
        if (v.contains("normalize_center_bond")) {
            if (!v["normalize_center_bond"].is_boolean())
                throw std::invalid_argument(
                    "config: variant.normalize_center_bond must be a boolean");
            cv.normalize_center_bond = v["normalize_center_bond"].get<bool>();
        }
        cfg.model.variants.push_back(std::move(cv));
    }

    const bool has_grid = jm.contains("field_grid");
    const bool has_range = jm.contains("field_range");
    if (has_grid == has_range)
        throw std::invalid_argument(
            "config: model needs exactly one of field_grid and field_range");
    if (has_grid) {
        const json& jg = jm["field_grid"];
        if (!jg.is_array())
            throw std::invalid_argument("config: model.field_grid must be an array");
        for (const json& b : jg)
            cfg.model.field_grid.push_back(as_number(b, "model.field_grid entry"));
    } else {
        const json& jr = jm["field_range"];
        if (!jr.is_object())
            throw std::invalid_argument("config: model.field_range must be an object");
        reject_unknown_keys(jr, "field_range", {"from", "to", "step"});
        cfg.model.field_grid = expand_field_range(
            as_number(require_key(jr, "field_range", "from"), "field_range.from"),
            as_number(require_key(jr, "field_range", "to"), "field_range.to"),
            as_number(require_key(jr, "field_range", "step"), "field_range.step"));
    }

    if (j.contains("solver")) {
        const json& js = j["solver"];
        if (!js.is_object())
            throw std::invalid_argument("config: solver must be an object");
        reject_unknown_keys(js, "solver",
                            {"method", "max_bond", "svd_cutoff", "energy_tol",
                             "max_sweeps", "min_sweeps", "max_iterations",
                             "lanczos_tol"});
        SolverConfig& s = cfg.solver;
        if (js.contains("method")) s.method = as_string(js["method"], "solver.method");
        if (js.contains("max_bond")) s.max_bond = as_int(js["max_bond"], "solver.max_bond");
        if (js.contains("svd_cutoff"))
            s.svd_cutoff = as_number(js["svd_cutoff"], "solver.svd_cutoff");
        if (js.contains("energy_tol"))
            s.energy_tol = as_number(js["energy_tol"], "solver.energy_tol");
        if (js.contains("max_sweeps")) s.max_sweeps = as_int(js["max_sweeps"], "solver.max_sweeps");
        if (js.contains("min_sweeps")) s.min_sweeps = as_int(js["min_sweeps"], "solver.min_sweeps");
        if (js.contains("max_iterations"))
            s.max_iterations = as_int(js["max_iterations"], "solver.max_iterations");
        if (js.contains("lanczos_tol"))
            s.lanczos_tol = as_number(js["lanczos_tol"], "solver.lanczos_tol");
    }

    if (j.contains("observables")) {
        const json& jo = j["observables"];
        if (!jo.is_object())
            throw std::invalid_argument("config: observables must be an object");
        reject_unknown_keys(jo, "observables",
                            {"quantities", "j0", "window_lo", "window_hi"});
        ObservablesConfig& o = cfg.observables;
        if (jo.contains("quantities")) {
            if (!jo["quantities"].is_array())
                throw std::invalid_argument(
                    "config: observables.quantities must be an array");
            for (const json& q : jo["quantities"])
                o.quantities.push_back(as_string(q, "observables.quantities entry"));
        }
        if (jo.contains("j0")) o.j0 = as_int(jo["j0"], "observables.j0");
        if (jo.contains("window_lo")) o.window_lo = as_int(jo["window_lo"], "observables.window_lo");
        if (jo.contains("window_hi")) o.window_hi = as_int(jo["window_hi"], "observables.window_hi");
    }
    if (cfg.observables.quantities.empty())
        cfg.observables.quantities = {"magnetization"};

    if (j.contains("noise")) {
        const json& jn = j["noise"];
        if (!jn.is_object())
            throw std::invalid_argument("config: noise must be an object");
        reject_unknown_keys(jn, "noise",
                            {"eta_x", "eta_y", "nbar", "omega_x", "omega_y", "time"});
        NoiseConfig nc;
        if (jn.contains("eta_x")) nc.eta_x = as_number(jn["eta_x"], "noise.eta_x");
        if (jn.contains("eta_y")) nc.eta_y = as_number(jn["eta_y"], "noise.eta_y");
        if (jn.contains("nbar")) nc.nbar = as_number(jn["nbar"], "noise.nbar");
        if (jn.contains("omega_x")) nc.omega_x = as_number(jn["omega_x"], "noise.omega_x");
        if (jn.contains("omega_y")) nc.omega_y = as_number(jn["omega_y"], "noise.omega_y");
        if (jn.contains("time")) nc.time = as_number(jn["time"], "noise.time");
        cfg.noise = nc;
    }

    if (j.contains("output")) {
        const json& jo = j["output"];
        if (!jo.is_object())
            throw std::invalid_argument("config: output must be an object");
        reject_unknown_keys(jo, "output", {"directory", "write_csv", "write_summary"});
        if (jo.contains("directory"))
            cfg.output.directory = as_string(jo["directory"], "output.directory");
        if (jo.contains("write_csv")) {
            if (!jo["write_csv"].is_boolean())
                throw std::invalid_argument("config: output.write_csv must be a boolean");
            cfg.output.write_csv = jo["write_csv"].get<bool>();
        }
        if (jo.contains("write_summary")) {
            if (!jo["write_summary"].is_boolean())
                throw std::invalid_argument("config: output.write_summary must be a boolean");
            cfg.output.write_summary = jo["write_summary"].get<bool>();
        }
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw std::invalid_argument("config: seed must be an integer");
        if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0)
            throw std::invalid_argument("config: seed must be non-negative");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json jv = json::array();
    for (const CouplingVariant& v : cfg.model.variants) {
        json e = {{"label", v.label}, {"source", v.source}};
        if (v.source == "trap") {
            e["beta_x"] = v.beta_x;
            e["normalize_center_bond"] = v.normalize_center_bond;
        } else {
            e["exponent"] = v.exponent;
            e["strength"] = v.strength;
        }
        jv.push_back(std::move(e));
    }
    json j = {
        {"model",
         {{"kind", cfg.model.kind},
          {"n", cfg.model.n},
          {"variants", std::move(jv)},
          {"field_grid", cfg.model.field_grid}}},
        {"solver",
         {{"method", cfg.solver.method},
          {"max_bond", cfg.solver.max_bond},
          {"svd_cutoff", cfg.solver.svd_cutoff},
          {"energy_tol", cfg.solver.energy_tol},
          {"max_sweeps", cfg.solver.max_sweeps},
          {"min_sweeps", cfg.solver.min_sweeps},
          {"max_iterations", cfg.solver.max_iterations},
          {"lanczos_tol", cfg.solver.lanczos_tol}}},
        {"observables",
         {{"quantities", cfg.observables.quantities},
          {"j0", cfg.observables.j0},
          {"window_lo", cfg.observables.window_lo},
          {"window_hi", cfg.observables.window_hi}}},
        {"output",
         {{"directory", cfg.output.directory},
          {"write_csv", cfg.output.write_csv},
          {"write_summary", cfg.output.write_summary}}},
        {"seed", cfg.seed},
    };
    if (cfg.noise) {
        j["noise"] = {{"eta_x", cfg.noise->eta_x},   {"eta_y", cfg.noise->eta_y},
                      {"nbar", cfg.noise->nbar},     {"omega_x", cfg.noise->omega_x},
                      {"omega_y", cfg.noise->omega_y}, {"time", cfg.noise->time}};
    }
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: parse error in '" + path + "': " +
                                    e.what());
    }
    return config_from_json(j);
}

// ===== Validation ============================================================

bool ValidationReport::ok() const {
    for (const ValidationMessage& m : messages)
        if (m.severity == ValidationMessage::Severity::Error) return false;
    return true;
}

std::vector<std::string> ValidationReport::errors() const {
    std::vector<std::string> out;
    for (const ValidationMessage& m : messages)
        if (m.severity == ValidationMessage::Severity::Error) out.push_back(m.text);
    return out;
}

std::vector<std::string> ValidationReport::warnings() const {
    std::vector<std::string> out;
    for (const ValidationMessage& m : messages)
        if (m.severity == ValidationMessage::Severity::Warning) out.push_back(m.text);
    return out;
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
    ValidationReport r;
    auto error = [&r](std::string t) {
        r.messages.push_back({ValidationMessage::Severity::Error, std::move(t)});
    };
    auto warning = [&r](std::string t) {
        r.messages.push_back({ValidationMessage::Severity::Warning, std::move(t)});
    };

    const bool ising = cfg.model.kind == "ising";
    const bool xy = cfg.model.kind == "xy";
    if (!ising && !xy)
        error("model.kind must be 'ising' or 'xy', got '" + cfg.model.kind + "'");
    if (cfg.model.n < 2) error("model.n must be at least 2");

    if (cfg.model.variants.empty()) error("model.variants must not be empty");
    std::set<std::string> labels;
    bool all_power_law = true;
    for (const CouplingVariant& v : cfg.model.variants) {
        if (v.label.empty()) error("variant labels must not be empty");
        if (!labels.insert(v.label).second)
            error("duplicate variant label '" + v.label + "'");
        if (v.source == "power_law") {
            if (!(v.exponent > 0.0))
                error("variant '" + v.label + "': exponent must be positive");
            if (!(v.strength > 0.0))
                error("variant '" + v.label + "': strength must be positive");
        } else if (v.source == "trap") {
            all_power_law = false;
            if (!(v.beta_x > 0.0))
                error("variant '" + v.label + "': beta_x must be positive");
            else if (v.beta_x >= 0.1)
                warning("variant '" + v.label +
                        "': beta_x >= 0.1 leaves the stiff-chain regime");
        } else {
            error("variant '" + v.label + "': source must be 'power_law' or 'trap'");
        }
    }

    if (cfg.model.field_grid.empty()) error("model field grid is empty");
    for (double b : cfg.model.field_grid) {
        if (!std::isfinite(b)) { error("field grid contains a non-finite value"); break; }
        if (xy && b < 0.0) { error("xy field grid values must be >= 0"); break; }
    }

    const bool dense = cfg.solver.method == "dense";
    const bool dmrg = cfg.solver.method == "dmrg";
    if (!dense && !dmrg)
        error("solver.method must be 'dense' or 'dmrg', got '" + cfg.solver.method + "'");
    if (dense && cfg.model.n > 16)
        error("dense solver supports at most 16 ions");
    if (dmrg) {
        if (cfg.solver.max_bond < 1) error("solver.max_bond must be at least 1");
        else if (cfg.solver.max_bond < 16)
            warning("bond dimension below validated range");
        if (!(cfg.solver.svd_cutoff > 0.0) || cfg.solver.svd_cutoff >= 1.0)
            error("solver.svd_cutoff must be in (0, 1)");
        if (!(cfg.solver.energy_tol > 0.0)) error("solver.energy_tol must be positive");
        if (cfg.solver.min_sweeps < 1 || cfg.solver.max_sweeps < cfg.solver.min_sweeps)
            error("solver sweep bounds need 1 <= min_sweeps <= max_sweeps");
    }
    if (dense) {
        if (cfg.solver.max_iterations < 1) error("solver.max_iterations must be at least 1");
        if (!(cfg.solver.lanczos_tol > 0.0)) error("solver.lanczos_tol must be positive");
    }

    for (const std::string& q : cfg.observables.quantities) {
        const auto& known = experiment_quantities();
        if (std::find(known.begin(), known.end(), q) == known.end()) {
            std::string valid;
            for (const std::string& k : known) valid += (valid.empty() ? "" : ", ") + k;
            error("unknown quantity '" + q + "' (valid: " + valid + ")");
        } else if (q == "spinwave" && !(ising && all_power_law)) {
            error("quantity 'spinwave' requires an Ising model with power_law variants");
        }
    }
    if (cfg.observables.j0 != -1 &&
        (cfg.observables.j0 < 0 || cfg.observables.j0 >= cfg.model.n))
        error("observables.j0 must be -1 or a site index below n");
    if (cfg.observables.window_lo < 1) error("observables.window_lo must be at least 1");
    if (cfg.observables.window_hi != -1 &&
        cfg.observables.window_hi <= cfg.observables.window_lo)
        error("observables.window_hi must be -1 or above window_lo");

    if (cfg.noise) {
        const NoiseConfig& nc = *cfg.noise;
        if (nc.eta_x < 0.0 || nc.eta_y < 0.0) error("noise.eta must be >= 0");
        if (nc.nbar < 0.0) error("noise.nbar must be >= 0");
        if (!(nc.omega_x > 0.0) || !(nc.omega_y > 0.0))
            error("noise mode frequencies must be positive");
        if (nc.time < 0.0) error("noise.time must be >= 0");
        if (!(dense && ising && cfg.model.n <= 10))
            warning("fidelity error budget is computed only for dense Ising runs "
                    "of at most 10 ions; only interference scales will be reported");
    }

    if (cfg.output.directory.empty()) error("output.directory must not be empty");
    return r;
}

// ===== Presets ===============================================================

namespace {

ExperimentConfig base_preset(const char* kind, int n, const char* method) {
    ExperimentConfig cfg;
    cfg.model.kind = kind;
    cfg.model.n = n;
    cfg.solver.method = method;
    cfg.solver.max_bond = 64;
    cfg.seed = 0x5eed;
    return cfg;
}

CouplingVariant power_law_variant() {
    CouplingVariant v;
    v.label = "power_law";
    v.source = "power_law";
    return v;
}

CouplingVariant trap_variant() {
    CouplingVariant v;
    v.label = "trap";
    v.source = "trap";
    v.beta_x = 1e-2;
    return v;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"ising-magnetization",   "ising-critical-field",
            "ising-order-parameters", "ising-critical-correlations",
            "ising-correlation-tails", "ising-correlation-length",
            "ising-spinwave",          "xy-magnetization",
            "xy-correlation-length",   "xy-local-onsets",
            "xy-critical-correlations"};
}

ExperimentConfig preset_config(const std::string& name) {
    // Field sweeps of the long-range Ising chain run n = 100; the XY studies
    // run n = 50. Grids are chosen so the derived quantities (curvature peaks,
    // decay fits, onsets) are well conditioned without being needlessly fine.
    if (name == "ising-magnetization") {
        // Average magnetization along the field for both coupling sources,
        // plus the bond profile of the trap-derived couplings.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant(), trap_variant()};
        cfg.model.field_grid = expand_field_range(0.05, 2.0, 0.05);
        cfg.observables.quantities = {"magnetization", "profile", "couplings"};
        return cfg;
    }
    if (name == "ising-critical-field") {
        // Fine grid around the transition for the curvature peak and the
        // per-site critical fields.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = expand_field_range(0.55, 1.15, 0.01);
        cfg.observables.quantities = {"magnetization", "profile"};
        return cfg;
    }
    if (name == "ising-order-parameters") {
        // Order parameters: staggered structure factor and the fluctuation
        // of the total transverse magnetization.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant(), trap_variant()};
        cfg.model.field_grid = expand_field_range(0.05, 2.0, 0.05);
        cfg.observables.quantities = {"magnetization", "neel", "fluct_x"};
        return cfg;
    }
    if (name == "ising-critical-correlations") {
        // Correlations from the central ion at the critical field.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = {0.83};
        cfg.observables.quantities = {"correlation", "entropy"};
        cfg.observables.j0 = 50;
        return cfg;
    }
    if (name == "ising-correlation-tails") {
        // Off-critical correlation tails on both sides of the transition.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = {0.72, 1.32};
        cfg.observables.quantities = {"correlation"};
        cfg.observables.j0 = 50;
        cfg.observables.window_lo = 25;
        cfg.observables.window_hi = 48;
        return cfg;
    }
    if (name == "ising-correlation-length") {
        // Correlation length across the transition.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = expand_field_range(0.3, 1.4, 0.05);
        cfg.observables.quantities = {"magnetization", "correlation"};
        return cfg;
    }
    if (name == "ising-spinwave") {
        // Spin-wave prediction next to the DMRG correlations.
        ExperimentConfig cfg = base_preset("ising", 100, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = {0.3, 2.0, 4.0};
        cfg.observables.quantities = {"correlation", "spinwave"};
        return cfg;
    }
    if (name == "xy-magnetization") {
        // XY saturation study: magnetization against the field magnitude.
        ExperimentConfig cfg = base_preset("xy", 50, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = expand_field_range(0.05, 1.4, 0.05);
        cfg.observables.quantities = {"magnetization"};
        return cfg;
    }
    if (name == "xy-correlation-length") {
        // XY correlation decay across the field sweep.
        ExperimentConfig cfg = base_preset("xy", 50, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = expand_field_range(0.1, 1.2, 0.05);
        cfg.observables.quantities = {"magnetization", "correlation"};
        return cfg;
    }
    if (name == "xy-local-onsets") {
        // XY per-site profiles near saturation for the local onsets.
        ExperimentConfig cfg = base_preset("xy", 50, "dmrg");
        cfg.model.variants = {power_law_variant(), trap_variant()};
        cfg.model.field_grid = expand_field_range(0.6, 1.2, 0.02);
        cfg.observables.quantities = {"magnetization", "profile"};
        return cfg;
    }
    if (name == "xy-critical-correlations") {
        // XY critical correlations from an off-center origin.
        ExperimentConfig cfg = base_preset("xy", 50, "dmrg");
        cfg.model.variants = {power_law_variant()};
        cfg.model.field_grid = {0.9};
        cfg.observables.quantities = {"correlation", "entropy"};
        cfg.observables.j0 = 25;
        return cfg;
    }
    std::string all;
    for (const std::string& p : preset_names()) all += (all.empty() ? "" : ", ") + p;
    throw std::invalid_argument("unknown preset '" + name + "' (available: " + all + ")");
}

// ===== Hashing ===============================================================

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("output"); // relocating results must not invalidate caches
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

// ===== Model construction ====================================================

namespace {

/// Coupling matrix for one variant, n x n, positive (antiferromagnetic).
Eigen::MatrixXd variant_couplings(const CouplingVariant& v, int n) {
    if (v.source == "power_law") {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                j(a, b) = j(b, a) = v.strength / std::pow(double(b - a), v.exponent);
        return j;
    }
    // Trap-derived: pick the transverse frequency that produces the requested
    // stiffness ratio beta_x = 1/(w_x^2 d^3) at the mean central spacing, then
    // push along x with unit force.
    IonChain probe = IonChain::equilibrium(n, TrapFrequencies{10.0, 10.0, 1.0});
    const double d3 = std::pow(probe.mean_gap(), 3.0);
    const double wx = 1.0 / std::sqrt(v.beta_x * d3);
    IonChain chain = IonChain::equilibrium(n, TrapFrequencies{wx, wx, 1.0});
    Eigen::MatrixXd j = coupling_matrix(chain, Axis::X, 1.0);
    if (v.normalize_center_bond) {
        const int c = n / 2 - 1;
        const double jc = j(c, c + 1);
        if (!(jc > 0.0))
            throw std::runtime_error("trap couplings: central bond is not positive");
        j /= jc;
    }
    return j;
}

SpinModel variant_model(const ExperimentConfig& cfg, const Eigen::MatrixXd& j,
                        double grid_field) {
    // XY sweeps are parameterized by the field magnitude b >= 0; the model
    // field is -b so the magnetization rises to +1 at saturation.
    if (cfg.model.kind == "xy") return xy_from_couplings(j, -grid_field);
    return ising_from_couplings(j, grid_field);
}

// ===== Dense measurement helpers =============================================

/// Entanglement entropy across each bond of a dense state.
Eigen::VectorXd dense_entropies(const Eigen::VectorXd& psi, int n) {
    Eigen::VectorXd out(n - 1);
    for (int cut = 1; cut < n; ++cut) {
        // Basis state s splits as low bits [0, cut) and high bits [cut, n).
        const int rows = 1 << cut, cols = 1 << (n - cut);
        Eigen::MatrixXd m(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) m(r, c) = psi[(c << cut) | r];
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
        double s = 0.0;
        for (double sv : svd.singularValues()) {
            const double p = sv * sv;
            if (p > 1e-15) s -= p * std::log(p);
        }
        out[cut - 1] = s;
    }
    return out;
}

/// <(sum_i (-1)^i sz_i)^2>; diagonal in the z basis.
double dense_staggered_sq(const Eigen::VectorXd& psi, int n) {
    double acc = 0.0;
    for (int s = 0; s < psi.size(); ++s) {
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            m += (i % 2 == 0 ? 1.0 : -1.0) * bit_spin(s, i);
        acc += m * m * psi[s] * psi[s];
    }
    return acc;
}

/// <(sum_i sx_i)^2> via the one-spin-flip structure of sx.
double dense_total_sx_sq(const Eigen::VectorXd& psi, int n) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psi.size());
    for (int s = 0; s < psi.size(); ++s)
        for (int i = 0; i < n; ++i) out[s ^ (1 << i)] += psi[s];
    return out.squaredNorm();
}

// ===== Point computation =====================================================

struct SolvedPoint {
    double energy = 0.0;
    bool converged = false;
    int steps = 0;
    Eigen::VectorXd order_profile;   ///< <sx_i> (Ising) or <sz_i> (XY)
    Eigen::VectorXd conn_zz;         ///< connected row from j0
    Eigen::VectorXd conn_xx;
    Eigen::VectorXd entropies;
    double staggered_sq = 0.0;
    double total_sx_sq = 0.0;
    double total_sx_mean = 0.0;      ///< sum_i <sx_i>
};

bool wants(const ExperimentConfig& cfg, const char* q) {
    const auto& qs = cfg.observables.quantities;
    return std::find(qs.begin(), qs.end(), q) != qs.end();
}

int correlation_origin(const ExperimentConfig& cfg) {
    return cfg.observables.j0 >= 0 ? cfg.observables.j0 : cfg.model.n / 2 - 1;
}

SolvedPoint solve_point_dense(const ExperimentConfig& cfg, const SpinModel& model,
                              std::uint64_t point_seed) {
    LanczosOptions opt;
    opt.max_iter = cfg.solver.max_iterations;
    opt.tol = cfg.solver.lanczos_tol;
    opt.seed = point_seed;
    GroundSolution gs = solve_ground_dense(model, opt);

    const int n = cfg.model.n;
    const bool xy = cfg.model.kind == "xy";
    SolvedPoint p;
    p.energy = gs.energy;
    p.converged = true; // solve_ground_dense throws when it cannot converge
    p.steps = gs.iterations;

    p.order_profile.resize(n);
    for (int i = 0; i < n; ++i)
        p.order_profile[i] = xy ? dense_sigma_z(gs.state, i) : dense_sigma_x(gs.state, i);

    if (wants(cfg, "correlation")) {
        const int j0 = correlation_origin(cfg);
        p.conn_zz.resize(n);
        p.conn_xx.resize(n);
        for (int j = 0; j < n; ++j) {
            if (j == j0) { p.conn_zz[j] = p.conn_xx[j] = 0.0; continue; }
            p.conn_zz[j] = dense_corr_zz(gs.state, j0, j) -
                           dense_sigma_z(gs.state, j0) * dense_sigma_z(gs.state, j);
            p.conn_xx[j] = dense_corr_xx(gs.state, j0, j) -
                           dense_sigma_x(gs.state, j0) * dense_sigma_x(gs.state, j);
        }
    }
    if (wants(cfg, "entropy")) p.entropies = dense_entropies(gs.state, n);
    if (wants(cfg, "neel")) p.staggered_sq = dense_staggered_sq(gs.state, n);
    if (wants(cfg, "fluct_x")) {
        p.total_sx_sq = dense_total_sx_sq(gs.state, n);
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += dense_sigma_x(gs.state, i);
        p.total_sx_mean = mean;
    }
    return p;
}

SolvedPoint solve_point_dmrg(const ExperimentConfig& cfg, const SpinModel& model,
                             std::uint64_t point_seed) {
    DmrgOptions opt;
    opt.max_bond = cfg.solver.max_bond;
    opt.svd_cutoff = cfg.solver.svd_cutoff;
    opt.energy_tol = cfg.solver.energy_tol;
    opt.max_sweeps = cfg.solver.max_sweeps;
    opt.min_sweeps = cfg.solver.min_sweeps;
    opt.warmup_bond = std::min(opt.warmup_bond, opt.max_bond);
    opt.seed = point_seed;

    DmrgSolver solver(Mpo::exact_sum(model), opt);
    DmrgResult res = solver.solve(initial_state_for(model));

    const int n = cfg.model.n;
    const bool xy = cfg.model.kind == "xy";
    SolvedPoint p;
    p.energy = res.energy;
    p.converged = res.converged;
    p.steps = res.sweeps;

    Mps& psi = res.state;
    p.order_profile = xy ? measure_sigma_z(psi) : measure_sigma_x(psi);

    if (wants(cfg, "correlation")) {
        const int j0 = correlation_origin(cfg);
        p.conn_zz = connected_zz_row(psi, j0);
        p.conn_xx = connected_xx_row(psi, j0);
    }
    if (wants(cfg, "entropy")) p.entropies = entanglement_entropies(psi);
    if (wants(cfg, "neel"))
        p.staggered_sq = mpo_expectation(Mpo::staggered_sz_squared(n), psi);
    if (wants(cfg, "fluct_x")) {
        p.total_sx_sq = mpo_expectation(Mpo::total_sx_squared(n), psi);
        p.total_sx_mean = measure_sigma_x(psi).sum();
    }
    return p;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

/// Full result for one grid point, in the exact form the cache file stores.
json compute_point(const ExperimentConfig& cfg, const SpinModel& model,
                   int index, int variant, double grid_field,
                   std::uint64_t point_seed) {
    SolvedPoint p = cfg.solver.method == "dense"
                        ? solve_point_dense(cfg, model, point_seed)
                        : solve_point_dmrg(cfg, model, point_seed);
    const int n = cfg.model.n;
    json d;
    d["index"] = index;
    d["variant"] = variant;
    d["field"] = grid_field;
    d["energy"] = p.energy;
    d["converged"] = p.converged;
    d["steps"] = p.steps;
    if (wants(cfg, "magnetization"))
        d["magnetization"] = p.order_profile.mean();
    if (wants(cfg, "profile")) d["profile"] = vector_json(p.order_profile);
    if (wants(cfg, "correlation")) {
        d["connected_zz"] = vector_json(p.conn_zz);
        d["connected_xx"] = vector_json(p.conn_xx);
    }
    if (wants(cfg, "entropy")) d["entropy"] = vector_json(p.entropies);
    if (wants(cfg, "neel")) d["neel"] = p.staggered_sq / double(n) / double(n);
    if (wants(cfg, "fluct_x"))
        d["fluct_x"] = (p.total_sx_sq - p.total_sx_mean * p.total_sx_mean) /
                       double(n) / double(n);
    return d;
}

/// Analytic spin-wave correlation for a power-law Ising variant; solver-free,
/// so it never fails a point. Returns {} for fields where neither branch
/// applies cleanly.
json spinwave_block(const CouplingVariant& v, int n, double field) {
    json out;
    try {
        // Branch selection: tilted (ordered) theory below the instability of
        // the uniform mode, paramagnetic theory above it.
        SpinWaveSolution probe = paramagnetic_spin_wave(n, v.strength, v.exponent,
                                                        std::max(field, 1e-300));
        SpinWaveSolution sw =
            (field < probe.instability_field && n % 2 == 0)
                ? antiferro_spin_wave(n, v.strength, v.exponent, field)
                : probe;
        out["branch"] = sw.antiferro ? "antiferro" : "paramagnetic";
        out["valid"] = sw.valid;
        out["instability_field"] = sw.instability_field;
        out["boson_density"] = sw.boson_density;
        json corr = json::array();
        for (int r = 0; r < sw.corr.size(); ++r) corr.push_back(sw.corr[r]);
        out["corr"] = std::move(corr);
    } catch (const std::exception& e) {
        out["valid"] = false;
        out["error"] = e.what();
    }
    return out;
}

// ===== Output files ==========================================================

std::string solver_diagnostics_line(const SolverConfig& s) {
    char buf[200];
    if (s.method == "dense") {
        std::snprintf(buf, sizeof(buf), "dense lanczos_tol=%g max_iterations=%d",
                      s.lanczos_tol, s.max_iterations);
    } else {
        std::snprintf(buf, sizeof(buf),
                      "dmrg max_bond=%d svd_cutoff=%g energy_tol=%g sweeps=%d..%d",
                      s.max_bond, s.svd_cutoff, s.energy_tol, s.min_sweeps,
                      s.max_sweeps);
    }
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& dir, const std::string& name,
              const std::string& hash_hex, const std::string& diagnostics,
              const std::string& header)
        : path_((dir / name).string()), out_(path_) {
        if (!out_) throw std::runtime_error("cannot write '" + path_ + "'");
        out_ << "# config_hash " << hash_hex << "\n";
        out_ << "# version " << ionsim_version << "\n";
        out_ << "# solver " << diagnostics << "\n";
        out_ << header << "\n";
    }

    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const std::string& c : cells) {
            if (!first) out_ << ",";
            out_ << c;
            first = false;
        }
        out_ << "\n";
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

std::string fd(double v) { return format_double(v); }

void write_csv_outputs(const ExperimentConfig& cfg, ExperimentResult& result,
                       const std::vector<Eigen::MatrixXd>& couplings) {
    const std::filesystem::path dir(cfg.output.directory);
    const std::string diag = solver_diagnostics_line(cfg.solver);
    const auto& hash = result.hash_hex;
    const int fields = static_cast<int>(cfg.model.field_grid.size());
    auto label = [&](int v) { return cfg.model.variants[v].label; };

    auto for_each_ok = [&](auto&& fn) {
        for (const PointResult& p : result.points)
            if (!p.failed) fn(p);
    };

    {
        CsvWriter w(dir, "energy.csv", hash, diag,
                    "variant,field,energy,converged,steps");
        for_each_ok([&](const PointResult& p) {
            w.row({label(p.variant), fd(p.field), fd(p.energy),
                   p.converged ? "1" : "0", std::to_string(p.steps)});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "magnetization")) {
        CsvWriter w(dir, "magnetization.csv", hash, diag, "variant,field,value");
        for_each_ok([&](const PointResult& p) {
            w.row({label(p.variant), fd(p.field), fd(p.data["magnetization"].get<double>())});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "profile")) {
        CsvWriter w(dir, "profile.csv", hash, diag, "variant,field,site,value");
        for_each_ok([&](const PointResult& p) {
            const json& prof = p.data["profile"];
            for (int i = 0; i < static_cast<int>(prof.size()); ++i)
                w.row({label(p.variant), fd(p.field), std::to_string(i),
                       fd(prof[i].get<double>())});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "correlation")) {
        const int j0 = correlation_origin(cfg);
        for (const char* chan : {"zz", "xx"}) {
            const std::string key = std::string("connected_") + chan;
            CsvWriter w(dir, "correlation_" + std::string(chan) + ".csv", hash,
                        diag, "variant,field,origin,distance,value");
            for_each_ok([&](const PointResult& p) {
                const json& row = p.data[key];
                for (int j = 0; j < static_cast<int>(row.size()); ++j) {
                    if (j == j0) continue;
                    w.row({label(p.variant), fd(p.field), std::to_string(j0),
                           std::to_string(std::abs(j - j0)), fd(row[j].get<double>())});
                }
            });
            result.written_files.push_back(w.path());
        }
    }
    if (wants(cfg, "entropy")) {
        CsvWriter w(dir, "entropy.csv", hash, diag, "variant,field,bond,value");
        for_each_ok([&](const PointResult& p) {
            const json& ent = p.data["entropy"];
            for (int b = 0; b < static_cast<int>(ent.size()); ++b)
                w.row({label(p.variant), fd(p.field), std::to_string(b),
                       fd(ent[b].get<double>())});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "neel")) {
        CsvWriter w(dir, "neel.csv", hash, diag, "variant,field,value");
        for_each_ok([&](const PointResult& p) {
            w.row({label(p.variant), fd(p.field), fd(p.data["neel"].get<double>())});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "fluct_x")) {
        CsvWriter w(dir, "fluct_x.csv", hash, diag, "variant,field,value");
        for_each_ok([&](const PointResult& p) {
            w.row({label(p.variant), fd(p.field), fd(p.data["fluct_x"].get<double>())});
        });
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "couplings")) {
        CsvWriter w(dir, "couplings.csv", hash, diag, "variant,bond,value");
        for (int v = 0; v < static_cast<int>(couplings.size()); ++v)
            for (int b = 0; b + 1 < cfg.model.n; ++b)
                w.row({label(v), std::to_string(b), fd(couplings[v](b, b + 1))});
        result.written_files.push_back(w.path());
    }
    if (wants(cfg, "spinwave")) {
        CsvWriter w(dir, "spinwave.csv", hash, diag,
                    "variant,field,distance,value,valid");
        // Independent of the solved points: one analytic row set per
        // (variant, field), present even when the solver failed there.
        for (int v = 0; v < static_cast<int>(cfg.model.variants.size()); ++v)
            for (int f = 0; f < fields; ++f) {
                json sw = spinwave_block(cfg.model.variants[v], cfg.model.n,
                                         cfg.model.field_grid[f]);
                if (!sw.contains("corr")) continue;
                const json& corr = sw["corr"];
                const std::string ok = sw["valid"].get<bool>() ? "1" : "0";
                for (int r = 1; r < static_cast<int>(corr.size()); ++r)
                    w.row({label(v), fd(cfg.model.field_grid[f]),
                           std::to_string(r), fd(corr[r].get<double>()), ok});
            }
        result.written_files.push_back(w.path());
    }
}

// ===== Summary ===============================================================

json analyze_variant(const ExperimentConfig& cfg, const ExperimentResult& result,
                     int variant) {
    const int fields = static_cast<int>(cfg.model.field_grid.size());
    json out;
    out["label"] = cfg.model.variants[variant].label;

    std::vector<double> b, m;
    for (int f = 0; f < fields; ++f) {
        const PointResult& p = result.points[variant * fields + f];
        if (p.failed || !p.data.contains("magnetization")) continue;
        b.push_back(p.field);
        m.push_back(p.data["magnetization"].get<double>());
    }
    const bool ascending = std::is_sorted(b.begin(), b.end()) &&
                           std::adjacent_find(b.begin(), b.end()) == b.end();
    if (cfg.model.kind == "ising" && ascending && b.size() >= 5) {
        CurvaturePeak peak = locate_critical_field(b, m);
        out["critical_field"] = {{"value", peak.location},
                                 {"curvature", peak.curvature}};
    }
    if (cfg.model.kind == "xy" && ascending && b.size() >= 2) {
        out["saturation_field"] = saturation_onset(b, m, 1e-3);
    }

    if (wants(cfg, "correlation")) {
        const int j0 = correlation_origin(cfg);
        const int lo = cfg.observables.window_lo;
        const int hi = cfg.observables.window_hi > 0
                           ? cfg.observables.window_hi
                           : std::min(20, cfg.model.n / 4);
        json fits = json::array();
        for (int f = 0; f < fields; ++f) {
            const PointResult& p = result.points[variant * fields + f];
            if (p.failed || !p.data.contains("connected_zz")) continue;
            // Fits run on the right-going row C(r) = C(j0, j0 + r).
            const char* key = cfg.model.kind == "xy" ? "connected_xx" : "connected_zz";
            const json& row = p.data[key];
            std::vector<double> c;
            for (int j = j0; j < static_cast<int>(row.size()); ++j)
                c.push_back(row[j].get<double>());
            if (hi <= lo || hi >= static_cast<int>(c.size())) continue;
            json entry = {{"field", p.field}, {"window_lo", lo}, {"window_hi", hi}};
            try {
                DecayFit pw = fit_power_law_decay(c, lo, hi);
                entry["power_law_exponent"] = pw.exponent;
                entry["power_law_window_band"] = pw.window_band;
                ExpDecayFit ex = fit_exponential_decay(c, lo, hi);
                entry["correlation_length"] = std::isfinite(ex.xi) ? json(ex.xi) : json();
                entry["inverse_correlation_length"] =
                    std::isfinite(ex.xi) ? 1.0 / ex.xi : 0.0;
            } catch (const std::exception& e) {
                entry["fit_error"] = e.what();
            }
            fits.push_back(std::move(entry));
        }
        if (!fits.empty()) out["correlation_fits"] = std::move(fits);
    }
    return out;
}

json noise_summary(const ExperimentConfig& cfg,
                   const std::vector<Eigen::MatrixXd>& couplings) {
    const NoiseConfig& nc = *cfg.noise;
    json out;
    XyInterferenceReport rep =
        xy_interference_check(nc.omega_x, nc.omega_y, nc.eta_x, nc.eta_y);
    out["interference"] = {
        {"resonant", rep.resonant},
        {"detuning", rep.detuning},
        {"error_scale", std::isfinite(rep.error_scale) ? json(rep.error_scale) : json()},
        {"error_to_coupling",
         std::isfinite(rep.error_to_coupling) ? json(rep.error_to_coupling) : json()},
        {"ising_virtual_scale", rep.ising_virtual_scale},
    };

    if (!(cfg.solver.method == "dense" && cfg.model.kind == "ising" &&
          cfg.model.n <= 10))
        return out;

    NoiseEnvironment env;
    env.nbar = nc.nbar;
    env.eta_x = nc.eta_x;
    env.eta_y = nc.eta_y;
    env.omega_x = nc.omega_x;
    env.omega_y = nc.omega_y;

    json budgets = json::array();
    for (int v = 0; v < static_cast<int>(cfg.model.variants.size()); ++v) {
        for (double b : cfg.model.field_grid) {
            SpinModel model = variant_model(cfg, couplings[v], b);
            try {
                GroundSolution gs = solve_ground_dense(model);
                IsingErrorBudget eb =
                    ising_fidelity_error(model, gs.state, nc.time, env);
                budgets.push_back({{"variant", cfg.model.variants[v].label},
                                   {"field", b},
                                   {"time", nc.time},
                                   {"total", eb.total},
                                   {"total_equal_time", eb.total_equal_time},
                                   {"two_time_neglected", eb.two_time_neglected},
                                   {"suspicious_negative", eb.suspicious_negative}});
            } catch (const std::exception& e) {
                budgets.push_back({{"variant", cfg.model.variants[v].label},
                                   {"field", b},
                                   {"error", e.what()}});
            }
        }
    }
    out["fidelity_budgets"] = std::move(budgets);
    return out;
}

} // namespace

// ===== Runner ================================================================

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers,
                                bool resume) {
    ValidationReport vr = validate_config(cfg);
    if (!vr.ok()) {
        std::string msg = "invalid config:";
        for (const std::string& e : vr.errors()) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    if (workers < 1) workers = 1;

    ExperimentResult result;
    result.config = cfg;
    result.hash_hex = config_hash_hex(cfg);

    const int fields = static_cast<int>(cfg.model.field_grid.size());
    const int variants = static_cast<int>(cfg.model.variants.size());
    const int total = variants * fields;
    result.points.resize(total);

    // Immutable shared inputs: one coupling matrix per variant.
    std::vector<Eigen::MatrixXd> couplings;
    couplings.reserve(variants);
    for (const CouplingVariant& v : cfg.model.variants)
        couplings.push_back(variant_couplings(v, cfg.model.n));

    const std::filesystem::path dir(cfg.output.directory);
    const std::filesystem::path point_dir = dir / "points";
    std::filesystem::create_directories(point_dir);

    auto cache_path = [&](int idx) {
        return (point_dir / ("point_" + std::to_string(idx) + ".json")).string();
    };
    (void)resume; // both fresh runs and resumes honor valid caches

    auto try_cache = [&](int idx, PointResult& p) {
        std::ifstream in(cache_path(idx));
        if (!in) return false;
        json j;
        try {
            in >> j;
        } catch (const json::parse_error&) {
            return false;
        }
        if (!j.is_object() || !j.contains("config_hash") || !j.contains("version") ||
            !j.contains("data"))
            return false;
        if (j["config_hash"] != result.hash_hex || j["version"] != ionsim_version)
            return false;
        const json& d = j["data"];
        if (!d.contains("index") || d["index"].get<int>() != idx) return false;
        p.data = d;
        p.from_cache = true;
        return true;
    };

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= total) return;
            const int v = idx / fields, f = idx % fields;
            const double b = cfg.model.field_grid[f];
            PointResult& p = result.points[idx];
            p.index = idx;
            p.variant = v;
            p.field = b;

            if (!try_cache(idx, p)) {
                // Deterministic per-point seed stream from the config seed.
                const std::uint64_t pseed =
                    cfg.seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(idx + 1));
                try {
                    p.data = compute_point(cfg, variant_model(cfg, couplings[v], b),
                                           idx, v, b, pseed);
                } catch (const std::exception& e) {
                    p.failed = true;
                    p.error = e.what();
                    continue;
                }
                std::ofstream out(cache_path(idx));
                out << json{{"config_hash", result.hash_hex},
                            {"version", ionsim_version},
                            {"data", p.data}}
                           .dump(2)
                    << "\n";
            }
            p.energy = p.data["energy"].get<double>();
            p.converged = p.data["converged"].get<bool>();
            p.steps = p.data["steps"].get<int>();
        }
    };

    if (workers == 1 || total == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min(workers, total); ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (const PointResult& p : result.points)
        if (p.failed) ++result.failures;
    result.all_failed = result.failures == total && total > 0;
    result.partial = result.failures > 0 && !result.all_failed;

    if (cfg.output.write_csv) write_csv_outputs(cfg, result, couplings);

    // Summary: config echo, diagnostics, per-variant analysis, error budgets.
    json summary;
    summary["version"] = ionsim_version;
    summary["config_hash"] = result.hash_hex;
    summary["config"] = config_to_json(cfg);
    summary["solver_diagnostics"] = solver_diagnostics_line(cfg.solver);
    summary["points_total"] = total;
    summary["points_failed"] = result.failures;
    summary["partial"] = result.partial;
    json failures = json::array();
    for (const PointResult& p : result.points)
        if (p.failed)
            failures.push_back({{"index", p.index},
                                {"variant", cfg.model.variants[p.variant].label},
                                {"field", p.field},
                                {"error", p.error}});
    summary["failures"] = std::move(failures);
    json analysis = json::array();
    for (int v = 0; v < variants; ++v)
        analysis.push_back(analyze_variant(cfg, result, v));
    summary["variants"] = std::move(analysis);
    if (cfg.noise) summary["noise"] = noise_summary(cfg, couplings);
    result.summary = summary;

    if (cfg.output.write_summary) {
        const std::string path = (dir / "summary.json").string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << summary.dump(2) << "\n";
        result.written_files.push_back(path);
    }
    return result;
}

int exit_code_for(const ExperimentResult& result) {
    if (result.all_failed) return 2;
    if (result.partial) return 3;
    return 0;
}

} // namespace ionsim
