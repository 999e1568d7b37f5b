#pragma once
/**
 * @file experiment.hpp
 * @brief Batch experiment runner: JSON configs, shipped presets, field sweeps
 *        across model variants, per-point result caching, CSV/JSON outputs.
 *
 * A config describes one sweep: a spin model (Ising or XY) built from one or
 * more coupling variants (uniform power law or trap-derived), a field grid, a
 * solver (dense or DMRG), and the observables to record. run_experiment()
 * dispatches the (variant, field) grid points to a bounded worker pool,
 * caches each finished point as JSON in the output directory, and writes one
 * CSV per observable series plus a summary.json with fits and error budgets.
 *
 * Reproducibility contract: identical config + seed produce byte-identical
 * CSV files. Every output embeds the config hash, the code version, and the
 * solver settings. Cached points are reused only when their embedded hash
 * and version match the current run.
 */

#include "ionsim/spin_model.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ionsim {

/// Version stamp embedded in every output file.
inline constexpr const char* ionsim_version = "0.1.0";

// ===== Configuration =========================================================

/// One way of producing the coupling matrix for the sweep.
struct CouplingVariant {
    std::string label;             ///< unique name, becomes the CSV `variant` column
    std::string source;            ///< "power_law" or "trap"
    double exponent = 3.0;         ///< power_law: J_ij = strength / |i-j|^exponent
    double strength = 1.0;         ///< power_law: nearest-neighbor coupling scale
    double beta_x = 1e-2;          ///< trap: target NN beta, sets the transverse frequency
    bool normalize_center_bond = true; ///< trap: rescale J so the central NN bond is 1
};

struct ModelConfig {
    std::string kind;              ///< "ising" or "xy"
    int n = 0;                     ///< chain length
    std::vector<CouplingVariant> variants;
    std::vector<double> field_grid; ///< transverse fields (XY: b >= 0, applied as -b)
};

struct SolverConfig {
    std::string method = "dense";  ///< "dense" or "dmrg"
    int max_bond = 64;             ///< dmrg bond cap
    double svd_cutoff = 1e-12;     ///< dmrg truncation cutoff
    double energy_tol = 1e-11;     ///< dmrg sweep-to-sweep convergence
    int max_sweeps = 40;
    int min_sweeps = 4;
    int max_iterations = 500;      ///< dense Lanczos iteration cap
    double lanczos_tol = 1e-10;    ///< dense Lanczos residual target
};

struct ObservablesConfig {
    std::vector<std::string> quantities; ///< see experiment_quantities()
    int j0 = -1;                   ///< correlation origin; -1 = central ion
    int window_lo = 3;             ///< fit window (distances) for decay fits
    int window_hi = -1;            ///< -1 = min(20, n/4)
};

/// Optional decoherence block: fidelity error budgets for dense Ising runs
/// plus the spectator-mode interference scales.
struct NoiseConfig {
    double eta_x = 0.0;
    double eta_y = 0.0;
    double nbar = 0.0;
    double omega_x = 10.0;
    double omega_y = 11.0;
    double time = 1.0;             ///< evolution time for the fidelity budget
};

struct OutputConfig {
    std::string directory = ".";
    bool write_csv = true;
    bool write_summary = true;
};

struct ExperimentConfig {
    ModelConfig model;
    SolverConfig solver;
    ObservablesConfig observables;
    std::optional<NoiseConfig> noise;
    OutputConfig output;
    std::uint64_t seed = 0;
};

/// Names accepted in observables.quantities.
const std::vector<std::string>& experiment_quantities();

// ===== Config I/O ============================================================

/// Parse a config object. Unknown keys anywhere are rejected.
/// The field grid is given either as "field_grid": [..] or as
/// "field_range": {"from": a, "to": b, "step": s} (expanded inclusively).
/// @throws std::invalid_argument on schema violations
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Canonical echo of the config; two configs that expand to the same sweep
/// serialize identically.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Read + parse a config file.
/// @throws std::invalid_argument on parse or schema errors
ExperimentConfig load_config(const std::string& path);

// ===== Validation ============================================================

struct ValidationMessage {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    std::string text;
};

struct ValidationReport {
    std::vector<ValidationMessage> messages;

    bool ok() const;                       ///< no errors (warnings allowed)
    std::vector<std::string> errors() const;
    std::vector<std::string> warnings() const;
};

/// Schema- and range-check a parsed config. Never mutates state.
ValidationReport validate_config(const ExperimentConfig& config);

// ===== Presets ===============================================================

/// Shipped sweep definitions; names describe the produced study.
std::vector<std::string> preset_names();

/// @throws std::invalid_argument for unknown names, listing the presets
ExperimentConfig preset_config(const std::string& name);

// ===== Hashing ===============================================================

/// FNV-1a over the canonical dump of everything that affects computed data
/// (model, solver, observables, noise, seed). The output block is excluded
/// so moving results does not invalidate caches.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

// ===== Running ===============================================================

/// One (variant, field) grid point. `data` holds the measured series keyed
/// by quantity name; the same object is what point_<index>.json stores.
struct PointResult {
    int index = -1;                ///< variant * fields + field position
    int variant = -1;
    double field = 0.0;
    bool failed = false;           ///< solver threw; `error` has the message
    bool converged = false;
    bool from_cache = false;
    int steps = 0;                 ///< dmrg sweeps or lanczos iterations
    double energy = 0.0;
    std::string error;
    nlohmann::json data;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string hash_hex;
    std::vector<PointResult> points;
    int failures = 0;
    bool partial = false;          ///< some points failed
    bool all_failed = false;
    nlohmann::json summary;
    std::vector<std::string> written_files;
};

/// Run the sweep. Points are dispatched to `workers` threads and merged by
/// grid index; finished points are cached under <out>/points/ and reused on
/// later runs when hash + version still match (resume makes missing caches
/// an expected condition rather than requiring them).
/// @throws std::invalid_argument if validate_config reports errors
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1,
                                bool resume = false);

/// Process exit code for a finished run: 0 success, 2 every point failed,
/// 3 partial results.
int exit_code_for(const ExperimentResult& result);

} // namespace ionsim
