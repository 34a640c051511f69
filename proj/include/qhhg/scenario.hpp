#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhhg/hamiltonian.hpp"
#include "qhhg/parametric.hpp"
#include "qhhg/propagator.hpp"

namespace qhhg {

/// Configuration file problems: unknown keys, missing keys, out-of-range
/// values. Maps to exit code 1 in the command-line tool.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CouplingChoice {
    enum class Kind { Plateau, Experimental, Explicit };
    Kind kind = Kind::Plateau;
    double p = 0.0;                   // plateau strength, also scales experimental sets
    std::map<int, double> heights;    // experimental plateau profile
    int reference = 0;                // experimental reference order
    std::map<int, double> chi;        // explicit couplings
};

struct TauGridSpec {
    double start = 0.0;
    double stop = 0.0;
    int count = 2;
    bool mirror = false;

    std::vector<double> points() const;
};

struct WignerRequest {
    int mode = 0;
    double tau = 0.0;
    double re_min = -3.0, re_max = 3.0;
    double im_min = -3.0, im_max = 3.0;
    int points = 81;
};

struct ObservableToggles {
    bool distributions = false;
    bool mandel = false;
    bool purity = false;
    bool quadratures = false;
    std::optional<WignerRequest> wigner;
};

struct PulseConfig {
    enum class Kind { Gaussian, Modes };
    Kind kind = Kind::Gaussian;
    double e0 = 1.0;
    double tau_p = 1.0;
    double omega = 1.0;
    double grid_min = 0.0, grid_max = 0.0;
    int grid_count = 0;
    PulseSpec explicit_spec;          // Kind::Modes
};

struct ScenarioConfig {
    double alpha0_sq = 0.0;
    std::vector<int> modes;
    CouplingChoice coupling;
    TauGridSpec tau_grid;
    double epsilon = 1e-8;
    PropagatorConfig propagator;
    ObservableToggles observables;
    std::optional<PulseConfig> pulse;
    double tolerance_scale = 1.0;
    std::string output_dir = "out";

    std::complex<double> alpha0() const;
    CouplingSet build_couplings() const;
};

/// Parse and validate a JSON configuration file. Every key is checked against
/// the schema; unknown keys raise ConfigError naming the offending key.
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::string> output_dir;
    int threads = 0;
    bool dump_matrices = false;
};

struct DepletionProbe {
    double fraction = 0.0;
    double tau = 0.0;
    /// Weighted occupation of each harmonic relative to the reference order,
    /// n <a_n^+ a_n> / (ref <a_ref^+ a_ref>), linearly interpolated at `tau`.
    std::map<int, double> weighted_ratios;
};

struct RunManifest {
    int schema_version = 1;
    std::string command;
    std::string created_utc;
    double wall_seconds = 0.0;
    int threads = 1;
    int sector_count = 0;
    int min_weighted_number = 0;
    int max_weighted_number = 0;
    int max_sector_dimension = 0;
    long total_substeps = 0;
    double retained_probability = 0.0;
    std::vector<DepletionProbe> depletion_probes;
    std::vector<std::string> outputs;
};

/// Full simulation pipeline: evolve, extract the requested observables, write
/// CSV tables plus the manifest into the output directory.
RunManifest run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// Parametric-model pipeline: closed-form occupations, optional pulse fit and
/// harmonic waveform tables.
RunManifest run_parametric(const ScenarioConfig& config, const RunOptions& options);

/// Single Wigner grid of one mode at one time.
RunManifest run_wigner(const ScenarioConfig& config, const RunOptions& options);

enum class CheckStatus { Pass, PassLoose, Fail, Skipped };

struct ValidationCheck {
    std::string name;
    double expected = 0.0;
    double observed = 0.0;
    double tolerance = 0.0;       // the default gate
    double used_tolerance = 0.0;  // after tolerance_scale
    CheckStatus status = CheckStatus::Skipped;
    std::string note;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
};

/// Oracle battery: closed-form and short-time checks of the simulator at the
/// configured parameter point. Writes validation.json plus a text table.
ValidationReport run_validate(const ScenarioConfig& config,
                              const RunOptions& options);

/// Human-readable table of a validation report, one row per check.
std::string validation_table(const ValidationReport& report);

} // namespace qhhg
