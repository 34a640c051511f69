#include "qhhg/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "internal.hpp"
#include "qhhg/csv.hpp"
#include "qhhg/observables.hpp"

namespace qhhg {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

json coupling_echo(const CouplingChoice& c) {
    json j;
    switch (c.kind) {
    case CouplingChoice::Kind::Plateau:
        j["type"] = "plateau";
        j["p"] = c.p;
        break;
    case CouplingChoice::Kind::Experimental: {
        j["type"] = "experimental";
        json heights;
        for (const auto& [n, h] : c.heights)
            heights[std::to_string(n)] = h;
        j["heights"] = heights;
        j["reference"] = c.reference;
        j["p"] = c.p;
        break;
    }
    case CouplingChoice::Kind::Explicit: {
        j["type"] = "explicit";
        json chi;
        for (const auto& [n, v] : c.chi)
            chi[std::to_string(n)] = v;
        j["chi"] = chi;
        break;
    }
    }
    return j;
}

} // namespace

json config_echo(const ScenarioConfig& c) {
    json j;
    j["alpha0_sq"] = c.alpha0_sq;
    j["modes"] = c.modes;
    j["coupling_mode"] = coupling_echo(c.coupling);
    j["tau_grid"] = {{"start", c.tau_grid.start},
                     {"stop", c.tau_grid.stop},
                     {"count", c.tau_grid.count},
                     {"mirror", c.tau_grid.mirror}};
    j["epsilon"] = c.epsilon;
    j["propagator"] = {
        {"method",
         c.propagator.method == PropagatorConfig::Method::Krylov ? "krylov"
                                                                 : "eigen"},
        {"krylov_dim", c.propagator.krylov_dim},
        {"step_tol", c.propagator.step_tol},
        {"max_step", c.propagator.max_step}};
    json obs;
    obs["distributions"] = c.observables.distributions;
    obs["mandel"] = c.observables.mandel;
    obs["purity"] = c.observables.purity;
    obs["quadratures"] = c.observables.quadratures;
    if (c.observables.wigner) {
        const WignerRequest& w = *c.observables.wigner;
        obs["wigner"] = {{"mode", w.mode},     {"tau", w.tau},
                         {"re_min", w.re_min}, {"re_max", w.re_max},
                         {"im_min", w.im_min}, {"im_max", w.im_max},
                         {"points", w.points}};
    }
    j["observables"] = obs;
    if (c.pulse) {
        const PulseConfig& p = *c.pulse;
        if (p.kind == PulseConfig::Kind::Gaussian) {
            j["pulse"] = {{"type", "gaussian"},   {"e0", p.e0},
                          {"tau_p", p.tau_p},     {"omega0", p.omega},
                          {"grid_min", p.grid_min}, {"grid_max", p.grid_max},
                          {"grid_count", p.grid_count}};
        } else {
            std::vector<double> re, im;
            for (const auto& a : p.explicit_spec.alpha) {
                re.push_back(a.real());
                im.push_back(a.imag());
            }
            j["pulse"] = {{"type", "modes"},
                          {"omega", p.explicit_spec.omega},
                          {"alpha_re", re},
                          {"alpha_im", im}};
        }
    }
    j["tolerance_scale"] = c.tolerance_scale;
    j["output_dir"] = c.output_dir;
    return j;
}

namespace {

void fill_sector_summary(RunManifest& manifest, const EvolveStats& stats) {
    manifest.sector_count = static_cast<int>(stats.sectors.size());
    manifest.min_weighted_number = std::numeric_limits<int>::max();
    manifest.max_weighted_number = 0;
    manifest.max_sector_dimension = 0;
    manifest.total_substeps = 0;
    for (const auto& s : stats.sectors) {
        manifest.min_weighted_number =
            std::min(manifest.min_weighted_number, s.weighted_number);
        manifest.max_weighted_number =
            std::max(manifest.max_weighted_number, s.weighted_number);
        manifest.max_sector_dimension =
            std::max(manifest.max_sector_dimension, s.dimension);
        manifest.total_substeps += s.substeps;
    }
    if (stats.sectors.empty())
        manifest.min_weighted_number = 0;
}

/// Manifest goes to disk through a rename so readers never observe a partial
/// file. The timestamp and wall-time fields are the only values that vary
/// between identical runs.
void write_manifest(const fs::path& dir, const RunManifest& manifest,
                    const ScenarioConfig& config, const EvolveStats* stats,
                    const json& extra) {
    json j;
    j["schema_version"] = manifest.schema_version;
    j["command"] = manifest.command;
    j["created_utc"] = manifest.created_utc;
    j["wall_seconds"] = manifest.wall_seconds;
    j["threads"] = manifest.threads;
    j["config"] = config_echo(config);

    json sectors;
    sectors["count"] = manifest.sector_count;
    sectors["min_weighted_number"] = manifest.min_weighted_number;
    sectors["max_weighted_number"] = manifest.max_weighted_number;
    sectors["max_dimension"] = manifest.max_sector_dimension;
    sectors["total_substeps"] = manifest.total_substeps;
    sectors["retained_probability"] = manifest.retained_probability;
    if (stats) {
        json per;
        for (const auto& s : stats->sectors)
            per.push_back({{"weighted_number", s.weighted_number},
                           {"dimension", s.dimension},
                           {"substeps", s.substeps}});
        sectors["per_sector"] = per;
    }
    j["sectors"] = sectors;

    json probes = json::array();
    for (const auto& probe : manifest.depletion_probes) {
        json ratios;
        for (const auto& [n, r] : probe.weighted_ratios)
            ratios[std::to_string(n)] = r;
        probes.push_back({{"fraction", probe.fraction},
                          {"tau", probe.tau},
                          {"weighted_ratios", ratios}});
    }
    j["depletion_probes"] = probes;
    j["outputs"] = manifest.outputs;
    for (const auto& [key, value] : extra.items())
        j[key] = value;

    const fs::path tmp = dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, dir / "manifest.json");
}

/// Per-snapshot moments of every tracked mode, shared by the CSV writers and
/// the depletion probe search.
struct MomentTable {
    std::vector<double> mean_0, second_0;
    std::vector<std::vector<double>> mean, second; // [mode position][snapshot]
};

MomentTable collect_moments(const std::vector<QuantumState>& states,
                            const ModeSet& modes) {
    MomentTable table;
    table.mean.resize(modes.count());
    table.second.resize(modes.count());
    for (const auto& state : states) {
        const PhotonDistribution fundamental =
            photon_distribution(state, kFundamental);
        table.mean_0.push_back(fundamental.mean());
        table.second_0.push_back(fundamental.second_moment());
        for (int k = 0; k < modes.count(); ++k) {
            const PhotonDistribution dist =
                photon_distribution(state, modes.orders()[k]);
            table.mean[k].push_back(dist.mean());
            table.second[k].push_back(dist.second_moment());
        }
    }
    return table;
}

/// Times where the driving-mode occupation first falls to the requested
/// fractions of its initial value, located by linear interpolation between
/// grid points; harmonic weighted-number ratios are interpolated alongside.
std::vector<DepletionProbe> locate_probes(const std::vector<QuantumState>& states,
                                          const MomentTable& table,
                                          const ModeSet& modes,
                                          int reference_order) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(states.size()); ++i)
        if (states[i].tau >= 0.0)
            idx.push_back(i);
    if (idx.size() < 2)
        return {};

    double initial = table.mean_0[idx.front()];
    for (int k = 0; k < modes.count(); ++k)
        initial += modes.orders()[k] * table.mean[k][idx.front()];

    const int ref_pos = modes.position_of(reference_order);
    std::vector<DepletionProbe> probes;
    for (double fraction : {0.98, 0.95, 0.90}) {
        const double target = fraction * initial;
        for (std::size_t s = 0; s + 1 < idx.size(); ++s) {
            const int i = idx[s], j = idx[s + 1];
            if (!(table.mean_0[i] > target && table.mean_0[j] <= target))
                continue;
            const double f =
                (table.mean_0[i] - target) / (table.mean_0[i] - table.mean_0[j]);
            DepletionProbe probe;
            probe.fraction = fraction;
            probe.tau = states[i].tau + f * (states[j].tau - states[i].tau);
            auto weighted_at = [&](int k) {
                const double wi = modes.orders()[k] * table.mean[k][i];
                const double wj = modes.orders()[k] * table.mean[k][j];
                return wi + f * (wj - wi);
            };
            const double ref = weighted_at(ref_pos);
            if (ref > 0.0) {
                for (int k = 0; k < modes.count(); ++k)
                    probe.weighted_ratios[modes.orders()[k]] =
                        weighted_at(k) / ref;
            }
            probes.push_back(std::move(probe));
            break;
        }
    }
    return probes;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * i / (count - 1);
    return out;
}

PulseFit build_pulse(const PulseConfig& pulse) {
    if (pulse.kind == PulseConfig::Kind::Gaussian)
        return fit_gaussian_pulse(pulse.e0, pulse.tau_p, pulse.omega,
                                  linspace(pulse.grid_min, pulse.grid_max,
                                           pulse.grid_count));
    PulseFit fit;
    fit.spec = pulse.explicit_spec;
    return fit;
}

} // namespace

RunManifest run_scenario(const ScenarioConfig& config,
                         const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = options.output_dir.value_or(config.output_dir);
    fs::create_directories(dir);

    const ModeSet modes(config.modes);
    const CouplingSet couplings = config.build_couplings();
    const std::vector<double> taus = config.tau_grid.points();
    if (modes.count() > 2)
        std::fprintf(stderr,
                     "note: tracking %d harmonic modes; sector dimensions grow "
                     "combinatorially with the mode count\n",
                     modes.count());

    EvolveStats stats;
    const std::vector<QuantumState> states =
        evolve_full(config.alpha0(), modes, couplings, taus, config.epsilon,
                    config.propagator, options.threads, &stats);

    RunManifest manifest;
    manifest.command = "evolve";
    manifest.created_utc = utc_now();
    manifest.threads = options.threads;
    manifest.retained_probability = states.front().retained_probability;
    fill_sector_summary(manifest, stats);

    const MomentTable table = collect_moments(states, modes);

    {
        std::vector<std::string> cols = {"tau", "mean_0", "second_0"};
        for (int n : modes.orders()) {
            cols.push_back("mean_" + std::to_string(n));
            cols.push_back("second_" + std::to_string(n));
            cols.push_back("weighted_" + std::to_string(n));
        }
        cols.push_back("weighted_total");
        CsvWriter csv(dir / "expectations.csv", cols);
        for (std::size_t i = 0; i < states.size(); ++i) {
            std::vector<double> row = {states[i].tau, table.mean_0[i],
                                       table.second_0[i]};
            double total = table.mean_0[i];
            for (int k = 0; k < modes.count(); ++k) {
                const double weighted =
                    modes.orders()[k] * table.mean[k][i];
                row.push_back(table.mean[k][i]);
                row.push_back(table.second[k][i]);
                row.push_back(weighted);
                total += weighted;
            }
            row.push_back(total);
            csv.row(row);
        }
        manifest.outputs.push_back("expectations.csv");
    }

    if (config.observables.mandel) {
        std::vector<std::string> cols = {"tau", "q_0"};
        for (int n : modes.orders())
            cols.push_back("q_" + std::to_string(n));
        CsvWriter csv(dir / "mandel.csv", cols);
        for (const auto& state : states) {
            std::vector<double> row = {state.tau};
            auto q_or_nan = [&](int mode) {
                try {
                    return mandel_q(photon_distribution(state, mode));
                } catch (const std::domain_error&) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
            };
            row.push_back(q_or_nan(kFundamental));
            for (int n : modes.orders())
                row.push_back(q_or_nan(n));
            csv.row(row);
        }
        manifest.outputs.push_back("mandel.csv");
    }

    if (config.observables.purity) {
        std::vector<std::string> cols = {"tau", "purity_0"};
        for (int n : modes.orders())
            cols.push_back("purity_" + std::to_string(n));
        CsvWriter csv(dir / "purity.csv", cols);
        for (const auto& state : states) {
            std::vector<double> row = {state.tau};
            row.push_back(purity(reduced_density(state, kFundamental, 0.0)));
            for (int n : modes.orders())
                row.push_back(purity(reduced_density(state, n, 0.0)));
            csv.row(row);
        }
        manifest.outputs.push_back("purity.csv");
    }

    if (config.observables.quadratures) {
        std::vector<std::string> cols = {"tau", "x_0", "y_0"};
        for (int n : modes.orders()) {
            cols.push_back("x_" + std::to_string(n));
            cols.push_back("y_" + std::to_string(n));
        }
        CsvWriter csv(dir / "quadratures.csv", cols);
        for (const auto& state : states) {
            std::vector<double> row = {state.tau};
            const Quadratures q0 = quadratures(state, kFundamental);
            row.push_back(q0.x);
            row.push_back(q0.y);
            for (int n : modes.orders()) {
                const Quadratures q = quadratures(state, n);
                row.push_back(q.x);
                row.push_back(q.y);
            }
            csv.row(row);
        }
        manifest.outputs.push_back("quadratures.csv");
    }

    if (config.observables.distributions) {
        auto write_distributions = [&](const QuantumState& state,
                                       const std::string& name) {
            std::vector<PhotonDistribution> dists;
            dists.push_back(photon_distribution(state, kFundamental));
            for (int n : modes.orders())
                dists.push_back(photon_distribution(state, n));
            std::size_t rows = 0;
            for (const auto& d : dists)
                rows = std::max(rows, d.probabilities.size());

            std::vector<std::string> cols = {"tau", "m", "p_0"};
            for (int n : modes.orders())
                cols.push_back("p_" + std::to_string(n));
            CsvWriter csv(dir / name, cols);
            for (std::size_t m = 0; m < rows; ++m) {
                std::vector<double> row = {state.tau, double(m)};
                for (const auto& d : dists)
                    row.push_back(m < d.probabilities.size()
                                      ? d.probabilities[m]
                                      : 0.0);
                csv.row(row);
            }
            manifest.outputs.push_back(name);
        };
        write_distributions(states.front(), "distributions_initial.csv");
        write_distributions(states.back(), "distributions_final.csv");
    }

    json extra;
    if (config.observables.wigner) {
        const WignerRequest& req = *config.observables.wigner;
        const QuantumState* at = nullptr;
        for (const auto& state : states)
            if (state.tau == req.tau) {
                at = &state;
                break;
            }
        std::vector<QuantumState> dedicated;
        if (!at) {
            const double single[1] = {req.tau};
            dedicated = evolve_full(config.alpha0(), modes, couplings, single,
                                    config.epsilon, config.propagator,
                                    options.threads);
            at = &dedicated.front();
        }
        const ModeDensityMatrix rho = reduced_density(*at, req.mode, 1e-10);
        const WignerGrid grid =
            wigner(rho, wigner_grid_points(req.re_min, req.re_max, req.im_min,
                                           req.im_max, req.points));
        CsvWriter csv(dir / "wigner.csv", {"re", "im", "w"});
        for (std::size_t i = 0; i < grid.points.size(); ++i)
            csv.row({grid.points[i].real(), grid.points[i].imag(),
                     grid.values[i]});
        manifest.outputs.push_back("wigner.csv");
        extra["wigner"] = {{"mode", req.mode},
                           {"tau", req.tau},
                           {"max_imag_residue", grid.max_imag_residue},
                           {"cutoff_warning", grid.cutoff_warning}};
        if (grid.cutoff_warning)
            std::fprintf(stderr,
                         "warning: wigner grid computed from a truncated "
                         "density matrix (tail mass %.3g)\n",
                         rho.tail_mass);
    }

    if (options.dump_matrices) {
        fs::create_directories(dir / "matrices");
        for (const auto& [m, block] : states.front().sectors) {
            const SparseSymmetric matrix =
                interaction_matrix(*block.basis, couplings);
            const std::string name =
                "matrices/sector_" + std::to_string(m) + ".csv";
            CsvWriter csv(dir / name, {"row", "col", "value"});
            for (const auto& entry : matrix.entries())
                csv.row({double(entry.row), double(entry.col), entry.value});
            manifest.outputs.push_back(name);
        }
    }

    const int reference_order =
        config.coupling.kind == CouplingChoice::Kind::Experimental &&
                modes.contains(config.coupling.reference)
            ? config.coupling.reference
            : modes.orders().front();
    manifest.depletion_probes =
        locate_probes(states, table, modes, reference_order);

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(dir, manifest, config, &stats, extra);
    return manifest;
}

RunManifest run_parametric(const ScenarioConfig& config,
                           const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = options.output_dir.value_or(config.output_dir);
    fs::create_directories(dir);

    const ModeSet modes(config.modes);
    const CouplingSet couplings = config.build_couplings();
    const std::vector<double> taus = config.tau_grid.points();

    RunManifest manifest;
    manifest.command = "parametric";
    manifest.created_utc = utc_now();
    manifest.threads = options.threads;

    {
        std::vector<std::string> cols = {"tau"};
        for (int n : modes.orders()) {
            cols.push_back("nbar_" + std::to_string(n));
            cols.push_back("weighted_" + std::to_string(n));
            cols.push_back("re_amp_" + std::to_string(n));
            cols.push_back("im_amp_" + std::to_string(n));
        }
        CsvWriter csv(dir / "parametric_predictions.csv", cols);
        std::vector<ParametricPrediction> predictions;
        for (int n : modes.orders())
            predictions.push_back(
                parametric_prediction(n, couplings, config.alpha0()));
        for (double tau : taus) {
            std::vector<double> row = {tau};
            for (const auto& p : predictions) {
                const std::complex<double> amp = p.coherent_parameter(tau);
                row.push_back(p.nbar(tau));
                row.push_back(p.order * p.nbar(tau));
                row.push_back(amp.real());
                row.push_back(amp.imag());
            }
            csv.row(row);
        }
        manifest.outputs.push_back("parametric_predictions.csv");
    }

    json extra;
    if (config.pulse) {
        const PulseFit fit = build_pulse(*config.pulse);

        // The spec file round-trips: it is exactly the "pulse" object of a
        // mode-list configuration.
        {
            json spec;
            spec["type"] = "modes";
            spec["omega"] = fit.spec.omega;
            std::vector<double> re, im;
            for (const auto& a : fit.spec.alpha) {
                re.push_back(a.real());
                im.push_back(a.imag());
            }
            spec["alpha_re"] = re;
            spec["alpha_im"] = im;
            std::ofstream out(dir / "pulse_spec.json");
            if (!out)
                throw std::runtime_error("cannot write pulse_spec.json");
            out << spec.dump(2) << '\n';
            manifest.outputs.push_back("pulse_spec.json");
        }

        std::vector<std::string> cols = {"tau", "e_fundamental"};
        for (int n : modes.orders())
            cols.push_back("e_" + std::to_string(n));
        CsvWriter csv(dir / "waveforms.csv", cols);
        const std::vector<double> fundamental =
            reconstruct_field(fit.spec, taus);
        std::vector<std::vector<double>> harmonics;
        for (int n : modes.orders())
            harmonics.push_back(
                harmonic_field(fit.spec, n, couplings.at(n), taus));
        for (std::size_t i = 0; i < taus.size(); ++i) {
            std::vector<double> row = {taus[i], fundamental[i]};
            for (const auto& h : harmonics)
                row.push_back(h[i]);
            csv.row(row);
        }
        manifest.outputs.push_back("waveforms.csv");
        extra["pulse_fit"] = {{"max_residual", fit.max_residual},
                              {"rms_residual", fit.rms_residual}};
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(dir, manifest, config, nullptr, extra);
    return manifest;
}

RunManifest run_wigner(const ScenarioConfig& config, const RunOptions& options) {
    if (!config.observables.wigner)
        throw ConfigError("the wigner command needs 'observables.wigner' in "
                          "the config");
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = options.output_dir.value_or(config.output_dir);
    fs::create_directories(dir);

    const ModeSet modes(config.modes);
    const CouplingSet couplings = config.build_couplings();
    const WignerRequest& req = *config.observables.wigner;

    EvolveStats stats;
    const double single[1] = {req.tau};
    const std::vector<QuantumState> states =
        evolve_full(config.alpha0(), modes, couplings, single, config.epsilon,
                    config.propagator, options.threads, &stats);

    RunManifest manifest;
    manifest.command = "wigner";
    manifest.created_utc = utc_now();
    manifest.threads = options.threads;
    manifest.retained_probability = states.front().retained_probability;
    fill_sector_summary(manifest, stats);

    const ModeDensityMatrix rho = reduced_density(states.front(), req.mode, 1e-10);
    const WignerGrid grid =
        wigner(rho, wigner_grid_points(req.re_min, req.re_max, req.im_min,
                                       req.im_max, req.points));
    CsvWriter csv(dir / "wigner.csv", {"re", "im", "w"});
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        csv.row({grid.points[i].real(), grid.points[i].imag(), grid.values[i]});
    manifest.outputs.push_back("wigner.csv");

    json extra;
    extra["wigner"] = {{"mode", req.mode},
                       {"tau", req.tau},
                       {"max_imag_residue", grid.max_imag_residue},
                       {"cutoff_warning", grid.cutoff_warning}};
    if (grid.cutoff_warning)
        std::fprintf(stderr,
                     "warning: wigner grid computed from a truncated density "
                     "matrix (tail mass %.3g)\n",
                     rho.tail_mass);

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(dir, manifest, config, &stats, extra);
    return manifest;
}

} // namespace qhhg
