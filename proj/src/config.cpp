#include "qhhg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

namespace qhhg {

using nlohmann::json;

namespace {

std::string joined(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object())
        throw ConfigError("'" + path + "' must be an object");
}

/// Reject any key outside the schema; a silent typo here would quietly run
/// the wrong physics.
void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown key '" + joined(path, item.key()) + "'");
    }
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const std::string& path, const char* key) {
    const json* found = find(j, key);
    if (!found)
        throw ConfigError("missing key '" + joined(path, key) + "'");
    return *found;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError("'" + where + "' must be a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer())
        throw ConfigError("'" + where + "' must be an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean())
        throw ConfigError("'" + where + "' must be true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string())
        throw ConfigError("'" + where + "' must be a string");
    return j.get<std::string>();
}

double need_number(const json& j, const std::string& path, const char* key) {
    return as_number(need(j, path, key), joined(path, key));
}

int need_int(const json& j, const std::string& path, const char* key) {
    return as_int(need(j, path, key), joined(path, key));
}

double opt_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
    const json* found = find(j, key);
    return found ? as_number(*found, joined(path, key)) : fallback;
}

int opt_int(const json& j, const std::string& path, const char* key,
            int fallback) {
    const json* found = find(j, key);
    return found ? as_int(*found, joined(path, key)) : fallback;
}

bool opt_bool(const json& j, const std::string& path, const char* key,
              bool fallback) {
    const json* found = find(j, key);
    return found ? as_bool(*found, joined(path, key)) : fallback;
}

/// Maps like {"3": 0.01, "5": 0.002}: JSON keys are strings, harmonic orders
/// are not, so the keys must parse completely as integers.
std::map<int, double> order_keyed_map(const json& j, const std::string& path) {
    expect_object(j, path);
    std::map<int, double> out;
    for (const auto& item : j.items()) {
        std::size_t used = 0;
        int order = 0;
        try {
            order = std::stoi(item.key(), &used);
        } catch (...) {
            used = 0;
        }
        if (used != item.key().size())
            throw ConfigError("'" + path + "' keys must be integer harmonic "
                              "orders, got '" + item.key() + "'");
        out[order] = as_number(item.value(), joined(path, item.key()));
    }
    if (out.empty())
        throw ConfigError("'" + path + "' must not be empty");
    return out;
}

std::vector<double> number_array(const json& j, const std::string& where) {
    if (!j.is_array())
        throw ConfigError("'" + where + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j)
        out.push_back(as_number(v, where + " entries"));
    return out;
}

CouplingChoice parse_coupling(const json& j) {
    const std::string path = "coupling_mode";
    expect_object(j, path);
    const std::string type = as_string(need(j, path, "type"), path + ".type");

    CouplingChoice choice;
    if (type == "plateau") {
        check_keys(j, path, {"type", "p"});
        choice.kind = CouplingChoice::Kind::Plateau;
        choice.p = need_number(j, path, "p");
        if (!(choice.p > 0.0))
            throw ConfigError("'coupling_mode.p' must be positive");
    } else if (type == "experimental") {
        check_keys(j, path, {"type", "heights", "reference", "p"});
        choice.kind = CouplingChoice::Kind::Experimental;
        choice.heights = order_keyed_map(need(j, path, "heights"),
                                         path + ".heights");
        choice.reference = need_int(j, path, "reference");
        choice.p = opt_number(j, path, "p", 1.0);
        if (!(choice.p > 0.0))
            throw ConfigError("'coupling_mode.p' must be positive");
    } else if (type == "explicit") {
        check_keys(j, path, {"type", "chi"});
        choice.kind = CouplingChoice::Kind::Explicit;
        choice.chi = order_keyed_map(need(j, path, "chi"), path + ".chi");
    } else {
        throw ConfigError("'coupling_mode.type' must be one of plateau, "
                          "experimental, explicit");
    }
    return choice;
}

TauGridSpec parse_tau_grid(const json& j) {
    const std::string path = "tau_grid";
    expect_object(j, path);
    check_keys(j, path, {"start", "stop", "count", "mirror"});
    TauGridSpec grid;
    grid.start = need_number(j, path, "start");
    grid.stop = need_number(j, path, "stop");
    grid.count = need_int(j, path, "count");
    grid.mirror = opt_bool(j, path, "mirror", false);
    return grid;
}

PropagatorConfig parse_propagator(const json& j) {
    const std::string path = "propagator";
    expect_object(j, path);
    check_keys(j, path, {"method", "krylov_dim", "step_tol", "max_step"});
    PropagatorConfig prop;
    if (const json* m = find(j, "method")) {
        const std::string method = as_string(*m, "propagator.method");
        if (method == "krylov")
            prop.method = PropagatorConfig::Method::Krylov;
        else if (method == "eigen")
            prop.method = PropagatorConfig::Method::Eigen;
        else
            throw ConfigError("'propagator.method' must be krylov or eigen");
    }
    prop.krylov_dim = opt_int(j, path, "krylov_dim", prop.krylov_dim);
    if (prop.krylov_dim < 2)
        throw ConfigError("'propagator.krylov_dim' must be at least 2");
    prop.step_tol = opt_number(j, path, "step_tol", prop.step_tol);
    if (!(prop.step_tol > 0.0))
        throw ConfigError("'propagator.step_tol' must be positive");
    prop.max_step = opt_number(j, path, "max_step", prop.max_step);
    if (prop.max_step < 0.0)
        throw ConfigError("'propagator.max_step' must be non-negative");
    return prop;
}

WignerRequest parse_wigner(const json& j, const std::vector<int>& modes) {
    const std::string path = "observables.wigner";
    expect_object(j, path);
    check_keys(j, path, {"mode", "tau", "re_min", "re_max", "im_min", "im_max",
                         "points"});
    WignerRequest req;
    req.mode = need_int(j, path, "mode");
    req.tau = need_number(j, path, "tau");
    req.re_min = opt_number(j, path, "re_min", req.re_min);
    req.re_max = opt_number(j, path, "re_max", req.re_max);
    req.im_min = opt_number(j, path, "im_min", req.im_min);
    req.im_max = opt_number(j, path, "im_max", req.im_max);
    req.points = opt_int(j, path, "points", req.points);
    if (req.points < 2)
        throw ConfigError("'observables.wigner.points' must be at least 2");
    if (!(req.re_max > req.re_min) || !(req.im_max > req.im_min))
        throw ConfigError("'observables.wigner' bounds must be ordered");
    if (req.mode != 0 &&
        std::find(modes.begin(), modes.end(), req.mode) == modes.end())
        throw ConfigError("'observables.wigner.mode' must be 0 or a tracked "
                          "harmonic order");
    return req;
}

ObservableToggles parse_observables(const json& j,
                                    const std::vector<int>& modes) {
    const std::string path = "observables";
    expect_object(j, path);
    check_keys(j, path, {"distributions", "mandel", "purity", "quadratures",
                         "wigner"});
    ObservableToggles toggles;
    toggles.distributions = opt_bool(j, path, "distributions", false);
    toggles.mandel = opt_bool(j, path, "mandel", false);
    toggles.purity = opt_bool(j, path, "purity", false);
    toggles.quadratures = opt_bool(j, path, "quadratures", false);
    if (const json* w = find(j, "wigner"))
        toggles.wigner = parse_wigner(*w, modes);
    return toggles;
}

PulseConfig parse_pulse(const json& j) {
    const std::string path = "pulse";
    expect_object(j, path);
    const std::string type = as_string(need(j, path, "type"), "pulse.type");

    PulseConfig pulse;
    if (type == "gaussian") {
        check_keys(j, path, {"type", "e0", "tau_p", "omega0", "grid_min",
                             "grid_max", "grid_count"});
        pulse.kind = PulseConfig::Kind::Gaussian;
        pulse.e0 = need_number(j, path, "e0");
        pulse.tau_p = need_number(j, path, "tau_p");
        pulse.omega = need_number(j, path, "omega0");
        pulse.grid_min = need_number(j, path, "grid_min");
        pulse.grid_max = need_number(j, path, "grid_max");
        pulse.grid_count = need_int(j, path, "grid_count");
        if (!(pulse.e0 > 0.0) || !(pulse.tau_p > 0.0) || !(pulse.omega > 0.0))
            throw ConfigError("'pulse' e0, tau_p and omega0 must be positive");
        if (!(pulse.grid_min > 0.0) || !(pulse.grid_max > pulse.grid_min))
            throw ConfigError("'pulse' frequency grid bounds must be positive "
                              "and ordered");
        if (pulse.grid_count < 2)
            throw ConfigError("'pulse.grid_count' must be at least 2");
    } else if (type == "modes") {
        check_keys(j, path, {"type", "omega", "alpha_re", "alpha_im"});
        pulse.kind = PulseConfig::Kind::Modes;
        const std::vector<double> omega =
            number_array(need(j, path, "omega"), "pulse.omega");
        const std::vector<double> re =
            number_array(need(j, path, "alpha_re"), "pulse.alpha_re");
        const std::vector<double> im =
            number_array(need(j, path, "alpha_im"), "pulse.alpha_im");
        if (omega.size() != re.size() || omega.size() != im.size())
            throw ConfigError("'pulse' omega, alpha_re and alpha_im must have "
                              "the same length");
        if (omega.empty())
            throw ConfigError("'pulse.omega' must not be empty");
        for (std::size_t i = 0; i < omega.size(); ++i) {
            if (!(omega[i] > 0.0))
                throw ConfigError("'pulse.omega' entries must be positive");
            if (i > 0 && !(omega[i] > omega[i - 1]))
                throw ConfigError("'pulse.omega' must be strictly ascending");
        }
        pulse.explicit_spec.omega = omega;
        pulse.explicit_spec.alpha.resize(omega.size());
        for (std::size_t i = 0; i < omega.size(); ++i)
            pulse.explicit_spec.alpha[i] = {re[i], im[i]};
    } else {
        throw ConfigError("'pulse.type' must be gaussian or modes");
    }
    return pulse;
}

} // namespace

std::vector<double> TauGridSpec::points() const {
    if (count < 2)
        throw ConfigError("'tau_grid.count' must be at least 2");
    if (!(stop > start))
        throw ConfigError("'tau_grid.stop' must exceed 'tau_grid.start'");
    std::vector<double> base(count);
    for (int i = 0; i < count; ++i)
        base[i] = start + (stop - start) * i / (count - 1);
    if (!mirror)
        return base;
    if (start < 0.0)
        throw ConfigError("a mirrored tau grid must start at a non-negative time");
    std::vector<double> full;
    full.reserve(2 * base.size());
    for (int i = count - 1; i >= 0; --i)
        if (base[i] > 0.0)
            full.push_back(-base[i]);
    full.insert(full.end(), base.begin(), base.end());
    return full;
}

std::complex<double> ScenarioConfig::alpha0() const {
    return std::sqrt(alpha0_sq);
}

CouplingSet ScenarioConfig::build_couplings() const {
    const ModeSet set(modes);
    switch (coupling.kind) {
    case CouplingChoice::Kind::Plateau:
        return plateau_couplings(coupling.p, alpha0(), set);
    case CouplingChoice::Kind::Experimental: {
        const CouplingSet full = experimental_couplings(
            coupling.heights, coupling.reference, alpha0(), coupling.p);
        // The profile may list more orders than are tracked; keep only the
        // tracked ones so the Hamiltonian builder sees an exact match.
        CouplingSet used;
        used.provenance = full.provenance;
        for (int n : set.orders()) {
            auto it = full.chi.find(n);
            if (it == full.chi.end())
                throw ConfigError("'coupling_mode.heights' does not cover "
                                  "tracked order " + std::to_string(n));
            used.chi[n] = it->second;
        }
        return used;
    }
    case CouplingChoice::Kind::Explicit:
        for (int n : set.orders())
            if (!coupling.chi.count(n))
                throw ConfigError("'coupling_mode.chi' does not cover tracked "
                                  "order " + std::to_string(n));
        for (const auto& [n, value] : coupling.chi)
            if (!set.contains(n))
                throw ConfigError("'coupling_mode.chi' lists order " +
                                  std::to_string(n) + " which is not tracked");
        return explicit_couplings(coupling.chi);
    }
    throw ConfigError("unreachable coupling kind");
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!root.is_object())
        throw ConfigError("config root must be an object");
    check_keys(root, "",
               {"alpha0_sq", "modes", "coupling_mode", "tau_grid", "epsilon",
                "propagator", "observables", "pulse", "tolerance_scale",
                "output_dir"});

    ScenarioConfig cfg;
    cfg.alpha0_sq = need_number(root, "", "alpha0_sq");
    if (!(cfg.alpha0_sq > 0.0))
        throw ConfigError("'alpha0_sq' must be positive");

    const json& modes = need(root, "", "modes");
    if (!modes.is_array() || modes.empty())
        throw ConfigError("'modes' must be a non-empty array of harmonic orders");
    for (const auto& m : modes)
        cfg.modes.push_back(as_int(m, "modes entries"));
    try {
        (void)ModeSet(cfg.modes);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("'modes': ") + e.what());
    }

    cfg.coupling = parse_coupling(need(root, "", "coupling_mode"));
    cfg.tau_grid = parse_tau_grid(need(root, "", "tau_grid"));
    (void)cfg.tau_grid.points(); // surfaces range errors at load time

    cfg.epsilon = opt_number(root, "", "epsilon", cfg.epsilon);
    if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))
        throw ConfigError("'epsilon' must lie strictly between 0 and 1");

    if (const json* prop = find(root, "propagator"))
        cfg.propagator = parse_propagator(*prop);
    if (const json* obs = find(root, "observables"))
        cfg.observables = parse_observables(*obs, cfg.modes);
    if (const json* pulse = find(root, "pulse"))
        cfg.pulse = parse_pulse(*pulse);

    cfg.tolerance_scale = opt_number(root, "", "tolerance_scale", 1.0);
    if (!(cfg.tolerance_scale >= 1.0))
        throw ConfigError("'tolerance_scale' must be at least 1");

    if (const json* out = find(root, "output_dir")) {
        cfg.output_dir = as_string(*out, "output_dir");
        if (cfg.output_dir.empty())
            throw ConfigError("'output_dir' must not be empty");
    }

    // Building the couplings exercises every remaining cross-field rule
    // (coverage of the mode set, positivity) before any work starts.
    try {
        (void)cfg.build_couplings();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

bool ValidationReport::all_passed() const {
    for (const auto& check : checks)
        if (check.status == CheckStatus::Fail)
            return false;
    return true;
}

} // namespace qhhg
