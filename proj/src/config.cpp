#include "spdc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spdc {

namespace {

using nlohmann::json;

std::vector<double> parse_grid(const json& j, const std::string& what)
{
    std::vector<double> grid;
    if (j.is_array()) {
        for (const auto& v : j)
            grid.push_back(v.get<double>());
    } else if (j.is_object()) {
        double start = j.at("start").get<double>();
        double stop = j.at("stop").get<double>();
        double step = j.at("step").get<double>();
        if (step <= 0.0)
            throw std::runtime_error(what + ": grid step must be positive");
        for (double x = start; x <= stop + 1e-12 * std::max(1.0, std::abs(stop)); x += step)
            grid.push_back(x);
    } else {
        throw std::runtime_error(what + ": grid must be an array or {start, stop, step}");
    }
    return grid;
}

AtomicMedium parse_medium(const json& j)
{
    AtomicMedium md;
    std::string cfg = j.value("config", "type-I");
    if (cfg == "type-I")
        md.config = NConfig::TypeI;
    else if (cfg == "type-II")
        md.config = NConfig::TypeII;
    else
        throw std::runtime_error("medium.config must be type-I or type-II");
    md.g4N = j.at("g4N").get<double>();
    md.coupling_ratio = j.value("coupling_ratio", 0.0);
    md.gamma0 = j.value("gamma0", 0.5);
    md.gamma21 = j.value("gamma21", 0.01);
    md.gamma41 = j.value("gamma41", 0.0);
    md.gamma43 = j.value("gamma43", 0.0);
    md.omega_c = j.at("omega_c").get<double>();
    md.omega_d = j.value("omega_d", 0.0);
    md.delta31 = j.value("delta31", 0.0);
    md.delta42 = j.value("delta42", 0.0);
    md.delta_c = j.value("delta_c", 0.0);
    md.ku = j.value("ku", 0.0);
    return md;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1)
        throw std::runtime_error("config: unsupported schema_version");

    if (j.contains("truncation")) {
        const auto& t = j.at("truncation");
        cfg.n_max_s = t.value("n_max_s", 6);
        cfg.n_max_i = t.value("n_max_i", 6);
    }

    if (j.contains("system")) {
        const auto& s = j.at("system");
        if (s.contains("eta"))
            cfg.eta = s.at("eta").get<double>();
        cfg.delta = s.value("delta", 0.0);
        cfg.kappa_s = s.value("kappa_s", 0.5);
        cfg.kappa_i = s.value("kappa_i", 0.5);
        cfg.pump = s.value("pump", 0.0);
        cfg.keep_kerr_after_pulse = s.value("keep_kerr_after_pulse", true);
        if (s.contains("pulse")) {
            const auto& p = s.at("pulse");
            std::string mode = p.value("mode", "fixed-duration");
            double window = p.value("total_window", 6.0);
            if (mode == "fixed-duration")
                cfg.schedule = PulseSchedule::fixed(p.value("tau_p", M_PI / 40.0), window);
            else if (mode == "pi-area")
                cfg.schedule = PulseSchedule::pi_area(window);
            else
                throw std::runtime_error("config: pulse.mode must be fixed-duration or pi-area");
        }
        if (s.contains("loss")) {
            const auto& l = s.at("loss");
            cfg.kappa_in_s = l.value("kappa_in_s", 0.0);
            cfg.kappa_in_i = l.value("kappa_in_i", 0.0);
        }
    }

    if (j.contains("medium"))
        cfg.medium = parse_medium(j.at("medium"));

    cfg.solver = j.value("solver", "me");
    cfg.n_traj = j.value("n_traj", 10000);
    cfg.seed = j.value("seed", std::uint64_t(1));
    cfg.rtol = j.value("rtol", 1e-8);

    if (j.contains("sweep")) {
        SweepSpec sw;
        sw.parameter = j.at("sweep").at("parameter").get<std::string>();
        sw.grid = parse_grid(j.at("sweep").at("grid"), "sweep");
        cfg.sweep = sw;
    }

    if (j.contains("kerr_scan")) {
        const auto& k = j.at("kerr_scan");
        KerrScanSpec ks;
        ks.delta31_grid = parse_grid(k.at("delta31"), "kerr_scan");
        ks.nodes = k.value("nodes", 64);
        if (k.contains("delta42_rule")) {
            const auto& r = k.at("delta42_rule");
            std::string kind = r.value("kind", "proportional");
            if (kind == "fixed")
                ks.delta42_rule.kind = Delta42Rule::Kind::Fixed;
            else if (kind == "proportional")
                ks.delta42_rule.kind = Delta42Rule::Kind::Proportional;
            else
                throw std::runtime_error("config: delta42_rule.kind must be fixed or proportional");
            ks.delta42_rule.value = r.value("value", 8.5);
        }
        cfg.kerr_scan = ks;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<ConfigIssue> validate_config(const ExperimentConfig& cfg)
{
    std::vector<ConfigIssue> issues;
    auto error = [&](std::string msg) {
        issues.push_back({ConfigIssue::Severity::Error, std::move(msg)});
    };
    auto warning = [&](std::string msg) {
        issues.push_back({ConfigIssue::Severity::Warning, std::move(msg)});
    };

    if (cfg.n_max_s < 1 || cfg.n_max_i < 1)
        error("truncation must be at least 1 per mode");
    if (cfg.eta.has_value() && cfg.medium.has_value())
        error("give either system.eta or a medium, not both");
    if (!cfg.eta.has_value() && !cfg.medium.has_value())
        error("one of system.eta or medium is required");
    if (cfg.kappa_s <= 0.0 || cfg.kappa_i <= 0.0)
        error("kappa_s and kappa_i must be positive");
    if (cfg.pump < 0.0)
        error("pump must be nonnegative");
    if (cfg.kappa_in_s < 0.0 || cfg.kappa_in_s > cfg.kappa_s
        || cfg.kappa_in_i < 0.0 || cfg.kappa_in_i > cfg.kappa_i)
        error("internal losses must lie in [0, kappa]");
    if (cfg.solver != "me" && cfg.solver != "qt" && cfg.solver != "both")
        error("solver must be me, qt or both");
    if (cfg.n_traj < 1)
        error("n_traj must be >= 1");
    if (cfg.rtol <= 0.0 || cfg.rtol > 1e-2)
        error("rtol out of range");

    if (cfg.sweep) {
        const auto& sw = *cfg.sweep;
        if (sw.grid.empty())
            error("sweep grid is empty");
        if (sw.parameter != "pump" && sw.parameter != "eta" && sw.parameter != "kappa")
            error("sweep parameter must be one of: pump, eta, kappa");
        if (sw.parameter == "pump" && cfg.schedule.mode == PulseSchedule::Mode::PiArea)
            for (double v : sw.grid)
                if (v <= 0.0)
                    error("pi-area pulses need pump > 0 at every sweep point");
    }
    if (cfg.kerr_scan && cfg.kerr_scan->delta31_grid.empty())
        error("kerr_scan grid is empty");
    if (cfg.kerr_scan && !cfg.medium)
        error("kerr_scan needs a medium");

    if (cfg.medium) {
        if (cfg.medium->g4N <= 0.0)
            error("medium.g4N must be positive");
        if (cfg.medium->omega_c <= 0.0)
            error("medium.omega_c must be positive");
        if (cfg.medium->config == NConfig::TypeII && cfg.medium->omega_d <= 0.0)
            error("type-II medium needs omega_d");
        for (const std::string& w : medium_warnings(*cfg.medium))
            warning(w);
    }

    // Truncation-adequacy heuristic: without strong blockade the pulse area
    // sets the expected pair number.
    double eta_val = cfg.eta.value_or(0.0);
    double tau = 0.0;
    try {
        tau = cfg.schedule.resolve_tau(cfg.pump);
    } catch (const std::exception&) {
        tau = 0.0;
    }
    double area = cfg.pump * tau;
    if (eta_val < 10.0 * cfg.kappa_s && area > 1.0 && double(cfg.n_max_s) < 3.0 * area)
        warning("truncation looks small for this pump strength; check convergence");

    return issues;
}

bool has_errors(const std::vector<ConfigIssue>& issues)
{
    for (const auto& i : issues)
        if (i.severity == ConfigIssue::Severity::Error)
            return true;
    return false;
}

SystemParams resolve_system_params(const ExperimentConfig& cfg)
{
    SystemParams p;
    p.delta = cfg.delta;
    p.kappa_s = cfg.kappa_s;
    p.kappa_i = cfg.kappa_i;
    p.pump = cfg.pump;
    p.schedule = cfg.schedule;
    if (cfg.eta) {
        p.eta = *cfg.eta;
    } else if (cfg.medium) {
        KerrResult r = cfg.medium->config == NConfig::TypeI ? kerr_type_i(*cfg.medium)
                                                            : kerr_type_ii(*cfg.medium);
        p.eta = std::abs(r.eta);  // blockade strength; sign absorbed by pump tuning
    } else {
        throw std::runtime_error("config: eta or medium required");
    }
    return p;
}

}  // namespace spdc
