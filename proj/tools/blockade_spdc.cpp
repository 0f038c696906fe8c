// Command-line front end: Kerr scans, master-equation evolution, quantum
// trajectories, heralded statistics, parameter sweeps and figure
// reproduction. Exit codes: 0 ok, 2 config error, 3 solver failure,
// 4 acceptance-check failure in reproduce.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdc/config.hpp"
#include "spdc/experiment.hpp"
#include "spdc/herald.hpp"
#include "spdc/kerr.hpp"
#include "spdc/lindblad.hpp"
#include "spdc/simd.hpp"
#include "spdc/trajectories.hpp"

namespace {

using namespace spdc;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAcceptance = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

ExperimentConfig load_and_validate(const CommonArgs& args, bool print_warnings = true)
{
    ExperimentConfig cfg = load_config(args.config_path);
    if (args.seed_set)
        cfg.seed = args.seed;
    auto issues = validate_config(cfg);
    for (const auto& i : issues) {
        if (i.severity == ConfigIssue::Severity::Error)
            std::cerr << "config error: " << i.message << "\n";
        else if (print_warnings)
            std::cerr << "config warning: " << i.message << "\n";
    }
    if (has_errors(issues))
        throw std::invalid_argument("invalid configuration");
    return cfg;
}

void write_text(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_kerr(const CommonArgs& args)
{
    ExperimentConfig cfg = load_and_validate(args);
    if (!cfg.medium || !cfg.kerr_scan) {
        std::cerr << "config error: kerr needs a medium and a kerr_scan block\n";
        return kExitConfig;
    }
    auto scan = scan_detuning(*cfg.medium, cfg.kerr_scan->delta31_grid,
                              cfg.kerr_scan->delta42_rule, cfg.kerr_scan->nodes);
    std::ostringstream csv;
    csv << "delta31,eta,delta,converged\n";
    for (const auto& pt : scan)
        csv << format_g17(pt.delta31) << "," << format_g17(pt.eta) << ","
            << format_g17(pt.delta) << "," << (pt.converged ? 1 : 0) << "\n";
    fs::path out = fs::path(args.out_dir) / "kerr.csv";
    write_text(out, csv.str());

    auto extrema = scan_extrema(scan);
    std::cout << "kerr scan: " << scan.size() << " points -> " << out.string() << "\n";
    for (std::size_t i : extrema)
        std::cout << "  optimal point: delta31=" << scan[i].delta31 << " eta=" << scan[i].eta
                  << "\n";
    return 0;
}

int cmd_evolve(const CommonArgs& args, int samples, bool check_truncation)
{
    ExperimentConfig cfg = load_and_validate(args);
    SystemParams params = resolve_system_params(cfg);
    TwoModeSpace space = build_space(cfg.n_max_s, cfg.n_max_i);

    std::vector<double> times;
    double tau = params.schedule.resolve_tau(params.pump);
    for (int i = 0; i <= samples; ++i)
        times.push_back(params.schedule.total_window * i / double(samples));
    times.push_back(tau);
    std::sort(times.begin(), times.end());

    MesolveOptions opt;
    opt.rtol = cfg.rtol;
    EvolutionResult evo = mesolve(space, params, vacuum_ket(space).to_density(), times, opt);

    std::ostringstream csv;
    csv << "time,p00,p11,p22,p33,nonpair_weight,trace_error\n";
    for (std::size_t i = 0; i < evo.times.size(); ++i) {
        const auto& d = evo.distributions[i];
        auto at = [&](int a, int b) { return (a <= d.n_max_s && b <= d.n_max_i) ? d.at(a, b) : 0.0; };
        csv << format_g17(evo.times[i]) << "," << format_g17(at(0, 0)) << ","
            << format_g17(at(1, 1)) << "," << format_g17(at(2, 2)) << ","
            << format_g17(at(3, 3)) << "," << format_g17(nonpair_weight(d)) << ","
            << format_g17(evo.trace_errors[i]) << "\n";
    }
    fs::path out = fs::path(args.out_dir) / "evolve.csv";
    write_text(out, csv.str());
    std::cout << "evolve: " << evo.times.size() << " samples, " << evo.steps << " steps -> "
              << out.string() << "\n";
    if (evo.truncation_warning)
        std::cerr << "warning: top Fock level population exceeded 1e-4; raise truncation\n";

    if (check_truncation) {
        TwoModeSpace bigger = build_space(cfg.n_max_s + 2, cfg.n_max_i + 2);
        EvolutionResult evo2 =
            mesolve(bigger, params, vacuum_ket(bigger).to_density(), {}, opt);
        double max_dp = 0.0;
        for (int ns = 0; ns <= space.n_max_s; ++ns)
            for (int ni = 0; ni <= space.n_max_i; ++ni)
                max_dp = std::max(max_dp,
                                  std::abs(evo.distribution_at_switchoff.at(ns, ni)
                                           - evo2.distribution_at_switchoff.at(ns, ni)));
        std::cout << "truncation check: max |dP| at n_max+2 = " << max_dp
                  << (max_dp < 1e-4 ? " (converged)" : " (NOT converged)") << "\n";
    }
    return 0;
}

int cmd_trajectories(const CommonArgs& args, const std::string& jump_log)
{
    ExperimentConfig cfg = load_and_validate(args);
    SystemParams params = resolve_system_params(cfg);
    TwoModeSpace space = build_space(cfg.n_max_s, cfg.n_max_i);

    LossSplit sig{params.kappa_s - cfg.kappa_in_s, cfg.kappa_in_s};
    LossSplit idl{params.kappa_i - cfg.kappa_in_i, cfg.kappa_in_i};
    McOptions opt;
    opt.threads = args.threads;
    std::vector<TrajectoryRecord> records;
    if (!jump_log.empty())
        opt.record_out = &records;

    EnsembleStatistics st =
        mcsolve(space, params, sig, idl, vacuum_ket(space), cfg.n_traj, cfg.seed, opt);

    std::ostringstream csv;
    csv << "n_s,n_i,probability\n";
    for (int ns = 0; ns <= space.n_max_s; ++ns)
        for (int ni = 0; ni <= space.n_max_i; ++ni)
            csv << ns << "," << ni << "," << format_g17(st.detected_joint.at(ns, ni)) << "\n";
    fs::path out = fs::path(args.out_dir) / "trajectories.csv";
    write_text(out, csv.str());

    std::ostringstream ch;
    ch << "channel,fraction\n";
    for (const auto& [k, f] : st.channel_fractions)
        ch << channel_name(k) << "," << format_g17(f) << "\n";
    write_text(fs::path(args.out_dir) / "channels.csv", ch.str());

    if (!jump_log.empty()) {
        std::ostringstream log;
        log << "trajectory,time,channel\n";
        for (std::size_t i = 0; i < records.size(); ++i)
            for (const auto& [t, k] : records[i].jumps)
                log << i << "," << format_g17(t) << "," << channel_name(k) << "\n";
        write_text(fs::path(args.out_dir) / jump_log, log.str());
    }

    std::cout << "trajectories: " << cfg.n_traj << " runs, " << st.total_jumps << " jumps -> "
              << out.string() << "\n";
    return 0;
}

int cmd_herald_stats(const std::string& joint_csv)
{
    std::ifstream in(joint_csv);
    if (!in) {
        std::cerr << "config error: cannot open " << joint_csv << "\n";
        return kExitConfig;
    }
    std::string line;
    std::getline(in, line);  // header
    int max_ns = 0, max_ni = 0;
    std::vector<std::tuple<int, int, double>> entries;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string a, b, c;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        int ns = std::stoi(a), ni = std::stoi(b);
        entries.emplace_back(ns, ni, std::stod(c));
        max_ns = std::max(max_ns, ns);
        max_ni = std::max(max_ni, ni);
    }
    JointPhotonDistribution P;
    P.n_max_s = std::max(1, max_ns);
    P.n_max_i = std::max(1, max_ni);
    P.p.assign(std::size_t(P.n_max_s + 1) * (P.n_max_i + 1), 0.0);
    for (auto [ns, ni, v] : entries)
        P.at(ns, ni) = v;

    HeraldedStatistics st = heralded_statistics(P);
    nlohmann::json j;
    j["alpha"] = st.alpha;
    j["g2"] = st.g2_defined ? nlohmann::json(st.g2) : nlohmann::json(nullptr);
    j["yield"] = st.yield;
    j["purity_conditional"] = st.purity;
    j["purity_from_g2"] = st.purity_from_g2;
    j["yp"] = st.yp_product;
    j["nonpair"] = st.nonpair;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args)
{
    ExperimentConfig cfg = load_and_validate(args);
    SweepResult result = run_sweep(cfg, args.threads);
    fs::path out = fs::path(args.out_dir) / "sweep.csv";
    write_text(out, sweep_csv(result));
    int failed = 0;
    for (const auto& r : result.rows)
        if (!r.ok)
            ++failed;
    std::cout << "sweep: " << result.rows.size() << " rows -> " << out.string() << "\n";
    if (failed > 0) {
        std::cerr << "warning: " << failed << " points failed (flagged in the CSV)\n";
        return kExitSolver;
    }
    return 0;
}

int cmd_reproduce(const CommonArgs& args, const std::string& figure)
{
    std::vector<std::string> to_run;
    if (figure == "all")
        to_run = reproduce_ids();
    else
        to_run.push_back(figure);

    bool all_pass = true;
    for (const std::string& id : to_run) {
        FigureResult r = reproduce(id, args.out_dir,
                                   args.seed_set ? std::optional<std::uint64_t>(args.seed)
                                                 : std::nullopt,
                                   args.threads);
        std::cout << "[" << (r.pass ? "PASS" : "FAIL") << "] " << id << "\n";
        for (const auto& c : r.checks)
            std::cout << "    " << (c.pass ? "ok  " : (c.gated ? "FAIL" : "info")) << "  "
                      << c.name << " = " << c.value << "  (band " << c.lo << " .. " << c.hi
                      << ")\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cavity-enhanced SPDC single-photon source simulator"};
    app.require_subcommand(1);

    CommonArgs common;
    int samples = 200;
    bool check_truncation = false;
    std::string jump_log;
    std::string joint_csv;
    std::string figure;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", common.config_path, "JSON config file")->required();
        sub->add_option("--out", common.out_dir, "output directory");
        sub->add_option("--seed", common.seed, "override the config seed")
            ->each([&](const std::string&) { common.seed_set = true; });
        sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
    };

    CLI::App* kerr = app.add_subcommand("kerr", "Doppler-averaged nonlinearity scan");
    add_common(kerr, true);

    CLI::App* evolve = app.add_subcommand("evolve", "master-equation time evolution");
    add_common(evolve, true);
    evolve->add_option("--samples", samples, "number of output samples");
    evolve->add_flag("--check-truncation", check_truncation,
                     "re-run at n_max+2 and report max |dP|");

    CLI::App* traj = app.add_subcommand("trajectories", "Monte-Carlo wavefunction ensemble");
    add_common(traj, true);
    traj->add_option("--jump-log", jump_log, "also write a per-trajectory jump log (filename)");

    CLI::App* herald = app.add_subcommand("herald-stats", "statistics of a joint distribution");
    herald->add_option("--joint", joint_csv, "CSV with n_s,n_i,probability rows")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
    add_common(sweep, true);

    CLI::App* repro = app.add_subcommand("reproduce", "reproduce a stored figure target");
    add_common(repro, false);
    std::string ids;
    for (const auto& id : spdc::reproduce_ids())
        ids += id + " ";
    repro->add_option("--figure", figure, "one of: all " + ids)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (kerr->parsed())
            return cmd_kerr(common);
        if (evolve->parsed())
            return cmd_evolve(common, samples, check_truncation);
        if (traj->parsed())
            return cmd_trajectories(common, jump_log);
        if (herald->parsed())
            return cmd_herald_stats(joint_csv);
        if (sweep->parsed())
            return cmd_sweep(common);
        if (repro->parsed())
            return cmd_reproduce(common, figure);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
