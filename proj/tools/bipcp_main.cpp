#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bipcp/combinatorics.hpp"
#include "bipcp/contact.hpp"
#include "bipcp/errors.hpp"
#include "bipcp/harness.hpp"
#include "bipcp/hypergraph.hpp"
#include "bipcp/phase.hpp"
#include "bipcp/rng.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;

namespace {

// "lo:hi:n" or a single value
bipcp::GridRange parse_range(const std::string& s) {
    bipcp::GridRange r{0.0, 0.0, 1};
    auto c1 = s.find(':');
    if (c1 == std::string::npos) {
        r.lo = r.hi = std::stod(s);
        return r;
    }
    auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string::npos) throw CLI::ValidationError("range must be value or lo:hi:n");
    r.lo = std::stod(s.substr(0, c1));
    r.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    r.n = std::stoi(s.substr(c2 + 1));
    return r;
}

bipcp::contact::SurvivalProxy parse_proxy(const std::string& s) {
    if (s == "alive") return bipcp::contact::SurvivalProxy::alive_at_horizon;
    if (s == "target") return bipcp::contact::SurvivalProxy::target_hit;
    if (s == "either") return bipcp::contact::SurvivalProxy::either;
    throw CLI::ValidationError("proxy must be alive, target, or either");
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw CLI::ValidationError("cannot open output file " + path);
    return file;
}

// config file entries become flags unless already given on the command line
std::vector<std::string> merge_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) cfg_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) cfg_path = args[i].substr(9);
    }
    if (cfg_path.empty()) return args;
    std::ifstream in(cfg_path);
    if (!in) throw CLI::ValidationError("cannot read config file " + cfg_path);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) continue;
        std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (!present) args.push_back(flag + "=" + val);
    }
    return args;
}

int default_workers() {
    if (const char* env = std::getenv("BIPCP_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-rate contact process on a bipartite geometric graph"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value config file; flags override");

    // phase
    auto* phase = app.add_subcommand("phase", "phase diagram and exponent data");
    std::string p_g1 = "0.55:0.95:41", p_g2 = "0.55:0.95:41", p_a = "1", p_fmt = "csv",
                p_out;
    phase->add_option("--gamma1", p_g1, "value or lo:hi:n");
    phase->add_option("--gamma2", p_g2, "value or lo:hi:n");
    phase->add_option("--a", p_a, "value or lo:hi:n");
    phase->add_option("--format", p_fmt, "csv or svg");
    phase->add_option("--out", p_out, "output file (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "lambda sweep of survival estimates");
    double s_g1 = 0.8, s_g2 = 0.8, s_a = 1.0, s_L = 1000.0, s_tmax = 1e3;
    std::vector<double> s_lambdas;
    std::int64_t s_trials = 100;
    std::uint64_t s_seed = 1;
    int s_workers = default_workers();
    std::string s_proxy = "alive", s_out, s_fit;
    bool s_per_trial = false;
    sim->add_option("--gamma1", s_g1);
    sim->add_option("--gamma2", s_g2);
    sim->add_option("--a", s_a);
    sim->add_option("--lambda", s_lambdas, "lambda list")->required()->delimiter(',');
    sim->add_option("--L", s_L, "window half-length");
    sim->add_option("--trials", s_trials);
    sim->add_option("--t-max", s_tmax);
    sim->add_option("--proxy", s_proxy, "alive, target, or either");
    sim->add_option("--seed", s_seed);
    sim->add_option("--workers", s_workers);
    sim->add_option("--out", s_out);
    sim->add_option("--fit", s_fit, "lambda_lo:lambda_hi for a slope fit summary line");
    sim->add_flag("--per-trial", s_per_trial, "emit one JSON line per trial");

    // star
    auto* star = app.add_subcommand("star", "O(1)-state star engine study");
    std::int64_t st_n = 100, st_trials = 1000, st_leaves = 0;
    double st_l1 = 0.05, st_l2 = 0.05, st_tmax = 1e3;
    std::uint64_t st_seed = 1;
    std::string st_out;
    star->add_option("--n", st_n, "leaf count");
    star->add_option("--lambda1", st_l1);
    star->add_option("--lambda2", st_l2);
    star->add_option("--leaves", st_leaves, "initially infected leaves");
    star->add_option("--trials", st_trials);
    star->add_option("--t-max", st_tmax);
    star->add_option("--seed", st_seed);
    star->add_option("--out", st_out);

    // paths
    auto* paths = app.add_subcommand("paths", "combinatorial path enumeration");
    std::size_t pa_ell = 3;
    int pa_k = 0;
    std::string pa_fmt = "path", pa_out;
    paths->add_option("--ell", pa_ell, "path length");
    paths->add_option("--k", pa_k, "restrict to k distinct values (0 = all)");
    paths->add_option("--format", pa_fmt, "path or tree");
    paths->add_option("--out", pa_out);

    // verify
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    std::uint64_t v_seed = 1;
    std::string v_out;
    verify->add_option("--seed", v_seed);
    verify->add_option("--out", v_out);

    // percolation
    auto* perc = app.add_subcommand("percolation", "component statistics of sampled graphs");
    double pc_g1 = 0.7, pc_g2 = 0.6, pc_a = 1.0, pc_L = 1000.0;
    std::int64_t pc_graphs = 10;
    std::uint64_t pc_seed = 1;
    std::string pc_out;
    perc->add_option("--gamma1", pc_g1);
    perc->add_option("--gamma2", pc_g2);
    perc->add_option("--a", pc_a);
    perc->add_option("--L", pc_L);
    perc->add_option("--graphs", pc_graphs);
    perc->add_option("--seed", pc_seed);
    perc->add_option("--out", pc_out);

    std::vector<std::string> args;
    try {
        args = merge_config(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    std::vector<const char*> cargv{argv[0]};
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        std::ofstream file;
        if (app.got_subcommand(phase)) {
            auto fmt = p_fmt == "svg" ? bipcp::harness::DiagramFormat::svg
                                      : bipcp::harness::DiagramFormat::csv;
            if (p_fmt != "svg" && p_fmt != "csv")
                throw bipcp::UnsupportedFormat("format must be csv or svg");
            auto text = bipcp::harness::emit_phase_diagram(parse_range(p_g1), parse_range(p_g2),
                                                           parse_range(p_a), fmt);
            open_out(file, p_out) << text;
        } else if (app.got_subcommand(sim)) {
            bipcp::harness::ExperimentConfig cfg;
            cfg.params = {s_g1, s_g2, s_a, s_lambdas.front(), false};
            cfg.lambdas = s_lambdas;
            cfg.window = {s_L};
            cfg.trials = s_trials;
            cfg.sim.t_max = s_tmax;
            cfg.sim.proxy = parse_proxy(s_proxy);
            cfg.master_seed = s_seed;
            cfg.workers = s_workers;
            auto& out = open_out(file, s_out);
            if (s_per_trial) {
                for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
                    bipcp::ModelParams p = cfg.params;
                    p.lambda = cfg.lambdas[li];
                    std::uint64_t seed = bipcp::rng::derive(cfg.master_seed, 0x51, li);
                    for (std::int64_t i = 0; i < cfg.trials; ++i) {
                        auto t = bipcp::contact::theta_trial(p, cfg.window, cfg.root, cfg.sim,
                                                            seed, i);
                        json j;
                        j["trial"] = i;
                        j["survived"] = t.survived;
                        j["extinction_time"] = t.extinction_time;
                        j["peak"] = t.peak_infected;
                        j["target_hit"] = t.target_was_hit;
                        j["lambda"] = p.lambda;
                        out << j.dump() << '\n';
                    }
                }
            } else {
                auto rows = bipcp::harness::sweep_theta(cfg);
                out << bipcp::harness::aggregate_jsonl(rows, cfg.sim);
                if (!s_fit.empty()) {
                    auto c = s_fit.find(':');
                    if (c == std::string::npos)
                        throw bipcp::BadRange("--fit wants lambda_lo:lambda_hi");
                    double lo = std::stod(s_fit.substr(0, c));
                    double hi = std::stod(s_fit.substr(c + 1));
                    double target =
                        bipcp::classify(s_g1, s_g2, s_a).a_star_value;
                    auto fit = bipcp::harness::fit_slope(rows, lo, hi, target, 0.6);
                    json j;
                    j["slope"] = fit.slope;
                    j["intercept"] = fit.intercept;
                    j["stderr"] = fit.stderr_;
                    j["points"] = fit.points;
                    j["zero_rows_excluded"] = fit.zero_rows_excluded;
                    j["target_a_star"] = fit.target_a_star;
                    j["within_band"] = fit.within_band;
                    out << j.dump() << '\n';
                }
            }
        } else if (app.got_subcommand(star)) {
            auto& out = open_out(file, st_out);
            bipcp::contact::SimConfig cfg;
            cfg.t_max = st_tmax;
            for (std::int64_t i = 0; i < st_trials; ++i) {
                cfg.seed = bipcp::rng::derive(st_seed, 0x57, static_cast<std::uint64_t>(i));
                auto r = bipcp::contact::run_star(st_n, {st_l1, st_l2},
                                                 {true, st_leaves}, cfg);
                json j;
                j["trial"] = i;
                j["survived"] = r.survived;
                j["extinction_time"] = r.extinction_time;
                j["peak"] = r.peak_infected;
                out << j.dump() << '\n';
            }
        } else if (app.got_subcommand(paths)) {
            auto& out = open_out(file, pa_out);
            auto list = bipcp::combi::enumerate_paths(
                pa_ell, pa_k > 0 ? std::optional<int>(pa_k) : std::nullopt);
            for (const auto& p : list) {
                if (pa_fmt == "tree")
                    out << bipcp::combi::discovery_tree(p).parent_array() << '\n';
                else
                    out << bipcp::combi::path_dump(p) << '\n';
            }
        } else if (app.got_subcommand(verify)) {
            auto report = bipcp::harness::verify_all(v_seed);
            open_out(file, v_out) << report.json << '\n';
            if (!report.all_pass) return 2;
        } else if (app.got_subcommand(perc)) {
            auto& out = open_out(file, pc_out);
            bipcp::ModelParams p{pc_g1, pc_g2, pc_a, 0.1, true};
            for (std::int64_t g = 0; g < pc_graphs; ++g) {
                std::uint64_t seed = bipcp::rng::derive(pc_seed, 0x9C, static_cast<std::uint64_t>(g));
                auto graph = bipcp::Hypergraph::sample(p, {pc_L}, seed);
                auto comps = graph.component_sizes();
                json j;
                j["seed"] = seed;
                j["n"] = graph.size();
                j["largest"] = comps.empty() ? 0 : comps.front();
                j["largest_fraction"] =
                    graph.size() == 0
                        ? 0.0
                        : static_cast<double>(comps.empty() ? 0 : comps.front()) /
                              static_cast<double>(graph.size());
                j["second"] = comps.size() > 1 ? comps[1] : 0;
                out << j.dump() << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
