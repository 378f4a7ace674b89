#include "fbp/cli.hpp"

#include <atomic>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbp/diagnostics.hpp"
#include "fbp/dynamics.hpp"
#include "fbp/measures.hpp"
#include "fbp/riemann.hpp"
#include "fbp/steady_states.hpp"
#include "fbp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fbp::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa draw; identical across platforms for a given seed
    return (rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

int fail_config(const std::string& msg) {
    std::cerr << "error: config: " << msg << "\n";
    return 1;
}

struct RunOutputs {
    Trajectory traj;
    std::vector<PhaseTransitionEvent> events;
    std::vector<double> lyap;
    std::vector<int> iface;
    std::vector<double> sfrac;
    double cutoff = 0.0;
    std::uint64_t seed = 0;
};

RunOutputs run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    Nonlinearity n = build_phi(cfg);
    GridFunction u0 = build_initial(cfg, n, seed);

    SolverConfig sc;
    if (cfg.dt_policy == "cfl")
        sc.dt_policy = DtPolicy::cfl;
    else if (cfg.dt_policy == "derivation")
        sc.dt_policy = DtPolicy::derivation;
    else
        throw std::invalid_argument("unknown dt policy '" + cfg.dt_policy + "'");
    sc.safety = cfg.safety;
    sc.t_end = cfg.t_end;
    sc.record_every = cfg.record_every;
    sc.convergence_tol = cfg.convergence_tol;

    RunOutputs out;
    out.seed = seed;
    out.traj = integrate(n, u0, sc, CrossingThresholds{n.u_minus, n.u_plus});
    out.events = detect_transitions(n, out.traj);
    out.iface = interface_counts(n, out.traj);
    out.cutoff = cfg.cutoff > 0.0 ? cfg.cutoff : default_cutoff(cfg.N, n.u_minus);
    out.sfrac = coarsening_indicator(out.traj, out.traj.mass.front(), out.cutoff);
    out.lyap.reserve(out.traj.n_samples());
    for (int j = 0; j < out.traj.n_samples(); ++j)
        out.lyap.push_back(lyapunov(n, out.traj.state(j)));
    return out;
}

void write_run_outputs(const ExperimentConfig& cfg, const fs::path& dir, const RunOutputs& r) {
    const Nonlinearity n = build_phi(cfg);
    const auto& traj = r.traj;

    std::ostringstream tcsv;
    tcsv << "t,x,u\n";
    for (int j = 0; j < traj.n_samples(); ++j)
        for (int i = 0; i <= traj.domain.n_intervals; ++i)
            tcsv << fmt(traj.times[j]) << ',' << fmt(traj.domain.x(i)) << ','
                 << fmt(traj.states[j][i]) << '\n';
    write_atomic(dir / "trajectory.csv", tcsv.str());

    std::ostringstream dcsv;
    dcsv << "t,mass,lyapunov,min_u,max_u,interface_count,singular_fraction\n";
    for (int j = 0; j < traj.n_samples(); ++j)
        dcsv << fmt(traj.times[j]) << ',' << fmt(traj.mass[j]) << ',' << fmt(r.lyap[j]) << ','
             << fmt(traj.min_u[j]) << ',' << fmt(traj.max_u[j]) << ',' << r.iface[j] << ','
             << fmt(r.sfrac[j]) << '\n';
    write_atomic(dir / "diagnostics.csv", dcsv.str());

    std::ostringstream ev;
    for (const auto& e : r.events) {
        json o;
        o["t"] = e.time;
        o["i"] = e.node;
        o["dir"] = e.direction == PhaseTransitionEvent::Direction::upward ? "up" : "down";
        o["pre"] = e.pre_value;
        o["lhs"] = e.trigger_lhs;
        o["rhs"] = e.trigger_rhs;
        ev << o.dump() << '\n';
    }
    write_atomic(dir / "events.jsonl", ev.str());

    MeasureDecomposition dec =
        decompose(traj.state(traj.n_samples() - 1), traj.mass.front(), r.cutoff);
    json dj;
    dj["singular_mass"] = dec.singular_mass;
    dj["sites"] = dec.singular_sites;
    dj["mu_tilde"] = dec.mu_tilde;
    dj["regular_mass"] = grid_integral(dec.regular_part);
    write_atomic(dir / "decomposition.json", dj.dump(2) + "\n");

    json meta;
    meta["version"] = kVersion;
    meta["phi"] = n.name;
    meta["u_minus"] = n.u_minus;
    meta["u_plus"] = n.finite_uplus() ? json(n.u_plus) : json("inf");
    meta["N"] = cfg.N;
    meta["initial"] = cfg.initial;
    meta["rng"] = "mt19937_64";
    meta["seed"] = r.seed;
    meta["dt_policy"] = cfg.dt_policy;
    meta["safety"] = cfg.safety;
    meta["t_end"] = cfg.t_end;
    meta["record_every"] = cfg.record_every;
    meta["convergence_tol"] = cfg.convergence_tol;
    meta["cutoff"] = r.cutoff;
    meta["dt"] = traj.dt;
    meta["steps"] = traj.steps;
    meta["converged"] = traj.converged;
    meta["final_time"] = traj.final_time();
    write_atomic(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace

Nonlinearity build_phi(const ExperimentConfig& cfg) {
    if (cfg.phi == "cubic") return cubic_nonlinearity();
    if (cfg.phi == "perona-malik") return perona_malik_nonlinearity();
    if (cfg.phi.rfind("custom:", 0) == 0) {
        std::string path = cfg.phi.substr(7);
        double up = cfg.u_plus;
        if (!(up > 0.0)) up = std::numeric_limits<double>::infinity();
        if (!(cfg.u_minus > 0.0))
            throw std::invalid_argument("custom phi needs --u-minus > 0");
        Nonlinearity n = nonlinearity_from_table(path, cfg.u_minus, up);
        ValidationReport rep = validate_hypotheses(n, 512);
        if (!rep.all_passed())
            throw std::invalid_argument("custom phi fails hypotheses:\n" + rep.summary());
        return n;
    }
    throw std::invalid_argument("unknown phi '" + cfg.phi + "'");
}

GridFunction build_initial(const ExperimentConfig& cfg, const Nonlinearity& n,
                           std::uint64_t seed) {
    GridDomain dom(cfg.N);
    auto parts = split(cfg.initial, ':');
    const std::string kind = parts[0];
    const std::string arg = parts.size() > 1 ? parts[1] : "";

    if (kind == "constant") {
        return GridFunction(dom, std::stod(arg));
    }
    if (kind == "riemann") {
        auto ps = split(arg, ',');
        if (ps.size() != 3) throw std::invalid_argument("riemann initial needs w1,w3,n");
        RiemannData d{std::stod(ps[0]), std::stod(ps[1]), std::stoi(ps[2])};
        return make_riemann(n, d, cfg.N);
    }
    if (kind == "random") {
        auto ps = split(arg, ',');
        if (ps.size() != 2) throw std::invalid_argument("random initial needs mean,amplitude");
        const double mean = std::stod(ps[0]), amp = std::stod(ps[1]);
        std::mt19937_64 rng(seed);
        GridFunction u(dom, 0.0);
        for (int i = 0; i <= cfg.N; ++i)
            u[i] = std::max(0.0, mean + amp * (2.0 * uniform01(rng) - 1.0));
        return u;
    }
    if (kind == "csv") {
        std::string path = cfg.initial.substr(4);
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open initial data file " + path);
        std::vector<double> vals;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-' || line[0] == '+' ||
                                  line[0] == '.'))
                continue;
            auto cols = split(line, ',');
            vals.push_back(std::stod(cols.back()));
        }
        return GridFunction(dom, std::move(vals));
    }
    throw std::invalid_argument("unknown initial data '" + cfg.initial + "'");
}

int cmd_simulate(const ExperimentConfig& cfg) {
    try {
        RunOutputs r = run_experiment(cfg, cfg.seed);
        write_run_outputs(cfg, cfg.out_dir, r);
        return 0;
    } catch (const BlowupError& e) {
        std::cerr << "error: blow-up: node=" << e.node() << " t=" << e.time() << "\n";
        return 2;
    } catch (const std::exception& e) {
        return fail_config(e.what());
    }
}

int cmd_steady(const ExperimentConfig& cfg) {
    try {
        if (!(cfg.mean > 0.0)) throw std::invalid_argument("steady needs --mean > 0");
        Nonlinearity n = build_phi(cfg);
        auto states = enumerate_steady_states(n, cfg.N, cfg.mean);

        std::ostringstream csv;
        csv << "n1,n2,n3,c,omega1,omega2,omega3,verdict_recursion,verdict_oracle,bound_holds,"
               "rhs_inf\n";
        for (auto& s : states) {
            StabilityWitness wr = stability_recursion(n, s);
            StabilityWitness wo = stability_eigen_oracle(n, s);
            double rinf = lp_norm(rhs(n, s.values()), Lp::inf);
            auto opt = [&](const std::optional<double>& o) { return o ? fmt(*o) : ""; };
            csv << s.n1 << ',' << s.n2 << ',' << s.n3 << ',' << fmt(s.level) << ','
                << opt(s.omega1) << ',' << opt(s.omega2) << ',' << opt(s.omega3) << ','
                << to_string(wr.verdict) << ',' << to_string(wo.verdict) << ','
                << (s.homogeneous() ? "" : (check_bound(n, s) ? "1" : "0")) << ',' << fmt(rinf)
                << '\n';
        }
        write_atomic(fs::path(cfg.out_dir) / "atlas.csv", csv.str());

        json meta;
        meta["version"] = kVersion;
        meta["phi"] = n.name;
        meta["N"] = cfg.N;
        meta["mean"] = cfg.mean;
        meta["states"] = states.size();
        write_atomic(fs::path(cfg.out_dir) / "metadata.json", meta.dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        return fail_config(e.what());
    }
}

int cmd_sweep(const ExperimentConfig& cfg) {
    try {
        std::vector<std::uint64_t> seeds;
        if (!cfg.seeds.empty()) {
            for (const auto& s : split(cfg.seeds, ','))
                if (!s.empty()) seeds.push_back(std::stoull(s));
        } else {
            int count = cfg.seed_count > 0 ? cfg.seed_count : 1;
            for (int k = 0; k < count; ++k) seeds.push_back(cfg.seed + k);
        }
        if (seeds.empty()) throw std::invalid_argument("sweep needs a nonempty seed grid");

        struct Cell {
            int status = -1;
            std::string error;
            RunOutputs r;
        };
        std::vector<Cell> cells(seeds.size());
        std::atomic<size_t> next{0};
        const int workers = std::max(1, cfg.workers);

        auto worker = [&]() {
            for (;;) {
                size_t k = next.fetch_add(1);
                if (k >= seeds.size()) return;
                try {
                    cells[k].r = run_experiment(cfg, seeds[k]);
                    char name[32];
                    std::snprintf(name, sizeof name, "cell_%03zu", k);
                    write_run_outputs(cfg, fs::path(cfg.out_dir) / name, cells[k].r);
                    cells[k].status = 0;
                } catch (const BlowupError& e) {
                    cells[k].status = 2;
                    cells[k].error = e.what();
                } catch (const std::exception& e) {
                    cells[k].status = 1;
                    cells[k].error = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::ostringstream csv;
        csv << "cell,seed,status,final_t,converged,final_lyapunov,s0,s_end,events_up,events_down\n";
        bool any_failed = false;
        for (size_t k = 0; k < cells.size(); ++k) {
            const Cell& c = cells[k];
            if (c.status != 0) {
                any_failed = true;
                std::cerr << "error: sweep cell " << k << ": " << c.error << "\n";
                csv << k << ',' << seeds[k] << ',' << c.status << ",,,,,,,\n";
                continue;
            }
            int up = 0, down = 0;
            for (const auto& e : c.r.events)
                (e.direction == PhaseTransitionEvent::Direction::upward ? up : down)++;
            csv << k << ',' << seeds[k] << ",0," << fmt(c.r.traj.final_time()) << ','
                << (c.r.traj.converged ? 1 : 0) << ',' << fmt(c.r.lyap.back()) << ','
                << fmt(c.r.sfrac.front()) << ',' << fmt(c.r.sfrac.back()) << ',' << up << ','
                << down << '\n';
        }
        write_atomic(fs::path(cfg.out_dir) / "summary.csv", csv.str());
        return any_failed ? 3 : 0;
    } catch (const std::exception& e) {
        return fail_config(e.what());
    }
}

int cmd_measure(const ExperimentConfig& cfg) {
    try {
        Nonlinearity n = build_phi(cfg);
        GridFunction state;
        double u0_mass = 0.0;

        if (!cfg.state_file.empty()) {
            std::ifstream in(cfg.state_file);
            if (!in) throw std::invalid_argument("cannot open " + cfg.state_file);
            std::vector<double> vals;
            std::string line;
            while (std::getline(in, line))
                if (!line.empty() && line[0] != '#') vals.push_back(std::stod(line));
            if (vals.size() < 3) throw std::invalid_argument("state file too short");
            state = GridFunction(GridDomain(static_cast<int>(vals.size()) - 1), std::move(vals));
            u0_mass = grid_integral(state);
        } else if (!cfg.in_dir.empty()) {
            std::ifstream in(fs::path(cfg.in_dir) / "trajectory.csv");
            if (!in)
                throw std::invalid_argument("cannot open trajectory.csv under " + cfg.in_dir);
            std::string line;
            std::getline(in, line);  // header
            std::map<double, std::vector<double>> blocks;
            while (std::getline(in, line)) {
                auto cols = split(line, ',');
                if (cols.size() != 3) continue;
                blocks[std::stod(cols[0])].push_back(std::stod(cols[2]));
            }
            if (blocks.empty()) throw std::invalid_argument("trajectory.csv holds no samples");
            auto& first = blocks.begin()->second;
            auto& last = blocks.rbegin()->second;
            GridDomain dom(static_cast<int>(last.size()) - 1);
            u0_mass = grid_integral(GridFunction(dom, first));
            state = GridFunction(dom, last);
        } else {
            throw std::invalid_argument("measure needs --in DIR or --state FILE");
        }

        const int N = state.domain.n_intervals;
        const double cutoff = cfg.cutoff > 0.0 ? cfg.cutoff : default_cutoff(N, n.u_minus);
        const int window = cfg.window > 0 ? cfg.window : default_window(N);

        MeasureDecomposition dec = decompose(state, u0_mass, cutoff);
        json dj;
        dj["singular_mass"] = dec.singular_mass;
        dj["sites"] = dec.singular_sites;
        dj["mu_tilde"] = dec.mu_tilde;
        dj["regular_mass"] = grid_integral(dec.regular_part);
        write_atomic(fs::path(cfg.out_dir) / "decomposition.json", dj.dump(2) + "\n");

        json hj = json::array();
        for (const auto& h : young_histogram(state, window, cfg.bins, cutoff)) {
            json o;
            o["x"] = h.center_x;
            o["edges"] = h.edges;
            o["weights"] = h.weights;
            o["deficit"] = h.deficit;
            hj.push_back(o);
        }
        write_atomic(fs::path(cfg.out_dir) / "histograms.json", hj.dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        return fail_config(e.what());
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Grid-function solver for the forward-backward diffusion u_t = lap phi(u)"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    double omega1 = 0.3, omega3 = 1.9;
    int split_index = -1;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        // config-file keys are injected as tokens ahead of the real flags,
        // so the command line always overrides the file
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        sub->add_option("--config", config_path, "key=value experiment file");
        sub->add_option("--phi", cfg.phi, "cubic | perona-malik | custom:<path>");
        sub->add_option("--u-minus", cfg.u_minus, "left turning point (custom phi)");
        sub->add_option("--u-plus", cfg.u_plus, "right turning point (custom phi, <=0 for inf)");
        sub->add_option("--N", cfg.N, "grid intervals");
        sub->add_option("--seed", cfg.seed, "PRNG seed");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--cutoff", cfg.cutoff, "singular cutoff override");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--initial", cfg.initial,
                        "constant:c | riemann:w1,w3,n | random:mean,amp | csv:<path>");
        sub->add_option("--t-end", cfg.t_end, "integration horizon");
        sub->add_option("--dt-policy", cfg.dt_policy, "cfl | derivation");
        sub->add_option("--safety", cfg.safety, "cfl safety factor in (0,1]");
        sub->add_option("--record-every", cfg.record_every, "sampling period");
        sub->add_option("--convergence-tol", cfg.convergence_tol, "stop when ||rhs||_inf below");
    };

    CLI::App* sim = app.add_subcommand("simulate", "integrate one initial-value problem");
    add_common(sim);
    add_solver(sim);

    CLI::App* rie = app.add_subcommand("riemann", "integrate two-block Riemann data");
    add_common(rie);
    add_solver(rie);
    rie->add_option("--omega1", omega1, "left state in [0,u_minus]");
    rie->add_option("--omega3", omega3, "right state in [u_plus,inf)");
    rie->add_option("--split-index", split_index, "last node of the left block (default N/2)");

    CLI::App* ste = app.add_subcommand("steady", "enumerate and classify steady states");
    add_common(ste);
    ste->add_option("--mean", cfg.mean, "fixed mean of the mass simplex")->required();

    CLI::App* swp = app.add_subcommand("sweep", "run a seed grid of simulations");
    add_common(swp);
    add_solver(swp);
    swp->add_option("--seeds", cfg.seeds, "comma-separated seed list");
    swp->add_option("--seed-count", cfg.seed_count, "number of consecutive seeds from --seed");
    swp->add_option("--workers", cfg.workers, "concurrent cells");

    CLI::App* mea = app.add_subcommand("measure", "decomposition + histograms of a state");
    add_common(mea);
    mea->add_option("--in", cfg.in_dir, "directory holding trajectory.csv");
    mea->add_option("--state", cfg.state_file, "plain file of node values");
    mea->add_option("--window", cfg.window, "histogram window (odd node count)");
    mea->add_option("--bins", cfg.bins, "histogram bins");

    // Assemble the token stream: [subcommand, config-file tokens, user flags].
    std::vector<std::string> tokens;
    for (int k = 1; k < argc; ++k) tokens.emplace_back(argv[k]);
    for (size_t k = 0; k + 1 < tokens.size(); ++k) {
        if (tokens[k] != "--config") continue;
        std::ifstream in(tokens[k + 1]);
        if (!in) return fail_config("cannot open config file " + tokens[k + 1]);
        std::vector<std::string> injected;
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                size_t a = s.find_first_not_of(" \t");
                size_t b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
            if (key.empty()) continue;
            injected.push_back("--" + key);
            injected.push_back(val);
        }
        tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
        break;
    }

    try {
        std::vector<const char*> cargv;
        cargv.push_back(argc > 0 ? argv[0] : "fbp");
        for (const auto& t : tokens) cargv.push_back(t.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    }

    if (sim->parsed()) return cmd_simulate(cfg);
    if (rie->parsed()) {
        if (split_index < 0) split_index = cfg.N / 2;
        std::ostringstream init;
        init << "riemann:" << fmt(omega1) << ',' << fmt(omega3) << ',' << split_index;
        cfg.initial = init.str();
        return cmd_simulate(cfg);
    }
    if (ste->parsed()) return cmd_steady(cfg);
    if (swp->parsed()) return cmd_sweep(cfg);
    if (mea->parsed()) return cmd_measure(cfg);
    return fail_config("no subcommand");
}

}  // namespace fbp::cli
