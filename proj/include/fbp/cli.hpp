#pragma once

#include <cstdint>
#include <string>

#include "fbp/grid.hpp"
#include "fbp/nonlinearity.hpp"

namespace fbp::cli {

// Fully resolved experiment description. The command line (and optional
// key=value config file, flags taking precedence) populates one of these.
struct ExperimentConfig {
    std::string phi = "cubic";  // cubic | perona-malik | custom:<path>
    double u_minus = -1.0;      // custom phi only
    double u_plus = -1.0;       // custom phi only; <= 0 or "inf" means unbounded
    int N = 64;

    std::string initial = "constant:1.0";  // constant:c | riemann:w1,w3,n |
                                           // random:mean,amp | csv:<path>
    std::uint64_t seed = 1;

    std::string dt_policy = "cfl";  // cfl | derivation
    double safety = 0.9;
    double t_end = 1.0;
    double record_every = 0.05;
    double convergence_tol = -1.0;  // <= 0: library default
    double cutoff = -1.0;           // <= 0: sqrt(N) * max(1, u_minus)
    std::string out_dir = "out";

    double mean = -1.0;  // steady: target mean

    std::string seeds;   // sweep: comma-separated list; overrides seed_count
    int seed_count = 0;  // sweep: seeds seed..seed+count-1
    int workers = 1;     // sweep: concurrent cells

    std::string in_dir;      // measure: directory holding trajectory.csv
    std::string state_file;  // measure: plain file of node values
    int window = 0;          // measure: 0 selects the default mesoscale window
    int bins = 32;           // measure: histogram bins
};

Nonlinearity build_phi(const ExperimentConfig& cfg);
GridFunction build_initial(const ExperimentConfig& cfg, const Nonlinearity& n,
                           std::uint64_t seed);

int cmd_simulate(const ExperimentConfig& cfg);
int cmd_steady(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_measure(const ExperimentConfig& cfg);

// Parses argv (subcommands simulate/steady/riemann/sweep/measure) and runs.
// Exit codes: 0 ok, 1 config error, 2 blow-up, 3 sweep cell failure.
int run_cli(int argc, const char* const* argv);

}  // namespace fbp::cli
