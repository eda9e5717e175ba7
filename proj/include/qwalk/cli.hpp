#pragma once

#include "qwalk/core.hpp"
#include "qwalk/mixing.hpp"

#include <string>
#include <vector>

namespace qwalk::cli {

/// Parameters of one command invocation, collected from flags and the
/// optional JSON config file (flags win).
struct RunConfig {
    std::string command;
    int size = 3;
    int dims = 1;
    double gamma = 0.0;
    double epsilon = 0.05;
    double t_max = -1.0;  // unset when < 0
    double dt = -1.0;     // unset when <= 0
    std::string backend = "auto";  // exact | ode | auto
    std::string path = "auto";     // factored | full | auto
    std::string regime;            // weak | strong | empty
    std::string start;             // digit string such as "000"; empty = origin
    std::string output;            // output prefix; empty prints CSV to stdout

    // Grid variants used by `bounds` (all four) and `sweep` (gammas).
    std::vector<int> sizes;
    std::vector<int> dims_list;
    std::vector<double> gammas;
    std::vector<double> epsilons;
};

/// 17 significant digits, lowercase scientific. All CSV numbers go through
/// this so identical configs produce byte-identical files.
std::string format_double(double x);

/// Base-N digit string of a flat vertex index ("121"); dash-separated when
/// the base does not fit one character.
std::string vertex_label(Index flat, const HyperCycleConfig& config);

/// Parses a --start digit string; empty means the origin vertex.
MultiIndex parse_start(const std::string& start, const HyperCycleConfig& config);

int run_simulate(const RunConfig& config);
int run_mixing(const RunConfig& config);
int run_bounds(const RunConfig& config);
int run_compare(const RunConfig& config);
int run_sweep(const RunConfig& config);

/// Dispatches on config.command and maps errors to exit codes:
/// 1 usage/domain, 2 numeric failure, 3 result absent.
int run_command(const RunConfig& config);

}  // namespace qwalk::cli
