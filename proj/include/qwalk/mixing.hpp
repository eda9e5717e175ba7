#pragma once

#include "qwalk/core.hpp"
#include "qwalk/cycle.hpp"
#include "qwalk/hyper.hpp"

#include <functional>
#include <optional>

namespace qwalk {

/// Total variation distance to the uniform distribution, un-halved:
/// sum_a |p_a - 1/dim|.
double tv_distance(const RVector& p);

struct MixingQuery {
    double epsilon = 0.05;
    double t_max = 0.0;
    double dt = 0.0;
    double refine_tol = 0.0;

    void validate() const {
        if (!(epsilon > 0.0)) throw DomainError("MixingQuery: epsilon must be > 0");
        if (!(dt > 0.0)) throw DomainError("MixingQuery: dt must be > 0");
        if (!(t_max >= 10.0 * dt)) throw DomainError("MixingQuery: t_max must be >= 10 dt");
        if (!(refine_tol > 0.0)) throw DomainError("MixingQuery: refine_tol must be > 0");
    }
};

enum class MixingMode { first_hit, stable };

struct MixingResult {
    std::optional<double> first_hit;
    std::optional<double> stable;
    std::vector<std::pair<double, double>> tv_series;
    std::optional<double> bound;
    std::string regime = "none";
    double horizon = 0.0;
    std::string diagnostic;
};

using DistributionSource = std::function<RVector(double)>;

/// Scans the coarse grid over [0, t_max] and refines by bisection.
/// first_hit: smallest t with TV <= epsilon. stable: smallest t after which
/// TV <= epsilon at every grid point up to the horizon (absent, with a
/// diagnostic, when the final grid point still violates). Stable mode also
/// reports the first-hit time from the same scan.
MixingResult measure_mixing_time(const DistributionSource& source, const MixingQuery& query,
                                 MixingMode mode);

/// Distribution of the localized walk evaluated through the regime kernel
/// (product of per-axis kernel diagonals at t/n).
DistributionSource kernel_distribution_source(const AnalyticKernel& kernel,
                                              const HyperCycleConfig& config,
                                              MultiIndex start);

/// Distribution of the localized walk evaluated through the exact single-cycle
/// propagator (product of per-axis numeric diagonals at t/n). When method_out
/// is given it receives the exponential algorithm the source uses.
DistributionSource exact_distribution_source(const HyperCycleConfig& config, MultiIndex start,
                                             std::string* method_out = nullptr);

struct BoundValue {
    double value = 0.0;
    std::string formula;  // "weak-n1", "weak-ndim", "strong-n1" or "strong-ndim"
};

/// Analytic mixing-time upper bound for the (regime, n) cell. For n = 1 the
/// dedicated single-cycle formula is the applicable value and the n-dim
/// formula specialized to n = 1 is reported alongside (they differ).
struct MixingBoundResult {
    BoundValue applicable;
    std::optional<BoundValue> n1_general;
};

MixingBoundResult mixing_bound(Regime regime, const HyperCycleConfig& config, double epsilon);

/// Numerical evaluation of the reduction chain from the n-dimensional mixing
/// condition to the single-cycle one, for the localized start at 0...0.
struct ReductionReport {
    double t = 0.0;
    double epsilon = 0.0;
    double tv_n = 0.0;              // n-dimensional TV at t
    double tv_single = 0.0;         // single-cycle TV at t/n
    double a_tilde = 0.0;           // sum over vertices of per-digit deviation sums
    double majorant_direct = 0.0;   // power-sum majorant of tv_n
    std::optional<double> majorant_geometric;  // a_tilde/(1-a_tilde)/N^n when a_tilde < 1
    double rhs_single = 0.0;        // eps/n/(1 + N^n eps)
    double rhs_a_tilde = 0.0;       // N^n eps/(1 + N^n eps)
    bool assumption_ok = false;     // a_tilde < 1
    bool holds_n_dim = false;       // tv_n <= eps
    bool holds_single = false;      // tv_single <= rhs_single
    bool holds_majorant = false;    // tv_n <= direct <= geometric
    bool holds_a_tilde = false;     // a_tilde <= rhs_a_tilde
};

ReductionReport verify_reduction_inequality(const HyperCycleConfig& config,
                                            const AnalyticKernel& kernel, double epsilon,
                                            double t);

/// The strong-decoherence majorant chain evaluated at one time: the Fourier
/// series with phases, the phase-free sum, the folded exponential sum and the
/// closed geometric form 2/(exp(4t/(gamma N^2)) - 1).
struct StrongChainReport {
    double t = 0.0;
    double epsilon = 0.0;
    double exact_series = 0.0;
    double phase_free = 0.0;
    double split_sum = 0.0;
    double closed_form = 0.0;  // +inf at t = 0
    bool ordered = false;
    bool closed_form_within_epsilon = false;
};

StrongChainReport verify_strong_bound_chain(const CycleConfig& config, double epsilon,
                                            double t);

}  // namespace qwalk
