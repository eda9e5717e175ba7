#pragma once

#include "qwalk/core.hpp"
#include "qwalk/cycle.hpp"

namespace qwalk {

/// Default cap on the number of complex values a single dense matrix may hold.
inline constexpr Index kDefaultMemoryCap = 100'000'000;

/// Maps a position of the row-major vectorization (all row digits major, then
/// all column digits) to the axis-interleaved convention in which the
/// (row, column) digit pair of each axis forms one base-N^2 digit. In the
/// interleaved basis the generator is a Kronecker sum over axes.
Index interleaved_position(Index core_position, const HyperCycleConfig& config);

/// Inverse of interleaved_position.
Index core_position(Index interleaved_position, const HyperCycleConfig& config);

/// Generator of the vectorized hyper-cycle flow: per-axis hopping scaled by
/// 1/n plus dephasing -gamma (1 - matching_digits/n) on each density position.
struct HyperSuperOperator {
    HyperCycleConfig config;
    CMatrix generator;  // N^(2n) x N^(2n)

    Index dim() const { return generator.rows(); }
};

HyperSuperOperator build_hyper_superoperator(const HyperCycleConfig& config,
                                             Index memory_cap = kDefaultMemoryCap);

/// Factored propagator: holds the single-cycle M(t/n) and applies it axis by
/// axis without materializing the N^(2n) x N^(2n) matrix.
struct HyperPropagator {
    HyperCycleConfig config;
    double time = 0.0;
    Propagator base;  // single-cycle propagator at time t/n

    /// Applies the propagator to a vectorized density matrix (core layout).
    CVector apply(const CVector& v) const;

    /// Dense matrix in the core layout; the entry at (p, q) is the product of
    /// per-axis single-cycle propagator elements.
    CMatrix materialize(Index memory_cap = kDefaultMemoryCap) const;
};

HyperPropagator hyper_propagator_factored(const HyperCycleConfig& config, double t);

enum class HyperPath { factored, full, auto_select };

/// States at each grid time. The full path exponentiates the assembled hyper
/// generator; auto_select runs the factored path and, when the generator fits
/// the memory cap, cross-checks the final state against the full path.
std::vector<CMatrix> evolve_hyper(const HyperCycleConfig& config, const CMatrix& rho0,
                                  std::span<const double> times,
                                  HyperPath path = HyperPath::auto_select,
                                  Index memory_cap = kDefaultMemoryCap);

/// Vertex distribution of a localized classical walk: the product over axes
/// of the single-cycle kernel diagonal at t/n, translated to the start vertex.
RVector hyper_probability_product(const AnalyticKernel& kernel, const HyperCycleConfig& config,
                                  std::span<const int> initial_vertex, double t);

}  // namespace qwalk
