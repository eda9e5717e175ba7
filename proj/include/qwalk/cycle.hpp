#pragma once

#include "qwalk/core.hpp"

namespace qwalk {

/// Nearest-neighbor hopping Hamiltonian of the cycle, Hermitian circulant
/// with matrix elements 1/4 on the two first off-diagonals (cyclic wrap).
/// For size 2 the two wrap contributions stack to 1/2.
RMatrix build_hamiltonian(const CycleConfig& config);

/// Generator L of the vectorized flow dV/dt = L V: a coherent part
/// -i(H x I - I x H) plus a dephasing part that is diagonal in the
/// vectorized basis, -gamma on every off-diagonal density position.
struct CycleSuperOperator {
    CycleConfig config;
    CMatrix generator;  // N^2 x N^2

    Index dim() const { return generator.rows(); }
};

CycleSuperOperator build_cycle_superoperator(const CycleConfig& config);

/// Dense propagator M(t) = exp(t L) mapping V(0) to V(t).
struct Propagator {
    CycleConfig config;
    double time = 0.0;
    CMatrix matrix;
    std::string method;  // exponential algorithm used, recorded in run metadata
};

/// Matrix exponential via Pade approximant with scaling and squaring.
Propagator propagator_exact(const CycleSuperOperator& superop, double t);

/// Repeated-time propagator evaluation. Diagonalizes the generator once and
/// exponentiates eigenvalues per query; falls back to the Pade route when the
/// eigenvector basis is ill-conditioned.
class PropagatorCache {
public:
    explicit PropagatorCache(const CycleSuperOperator& superop, double cond_limit = 1e8);

    CVector apply(double t, const CVector& v0) const;
    CMatrix matrix(double t) const;

    bool spectral() const { return spectral_; }
    double condition_number() const { return cond_; }
    std::string_view method() const {
        return spectral_ ? "eigendecomposition" : "pade-scaling-squaring";
    }

private:
    CycleSuperOperator superop_;
    bool spectral_ = false;
    double cond_ = 0.0;
    CVector eigenvalues_;
    CMatrix eigenvectors_;
    CMatrix eigenvectors_inv_;
};

enum class EvolveBackend { exact_exponential, ode_integrator, auto_select };

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
};

/// States at each grid time. The exact backend applies exp(t L) per time;
/// the ODE backend is an adaptive Dormand-Prince 5(4) integrator.
std::vector<CMatrix> evolve_numeric(const CycleSuperOperator& superop, const CMatrix& rho0,
                                    std::span<const double> times,
                                    EvolveBackend backend = EvolveBackend::auto_select,
                                    const OdeOptions& options = {});

/// Adaptive Dormand-Prince 5(4) step sequence for dv/dt = L v.
CVector integrate_linear_ode(const CMatrix& generator, CVector v, double t0, double t1,
                             const OdeOptions& options = {});

/// Weak-decoherence closed form for the localized initial state |0><0|:
/// every Fourier mode pair (m,n) keeps its coherent phase and decays at
/// gamma*(1 - g/N), where g counts the mode pairs it stays resonant with
/// under vertex dephasing. Diagonal pairs give g = N (no decay), generic
/// pairs g = 1, and for even sizes mirrored pairs share g = 2.
CMatrix analytic_weak_C(const CycleConfig& config, double t);

/// Main diagonal d0 and first lower subdiagonal data d1 of the
/// strong-decoherence solution at time t.
struct StrongDecoherenceDiagonals {
    RVector d0;
    CVector d1;
    double time = 0.0;
};

/// Strong-decoherence diagonals for the localized initial state: the slow
/// diffusive modes decay as exp(-t sin^2(pi k/N) / (2 gamma)) and the
/// subdiagonal carries the O(1/gamma) transient. Size 2 is special: the
/// doubled hopping element doubles the diffusion rate.
StrongDecoherenceDiagonals analytic_strong_diagonals(const CycleConfig& config, double t);

/// Assembles the tridiagonal-with-wrap density matrix from the strong
/// diagonals; rho_{a+1,a} = -i d1_a and its Hermitian mirror.
CMatrix analytic_strong_C(const CycleConfig& config, double t);

enum class Regime { weak, strong };

std::string_view regime_name(Regime regime);

/// Closed-form kernel C(t) for one regime. Validity windows are metadata
/// only; evaluation is never refused inside the breakdown region.
class AnalyticKernel {
public:
    static constexpr double kWeakGammaMax = 0.1;
    static constexpr double kStrongGammaMin = 10.0;

    AnalyticKernel(Regime regime, CycleConfig config);

    CMatrix matrix(double t) const;
    RVector diagonal(double t) const;

    Regime regime() const { return regime_; }
    const CycleConfig& config() const { return config_; }
    bool inside_validity_window() const;

private:
    Regime regime_;
    CycleConfig config_;
};

/// Propagates a classical (diagonal) initial distribution through the kernel:
/// P_a(t) = sum_mu C_{a-mu,a-mu}(t) p0_mu with cyclic index arithmetic.
RVector propagate_classical(const AnalyticKernel& kernel, const RVector& initial_diagonal,
                            double t);

}  // namespace qwalk
