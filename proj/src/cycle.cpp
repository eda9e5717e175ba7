#include "qwalk/cycle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qwalk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kImag{0.0, 1.0};

// Eigenvalue of the cycle Hamiltonian on Fourier mode m (valid for all N,
// including the doubled wrap element at N = 2).
double mode_energy(int m, int size) { return 0.5 * std::cos(2.0 * kPi * m / size); }

CMatrix checked_exp(const CMatrix& scaled_generator) {
    CMatrix result = scaled_generator.exp();
    if (!result.allFinite())
        throw NumericError("matrix exponential produced non-finite entries (dim " +
                           std::to_string(scaled_generator.rows()) + ")");
    return result;
}

}  // namespace

RMatrix build_hamiltonian(const CycleConfig& config) {
    config.validate();
    const int n = config.size;
    RMatrix h = RMatrix::Zero(n, n);
    for (int mu = 0; mu < n; ++mu) {
        h(mu, (mu + 1) % n) += 0.25;
        h((mu + 1) % n, mu) += 0.25;
    }
    return h;
}

CycleSuperOperator build_cycle_superoperator(const CycleConfig& config) {
    config.validate();
    const int n = config.size;
    const CMatrix h = build_hamiltonian(config).cast<Complex>();
    const CMatrix id = CMatrix::Identity(n, n);
    CMatrix generator = -kImag * (kron(h, id) - kron(id, h));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) generator(a * n + b, a * n + b) -= config.gamma;
    return CycleSuperOperator{config, std::move(generator)};
}

Propagator propagator_exact(const CycleSuperOperator& superop, double t) {
    if (!(t >= 0.0)) throw DomainError("propagator_exact: t must be >= 0");
    Propagator prop;
    prop.config = superop.config;
    prop.time = t;
    prop.matrix = checked_exp(t * superop.generator);
    prop.method = "pade-scaling-squaring";
    return prop;
}

PropagatorCache::PropagatorCache(const CycleSuperOperator& superop, double cond_limit)
    : superop_(superop) {
    Eigen::ComplexEigenSolver<CMatrix> solver(superop.generator);
    if (solver.info() == Eigen::Success) {
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
        Eigen::JacobiSVD<CMatrix> svd(eigenvectors_);
        const double smin = svd.singularValues().minCoeff();
        cond_ = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                           : std::numeric_limits<double>::infinity();
        if (cond_ < cond_limit) {
            eigenvectors_inv_ = eigenvectors_.inverse();
            spectral_ = true;
        }
    } else {
        cond_ = std::numeric_limits<double>::infinity();
    }
}

CVector PropagatorCache::apply(double t, const CVector& v0) const {
    if (!(t >= 0.0)) throw DomainError("PropagatorCache::apply: t must be >= 0");
    if (v0.size() != superop_.generator.rows())
        throw DomainError("PropagatorCache::apply: vector length mismatch");
    if (!spectral_) return checked_exp(t * superop_.generator) * v0;
    return eigenvectors_ * ((eigenvalues_.array() * t).exp() *
                            (eigenvectors_inv_ * v0).array()).matrix();
}

CMatrix PropagatorCache::matrix(double t) const {
    if (!(t >= 0.0)) throw DomainError("PropagatorCache::matrix: t must be >= 0");
    if (!spectral_) return checked_exp(t * superop_.generator);
    return eigenvectors_ * (eigenvalues_.array() * t).exp().matrix().asDiagonal() *
           eigenvectors_inv_;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 35.0 / 384 - 5179.0 / 57600, kE3 = 500.0 / 1113 - 7571.0 / 16695,
                 kE4 = 125.0 / 192 - 393.0 / 640, kE5 = -2187.0 / 6784 + 92097.0 / 339200,
                 kE6 = 11.0 / 84 - 187.0 / 2100, kE7 = -1.0 / 40;

}  // namespace

CVector integrate_linear_ode(const CMatrix& generator, CVector v, double t0, double t1,
                             const OdeOptions& options) {
    if (t1 < t0) throw DomainError("integrate_linear_ode: t1 must be >= t0");
    const double span = t1 - t0;
    if (span == 0.0) return v;

    auto rhs = [&generator](const CVector& y) -> CVector { return generator * y; };

    CVector k1 = rhs(v);
    double h = std::min(span, 0.01 * (v.norm() + options.atol) / (k1.norm() + 1e-300));
    h = std::max(h, span * 1e-10);
    double t = t0;

    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericError("integrate_linear_ode: step size underflow at t = " +
                               std::to_string(t));

        const CVector k2 = rhs(v + h * kA21 * k1);
        const CVector k3 = rhs(v + h * (kA31 * k1 + kA32 * k2));
        const CVector k4 = rhs(v + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
        const CVector k5 = rhs(v + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
        const CVector k6 =
            rhs(v + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
        const CVector vnew =
            v + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        const CVector k7 = rhs(vnew);
        const CVector err =
            h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

        double norm2 = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            const double scale =
                options.atol +
                options.rtol * std::max(std::abs(v(i)), std::abs(vnew(i)));
            const double q = std::abs(err(i)) / scale;
            norm2 += q * q;
        }
        const double err_norm = std::sqrt(norm2 / static_cast<double>(v.size()));

        if (err_norm <= 1.0) {
            t += h;
            v = vnew;
            k1 = k7;  // first-same-as-last
        }
        const double factor =
            err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return v;
}

std::vector<CMatrix> evolve_numeric(const CycleSuperOperator& superop, const CMatrix& rho0,
                                    std::span<const double> times, EvolveBackend backend,
                                    const OdeOptions& options) {
    const Index dim = rho0.rows();
    if (dim * dim != superop.dim())
        throw DomainError("evolve_numeric: state dimension does not match superoperator");
    const DensityReport report = validate_density_matrix(rho0);
    if (!report.passed)
        throw DomainError("evolve_numeric: initial state is not a valid density matrix "
                          "(trace dev " + std::to_string(report.trace_deviation) +
                          ", herm " + std::to_string(report.hermiticity_violation) +
                          ", min eig " + std::to_string(report.min_eigenvalue) + ")");
    if (times.empty()) throw DomainError("evolve_numeric: empty time grid");
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw DomainError("evolve_numeric: times must be >= 0");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DomainError("evolve_numeric: times must be strictly increasing");
    }

    if (backend == EvolveBackend::auto_select)
        backend = dim * dim <= 10000 ? EvolveBackend::exact_exponential
                                     : EvolveBackend::ode_integrator;

    std::vector<CMatrix> states;
    states.reserve(times.size());
    const CVector v0 = vectorize_density(rho0);

    if (backend == EvolveBackend::exact_exponential) {
        for (double t : times)
            states.push_back(unvectorize_density(checked_exp(t * superop.generator) * v0, dim));
    } else {
        CVector v = v0;
        double t_prev = 0.0;
        for (double t : times) {
            v = integrate_linear_ode(superop.generator, std::move(v), t_prev, t, options);
            t_prev = t;
            states.push_back(unvectorize_density(v, dim));
        }
    }
    return states;
}

CMatrix analytic_weak_C(const CycleConfig& config, double t) {
    config.validate();
    if (!(t >= 0.0)) throw DomainError("analytic_weak_C: t must be >= 0");
    const int n = config.size;

    RMatrix omega(n, n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) omega(m, k) = mode_energy(m, n) - mode_energy(k, n);

    // g counts mode pairs along the dephasing-coupled line that stay resonant
    // with (m,k); the symmetric combination they start in decays at
    // gamma (1 - g/n).
    CMatrix mode_factor(n, n);
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            int g = 0;
            for (int shift = 0; shift < n; ++shift)
                if (std::abs(omega((m + shift) % n, (k + shift) % n) - omega(m, k)) < 1e-9)
                    ++g;
            const double rate = config.gamma * (1.0 - static_cast<double>(g) / n);
            mode_factor(m, k) = std::exp(Complex(-rate * t, -omega(m, k) * t));
        }
    }

    CMatrix fourier(n, n);
    for (int a = 0; a < n; ++a)
        for (int m = 0; m < n; ++m)
            fourier(a, m) = std::exp(Complex(0.0, 2.0 * kPi * m * a / n));

    return (fourier * mode_factor * fourier.adjoint()) / static_cast<double>(n * n);
}

StrongDecoherenceDiagonals analytic_strong_diagonals(const CycleConfig& config, double t) {
    config.validate();
    if (config.gamma == 0.0)
        throw DomainError("analytic_strong_diagonals: gamma must be > 0");
    if (!(t >= 0.0)) throw DomainError("analytic_strong_diagonals: t must be >= 0");
    const int n = config.size;
    // The wrap at n = 2 doubles the hopping element, doubling the diffusion
    // rate relative to the generic 1/(2 gamma) scale.
    const double gamma_eff = n == 2 ? config.gamma : 2.0 * config.gamma;

    StrongDecoherenceDiagonals diag;
    diag.time = t;
    diag.d0 = RVector::Zero(n);
    diag.d1 = CVector::Zero(n);
    const double fast = std::exp(-config.gamma * t);
    for (int a = 0; a < n; ++a) {
        Complex sum0{0.0, 0.0};
        Complex sum1{0.0, 0.0};
        for (int k = 0; k < n; ++k) {
            const double s = std::sin(kPi * k / n);
            const double slow = std::exp(-t / gamma_eff * s * s);
            sum0 += slow * std::exp(Complex(0.0, 2.0 * kPi * k * a / n));
            sum1 += kImag * s / gamma_eff * (fast - slow) *
                    std::exp(Complex(0.0, kPi * k * (2 * a + 1) / n));
        }
        if (std::abs(sum0.imag()) > 1e-12 * n)
            throw NumericError("analytic_strong_diagonals: non-real main diagonal");
        diag.d0(a) = sum0.real() / n;
        diag.d1(a) = sum1 / static_cast<double>(n);
    }
    return diag;
}

CMatrix analytic_strong_C(const CycleConfig& config, double t) {
    const StrongDecoherenceDiagonals diag = analytic_strong_diagonals(config, t);
    const int n = config.size;
    CMatrix c = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a) c(a, a) = diag.d0(a);
    for (int a = 0; a < n; ++a) {
        const Complex lower = -kImag * diag.d1(a);  // rho_{a+1,a}, inverting d1 = i rho
        c((a + 1) % n, a) += lower;
        c(a, (a + 1) % n) += std::conj(lower);
    }
    return c;
}

std::string_view regime_name(Regime regime) {
    return regime == Regime::weak ? "weak" : "strong";
}

AnalyticKernel::AnalyticKernel(Regime regime, CycleConfig config)
    : regime_(regime), config_(config) {
    config_.validate();
    if (regime_ == Regime::strong && config_.gamma == 0.0)
        throw DomainError("AnalyticKernel: strong regime requires gamma > 0");
}

CMatrix AnalyticKernel::matrix(double t) const {
    return regime_ == Regime::weak ? analytic_weak_C(config_, t)
                                   : analytic_strong_C(config_, t);
}

RVector AnalyticKernel::diagonal(double t) const {
    if (regime_ == Regime::strong) return analytic_strong_diagonals(config_, t).d0;
    return analytic_weak_C(config_, t).diagonal().real();
}

bool AnalyticKernel::inside_validity_window() const {
    return regime_ == Regime::weak ? config_.gamma <= kWeakGammaMax
                                   : config_.gamma >= kStrongGammaMin;
}

RVector propagate_classical(const AnalyticKernel& kernel, const RVector& initial_diagonal,
                            double t) {
    const int n = kernel.config().size;
    if (initial_diagonal.size() != n)
        throw DomainError("propagate_classical: distribution dimension mismatch");
    const RVector diag = kernel.diagonal(t);
    RVector out = RVector::Zero(n);
    for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < n; ++mu)
            out(a) += diag(((a - mu) % n + n) % n) * initial_diagonal(mu);
    return out;
}

}  // namespace qwalk
