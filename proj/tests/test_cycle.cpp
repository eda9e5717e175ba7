#include "qwalk/cycle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qwalk;

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix localized_state(int size, int vertex = 0) {
    CMatrix rho = CMatrix::Zero(size, size);
    rho(vertex, vertex) = 1.0;
    return rho;
}

// Element-wise right side of the master equation, written directly from the
// per-entry form with cyclic index substitution. Independent of the
// superoperator assembly it checks.
CMatrix master_equation_rhs(const CMatrix& rho, const CycleConfig& config) {
    const int n = config.size;
    CMatrix out(n, n);
    const Complex i4(0.0, 0.25);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int ap = (a + 1) % n, am = (a - 1 + n) % n;
            const int bp = (b + 1) % n, bm = (b - 1 + n) % n;
            out(a, b) = i4 * (rho(a, bp) - rho(ap, b) - rho(am, b) + rho(a, bm)) -
                        config.gamma * (a == b ? 0.0 : 1.0) * rho(a, b);
        }
    return out;
}

CMatrix random_density(int size, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist;
    CMatrix a(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) a(i, j) = Complex(dist(gen), dist(gen));
    CMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    return rho;
}

// Strong-regime main diagonal evaluated directly from the diffusive mode sum;
// kept inline so the propagator test does not depend on the kernel code.
double strong_diag_reference(int size, double gamma, double t, int vertex) {
    const double gamma_eff = size == 2 ? gamma : 2.0 * gamma;
    Complex sum{0.0, 0.0};
    for (int k = 0; k < size; ++k) {
        const double s = std::sin(kPi * k / size);
        sum += std::exp(Complex(0.0, 2.0 * kPi * k * vertex / size)) *
               std::exp(-t / gamma_eff * s * s);
    }
    return sum.real() / size;
}

}  // namespace

TEST_CASE("hamiltonian structure") {
    SUBCASE("N=3: six off-diagonal entries of 1/4") {
        const RMatrix h = build_hamiltonian({3, 0.0});
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                CHECK(h(a, b) == (a == b ? 0.0 : 0.25));
    }
    SUBCASE("N=5: cyclic wrap, no second-neighbor hops") {
        const RMatrix h = build_hamiltonian({5, 0.0});
        CHECK(h(0, 4) == 0.25);
        CHECK(h(0, 2) == 0.0);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("N=2: both wrap terms stack to 1/2") {
        const RMatrix h = build_hamiltonian({2, 0.0});
        CHECK(h(0, 1) == 0.5);
        CHECK(h(1, 0) == 0.5);
        CHECK(h(0, 0) == 0.0);
    }
}

TEST_CASE("superoperator matches the element-wise master equation") {
    for (const auto& [size, gamma] : {std::pair{4, 0.8}, {3, 0.0}, {5, 7.5}}) {
        const CycleConfig config{size, gamma};
        const CycleSuperOperator superop = build_cycle_superoperator(config);
        for (const CMatrix& rho :
             {localized_state(size), random_density(size, 42), random_density(size, 7)}) {
            const CVector lhs = superop.generator * vectorize_density(rho);
            const CVector rhs = vectorize_density(master_equation_rhs(rho, config));
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("superoperator structure") {
    SUBCASE("maximally mixed state is stationary at gamma 0") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.0});
        const CVector v = vectorize_density(CMatrix::Identity(3, 3) / 3.0);
        CHECK((superop.generator * v).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("dephasing contributes -gamma on off-diagonal density positions") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 2.0});
        CHECK(superop.generator(1, 1) == Complex(-2.0, 0.0));  // position (0,1)
        CHECK(superop.generator(0, 0) == Complex(0.0, 0.0));   // position (0,0)
        const CMatrix coherent = build_cycle_superoperator({3, 0.0}).generator;
        const CMatrix dephasing = superop.generator - coherent;
        for (Index p = 0; p < 9; ++p)
            for (Index q = 0; q < 9; ++q) {
                if (p != q)
                    CHECK(dephasing(p, q) == Complex(0.0, 0.0));
                else
                    CHECK(dephasing(p, p) == (p / 3 == p % 3 ? Complex(0.0, 0.0)
                                                             : Complex(-2.0, 0.0)));
            }
    }
    SUBCASE("columns preserve the trace") {
        const CycleSuperOperator superop = build_cycle_superoperator({4, 1.3});
        for (Index q = 0; q < superop.dim(); ++q) {
            Complex column_trace{0.0, 0.0};
            for (Index a = 0; a < 4; ++a) column_trace += superop.generator(a * 4 + a, q);
            CHECK(std::abs(column_trace) < 1e-15);
        }
    }
}

TEST_CASE("exact propagator") {
    SUBCASE("t=0 is the identity") {
        const CycleSuperOperator superop = build_cycle_superoperator({4, 0.9});
        const Propagator prop = propagator_exact(superop, 0.0);
        CHECK((prop.matrix - CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(prop.method == "pade-scaling-squaring");
    }
    SUBCASE("semigroup property") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.3});
        const CMatrix m1 = propagator_exact(superop, 1.0).matrix;
        const CMatrix m2 = propagator_exact(superop, 2.0).matrix;
        CHECK((m2 - m1 * m1).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("strong decoherence drives the diffusive diagonal") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 50.0});
        for (double t : {1.0, 200.0}) {
            const CVector v = propagator_exact(superop, t).matrix *
                              vectorize_density(localized_state(3));
            for (int a = 0; a < 3; ++a)
                CHECK(std::abs(v(a * 3 + a).real() - strong_diag_reference(3, 50.0, t, a)) <
                      1e-3);
        }
    }
    SUBCASE("negative time is a domain error") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.3});
        CHECK_THROWS_AS(propagator_exact(superop, -1.0), DomainError);
    }
}

TEST_CASE("propagator cache agrees with the pade route") {
    for (const auto& [size, gamma] : {std::pair{5, 50.0}, {5, 0.05}, {4, 1.0}}) {
        const CycleSuperOperator superop = build_cycle_superoperator({size, gamma});
        const PropagatorCache cache(superop);
        for (double t : {0.0, 0.7, 13.0, 400.0}) {
            const CMatrix direct = propagator_exact(superop, t).matrix;
            CHECK((cache.matrix(t) - direct).cwiseAbs().maxCoeff() < 1e-9);
            const CVector v0 = vectorize_density(localized_state(size));
            CHECK((cache.apply(t, v0) - direct * v0).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("well-separated spectra use the eigendecomposition") {
        const PropagatorCache cache(build_cycle_superoperator({5, 50.0}));
        CHECK(cache.spectral());
        CHECK(cache.method() == "eigendecomposition");
    }
    SUBCASE("near-defective generators fall back to the pade route") {
        // N=4 at gamma=1 sits close to a mode collision; the eigenvector
        // basis is ill-conditioned and the guard must reject it.
        const PropagatorCache cache(build_cycle_superoperator({4, 1.0}));
        CHECK_FALSE(cache.spectral());
        CHECK(cache.method() == "pade-scaling-squaring");
        CHECK(cache.condition_number() > 1e8);
    }
}

TEST_CASE("numeric evolution") {
    SUBCASE("conservation at gamma 0") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.0});
        const auto states =
            evolve_numeric(superop, localized_state(3), std::vector<double>{5.0});
        const CMatrix& rho = states.back();
        CHECK(std::abs(rho.trace() - Complex(1.0, 0.0)) < 1e-10);
        for (int a = 0; a < 3; ++a) {
            CHECK(rho(a, a).real() >= -1e-12);
            CHECK(rho(a, a).real() <= 1.0 + 1e-12);
        }
    }
    SUBCASE("long-time limit is uniform") {
        const CycleSuperOperator superop = build_cycle_superoperator({5, 1.0});
        const auto states =
            evolve_numeric(superop, localized_state(5), std::vector<double>{80.0},
                           EvolveBackend::exact_exponential);
        const double tv = (states.back().diagonal().real().array() - 0.2).abs().sum();
        CHECK(tv < 1e-6);
    }
    SUBCASE("backends agree") {
        const CycleSuperOperator superop = build_cycle_superoperator({4, 0.7});
        const std::vector<double> times{3.0};
        const auto exact = evolve_numeric(superop, localized_state(4), times,
                                          EvolveBackend::exact_exponential);
        const auto ode = evolve_numeric(superop, localized_state(4), times,
                                        EvolveBackend::ode_integrator);
        CHECK((exact.back() - ode.back()).cwiseAbs().maxCoeff() < 1e-7);
    }
    SUBCASE("every output is a valid density matrix") {
        const CycleSuperOperator superop = build_cycle_superoperator({4, 0.7});
        const std::vector<double> times{0.5, 1.0, 2.0, 3.0, 10.0};
        for (const CMatrix& rho :
             evolve_numeric(superop, random_density(4, 11), times))
            CHECK(validate_density_matrix(rho).passed);
    }
    SUBCASE("domain errors") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.5});
        CMatrix bad = localized_state(3);
        bad(0, 1) = 0.3;  // breaks hermiticity
        CHECK_THROWS_AS(evolve_numeric(superop, bad, std::vector<double>{1.0}), DomainError);
        CHECK_THROWS_AS(evolve_numeric(superop, localized_state(3), std::vector<double>{}),
                        DomainError);
        CHECK_THROWS_AS(
            evolve_numeric(superop, localized_state(3), std::vector<double>{2.0, 1.0}),
            DomainError);
        CHECK_THROWS_AS(
            evolve_numeric(superop, localized_state(3), std::vector<double>{-1.0, 1.0}),
            DomainError);
    }
    SUBCASE("unresolvable tolerance underflows the step size") {
        const CycleSuperOperator superop = build_cycle_superoperator({3, 0.5});
        OdeOptions options;
        options.rtol = 1e-30;
        options.atol = 1e-300;
        CHECK_THROWS_AS(evolve_numeric(superop, localized_state(3), std::vector<double>{1.0},
                                       EvolveBackend::ode_integrator, options),
                        NumericError);
    }
}

TEST_CASE("weak kernel") {
    SUBCASE("initial condition is the localized projector") {
        for (const auto& [size, gamma] : {std::pair{3, 0.05}, {4, 0.1}, {5, 0.02}}) {
            const CMatrix c = analytic_weak_C({size, gamma}, 0.0);
            CMatrix expected = CMatrix::Zero(size, size);
            expected(0, 0) = 1.0;
            CHECK((c - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("late time reaches the uniform diagonal") {
        const CMatrix c = analytic_weak_C({3, 0.05}, 1e6);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                CHECK(std::abs(c(a, b) - (a == b ? Complex(1.0 / 3, 0.0) : Complex(0.0, 0.0))) <
                      1e-9);
    }
    SUBCASE("gamma 0 reproduces the unitary walk exactly") {
        const CycleConfig config{5, 0.0};
        const CycleSuperOperator superop = build_cycle_superoperator(config);
        for (double t : {1.0, 5.0, 20.0}) {
            const CMatrix numeric = unvectorize_density(
                propagator_exact(superop, t).matrix * vectorize_density(localized_state(5)),
                5);
            CHECK((analytic_weak_C(config, t) - numeric).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("weak-regime diagonal tracks the numeric path") {
        const CycleConfig config{5, 0.05};
        const CycleSuperOperator superop = build_cycle_superoperator(config);
        const CMatrix numeric = unvectorize_density(
            propagator_exact(superop, 10.0).matrix * vectorize_density(localized_state(5)), 5);
        const double tv = (analytic_weak_C(config, 10.0).diagonal().real() -
                           numeric.diagonal().real())
                              .cwiseAbs()
                              .sum();
        CHECK(tv < 0.1);
    }
    SUBCASE("hermitian with unit trace everywhere") {
        for (int size : {3, 4, 5, 6})
            for (double gamma : {0.0, 0.05, 0.5})
                for (double t : {0.3, 2.0, 17.0, 150.0}) {
                    const CMatrix c = analytic_weak_C({size, gamma}, t);
                    CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
                    CHECK(std::abs(c.trace() - Complex(1.0, 0.0)) < 1e-10);
                }
    }
    SUBCASE("off-diagonal magnitudes stay under the slow decay channel") {
        for (int size : {4, 5}) {
            const double gamma = 0.05;
            for (double t : {100.0, 200.0, 400.0}) {
                const CMatrix c = analytic_weak_C({size, gamma}, t);
                const double envelope = std::exp(-gamma * (size - 2) * t / size);
                for (int a = 0; a < size; ++a)
                    for (int b = 0; b < size; ++b)
                        if (a != b) CHECK(std::abs(c(a, b)) <= envelope + 1e-12);
            }
        }
    }
}

TEST_CASE("strong diagonals") {
    SUBCASE("initial condition") {
        const StrongDecoherenceDiagonals diag = analytic_strong_diagonals({5, 50.0}, 0.0);
        CHECK(diag.d0(0) == doctest::Approx(1.0).epsilon(1e-12));
        for (int a = 1; a < 5; ++a) CHECK(std::abs(diag.d0(a)) < 1e-12);
        CHECK(diag.d1.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("N=2 closed form") {
        for (double t : {1.0, 30.0, 500.0}) {
            const StrongDecoherenceDiagonals diag = analytic_strong_diagonals({2, 50.0}, t);
            CHECK(diag.d0(0) == doctest::Approx((1.0 + std::exp(-t / 50.0)) / 2).epsilon(1e-12));
        }
    }
    SUBCASE("late-time uniform limit") {
        const StrongDecoherenceDiagonals diag =
            analytic_strong_diagonals({5, 50.0}, 1e6 * 50.0);
        for (int a = 0; a < 5; ++a) CHECK(std::abs(diag.d0(a) - 0.2) < 1e-9);
    }
    SUBCASE("trace and positivity") {
        for (double t : {0.5, 10.0, 300.0, 5000.0}) {
            const StrongDecoherenceDiagonals diag = analytic_strong_diagonals({4, 50.0}, t);
            CHECK(std::abs(diag.d0.sum() - 1.0) < 1e-10);
            CHECK(diag.d0.minCoeff() >= -1e-10);
        }
    }
    SUBCASE("gamma 0 is a domain error") {
        CHECK_THROWS_AS(analytic_strong_diagonals({5, 0.0}, 1.0), DomainError);
    }
}

TEST_CASE("strong kernel matrix") {
    SUBCASE("initial condition") {
        const CMatrix c = analytic_strong_C({5, 50.0}, 0.0);
        CMatrix expected = CMatrix::Zero(5, 5);
        expected(0, 0) = 1.0;
        CHECK((c - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("tracks the numeric path at strong decoherence") {
        const CycleConfig config{5, 50.0};
        const CycleSuperOperator superop = build_cycle_superoperator(config);
        const CMatrix numeric = unvectorize_density(
            propagator_exact(superop, 100.0).matrix * vectorize_density(localized_state(5)),
            5);
        CHECK((analytic_strong_C(config, 100.0) - numeric).cwiseAbs().maxCoeff() < 5e-3);
    }
    SUBCASE("residual shrinks at least 3x when gamma doubles") {
        const auto residual = [](double gamma, double t) {
            const CycleConfig config{5, gamma};
            const CycleSuperOperator superop = build_cycle_superoperator(config);
            const CMatrix numeric = unvectorize_density(
                propagator_exact(superop, t).matrix * vectorize_density(localized_state(5)),
                5);
            return (analytic_strong_C(config, t) - numeric).cwiseAbs().maxCoeff();
        };
        // matched diffusion time t/gamma
        CHECK(residual(50.0, 100.0) / residual(100.0, 200.0) >= 3.0);
    }
    SUBCASE("hermitian with unit trace") {
        for (double t : {0.5, 40.0, 2000.0}) {
            const CMatrix c = analytic_strong_C({6, 30.0}, t);
            CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(std::abs(c.trace() - Complex(1.0, 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("analytic kernel wrapper") {
    const AnalyticKernel weak(Regime::weak, {5, 0.05});
    const AnalyticKernel strong(Regime::strong, {5, 50.0});
    CHECK(weak.inside_validity_window());
    CHECK(strong.inside_validity_window());
    CHECK_FALSE(AnalyticKernel(Regime::weak, {5, 5.0}).inside_validity_window());
    CHECK((weak.diagonal(3.0) - weak.matrix(3.0).diagonal().real()).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK((strong.diagonal(3.0) - strong.matrix(3.0).diagonal().real()).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK_THROWS_AS(AnalyticKernel(Regime::strong, {5, 0.0}), DomainError);
}

TEST_CASE("classical propagation through the kernel") {
    const AnalyticKernel strong(Regime::strong, {5, 50.0});
    SUBCASE("uniform input is invariant") {
        const RVector uniform = RVector::Constant(5, 0.2);
        const RVector out = propagate_classical(strong, uniform, 123.0);
        CHECK((out.array() - 0.2).abs().maxCoeff() < 1e-12);
        CHECK(std::abs(out.sum() - 1.0) < 1e-10);
    }
    SUBCASE("delta at the origin at t=0 stays put") {
        RVector delta = RVector::Zero(5);
        delta(0) = 1.0;
        CHECK((propagate_classical(strong, delta, 0.0) - delta).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("delta at vertex 2 is the shifted origin solution") {
        RVector d0 = RVector::Zero(5), d2 = RVector::Zero(5);
        d0(0) = 1.0;
        d2(2) = 1.0;
        const RVector from0 = propagate_classical(strong, d0, 100.0);
        const RVector from2 = propagate_classical(strong, d2, 100.0);
        for (int a = 0; a < 5; ++a)
            CHECK(from2(a) == doctest::Approx(from0((a - 2 + 5) % 5)).epsilon(1e-13));
        // and the numeric path started at vertex 2 agrees within the regime tolerance
        const CycleSuperOperator superop = build_cycle_superoperator({5, 50.0});
        const CMatrix numeric = unvectorize_density(
            propagator_exact(superop, 100.0).matrix * vectorize_density(localized_state(5, 2)),
            5);
        CHECK((from2 - numeric.diagonal().real()).cwiseAbs().maxCoeff() < 5e-3);
    }
    SUBCASE("dimension mismatch is a domain error") {
        CHECK_THROWS_AS(propagate_classical(strong, RVector::Constant(4, 0.25), 1.0),
                        DomainError);
    }
}

TEST_CASE("cycle evolution invariants") {
    SUBCASE("translation invariance") {
        const CycleSuperOperator superop = build_cycle_superoperator({5, 0.7});
        const CMatrix m = propagator_exact(superop, 3.0).matrix;
        const CMatrix from0 = unvectorize_density(m * vectorize_density(localized_state(5)), 5);
        for (int shift : {1, 3}) {
            const CMatrix shifted =
                unvectorize_density(m * vectorize_density(localized_state(5, shift)), 5);
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b)
                    CHECK(std::abs(shifted(a, b) -
                                   from0((a - shift + 5) % 5, (b - shift + 5) % 5)) < 1e-9);
        }
    }
    SUBCASE("reflection symmetry of the localized walk") {
        const CycleSuperOperator superop = build_cycle_superoperator({5, 0.3});
        for (double t : {1.0, 4.0, 9.0}) {
            const CMatrix rho = unvectorize_density(
                propagator_exact(superop, t).matrix * vectorize_density(localized_state(5)),
                5);
            for (int a = 1; a < 5; ++a)
                CHECK(std::abs(rho(a, a).real() - rho(5 - a, 5 - a).real()) < 1e-10);
        }
    }
    SUBCASE("gamma 0 matches an independent unitary oracle") {
        const CycleConfig config{5, 0.0};
        const CycleSuperOperator superop = build_cycle_superoperator(config);
        Eigen::SelfAdjointEigenSolver<RMatrix> eig(build_hamiltonian(config));
        for (double t : {2.0, 7.0}) {
            const CVector phases =
                (Complex(0.0, -t) * eig.eigenvalues().cast<Complex>().array()).exp();
            const CMatrix unitary = eig.eigenvectors().cast<Complex>() *
                                    phases.asDiagonal() *
                                    eig.eigenvectors().transpose().cast<Complex>();
            const CMatrix rho = unvectorize_density(
                propagator_exact(superop, t).matrix * vectorize_density(localized_state(5)),
                5);
            for (int a = 0; a < 5; ++a)
                CHECK(std::abs(rho(a, a).real() - std::norm(unitary(a, 0))) < 1e-8);
        }
    }
    SUBCASE("stronger measurement slows the spreading") {
        const auto tv_from_start = [](double gamma) {
            const CycleSuperOperator superop = build_cycle_superoperator({5, gamma});
            const CMatrix rho = unvectorize_density(
                propagator_exact(superop, 10.0).matrix * vectorize_density(localized_state(5)),
                5);
            RVector delta = RVector::Zero(5);
            delta(0) = 1.0;
            return (rho.diagonal().real() - delta).cwiseAbs().sum();
        };
        CHECK(tv_from_start(100.0) < tv_from_start(50.0));
    }
}
