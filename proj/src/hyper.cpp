#include "qwalk/hyper.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace qwalk {

namespace {

Index pow_index(Index base, int exp) {
    Index out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

void check_matrix_cap(Index dim, Index memory_cap, const char* what) {
    if (dim > memory_cap / dim)
        throw ResourceError(std::string(what) + ": dense " + std::to_string(dim) + "x" +
                            std::to_string(dim) +
                            " matrix exceeds the memory cap; use the factored path");
}

// Digits of the vectorized position: first the n row digits, then the n
// column digits, each block big-endian.
void position_digits(Index p, int size, int dims, std::span<int> out) {
    for (int j = 2 * dims - 1; j >= 0; --j) {
        out[j] = static_cast<int>(p % size);
        p /= size;
    }
}

}  // namespace

Index interleaved_position(Index core_pos, const HyperCycleConfig& config) {
    config.validate();
    const int n = config.dims;
    const int size = config.base.size;
    std::vector<int> digits(2 * n);
    position_digits(core_pos, size, n, digits);
    Index q = 0;
    for (int j = 0; j < n; ++j) q = q * size * size + (digits[j] * size + digits[n + j]);
    return q;
}

Index core_position(Index interleaved_pos, const HyperCycleConfig& config) {
    config.validate();
    const int n = config.dims;
    const int size = config.base.size;
    std::vector<int> pairs(n);
    for (int j = n - 1; j >= 0; --j) {
        pairs[j] = static_cast<int>(interleaved_pos % (size * size));
        interleaved_pos /= size * size;
    }
    Index row = 0, col = 0;
    for (int j = 0; j < n; ++j) {
        row = row * size + pairs[j] / size;
        col = col * size + pairs[j] % size;
    }
    return row * config.vertex_count() + col;
}

HyperSuperOperator build_hyper_superoperator(const HyperCycleConfig& config, Index memory_cap) {
    config.validate();
    const int n = config.dims;
    const int size = config.base.size;
    const Index vertices = config.vertex_count();
    const Index dim = vertices * vertices;
    check_matrix_cap(dim, memory_cap, "build_hyper_superoperator");

    // Hopping over the vertex space: sum of one single-cycle Hamiltonian per
    // axis, scaled by 1/n.
    const CMatrix h1 = build_hamiltonian(config.base).cast<Complex>();
    CMatrix h_total = CMatrix::Zero(vertices, vertices);
    for (int j = 0; j < n; ++j) {
        CMatrix term = CMatrix::Identity(1, 1);
        for (int k = 0; k < n; ++k)
            term = kron(term, k == j ? h1 : CMatrix::Identity(size, size));
        h_total += term / static_cast<double>(n);
    }

    const CMatrix id = CMatrix::Identity(vertices, vertices);
    CMatrix generator = Complex(0.0, -1.0) * (kron(h_total, id) - kron(id, h_total));

    // Dephasing: each axis measures its own digit, so a density position
    // decays at gamma scaled by the fraction of mismatched digit pairs.
    std::vector<int> digits(2 * n);
    for (Index p = 0; p < dim; ++p) {
        position_digits(p, size, n, digits);
        int matches = 0;
        for (int j = 0; j < n; ++j)
            if (digits[j] == digits[n + j]) ++matches;
        generator(p, p) -= config.base.gamma * (1.0 - static_cast<double>(matches) / n);
    }
    return HyperSuperOperator{config, std::move(generator)};
}

CVector HyperPropagator::apply(const CVector& v) const {
    const int n = config.dims;
    const int size = config.base.size;
    const Index vertices = config.vertex_count();
    if (v.size() != vertices * vertices)
        throw DomainError("HyperPropagator::apply: vector length mismatch");

    CVector state = v;
    CVector gathered(size * size);
    for (int axis = 0; axis < n; ++axis) {
        const Index inner = pow_index(size, n - 1 - axis);  // digits below this axis
        const Index outer = pow_index(size, axis);          // digits above this axis
        const Index row_stride = inner * vertices;
        const Index col_stride = inner;
        CVector next = state;
        for (Index row_hi = 0; row_hi < outer; ++row_hi)
            for (Index row_lo = 0; row_lo < inner; ++row_lo)
                for (Index col_hi = 0; col_hi < outer; ++col_hi)
                    for (Index col_lo = 0; col_lo < inner; ++col_lo) {
                        const Index base_pos = (row_hi * size * inner + row_lo) * vertices +
                                               col_hi * size * inner + col_lo;
                        for (int a = 0; a < size; ++a)
                            for (int b = 0; b < size; ++b)
                                gathered(a * size + b) =
                                    state(base_pos + a * row_stride + b * col_stride);
                        const CVector mixed = base.matrix * gathered;
                        for (int a = 0; a < size; ++a)
                            for (int b = 0; b < size; ++b)
                                next(base_pos + a * row_stride + b * col_stride) =
                                    mixed(a * size + b);
                    }
        state.swap(next);
    }
    return state;
}

CMatrix HyperPropagator::materialize(Index memory_cap) const {
    const int n = config.dims;
    const int size = config.base.size;
    const Index vertices = config.vertex_count();
    const Index dim = vertices * vertices;
    check_matrix_cap(dim, memory_cap, "HyperPropagator::materialize");

    std::vector<std::vector<int>> digits(dim, std::vector<int>(2 * n));
    for (Index p = 0; p < dim; ++p) position_digits(p, size, n, digits[p]);

    CMatrix out(dim, dim);
    for (Index p = 0; p < dim; ++p) {
        const auto& dp = digits[p];
        for (Index q = 0; q < dim; ++q) {
            const auto& dq = digits[q];
            Complex prod{1.0, 0.0};
            for (int j = 0; j < n; ++j)
                prod *= base.matrix(dp[j] * size + dp[n + j], dq[j] * size + dq[n + j]);
            out(p, q) = prod;
        }
    }
    return out;
}

HyperPropagator hyper_propagator_factored(const HyperCycleConfig& config, double t) {
    config.validate();
    if (!(t >= 0.0)) throw DomainError("hyper_propagator_factored: t must be >= 0");
    const CycleSuperOperator superop = build_cycle_superoperator(config.base);
    HyperPropagator prop;
    prop.config = config;
    prop.time = t;
    prop.base = propagator_exact(superop, t / config.dims);
    return prop;
}

std::vector<CMatrix> evolve_hyper(const HyperCycleConfig& config, const CMatrix& rho0,
                                  std::span<const double> times, HyperPath path,
                                  Index memory_cap) {
    config.validate();
    const Index vertices = config.vertex_count();
    if (rho0.rows() != vertices || rho0.cols() != vertices)
        throw DomainError("evolve_hyper: state dimension must equal N^n");
    const DensityReport report = validate_density_matrix(rho0);
    if (!report.passed)
        throw DomainError("evolve_hyper: initial state is not a valid density matrix");
    if (times.empty()) throw DomainError("evolve_hyper: empty time grid");
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw DomainError("evolve_hyper: times must be >= 0");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DomainError("evolve_hyper: times must be strictly increasing");
    }

    const CVector v0 = vectorize_density(rho0);
    std::vector<CMatrix> states;
    states.reserve(times.size());

    if (path == HyperPath::full) {
        const HyperSuperOperator superop = build_hyper_superoperator(config, memory_cap);
        for (double t : times) {
            CMatrix m = (t * superop.generator).exp();
            if (!m.allFinite())
                throw NumericError("evolve_hyper: matrix exponential failed");
            states.push_back(unvectorize_density(m * v0, vertices));
        }
        return states;
    }

    for (double t : times)
        states.push_back(
            unvectorize_density(hyper_propagator_factored(config, t).apply(v0), vertices));

    if (path == HyperPath::auto_select) {
        const Index dim = vertices * vertices;
        const bool full_fits = dim <= memory_cap / dim;
        if (full_fits) {
            const HyperSuperOperator superop = build_hyper_superoperator(config, memory_cap);
            const double t_last = times.back();
            const CMatrix full_state =
                unvectorize_density((t_last * superop.generator).exp() * v0, vertices);
            const double diff = (full_state - states.back()).cwiseAbs().maxCoeff();
            if (diff > 1e-8)
                throw NumericError("evolve_hyper: factored and full paths disagree by " +
                                   std::to_string(diff) + " at t = " + std::to_string(t_last));
        }
    }
    return states;
}

RVector hyper_probability_product(const AnalyticKernel& kernel, const HyperCycleConfig& config,
                                  std::span<const int> initial_vertex, double t) {
    config.validate();
    if (kernel.config().size != config.base.size ||
        kernel.config().gamma != config.base.gamma)
        throw DomainError("hyper_probability_product: kernel does not match the base cycle");
    const int n = config.dims;
    const int size = config.base.size;
    encode_multi_index(initial_vertex, config);  // digit validation

    const RVector diag = kernel.diagonal(t / n);
    const Index vertices = config.vertex_count();
    RVector probs(vertices);
    MultiIndex digits;
    for (Index alpha = 0; alpha < vertices; ++alpha) {
        digits = decode_multi_index(alpha, config);
        double p = 1.0;
        for (int j = 0; j < n; ++j)
            p *= diag(((digits[j] - initial_vertex[j]) % size + size) % size);
        probs(alpha) = p;
    }
    return probs;
}

}  // namespace qwalk
