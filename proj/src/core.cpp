#include "qwalk/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qwalk {

Index encode_multi_index(std::span<const int> digits, const HyperCycleConfig& config) {
    config.validate();
    if (static_cast<int>(digits.size()) != config.dims)
        throw DomainError("encode_multi_index: expected " + std::to_string(config.dims) +
                          " digits, got " + std::to_string(digits.size()));
    Index flat = 0;
    for (int d : digits) {
        if (d < 0 || d >= config.base.size)
            throw DomainError("encode_multi_index: digit " + std::to_string(d) +
                              " out of range [0," + std::to_string(config.base.size) + ")");
        flat = flat * config.base.size + d;
    }
    return flat;
}

MultiIndex decode_multi_index(Index flat, const HyperCycleConfig& config) {
    config.validate();
    if (flat < 0 || flat >= config.vertex_count())
        throw DomainError("decode_multi_index: flat index " + std::to_string(flat) +
                          " out of range [0," + std::to_string(config.vertex_count()) + ")");
    MultiIndex digits(config.dims);
    for (int j = config.dims - 1; j >= 0; --j) {
        digits[j] = static_cast<int>(flat % config.base.size);
        flat /= config.base.size;
    }
    return digits;
}

CVector vectorize_density(const CMatrix& rho) {
    const Index dim = rho.rows();
    CVector v(dim * dim);
    for (Index a = 0; a < dim; ++a)
        for (Index b = 0; b < dim; ++b) v(a * dim + b) = rho(a, b);
    return v;
}

CMatrix unvectorize_density(const CVector& v, Index dim) {
    if (v.size() != dim * dim)
        throw DomainError("unvectorize_density: vector length does not match dim^2");
    CMatrix rho(dim, dim);
    for (Index a = 0; a < dim; ++a)
        for (Index b = 0; b < dim; ++b) rho(a, b) = v(a * dim + b);
    return rho;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DensityReport validate_density_matrix(const CMatrix& rho, double tol, double psd_tol) {
    if (rho.rows() != rho.cols())
        throw DomainError("validate_density_matrix: matrix is not square");
    DensityReport report;
    report.trace_deviation = std::abs(rho.trace() - Complex(1.0, 0.0));
    report.hermiticity_violation = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const CMatrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.passed = report.trace_deviation <= tol && report.hermiticity_violation <= tol &&
                    report.min_eigenvalue >= -psd_tol;
    return report;
}

int clamp_probabilities(RVector& probs) {
    int clamped = 0;
    for (Index i = 0; i < probs.size(); ++i) {
        double& p = probs(i);
        if (p < 0.0) {
            if (p < -1e-12)
                throw NumericError("clamp_probabilities: entry " + std::to_string(p) +
                                   " below -1e-12");
            p = 0.0;
            ++clamped;
        } else if (p > 1.0) {
            if (p > 1.0 + 1e-12)
                throw NumericError("clamp_probabilities: entry " + std::to_string(p) +
                                   " above 1+1e-12");
            p = 1.0;
            ++clamped;
        }
    }
    return clamped;
}

}  // namespace qwalk
