#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Invalid parameters or inputs that violate an operation's preconditions.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or lost accuracy.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested dense object would exceed the configured memory cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One cycle graph: N vertices, decoherence rate gamma (>= 0).
struct CycleConfig {
    int size = 0;
    double gamma = 0.0;

    void validate() const {
        if (size < 2) throw DomainError("CycleConfig: size must be >= 2");
        if (!(gamma >= 0.0)) throw DomainError("CycleConfig: gamma must be >= 0");
    }
};

/// n-fold Cartesian power of a cycle; N^n vertices labeled by n base-N digits.
struct HyperCycleConfig {
    CycleConfig base;
    int dims = 1;

    void validate() const {
        base.validate();
        if (dims < 1) throw DomainError("HyperCycleConfig: dims must be >= 1");
    }

    /// N^n, total number of vertices.
    Index vertex_count() const {
        Index v = 1;
        for (int j = 0; j < dims; ++j) v *= base.size;
        return v;
    }
};

using MultiIndex = std::vector<int>;

/// Flat index of an n-digit base-N label; digit j carries weight N^(n-1-j).
Index encode_multi_index(std::span<const int> digits, const HyperCycleConfig& config);

/// Inverse of encode_multi_index.
MultiIndex decode_multi_index(Index flat, const HyperCycleConfig& config);

/// Flatten rho into the column vector V with V(a*dim+b) = rho(a,b), so the
/// left factor of a Kronecker product acts on the row index.
CVector vectorize_density(const CMatrix& rho);

/// Inverse of vectorize_density.
CMatrix unvectorize_density(const CVector& v, Index dim);

/// Dense Kronecker product, (A x B)(i*Br+k, j*Bc+l) = A(i,j) B(k,l).
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Physicality check of a density matrix.
struct DensityReport {
    double trace_deviation = 0.0;        // |tr(rho) - 1|
    double hermiticity_violation = 0.0;  // max |rho - rho^dagger|
    double min_eigenvalue = 0.0;         // smallest eigenvalue of (rho+rho^dagger)/2
    bool passed = false;
};

/// Reports trace deviation, Hermiticity violation and the minimum eigenvalue;
/// passes iff the first two are within tol and min eigenvalue >= -psd_tol.
DensityReport validate_density_matrix(const CMatrix& rho, double tol = 1e-10,
                                      double psd_tol = 1e-8);

/// Clamps entries in [-1e-12, 0) to 0 and in (1, 1+1e-12] to 1; returns the
/// number of clamped entries. Entries further outside [0,1] raise NumericError.
int clamp_probabilities(RVector& probs);

}  // namespace qwalk
