#pragma once

#include <optional>

#include <Eigen/Sparse>

#include "qconf/grid.hpp"

namespace qconf {

/// Finite-difference Neumann Laplacian on a domain mask: 5-point stencil
/// with mirror treatment of missing neighbors. Symmetric positive
/// semidefinite with the constants in its kernel.
struct NeumannOperator {
    GridMask mask;
    Eigen::SparseMatrix<double> matrix;
    double norm_estimate = 0.0; // Gershgorin bound
};

NeumannOperator assemble_neumann_laplacian(const Domain& domain, double h);

struct EigenReport {
    double mu1 = 0.0;       // first non-trivial Neumann eigenvalue
    double residual = 0.0;  // ||A v - mu v||
    double grid_h = 0.0;
    double richardson_estimate = 0.0; // two-grid extrapolation, 0 if absent
    long iterations = 0;
};

struct EigenOptions {
    double tol = 1e-12;      // Rayleigh-quotient stagnation tolerance
    long max_iters = 600;
    double residual_factor = 1e-8; // required: residual <= factor * ||A||
};

/// Smallest eigenvalue orthogonal to constants, by shift-inverted power
/// iteration with the constant mode explicitly projected out each step.
EigenReport first_nontrivial_eigenvalue(const NeumannOperator& op, const EigenOptions& opts = {});

/// Convenience: assemble + solve at h, Richardson-extrapolate with 2h.
EigenReport eigenvalue_with_richardson(const Domain& domain, double h,
                                       const EigenOptions& opts = {});

enum class PoincareDomainKind { Disk, DiamondSquare, BiLipschitz };

/// The (2,1)-Poincare constants used by the spectral pipeline:
///   Disk           3 sqrt(pi^3) / 4
///   DiamondSquare  3 sqrt(pi^3) / 2
///   BiLipschitz(L) 3 sqrt(L^5 pi^3) / 4
double poincare_bound(PoincareDomainKind kind, double lipschitz_constant = 1.0);

struct SpectralBoundReport {
    double alpha = 0.0;
    double closed_form_bound = 0.0;
    double pipeline_bound = 0.0;
    // Pipeline components: mu1 >= (K_norm * B_source * M2)^{-2}.
    double k_norm_squared = 0.0; // negative between the poles 2 and 3
    double k_norm = 0.0;         // NaN when k_norm_squared < 0
    double b_source = 0.0;
    double m2 = 0.0;
    bool antiderivative_mode = false; // K-integral taken formally (alpha >= 2)
    std::optional<EigenReport> numerical_mu1;
    bool satisfied = true; // numerical_mu1 >= closed_form_bound when present
};

struct SpectralOptions {
    bool fd_check = false;
    double h = 1.0 / 128.0;
    EigenOptions eigen;
    double quadrature_rel_tol = 1e-7;
};

/// Lower bound for the first non-trivial Neumann eigenvalue of the cusp
/// domain: closed form plus the recombined operator-norm pipeline, with an
/// optional finite-difference validation run.
SpectralBoundReport cusp_spectral_bound(double alpha, const SpectralOptions& opts = {});

} // namespace qconf
