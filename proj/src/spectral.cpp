#include "qconf/spectral.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "qconf/errors.hpp"
#include "qconf/quadrature.hpp"

namespace qconf {

NeumannOperator assemble_neumann_laplacian(const Domain& domain, double h) {
    NeumannOperator op;
    op.mask = build_grid_unchecked(domain, h);
    const int n = op.mask.node_count();
    const double w = 1.0 / (h * h);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) * 5);
    for (int v = 0; v < n; ++v) {
        const auto [i, j] = op.mask.node_ij(v);
        const int nb[4] = {op.mask.node_at(i - 1, j), op.mask.node_at(i + 1, j),
                           op.mask.node_at(i, j - 1), op.mask.node_at(i, j + 1)};
        double diag = 0.0;
        for (int u : nb) {
            if (u < 0) continue; // mirror: missing neighbor contributes nothing
            diag += w;
            trips.emplace_back(v, u, -w);
        }
        trips.emplace_back(v, v, diag);
    }
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.norm_estimate = 8.0 * w;
    return op;
}

EigenReport first_nontrivial_eigenvalue(const NeumannOperator& op, const EigenOptions& opts) {
    const int n = static_cast<int>(op.matrix.rows());
    if (n < 2) throw ParameterError("operator too small for a non-trivial eigenvalue");

    // Shift-inverted power iteration on (A + sigma I)^{-1} with the constant
    // kernel vector projected out every step.
    const double sigma = 1e-3;
    Eigen::SparseMatrix<double> shifted = op.matrix;
    for (int v = 0; v < n; ++v) shifted.coeffRef(v, v) += sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success)
        throw SolverError("Neumann operator factorization failed");

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto deflate = [&](Eigen::VectorXd& v) {
        const double c = v.sum() * inv_sqrt_n;
        v.array() -= c * inv_sqrt_n;
    };

    // Deterministic start: the first coordinate function relative to the mask.
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = op.mask.node_position(k).x;
    deflate(v);
    v.normalize();

    EigenReport report;
    report.grid_h = op.mask.h;
    double mu_prev = kInf;
    for (long it = 0; it < opts.max_iters; ++it) {
        Eigen::VectorXd w = solver.solve(v);
        deflate(w);
        w.normalize();
        const Eigen::VectorXd aw = op.matrix * w;
        const double mu = w.dot(aw);
        const double residual = (aw - mu * w).norm();
        v = w;
        report.mu1 = mu;
        report.residual = residual;
        report.iterations = it + 1;
        if (residual <= opts.residual_factor * op.norm_estimate &&
            std::abs(mu - mu_prev) <= opts.tol * std::max(mu, 1e-30))
            return report;
        mu_prev = mu;
    }
    throw SolverError("eigenvalue iteration did not converge within its cap");
}

EigenReport eigenvalue_with_richardson(const Domain& domain, double h, const EigenOptions& opts) {
    EigenReport fine = first_nontrivial_eigenvalue(assemble_neumann_laplacian(domain, h), opts);
    const EigenReport coarse =
        first_nontrivial_eigenvalue(assemble_neumann_laplacian(domain, 2.0 * h), opts);
    fine.richardson_estimate = (4.0 * fine.mu1 - coarse.mu1) / 3.0;
    return fine;
}

double poincare_bound(PoincareDomainKind kind, double lipschitz_constant) {
    const double pi32 = std::pow(std::numbers::pi, 1.5);
    switch (kind) {
    case PoincareDomainKind::Disk:
        return 3.0 * pi32 / 4.0;
    case PoincareDomainKind::DiamondSquare:
        return 3.0 * pi32 / 2.0;
    case PoincareDomainKind::BiLipschitz: {
        const double L = lipschitz_constant;
        if (!(L >= 1.0)) throw ParameterError("bi-Lipschitz constant must be >= 1");
        return 3.0 * std::sqrt(L * L * L * L * L) * pi32 / 4.0;
    }
    }
    throw Error("unreachable poincare kind");
}

SpectralBoundReport cusp_spectral_bound(double alpha, const SpectralOptions& opts) {
    if (!(alpha > 1.0)) throw ParameterError("cusp spectral bound requires alpha > 1");
    if (alpha == 2.0 || alpha == 3.0)
        throw ParameterError("the K-integral closed form has poles at alpha = 2 and 3");

    SpectralBoundReport report;
    report.alpha = alpha;

    const double pi3 = std::pow(std::numbers::pi, 3.0);
    const double poly = alpha * (2.0 - alpha) * (3.0 - alpha);
    report.closed_form_bound =
        (alpha + 1.0) * poly / (9.0 * pi3 * alpha * (alpha + 1.0 + poly));

    // Components of the anti-commutative-diagram estimate.
    report.k_norm_squared = 4.0 / poly + 4.0 / (alpha + 1.0);
    report.k_norm = report.k_norm_squared >= 0.0 ? std::sqrt(report.k_norm_squared)
                                                 : std::nan("");
    report.b_source = poincare_bound(PoincareDomainKind::DiamondSquare);
    report.m2 = std::sqrt(alpha);
    report.antiderivative_mode = alpha >= 2.0; // the honest K-integral diverges there
    // (K * B * M2)^{-2}, assembled from squares so it stays defined wherever
    // the closed form is.
    report.pipeline_bound =
        1.0 / (report.k_norm_squared * report.b_source * report.b_source * alpha);

    if (opts.fd_check) {
        report.numerical_mu1 =
            eigenvalue_with_richardson(Domain::cusp_domain(alpha), opts.h, opts.eigen);
        report.satisfied = report.numerical_mu1->mu1 >= report.closed_form_bound;
    }
    return report;
}

} // namespace qconf
