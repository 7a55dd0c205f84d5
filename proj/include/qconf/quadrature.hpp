#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qconf/domain.hpp"
#include "qconf/mapping.hpp"

namespace qconf {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long cells_used = 0;
    bool converged = false;
    bool divergent = false;
};

/// An axis-aligned line where the integrand may blow up.
/// axis 0 means the line x = offset, axis 1 the line y = offset.
struct SingularLine {
    int axis = 1;
    double offset = 0.0;
};

struct ScalarField {
    std::function<double(double, double)> f;
    std::vector<SingularLine> singular_lines;
};

struct QuadratureOptions {
    long max_cells = 400000;
    int max_ladder_generations = 420;
    int gauss_points = 8;
};

/// Adaptive integration of `field` over `domain` to relative tolerance
/// `rel_tol`. Cells are refined by largest parent-vs-children discrepancy;
/// declared singular lines are approached through geometric bands with
/// ratio 1/4, a geometric tail completion, and a divergence test (partial
/// band sums growing by more than 2x over three consecutive generations).
/// Divergent integrals come back with divergent=true and value +/-inf.
/// Throws InconclusiveError when the refinement budget runs out first.
QuadratureResult integrate(const ScalarField& field, const Domain& domain, double rel_tol,
                           const QuadratureOptions& opts = {});

enum class IntegrandKind { KpSource, HqTarget };

enum class EvalMode { Quadrature, Antiderivative };

struct OperatorNormReport {
    double p = 2.0;
    double q = 2.0;
    double kappa = kInf; // 1/q - 1/p = 1/kappa; infinity when p = q
    double norm_bound = 0.0;
    IntegrandKind integrand_kind = IntegrandKind::KpSource;
    double multiplicity = 1.0;
    std::string mode = "quadrature";
    QuadratureResult quadrature;
};

struct NormBoundOptions {
    EvalMode mode = EvalMode::Quadrature;
    double rel_tol = 1e-7;
    double multiplicity = 1.0; // region multiplicity (x4 for the triangle setup)
    QuadratureOptions quadrature;
};

/// K_{p,q}(map; domain) = || K_p | L_kappa(domain) ||, the source-side
/// composition operator norm bound. p = q uses a refining-grid esssup;
/// otherwise (mult * int K_p^kappa)^{1/kappa}. Antiderivative mode is the
/// formal closed form of the cusp-family integral and is only defined for
/// the cusp map over paper-triangle/diamond with (p,q) = (2,1).
OperatorNormReport composition_norm_bound(const PlanarMap& map, const Domain& domain,
                                          double p, double q, NormConvention convention,
                                          const NormBoundOptions& opts = {});

/// H_{p,q}(map; target) = || H_q | L_kappa(target) ||, evaluated through the
/// analytic inverse on the image domain.
OperatorNormReport h_norm_bound(const PlanarMap& map, const Domain& target_domain,
                                double p, double q, NormConvention convention,
                                const NormBoundOptions& opts = {});

enum class SupFunctional { JacSqrtSup, NormOverJacSup };

struct SupOptions {
    double rel_tol = 2e-4;
    bool allow_shortcut = true;
    int min_level = 16;
    int max_level = 4096;
};

/// sup over the domain of |J|^{1/2} or |D|/|J|, estimated on nested dyadic
/// grids of cell centers; closed-form shortcuts for builtin map/domain pairs.
double sup_functional(const PlanarMap& map, const Domain& domain, SupFunctional functional,
                      NormConvention convention, const SupOptions& opts = {});

/// Formal antiderivative value of int K_2^2 for the cusp map, over the
/// paper triangle (1/(a(2-a)(3-a)) + 1/(a+1)) or the diamond (4x that).
/// Defined for alpha > 1, alpha not in {2, 3}.
double cusp_k2_squared_closed_form(double alpha, const Domain& domain);

/// Nested dyadic grid supremum of an arbitrary function over a domain.
double grid_supremum(const std::function<double(double, double)>& f, const Domain& domain,
                     double rel_tol, int min_level = 16, int max_level = 4096);

} // namespace qconf
