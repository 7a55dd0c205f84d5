#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qconf/domain.hpp"
#include "qconf/mapping.hpp"
#include "qconf/modulus.hpp"

namespace qconf {

struct InequalityReport {
    std::string check;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = false;    // lhs <= rhs * (1 + slack)
    bool inconclusive = false; // divergent / singular data, no verdict
    std::string details;
};

/// M(phi Gamma) <= sum_e K^I(midpoint(e)) rho*_e^2, with rho* the optimal
/// density of the source family and the left side solved on the image grid.
InequalityReport q_inequality_check(const PlanarMap& map, const Domain& domain,
                                    const CurveFamily& family, double h, double slack = 0.1,
                                    const ModulusOptions& opts = {});

struct MeasureCheckReport {
    InequalityReport report; // worst box
    double c_empirical = 0.0;
    std::vector<double> ratios; // per box, |preimage| / integral
};

/// |phi^{-1}(box)| <= C * int_box H_q^{2q/(2-q)} dy, n = 2. The left side is
/// counted on a cell grid at resolution h, the right side integrated; the
/// empirical constant is reported rather than asserted.
MeasureCheckReport measure_distortion_check(const PlanarMap& map, const std::vector<BBox>& boxes,
                                            double q, double h, double slack = 0.1,
                                            NormConvention convention = NormConvention::Spectral);

struct TestFunction {
    std::string name;
    std::function<double(Vec2)> f;
    std::function<Vec2(Vec2)> grad;
};

/// Coordinate functions, their product, and a sinusoid. All gradients are
/// analytic.
std::vector<TestFunction> default_test_functions();

/// Weighted Poincare inequality on the image domain with weight
/// w(y) = J_{phi^{-1}}(y):
///   inf_c (int |f - c|^s w dy)^{1/s} <= B_{s,1}(source) K_{p,1} ||grad f||_p.
InequalityReport weighted_poincare_check(const PlanarMap& map, const Domain& source_domain,
                                         double s, double p,
                                         const std::vector<TestFunction>& fs, double h,
                                         double slack = 0.1);

enum class DualMode { SobolevDual, PlanarHolder };

struct DualExponents {
    double p_dual = 0.0;
    double q_dual = 0.0;
    DualMode mode = DualMode::PlanarHolder;
};

/// SobolevDual: p' = p/(p-n+1), q' = q/(q-n+1), requires n-1 < q <= p.
/// PlanarHolder: 1/p + 1/p' = 1 (infinite conjugate at p = 1).
DualExponents dual_exponents(double p, double q, int n, DualMode mode);

/// Target exponent q = s n / (s + n - 1) of the L_s-class composition
/// theorem; exposed as exponent arithmetic only.
double sobolev_target_exponent(double s, int n);

} // namespace qconf
