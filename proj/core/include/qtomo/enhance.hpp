#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qtomo/dataset.hpp"
#include "qtomo/estimators.hpp"

namespace qtomo {

// Basis of phase-harmonic monomials x^k e^{+-i(k+2+2n)phi} whose ensemble
// average vanishes for every state when the phase is scanned uniformly.
struct NullEstimatorBasis {
    struct Member {
        int k = 0;
        int n = 0;
        int sign = +1;
    };
    std::vector<Member> members;

    // All members with k <= 4, n <= 3, both signs.
    static NullEstimatorBasis default_basis();
};

Estimator make_null_estimator(const NullEstimatorBasis::Member& m);

// Rewrites an estimator built for data of efficiency eta_to so that it is
// unbiased on data of efficiency eta_from.  Polynomial estimators get the
// anti-Gaussian correction applied to their coefficients; matrix-element and
// phase-space kernels are rebuilt at the new efficiency.  Throws Divergent
// when no bounded transform exists.
Estimator deconvolve_estimator(const Estimator& est, double eta_from, double eta_to = 1.0);

// Inverse of the depolarizing channel on a 2x2 operator.
Eigen::Matrix2cd depolarizing_inverse(const Eigen::Matrix2cd& o, double p);

struct AdaptiveResult {
    Estimator optimized;
    std::vector<Complex> nu;  // fitted coefficient per basis member
    double variance_before = 0.0;
    double variance_after = 0.0;
};

// Least-squares fit of null-estimator coefficients that minimizes the
// empirical variance of est + sum_i nu_i N_i on the given data.
AdaptiveResult adaptive_optimize(const Estimator& est, const DataSet& data,
                                 const NullEstimatorBasis& basis);

void to_json(nlohmann::json& j, const AdaptiveResult& r);

} // namespace qtomo
