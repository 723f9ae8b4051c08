#include "qtomo/enhance.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

NullEstimatorBasis NullEstimatorBasis::default_basis() {
    NullEstimatorBasis basis;
    for (int sign : {+1, -1})
        for (int k = 0; k <= 4; ++k)
            for (int n = 0; n <= 3; ++n) basis.members.push_back({k, n, sign});
    return basis;
}

Estimator make_null_estimator(const NullEstimatorBasis::Member& m) {
    if (m.k < 0 || m.n < 0 || (m.sign != 1 && m.sign != -1))
        throw DomainError("null estimator needs k >= 0, n >= 0, sign +-1");
    PhasePolyTerm term;
    term.harmonic = m.sign * (m.k + 2 + 2 * m.n);
    term.coeffs.assign(m.k + 1, Complex(0.0, 0.0));
    term.coeffs[m.k] = Complex(1.0, 0.0);
    char label[64];
    std::snprintf(label, sizeof label, "null(k=%d,n=%d,%c)", m.k, m.n, m.sign > 0 ? '+' : '-');
    Estimator est = make_phase_poly_estimator(label, {{std::move(term)}}, 1.0);
    est.eta_min = 0.0;  // phase-averages to zero at any efficiency
    return est;
}

namespace {

constexpr double kEtaTol = 1e-12;

// exp(-(delta2/2) d^2/dx^2) applied to a polynomial's coefficient array.
std::vector<Complex> anti_gaussian(const std::vector<Complex>& coeffs, double delta2) {
    std::vector<Complex> out(coeffs.size(), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == Complex(0.0, 0.0)) continue;
        double factor = 1.0;  // (-delta2/2)^j k! / (j! (k-2j)!)
        for (std::size_t j = 0; 2 * j <= k; ++j) {
            out[k - 2 * j] += coeffs[k] * factor;
            factor *= -0.5 * delta2 * static_cast<double>((k - 2 * j) * (k - 2 * j - 1)) /
                      static_cast<double>(j + 1);
        }
    }
    while (out.size() > 1 && out.back() == Complex(0.0, 0.0)) out.pop_back();
    return out;
}

} // namespace

Estimator deconvolve_estimator(const Estimator& est, double eta_from, double eta_to) {
    if (eta_from <= 0.0 || eta_from > 1.0 || eta_to <= 0.0 || eta_to > 1.0)
        throw EtaOutOfDomain("deconvolve_estimator: efficiencies must be in (0,1]");
    if (std::abs(eta_from - eta_to) <= kEtaTol) return est;

    if (const auto* poly = std::get_if<PhasePolyPayload>(&est.payload)) {
        const double delta2 = 1.0 / (4.0 * eta_from) - 1.0 / (4.0 * eta_to);
        PhasePolyPayload out;
        out.terms.reserve(poly->terms.size());
        for (const PhasePolyTerm& t : poly->terms)
            out.terms.push_back({t.harmonic, anti_gaussian(t.coeffs, delta2)});
        return make_phase_poly_estimator(est.target, std::move(out), eta_from);
    }
    if (const auto* me = std::get_if<MatrixElementPayload>(&est.payload)) {
        if (eta_from <= 0.5)
            throw Divergent("matrix-element kernel is unbounded at or below eta = 1/2");
        return kernel_matrix_element(me->n, me->d, eta_from);
    }
    if (const auto* fk = std::get_if<FactorizedPayload>(&est.payload)) {
        if (eta_from <= 0.5)
            throw Divergent("matrix-element kernel is unbounded at or below eta = 1/2");
        if (std::abs(eta_from - 1.0) <= kEtaTol) return est;
        return kernel_matrix_element(fk->n, fk->d, eta_from);
    }
    if (const auto* wp = std::get_if<WignerPayload>(&est.payload)) {
        if ((1.0 - wp->s) - 1.0 / eta_from <= 0.0)
            throw Divergent("phase-space kernel is non-integrable at this ordering/efficiency");
        return kernel_observable(Observable::wigner_point(wp->s, wp->alpha), eta_from);
    }
    throw Divergent("estimator carries no structure that supports efficiency transport");
}

Eigen::Matrix2cd depolarizing_inverse(const Eigen::Matrix2cd& o, double p) {
    if (p < 0.0 || p >= 1.0)
        throw DomainError("depolarizing_inverse: p must lie in [0, 1)");
    return (o - 0.5 * p * o.trace() * Eigen::Matrix2cd::Identity()) / (1.0 - p);
}

AdaptiveResult adaptive_optimize(const Estimator& est, const DataSet& data,
                                 const NullEstimatorBasis& basis) {
    if (data.empty()) throw EmptyData("adaptive_optimize: data set is empty");
    const std::size_t N = data.size();
    const int B = static_cast<int>(basis.members.size());

    std::vector<Estimator> nulls;
    nulls.reserve(B);
    for (const auto& m : basis.members) nulls.push_back(make_null_estimator(m));

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(B, B);
    Eigen::VectorXcd cross = Eigen::VectorXcd::Zero(B);
    Eigen::VectorXcd sum_n = Eigen::VectorXcd::Zero(B);
    Complex sum_e(0.0, 0.0);
    double sum_abs2_e = 0.0;
    Eigen::VectorXcd row(B);
    for (std::size_t i = 0; i < N; ++i) {
        const HomodyneRecord r = data.record(i);
        const Complex e = est.eval(r);
        for (int b = 0; b < B; ++b) row(b) = nulls[b].eval(r);
        gram.noalias() += row.conjugate() * row.transpose();
        cross.noalias() += row.conjugate() * e;
        sum_n += row;
        sum_e += e;
        sum_abs2_e += std::norm(e);
    }

    const double dn = static_cast<double>(N);
    const Complex mean_e = sum_e / dn;
    AdaptiveResult result;
    result.variance_before = std::max(0.0, sum_abs2_e / dn - std::norm(mean_e));

    if (B == 0) {
        result.optimized = est;
        result.variance_after = result.variance_before;
        return result;
    }

    // Center, then ridge-regularize the Gram system; the ridge keeps
    // near-degenerate bases (phase-symmetric states) solvable.
    gram.noalias() -= sum_n.conjugate() * sum_n.transpose() / dn;
    cross.noalias() -= sum_n.conjugate() * mean_e;
    const double ridge = 1e-10 * std::max(gram.real().trace() / B, 1.0);
    gram.diagonal().array() += ridge;
    const Eigen::VectorXcd nu = gram.ldlt().solve(-cross);

    // Exact empirical variance change; the ridge term is removed again so the
    // report matches the returned estimator (it is never positive).
    const double delta = (2.0 * (nu.adjoint() * cross)(0).real() +
                          (nu.adjoint() * gram * nu)(0).real() - ridge * nu.squaredNorm()) /
                         dn;
    result.variance_after = std::max(0.0, result.variance_before + std::min(0.0, delta));
    result.nu.assign(nu.data(), nu.data() + B);

    Estimator opt;
    opt.target = est.target + " (variance-reduced)";
    opt.eta_min = est.eta_min;
    opt.eta_max = est.eta_max;
    if (const auto* poly = std::get_if<PhasePolyPayload>(&est.payload)) {
        PhasePolyPayload merged = *poly;
        for (int b = 0; b < B; ++b) {
            const auto& m = basis.members[b];
            PhasePolyTerm term;
            term.harmonic = m.sign * (m.k + 2 + 2 * m.n);
            term.coeffs.assign(m.k + 1, Complex(0.0, 0.0));
            term.coeffs[m.k] = nu(b);
            merged.terms.push_back(std::move(term));
        }
        Estimator rebuilt = make_phase_poly_estimator(opt.target, std::move(merged), est.eta_max);
        rebuilt.eta_min = est.eta_min;
        result.optimized = std::move(rebuilt);
    } else {
        auto base_eval = est.eval;
        auto null_evals = std::make_shared<std::vector<Estimator>>(std::move(nulls));
        auto coeffs = std::make_shared<Eigen::VectorXcd>(nu);
        opt.eval = [base_eval, null_evals, coeffs](const HomodyneRecord& r) {
            Complex v = base_eval(r);
            for (int b = 0; b < static_cast<int>(null_evals->size()); ++b)
                v += (*coeffs)(b) * (*null_evals)[b].eval(r);
            return v;
        };
        result.optimized = std::move(opt);
    }
    return result;
}

void to_json(nlohmann::json& j, const AdaptiveResult& r) {
    nlohmann::json nu = nlohmann::json::array();
    for (const Complex& c : r.nu) nu.push_back({c.real(), c.imag()});
    j = nlohmann::json{{"schema", "qtomo-adaptive-v1"},
                       {"nu", std::move(nu)},
                       {"variance_before", r.variance_before},
                       {"variance_after", r.variance_after}};
}

} // namespace qtomo
