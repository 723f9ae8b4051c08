#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qtomo/dataset.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

// Budget and reproducibility knobs for the simplex likelihood searches.
struct MlOptions {
    int restarts = 5;       // restart 0 uses the deterministic init, later ones jitter it
    int max_iter = 15000;   // simplex iterations per restart
    double tol = 1e-9;      // relative improvement threshold over a 100-iteration window
    std::uint64_t seed = 1; // stream for the restart jitter
    int threads = 1;        // likelihood-evaluation workers (0 = hardware)
};

struct MlRestart {
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Result of a density-matrix likelihood fit. `converged` refers to the best
// restart; a false value still carries the best point found (no exception).
struct MlFit {
    DensityMatrix rho;
    double log_likelihood = 0.0; // total, at the returned state
    bool converged = false;
    double truncation_tail = 0.0; // weight of the top Fock level, bias diagnostic
    std::vector<MlRestart> restarts;
    std::vector<double> trace; // best-so-far log-likelihood every 100 iterations
};

// Pack a Hermitian matrix into the real vector (diagonal entries first, then
// sqrt(2) Re / sqrt(2) Im of each upper pair in row order) such that
// dot(pack(A), pack(B)) = Tr[A B] for Hermitian A, B.
Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& h);

// Packed POVM element of inefficient homodyne detection for one record: the
// positive operator H(x, phi) with Tr[rho H] = p_eta(x, phi), for data in
// the convention where vacuum has total variance 1/(4 eta). Valid for any
// eta in (0, 1].
Eigen::VectorXd homodyne_povm_row(double x, double phi, double eta, int dim);

// Generic maximum-likelihood engine: maximizes sum_i ln(rows.row(i) .
// pack(rho)) over density matrices of the given dimension, parameterized as
// rho = T^dag T / Tr(T^dag T) with T lower triangular (real diagonal), which
// keeps rho positive and unit trace by construction. The search is a
// derivative-free simplex, best of `opts.restarts` starts; `init` seeds the
// first start (an approximate state; it is projected to the nearest
// physical one), the rest jitter it deterministically. Returned rho has
// modes = 1 and dim = matrix dimension; multi-mode callers relabel.
MlFit ml_fit_povm(const Eigen::MatrixXd& rows, int dim, const MlOptions& opts = {},
                  const std::optional<Eigen::MatrixXcd>& init = std::nullopt);

// Maximum-likelihood reconstruction of a single-mode state from homodyne
// data at the set's efficiency (any eta in (0, 1]; no eta > 1/2 restriction
// here). Starts from the linear pattern-function estimate when eta > 1/2,
// else from the maximally mixed state.
MlFit ml_reconstruct(const DataSet& data, int cutoff, const MlOptions& opts = {});

// Parameters of a displaced squeezed thermal state in the purity form:
// delta = 1/sqrt(2 n_th + 1) <= 1, squeezing r, displacement mu.
struct GaussianStateParams {
    double delta = 1.0;
    double r = 0.0;
    Complex mu{0.0, 0.0};

    double n_th() const { return 0.5 * (1.0 / (delta * delta) - 1.0); }
    double n_sq() const { return std::sinh(r) * std::sinh(r); }
    double n_coh() const { return std::norm(mu); }
};

struct GaussianFit {
    GaussianStateParams params;
    double log_likelihood = 0.0;
    bool converged = false;
    // Inverse observed information in the coordinates (n_th, r, Re mu,
    // Im mu); zero when the numerical Hessian is singular.
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
    std::size_t n = 0;
};

// Fit the four Gaussian-state parameters to homodyne data by maximum
// likelihood of the exact quadrature pdf. At eta < 1 the fitted pdf is the
// efficiency-smeared one (variance increased by (1-eta)/(4 eta)), so the
// returned parameters describe the state before detection losses.
GaussianFit ml_gaussian_fit(const DataSet& data, const MlOptions& opts = {});

// Normalized overlap Tr[a b] / sqrt(Tr[a^2] Tr[b^2]); equals 1 iff a = b.
// Throws DomainError on dimension mismatch and ZeroState when either
// argument has zero purity.
double overlap(const DensityMatrix& a, const DensityMatrix& b);

// Photon-number probability of a squeezed thermal state via the phase
// integral of [C-1]^n / C^(n+1), C(phi) = (n_th + 1/2)(e^{2r} cos^2 phi +
// e^{-2r} sin^2 phi) + 1/2, on a 256-node periodic trapezoid rule.
double squeezed_thermal_pn(int n, double n_th, double r);

// Quadratic single-mode Hamiltonian alpha a + conj(alpha) a^dag +
// phi a^dag a + (xi a^2 + conj(xi) a^dag^2)/2.
struct HamiltonianParams {
    Complex alpha{0.0, 0.0};
    double phi = 0.0;
    Complex xi{0.0, 0.0};
};

// Heisenberg-picture coefficients of the evolved mode for unit time:
// a -> gamma a + delta a^dag + mu, with |gamma|^2 - |delta|^2 = 1.
struct EvolutionCoeffs {
    Complex gamma{1.0, 0.0};
    Complex delta{0.0, 0.0};
    Complex mu{0.0, 0.0};
};

EvolutionCoeffs evolution_coeffs(const HamiltonianParams& h);

// Recover the Hamiltonian parameters from the evolution coefficients
// (numerical inversion; exact to ~1e-8 for moderate parameters).
HamiltonianParams evolution_invert(const EvolutionCoeffs& c);

// Mean field <a> after the evolution, given the input mean.
Complex evolve_gaussian_mean(const EvolutionCoeffs& c, Complex mean_in);

void to_json(nlohmann::json& j, const MlFit& fit);
void to_json(nlohmann::json& j, const GaussianFit& fit);

} // namespace qtomo
