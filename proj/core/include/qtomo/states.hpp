#pragma once

#include <complex>
#include <optional>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qtomo/grid.hpp"

namespace qtomo {

using Complex = std::complex<double>;

// Truncated Fock-basis density matrix. For one mode `entries` is dim x dim
// with entries(n,m) = <n|rho|m>. For two modes it is dim^2 x dim^2 with the
// row-major pair index (n1,n2) -> n1*dim + n2. `captured` records the trace
// captured by the truncation before renormalization (entries themselves are
// normalized to unit trace). Matrices produced by reconstruction may carry
// negative eigenvalues; `physical` flags whether the matrix passed a
// positive-semidefiniteness check at construction.
struct DensityMatrix {
    int modes = 1;
    int dim = 0;
    Eigen::MatrixXcd entries;
    double captured = 1.0;
    bool physical = true;

    Complex at(int n, int m) const { return entries(n, m); }
    // Two-mode element <n1 n2| rho |m1 m2>.
    Complex at2(int n1, int n2, int m1, int m2) const {
        return entries(static_cast<Eigen::Index>(n1) * dim + n2,
                       static_cast<Eigen::Index>(m1) * dim + m2);
    }
};

enum class StateKind {
    vacuum,
    coherent,
    fock,
    thermal,
    displaced_squeezed,
    squeezed_thermal,
    cat,
    twin_beam,
};

// Declarative description of a reference state. `cutoff` = 0 requests the
// automatic Fock cutoff (grown until the captured trace reaches 1 - 1e-6);
// an explicit cutoff that captures less than that makes make_state throw
// CutoffTooSmall.
struct StateSpec {
    StateKind kind = StateKind::vacuum;
    Complex alpha{0.0, 0.0}; // coherent / displaced_squeezed / squeezed_thermal / cat
    double r = 0.0;          // squeezing parameter, exp[r(a^dag^2 - a^2)/2]
    double n_th = 0.0;       // thermal occupation
    int n = 0;               // Fock index
    Complex xi{0.0, 0.0};    // twin-beam parameter, |xi| < 1
    int cutoff = 0;          // 0 = automatic

    static StateSpec make_vacuum(int cutoff = 0);
    static StateSpec make_coherent(Complex alpha, int cutoff = 0);
    static StateSpec make_fock(int n, int cutoff = 0);
    static StateSpec make_thermal(double n_th, int cutoff = 0);
    static StateSpec make_displaced_squeezed(Complex alpha, double r, int cutoff = 0);
    static StateSpec make_squeezed_thermal(double n_th, double r, Complex alpha, int cutoff = 0);
    static StateSpec make_cat(Complex alpha, int cutoff = 0);
    static StateSpec make_twin_beam(Complex xi, int cutoff = 0);

    // Mean photon number (per beam for twin_beam).
    double mean_photons() const;
    // Cutoff after applying the default rule M = ceil(nbar + 6 sqrt(nbar+1)) + 4
    // when no explicit cutoff is set (twin_beam uses the geometric-tail bound).
    int resolve_cutoff() const;
    // True when the quadrature statistics are Gaussian (vacuum, coherent,
    // thermal, displaced_squeezed, squeezed_thermal).
    bool is_gaussian() const;
};

// Build the truncated density matrix for a spec. Throws CutoffTooSmall when
// an explicit cutoff captures less than 1 - 1e-6 of the trace.
DensityMatrix make_state(const StateSpec& spec);

// Matrix of the displacement operator <n|D(alpha)|m> at the given dimension.
Eigen::MatrixXcd displacement_matrix(Complex alpha, int dim);

// Matrix of the squeeze operator exp[r(a^dag^2 - a^2)/2] at the given
// dimension (real orthogonal).
Eigen::MatrixXd squeeze_matrix(double r, int dim);

// Wigner function W(alpha) normalized to unit integral over d^2alpha
// (vacuum -> 2/pi at the origin). Single mode only.
double wigner_eval(const DensityMatrix& rho, Complex alpha);

// Sample wigner_eval on a rectangular grid (s = 0).
using WignerGrid = PlaneGrid;
WignerGrid wigner_grid(const DensityMatrix& rho, double x0, double x1, int nx, double y0,
                       double y1, int ny);

// Map a quasi-probability grid at ordering s' down to ordering s < s' by
// Gaussian convolution (kernel 2/(pi tau) exp(-2|alpha|^2/tau), tau = s'-s).
// Throws DomainError if s >= grid.s.
WignerGrid wigner_s_convolve(const WignerGrid& grid, double s);

// Quadrature probability density p_eta(x, phi) of a single-mode state
// detected with efficiency eta in (0, 1]. eta < 1 convolves the ideal
// density with a Gaussian of variance (1-eta)/(4 eta).
double quadrature_pdf(const DensityMatrix& rho, double x, double phi, double eta = 1.0);

// Copy of rho cut or zero-padded to the new per-mode cutoff. The entries are
// not renormalized.
DensityMatrix truncated(const DensityMatrix& rho, int new_dim);

// Closed-form mean and variance of the quadrature distribution at LO phase
// phi and efficiency eta for Gaussian state kinds; nullopt otherwise.
std::optional<std::pair<double, double>> gaussian_quadrature_moments(const StateSpec& spec,
                                                                     double phi, double eta);

void to_json(nlohmann::json& j, const StateSpec& spec);
void from_json(const nlohmann::json& j, StateSpec& spec);
void to_json(nlohmann::json& j, const DensityMatrix& rho);
void from_json(const nlohmann::json& j, DensityMatrix& rho);

} // namespace qtomo
