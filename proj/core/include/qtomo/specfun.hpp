#pragma once

#include <cstddef>
#include <vector>

namespace qtomo {

// Physicists' Hermite polynomial H_n(x) by the forward recurrence
// H_{k+1} = 2x H_k - 2k H_{k-1}. Overflow to +/-inf is possible for very
// large n*x and is acceptable; callers needing n ~ hundreds should work with
// oscillator_psi, which normalizes in the log domain.
double hermite(int n, double x);

// Generalized Laguerre polynomial L_n^d(x). d may be negative down to -n
// (the estimator kernels use L_n^d with integer d >= -n).
double laguerre(int n, int d, double x);

// Kummer confluent hypergeometric Phi(a,b;z) = 1F1(a;b;z) by series.
// For z < 0 the alternating series suffers cancellation, so the Kummer
// transform Phi(a,b;z) = e^z Phi(b-a,b;-z) is applied first.
// Throws DomainError when b is a nonpositive integer.
double confluent_phi(double a, double b, double z);

// Gauss hypergeometric F(a,b;c;z) by series; requires |z| < 1.
// Throws DomainError for |z| >= 1 or c a nonpositive integer.
double gauss_f(double a, double b, double c, double z);

// Harmonic-oscillator position wavefunction
//   psi_n(x) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) x) e^{-x^2},
// evaluated stably (normalized recurrence) for n up to at least 512.
double oscillator_psi(int n, double x);

// Dawson integral D(x) = e^{-x^2} \int_0^x e^{t^2} dt.
double dawson(double x);

// lgamma(n+1) = log(n!) for integer n >= 0.
double log_factorial(int n);

// Quadrature rule: nodes x[i] with weights w[i].
struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule with n nodes on [a,b]. Rules for a given n are cached
// in normalized form; scaling to [a,b] is per call.
QuadratureRule gauss_legendre(int n, double a, double b);

// Gauss-Laguerre rule with n nodes for \int_0^inf e^{-t} f(t) dt (weight
// function folded into w). Cached per n.
const QuadratureRule& gauss_laguerre(int n);

// Gauss-Hermite rule with n nodes for \int_{-inf}^{inf} e^{-t^2} f(t) dt
// (weight function folded into w). Cached per n.
const QuadratureRule& gauss_hermite(int n);

} // namespace qtomo
