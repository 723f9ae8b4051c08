#include "qtomo/specfun.hpp"

#include <gsl/gsl_sf_dawson.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "qtomo/errors.hpp"

#include <Eigen/Dense>

namespace qtomo {

namespace {

bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::floor(v);
}

constexpr double kSeriesTol = 1e-16;
constexpr int kSeriesCap = 10000;

// Raw series for Phi(a,b;z); assumes z >= 0 (no cancellation).
double phi_series(double a, double b, double z) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < kSeriesCap; ++k) {
        term *= (a + k) / (b + k) * z / (k + 1);
        sum += term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) return sum;
    }
    return sum;
}

} // namespace

double hermite(int n, double x) {
    if (n < 0) throw DomainError("hermite: order must be nonnegative");
    if (n == 0) return 1.0;
    double hm = 1.0;       // H_0
    double h = 2.0 * x;    // H_1
    for (int k = 1; k < n; ++k) {
        double next = 2.0 * x * h - 2.0 * k * hm;
        hm = h;
        h = next;
    }
    return h;
}

double laguerre(int n, int d, double x) {
    if (n < 0) throw DomainError("laguerre: degree must be nonnegative");
    if (d < -n) throw DomainError("laguerre: order must be >= -degree");
    if (n == 0) return 1.0;
    double a = static_cast<double>(d);
    double lm = 1.0;           // L_0
    double l = 1.0 + a - x;    // L_1
    for (int k = 1; k < n; ++k) {
        double next = ((2.0 * k + 1.0 + a - x) * l - (k + a) * lm) / (k + 1.0);
        lm = l;
        l = next;
    }
    return l;
}

double confluent_phi(double a, double b, double z) {
    if (is_nonpositive_integer(b))
        throw DomainError("confluent_phi: b must not be a nonpositive integer");
    if (z < 0.0) return std::exp(z) * phi_series(b - a, b, -z);
    return phi_series(a, b, z);
}

double gauss_f(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c))
        throw DomainError("gauss_f: c must not be a nonpositive integer");
    if (std::abs(z) >= 1.0) throw DomainError("gauss_f: requires |z| < 1");
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < kSeriesCap; ++k) {
        term *= (a + k) * (b + k) / (c + k) * z / (k + 1);
        sum += term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) return sum;
    }
    return sum;
}

double oscillator_psi(int n, double x) {
    if (n < 0) throw DomainError("oscillator_psi: order must be nonnegative");
    // Evaluate h_k(x') = H_k(x') / sqrt(2^k k!) at x' = sqrt(2) x via
    // h_{k+1} = sqrt(2/(k+1)) x' h_k - sqrt(k/(k+1)) h_{k-1}. The normalized
    // values stay O(1) for in-support x, so no log bookkeeping is needed for
    // the recurrence itself; the Gaussian factor is folded in at the end in
    // the log domain to survive large |x| tails.
    const double xp = std::sqrt(2.0) * x;
    double hm = 0.0;
    double h = 1.0;
    for (int k = 0; k < n; ++k) {
        double next = std::sqrt(2.0 / (k + 1)) * xp * h - std::sqrt(static_cast<double>(k) / (k + 1)) * hm;
        hm = h;
        h = next;
    }
    if (h == 0.0) return 0.0;
    const double log_norm = 0.25 * std::log(2.0 / M_PI);
    double mag = log_norm + std::log(std::abs(h)) - x * x;
    return std::copysign(std::exp(mag), h);
}

double dawson(double x) { return gsl_sf_dawson(x); }

double log_factorial(int n) {
    if (n < 0) throw DomainError("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

namespace {

// Symmetric-tridiagonal eigen decomposition (Golub-Welsch): nodes are the
// eigenvalues, weights are mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag,
                            double mu0) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = diag[i];
        if (i + 1 < n) {
            J(i, i + 1) = offdiag[i];
            J(i + 1, i) = offdiag[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.x[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule.w[i] = mu0 * v0 * v0;
    }
    return rule;
}

std::map<int, QuadratureRule> g_legendre_cache;
std::map<int, QuadratureRule> g_laguerre_cache;
std::map<int, QuadratureRule> g_hermite_cache;
std::mutex g_quad_mutex;

const QuadratureRule& legendre_unit(int n) {
    std::lock_guard<std::mutex> lock(g_quad_mutex);
    auto it = g_legendre_cache.find(n);
    if (it != g_legendre_cache.end()) return it->second;
    // Legendre on [-1,1]: a_k = 0, b_k = k / sqrt(4k^2 - 1), mu0 = 2.
    std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    auto [pos, ok] = g_legendre_cache.emplace(n, golub_welsch(diag, off, 2.0));
    (void)ok;
    return pos->second;
}

} // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    const QuadratureRule& unit = legendre_unit(n);
    QuadratureRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.x[i] = mid + half * unit.x[i];
        rule.w[i] = half * unit.w[i];
    }
    return rule;
}

const QuadratureRule& gauss_laguerre(int n) {
    if (n < 1) throw DomainError("gauss_laguerre: need at least one node");
    std::lock_guard<std::mutex> lock(g_quad_mutex);
    auto it = g_laguerre_cache.find(n);
    if (it != g_laguerre_cache.end()) return it->second;
    // Laguerre (alpha=0): a_k = 2k+1, b_k = k, mu0 = 1.
    std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = static_cast<double>(k);
    auto [pos, ok] = g_laguerre_cache.emplace(n, golub_welsch(diag, off, 1.0));
    (void)ok;
    return pos->second;
}

const QuadratureRule& gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite: need at least one node");
    std::lock_guard<std::mutex> lock(g_quad_mutex);
    auto it = g_hermite_cache.find(n);
    if (it != g_hermite_cache.end()) return it->second;
    // Hermite: a_k = 0, b_k = sqrt(k/2), mu0 = sqrt(pi).
    std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
    auto [pos, ok] = g_hermite_cache.emplace(n, golub_welsch(diag, off, std::sqrt(M_PI)));
    (void)ok;
    return pos->second;
}

} // namespace qtomo
