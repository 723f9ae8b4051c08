#include "qtomo/detector_sim.hpp"

#include <algorithm>
#include <cmath>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

PhasePolicy PhasePolicy::equally_spaced(int f) {
    if (f < 1) throw DomainError("PhasePolicy: need at least one phase");
    PhasePolicy p;
    p.kind = Kind::equally_spaced;
    p.phases = f;
    return p;
}

namespace {

double policy_phase(const PhasePolicy& policy, std::size_t i, Rng& rng) {
    if (policy.kind == PhasePolicy::Kind::equally_spaced)
        return M_PI * static_cast<double>(i % policy.phases) / policy.phases;
    return M_PI * rng.uniform();
}

// psi_0..psi_{len-1} at x in one recurrence pass. The normalized recurrence
// values stay within double range for |x| <= 26, ample for sampler grids.
void psi_row(int len, double x, std::vector<double>& out) {
    out.resize(len);
    const double xp = std::sqrt(2.0) * x;
    const double gauss = std::exp(-x * x) * std::pow(2.0 / M_PI, 0.25);
    double hm = 0.0, h = 1.0;
    for (int k = 0; k < len; ++k) {
        out[k] = h * gauss;
        const double next =
            std::sqrt(2.0 / (k + 1)) * xp * h - std::sqrt(static_cast<double>(k) / (k + 1)) * hm;
        hm = h;
        h = next;
    }
}

// Tabulated inverse CDF of the ideal quadrature density, phase-resolved
// through its harmonic components: the CDF at (x_i, phi) is
// C_i(phi) = G[0][i] + 2 Re sum_d e^{i d phi} G[d][i].
struct QuadTable {
    double x0 = 0.0;
    double h = 1e-3;
    int npts = 0;
    int M = 0;
    std::vector<Complex> g; // layout d * npts + i

    explicit QuadTable(const DensityMatrix& rho) {
        M = rho.dim;
        // Range: worst-case quadrature mean +/- 8 worst-case sigma.
        Complex a1(0.0, 0.0), a2c(0.0, 0.0);
        double nbar = 0.0;
        for (int n = 0; n < M; ++n) {
            nbar += n * rho.entries(n, n).real();
            if (n >= 1) a1 += std::sqrt(static_cast<double>(n)) * rho.entries(n, n - 1);
            if (n >= 2) a2c += std::sqrt(n * (n - 1.0)) * rho.entries(n, n - 2);
        }
        const double sig = std::sqrt((1.0 + 2.0 * nbar + 2.0 * std::abs(a2c)) / 4.0);
        // The oscillator recurrence is stable to |x| ~ 26; past ~25 the pdf of
        // any state this table can hold is below 1e-200 anyway.
        const double half = std::min(std::abs(a1) + 8.0 * sig + 0.5, 25.0);
        x0 = -half;
        h = 1e-3;
        auto count = static_cast<std::size_t>(std::ceil(2.0 * half / h)) + 2;
        if (count > (1u << 21)) {
            count = 1u << 21;
            h = 2.0 * half / static_cast<double>(count - 1);
        }
        npts = static_cast<int>(count);
        g.assign(static_cast<std::size_t>(M) * npts, Complex(0.0, 0.0));
        std::vector<double> psi;
        std::vector<Complex> prev(M), cur(M);
        psi_row(M, x0, psi);
        for (int d = 0; d < M; ++d) {
            Complex v(0.0, 0.0);
            for (int n = 0; n + d < M; ++n) v += rho.entries(n, n + d) * psi[n] * psi[n + d];
            prev[d] = v;
        }
        for (int i = 1; i < npts; ++i) {
            psi_row(M, x0 + i * h, psi);
            for (int d = 0; d < M; ++d) {
                Complex v(0.0, 0.0);
                for (int n = 0; n + d < M; ++n) v += rho.entries(n, n + d) * psi[n] * psi[n + d];
                cur[d] = v;
                g[static_cast<std::size_t>(d) * npts + i] =
                    g[static_cast<std::size_t>(d) * npts + i - 1] + 0.5 * h * (prev[d] + v);
            }
            std::swap(prev, cur);
        }
    }

    double cdf(int i, const std::vector<Complex>& pw) const {
        double c = g[i].real();
        for (int d = 1; d < M; ++d)
            c += 2.0 * (pw[d] * g[static_cast<std::size_t>(d) * npts + i]).real();
        return c;
    }

    double draw_x(double phi, double u, std::vector<Complex>& pw) const {
        pw.resize(M);
        pw[0] = Complex(1.0, 0.0);
        const Complex e = std::polar(1.0, phi);
        for (int d = 1; d < M; ++d) pw[d] = pw[d - 1] * e;
        const double total = cdf(npts - 1, pw);
        const double target = u * total;
        int lo = 0, hi = npts - 1; // cdf(lo) <= target <= cdf(hi)
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            if (cdf(mid, pw) < target)
                lo = mid;
            else
                hi = mid;
        }
        const double clo = cdf(lo, pw);
        const double chi = cdf(hi, pw);
        const double frac = chi > clo ? (target - clo) / (chi - clo) : 0.5;
        return x0 + (lo + frac) * h;
    }
};

nlohmann::json matrix_provenance(const DensityMatrix& rho) {
    return nlohmann::json{{"source", "density_matrix"}, {"modes", rho.modes}, {"dim", rho.dim}};
}

template <typename PerRecord>
DataSet run_blocks(std::size_t n, double eta, std::uint64_t seed, bool angles, int threads,
                   const PerRecord& fill) {
    DataSet ds;
    ds.eta = eta;
    ds.seed = seed;
    ds.x.resize(n);
    ds.phi.resize(n);
    if (angles) {
        ds.theta.resize(n);
        ds.psi0.resize(n);
        ds.psi1.resize(n);
    }
    const std::size_t blocks = n == 0 ? 0 : (n - 1) / kRngBlockSize + 1;
    parallel_for(blocks, static_cast<unsigned>(threads), [&](std::size_t b) {
        Rng rng(seed, b);
        const std::size_t lo = b * kRngBlockSize;
        const std::size_t hi = std::min(n, lo + kRngBlockSize);
        for (std::size_t i = lo; i < hi; ++i) fill(ds, i, rng);
    });
    return ds;
}

void check_eta(double eta) {
    if (eta <= 0.0 || eta > 1.0) throw EtaOutOfDomain("detector efficiency must be in (0,1]");
}

} // namespace

DataSet sample_homodyne(const DensityMatrix& rho, std::size_t n, double eta, PhasePolicy policy,
                        std::uint64_t seed, int threads) {
    check_eta(eta);
    if (rho.modes != 1) throw DomainError("sample_homodyne: single mode only");
    if (n < 1) throw DomainError("sample_homodyne: need at least one record");
    const QuadTable table(rho);
    const double noise = eta < 1.0 ? std::sqrt((1.0 - eta) / (4.0 * eta)) : 0.0;
    DataSet ds = run_blocks(n, eta, seed, false, threads,
                            [&](DataSet& out, std::size_t i, Rng& rng) {
                                thread_local std::vector<Complex> pw;
                                const double phi = policy_phase(policy, i, rng);
                                double x = table.draw_x(phi, rng.uniform(), pw);
                                if (noise > 0.0) x += noise * rng.gauss();
                                out.x[i] = x;
                                out.phi[i] = phi;
                            });
    ds.state_spec = matrix_provenance(rho);
    return ds;
}

DataSet sample_homodyne(const StateSpec& spec, std::size_t n, double eta, PhasePolicy policy,
                        std::uint64_t seed, int threads) {
    check_eta(eta);
    if (!spec.is_gaussian()) {
        DataSet ds = sample_homodyne(make_state(spec), n, eta, policy, seed, threads);
        ds.state_spec = nlohmann::json(spec);
        return ds;
    }
    if (n < 1) throw DomainError("sample_homodyne: need at least one record");
    DataSet ds = run_blocks(n, eta, seed, false, threads,
                            [&](DataSet& out, std::size_t i, Rng& rng) {
                                const double phi = policy_phase(policy, i, rng);
                                const auto mv = gaussian_quadrature_moments(spec, phi, eta);
                                out.x[i] = mv->first + std::sqrt(mv->second) * rng.gauss();
                                out.phi[i] = phi;
                            });
    ds.state_spec = nlohmann::json(spec);
    return ds;
}

std::vector<int> sample_photocount(const DensityMatrix& rho, std::size_t n, double eta,
                                   std::uint64_t seed) {
    check_eta(eta);
    if (rho.modes != 1) throw DomainError("sample_photocount: single mode only");
    const int M = rho.dim;
    std::vector<double> cum(M);
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
        acc += std::max(0.0, rho.entries(k, k).real());
        cum[k] = acc;
    }
    std::vector<int> counts(n);
    const std::size_t blocks = n == 0 ? 0 : (n - 1) / kRngBlockSize + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng(seed, b);
        const std::size_t lo = b * kRngBlockSize;
        const std::size_t hi = std::min(n, lo + kRngBlockSize);
        for (std::size_t i = lo; i < hi; ++i) {
            const double u = rng.uniform() * acc;
            const int level = static_cast<int>(
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            int m = 0;
            if (eta == 1.0) {
                m = level;
            } else {
                for (int p = 0; p < level; ++p)
                    if (rng.uniform() < eta) ++m;
            }
            counts[i] = m;
        }
    }
    return counts;
}

std::vector<Complex> sample_heterodyne(const DensityMatrix& rho, std::size_t n, double eta,
                                       std::uint64_t seed) {
    check_eta(eta);
    if (rho.modes != 1) throw DomainError("sample_heterodyne: single mode only");
    const int M = rho.dim;
    const int nr = 2048, nth = 512;
    const double r_max = std::sqrt(static_cast<double>(M)) + 8.0;
    const double dr = r_max / nr;
    const double dth = 2.0 * M_PI / nth;
    // Cell weights of the Q density in polar coordinates, via its angular
    // harmonics at each radius.
    std::vector<double> cdf(static_cast<std::size_t>(nr) * nth);
    std::vector<Complex> w(M);
    double total = 0.0;
    for (int ir = 0; ir < nr; ++ir) {
        const double r = (ir + 0.5) * dr;
        std::vector<double> t(M);
        double t0 = std::exp(-0.5 * r * r);
        for (int k = 0; k < M; ++k) {
            t[k] = t0;
            t0 *= r / std::sqrt(k + 1.0);
        }
        for (int d = 0; d < M; ++d) {
            Complex v(0.0, 0.0);
            for (int k = 0; k + d < M; ++k) v += rho.entries(k, k + d) * t[k] * t[k + d];
            w[d] = v;
        }
        const double cell = r * dr * dth / M_PI;
        for (int jt = 0; jt < nth; ++jt) {
            const double th = (jt + 0.5) * dth;
            double q = w[0].real();
            const Complex e = std::polar(1.0, th);
            Complex p = e;
            for (int d = 1; d < M; ++d, p *= e) q += 2.0 * (p * w[d]).real();
            total += std::max(0.0, q) * cell;
            cdf[static_cast<std::size_t>(ir) * nth + jt] = total;
        }
    }
    const double noise = eta < 1.0 ? std::sqrt((1.0 - eta) / (2.0 * eta)) : 0.0;
    std::vector<Complex> out(n);
    const std::size_t blocks = n == 0 ? 0 : (n - 1) / kRngBlockSize + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng(seed, b);
        const std::size_t lo = b * kRngBlockSize;
        const std::size_t hi = std::min(n, lo + kRngBlockSize);
        for (std::size_t i = lo; i < hi; ++i) {
            const double u = rng.uniform() * total;
            const std::size_t cell =
                std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            const std::size_t ir = cell / nth, jt = cell % nth;
            const double r = (ir + rng.uniform()) * dr;
            const double th = (jt + rng.uniform()) * dth;
            Complex z = std::polar(r, th);
            if (noise > 0.0) z += Complex(noise * rng.gauss(), noise * rng.gauss());
            out[i] = z;
        }
    }
    return out;
}

Complex heterodyne_moment(const std::vector<Complex>& samples, int n, int m, double eta) {
    check_eta(eta);
    if (samples.empty()) throw EmptyData("heterodyne_moment: no samples");
    if (n < 0 || m < 0) throw DomainError("heterodyne_moment: orders must be nonnegative");
    // Sample averages S[i][j] = <conj(z)^i z^j>.
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n + 1, m + 1);
    std::vector<Complex> zp(m + 1), zc(n + 1);
    for (const Complex& z : samples) {
        zp[0] = zc[0] = Complex(1.0, 0.0);
        for (int j = 1; j <= m; ++j) zp[j] = zp[j - 1] * z;
        const Complex zb = std::conj(z);
        for (int i = 1; i <= n; ++i) zc[i] = zc[i - 1] * zb;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= m; ++j) S(i, j) += zc[i] * zp[j];
    }
    S /= static_cast<double>(samples.size());
    auto binom = [](int a, int b) {
        double v = 1.0;
        for (int k = 0; k < b; ++k) v = v * (a - k) / (k + 1);
        return v;
    };
    // Strip the detection noise: outcomes average the anti-normal moments
    // plus nu = (1-eta)/eta per contraction.
    const double nu = (1.0 - eta) / eta;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n + 1, m + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) {
            Complex v = S(i, j);
            double fac = 1.0;
            for (int k = 1; k <= std::min(i, j); ++k) {
                fac *= k;
                v -= fac * binom(i, k) * binom(j, k) * std::pow(nu, k) * A(i - k, j - k);
            }
            A(i, j) = v;
        }
    // Reorder anti-normal to normal.
    Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(n + 1, m + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) {
            Complex v = A(i, j);
            double fac = 1.0;
            for (int k = 1; k <= std::min(i, j); ++k) {
                fac *= k;
                v -= fac * binom(i, k) * binom(j, k) * N(i - k, j - k);
            }
            N(i, j) = v;
        }
    return N(n, m);
}

DataSet sample_twin_beam_homodyne(Complex xi, std::size_t n, double eta, std::uint64_t seed,
                                  int threads) {
    check_eta(eta);
    const double xi2 = std::norm(xi);
    if (xi2 >= 1.0) throw DomainError("sample_twin_beam_homodyne: requires |xi| < 1");
    if (n < 1) throw DomainError("sample_twin_beam_homodyne: need at least one record");
    const double arg_xi = std::arg(xi);
    const double mag_xi = std::abs(xi);
    const double add = (1.0 - eta) / (4.0 * eta);
    DataSet ds = run_blocks(
        n, eta, seed, true, threads, [&](DataSet& out, std::size_t i, Rng& rng) {
            const double c2 = 2.0 * rng.uniform() - 1.0;
            const double theta = 0.5 * std::acos(c2);
            const double psi0 = rng.uniform(0.0, 2.0 * M_PI);
            const double psi1 = rng.uniform(0.0, 2.0 * M_PI);
            const double var =
                (1.0 + xi2 +
                 2.0 * mag_xi * std::sin(2.0 * theta) * std::cos(psi0 + psi1 - arg_xi)) /
                    (4.0 * (1.0 - xi2)) +
                add;
            out.x[i] = std::sqrt(var) * rng.gauss();
            out.phi[i] = 0.0;
            out.theta[i] = theta;
            out.psi0[i] = psi0;
            out.psi1[i] = psi1;
        });
    ds.state_spec = nlohmann::json(StateSpec::make_twin_beam(xi));
    return ds;
}

TwoModeDataSet sample_twin_beam_two_lo(Complex xi, std::size_t n, double eta, std::uint64_t seed,
                                       Complex displace1, int threads) {
    check_eta(eta);
    const double xi2 = std::norm(xi);
    if (xi2 >= 1.0) throw DomainError("sample_twin_beam_two_lo: requires |xi| < 1");
    if (n < 1) throw DomainError("sample_twin_beam_two_lo: need at least one record");
    const double nbar = xi2 / (1.0 - xi2);
    const double v = (2.0 * nbar + 1.0) / 4.0 + (1.0 - eta) / (4.0 * eta);
    TwoModeDataSet ds;
    ds.eta = eta;
    ds.seed = seed;
    ds.x1.resize(n);
    ds.phi1.resize(n);
    ds.x2.resize(n);
    ds.phi2.resize(n);
    const std::size_t blocks = (n - 1) / kRngBlockSize + 1;
    parallel_for(blocks, static_cast<unsigned>(threads), [&](std::size_t b) {
        Rng rng(seed, b);
        const std::size_t lo = b * kRngBlockSize;
        const std::size_t hi = std::min(n, lo + kRngBlockSize);
        for (std::size_t i = lo; i < hi; ++i) {
            const double phi1 = M_PI * rng.uniform();
            const double phi2 = M_PI * rng.uniform();
            const double cov =
                (xi * std::polar(1.0, -(phi1 + phi2))).real() / (2.0 * (1.0 - xi2));
            const double g1 = rng.gauss();
            const double g2 = rng.gauss();
            const double mean1 = (displace1 * std::polar(1.0, -phi1)).real();
            ds.x1[i] = mean1 + std::sqrt(v) * g1;
            ds.x2[i] = (cov / std::sqrt(v)) * g1 + std::sqrt(v - cov * cov / v) * g2;
            ds.phi1[i] = phi1;
            ds.phi2[i] = phi2;
        }
    });
    nlohmann::json prov(StateSpec::make_twin_beam(xi));
    if (std::abs(displace1) > 0.0)
        prov["displace1"] = nlohmann::json::array({displace1.real(), displace1.imag()});
    ds.state_spec = std::move(prov);
    return ds;
}

std::vector<ParityRecord> sample_displaced_parity(const DensityMatrix& rho, std::size_t n,
                                                  double radius, std::uint64_t seed) {
    if (rho.modes != 1) throw DomainError("sample_displaced_parity: single mode only");
    if (radius <= 0.0) throw DomainError("sample_displaced_parity: radius must be positive");
    std::vector<ParityRecord> out(n);
    const std::size_t blocks = n == 0 ? 0 : (n - 1) / kRngBlockSize + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng(seed, b);
        const std::size_t lo = b * kRngBlockSize;
        const std::size_t hi = std::min(n, lo + kRngBlockSize);
        for (std::size_t i = lo; i < hi; ++i) {
            const double r = radius * std::sqrt(rng.uniform());
            const double th = rng.uniform(0.0, 2.0 * M_PI);
            const Complex alpha = std::polar(r, th);
            const double mean_parity = 0.5 * M_PI * wigner_eval(rho, alpha);
            const double p_plus = std::clamp(0.5 * (1.0 + mean_parity), 0.0, 1.0);
            out[i].alpha = alpha;
            out[i].parity = rng.uniform() < p_plus ? 1 : -1;
        }
    }
    return out;
}

} // namespace qtomo
