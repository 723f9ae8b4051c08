#include "qtomo/applications.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/estimators.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

namespace {

double three_point_figure(const std::vector<double>& p, int k) {
    return (k + 2.0) * p[k] * p[k + 2] - (k + 1.0) * p[k + 1] * p[k + 1];
}

// Delete-one-block jackknife standard error of a statistic built from the
// means of jointly accumulated kernels. Central values come from the full
// sample; only the error bar uses the replicates.
double jackknife_std_error(const std::vector<AverageResult>& res,
                           const std::vector<std::size_t>& block_size,
                           const std::function<double(const std::vector<double>&)>& stat) {
    const int n_blocks = res[0].blocks;
    const double n_total = static_cast<double>(res[0].n);
    std::vector<double> theta(n_blocks);
    std::vector<double> means(res.size());
    for (int b = 0; b < n_blocks; ++b) {
        const double nb = static_cast<double>(block_size[b]);
        for (std::size_t k = 0; k < res.size(); ++k) {
            const double full = res[k].mean.real();
            if (nb == n_total) {
                means[k] = full; // degenerate single-block case
            } else {
                const double bm = res[k].block_means[b].real();
                means[k] = (n_total * full - nb * bm) / (n_total - nb);
            }
        }
        theta[b] = stat(means);
    }
    double tbar = 0.0;
    for (double t : theta) tbar += t;
    tbar /= n_blocks;
    double var = 0.0;
    for (double t : theta) var += (t - tbar) * (t - tbar);
    var *= static_cast<double>(n_blocks - 1) / static_cast<double>(n_blocks);
    return std::sqrt(var);
}

std::vector<std::size_t> block_sizes(const BlockAccumulator& acc) {
    std::vector<std::size_t> out(acc.blocks());
    for (int b = 0; b < acc.blocks(); ++b) out[b] = acc.block_end(b) - acc.block_begin(b);
    return out;
}

} // namespace

NonclassicalityReport test_b(const DataSet& data, int cutoff, EtaMode mode, int n_blocks,
                             int threads) {
    if (data.empty()) throw EmptyData("test_b: data set is empty");
    if (cutoff < 3) throw DomainError("test_b: the three-point figures need cutoff >= 3");
    if (n_blocks < 2) throw DomainError("test_b: need at least 2 blocks");
    if (!(data.eta > 0.0 && data.eta <= 1.0))
        throw EtaOutOfDomain("test_b: data efficiency must lie in (0, 1]");
    // deconvolved mode inherits the (1/2, 1] domain of the loss-corrected
    // kernels via the bank constructor
    const KernelBank bank(cutoff, mode == EtaMode::deconvolved ? data.eta : 1.0);

    const std::size_t n_records = data.size();
    std::vector<BlockAccumulator> acc(cutoff, BlockAccumulator(n_records, n_blocks));
    parallel_for(acc[0].blocks(), static_cast<unsigned>(threads), [&](std::size_t blk) {
        const std::size_t lo = acc[0].block_begin(static_cast<int>(blk));
        const std::size_t hi = acc[0].block_end(static_cast<int>(blk));
        Eigen::VectorXd diag(cutoff);
        for (std::size_t i = lo; i < hi; ++i) {
            bank.eval_diagonal(data.x[i], diag);
            for (int n = 0; n < cutoff; ++n) acc[n].add(i, Complex(diag(n), 0.0));
        }
    });

    std::vector<AverageResult> res;
    res.reserve(cutoff);
    for (int n = 0; n < cutoff; ++n) res.push_back(acc[n].finish());

    NonclassicalityReport rep;
    rep.quantity = "B";
    rep.n = n_records;
    rep.pmf.resize(cutoff);
    rep.pmf_std_error.resize(cutoff);
    for (int n = 0; n < cutoff; ++n) {
        rep.pmf[n] = res[n].mean.real();
        rep.pmf_std_error[n] = res[n].std_error;
    }
    const int n_figures = cutoff - 2;
    rep.value.resize(n_figures);
    rep.std_error.resize(n_figures);
    const std::vector<std::size_t> sizes = block_sizes(acc[0]);
    for (int k = 0; k < n_figures; ++k) {
        rep.value[k] = three_point_figure(rep.pmf, k);
        rep.std_error[k] = jackknife_std_error(
            res, sizes, [k](const std::vector<double>& p) { return three_point_figure(p, k); });
        if (rep.value[k] < -5.0 * rep.std_error[k]) ++rep.verdict;
    }
    return rep;
}

NonclassicalityReport test_b_pmf(const std::vector<double>& pmf) {
    if (pmf.size() < 3) throw DomainError("test_b_pmf: need at least three probabilities");
    NonclassicalityReport rep;
    rep.quantity = "B";
    rep.pmf = pmf;
    rep.pmf_std_error.assign(pmf.size(), 0.0);
    const int n_figures = static_cast<int>(pmf.size()) - 2;
    rep.value.resize(n_figures);
    rep.std_error.assign(n_figures, 0.0);
    for (int k = 0; k < n_figures; ++k) {
        rep.value[k] = three_point_figure(pmf, k);
        // exact inputs get a small absolute margin instead of error bars
        if (rep.value[k] < -1e-12) ++rep.verdict;
    }
    return rep;
}

NonclassicalityReport test_c(const TwoModeDataSet& data, int n_blocks, int threads) {
    if (data.empty()) throw EmptyData("test_c: data set is empty");
    if (n_blocks < 2) throw DomainError("test_c: need at least 2 blocks");

    enum { kN1, kN2, kN1Sq, kN2Sq, kCross, kCount };
    const std::size_t n_records = data.size();
    std::vector<BlockAccumulator> acc(kCount, BlockAccumulator(n_records, n_blocks));
    parallel_for(acc[0].blocks(), static_cast<unsigned>(threads), [&](std::size_t blk) {
        const std::size_t lo = acc[0].block_begin(static_cast<int>(blk));
        const std::size_t hi = acc[0].block_end(static_cast<int>(blk));
        for (std::size_t i = lo; i < hi; ++i) {
            const double x1 = data.x1[i];
            const double x2 = data.x2[i];
            // ideal-detector kernels for n and n^2 per mode, and the cross
            // moment from the product of the independent-LO number kernels
            const double v1 = 2.0 * x1 * x1 - 0.5;
            const double v2 = 2.0 * x2 * x2 - 0.5;
            const double w1 = (8.0 / 3.0) * x1 * x1 * x1 * x1 - 2.0 * x1 * x1;
            const double w2 = (8.0 / 3.0) * x2 * x2 * x2 * x2 - 2.0 * x2 * x2;
            acc[kN1].add(i, Complex(v1, 0.0));
            acc[kN2].add(i, Complex(v2, 0.0));
            acc[kN1Sq].add(i, Complex(w1, 0.0));
            acc[kN2Sq].add(i, Complex(w2, 0.0));
            acc[kCross].add(i, Complex(v1 * v2, 0.0));
        }
    });

    std::vector<AverageResult> res;
    res.reserve(kCount);
    for (int k = 0; k < kCount; ++k) res.push_back(acc[k].finish());

    const auto figure = [](const std::vector<double>& m) {
        const double diff = m[kN1] - m[kN2];
        return m[kN1Sq] + m[kN2Sq] - 2.0 * m[kCross] - diff * diff - m[kN1] - m[kN2];
    };
    std::vector<double> means(kCount);
    for (int k = 0; k < kCount; ++k) means[k] = res[k].mean.real();

    NonclassicalityReport rep;
    rep.quantity = "C";
    rep.n = n_records;
    rep.value = {figure(means)};
    rep.std_error = {jackknife_std_error(res, block_sizes(acc[0]), figure)};
    rep.verdict = rep.value[0] < -5.0 * rep.std_error[0] ? 1 : 0;
    return rep;
}

double twin_beam_c_theory(Complex xi, double eta) {
    const double x2 = std::norm(xi);
    if (!(x2 < 1.0)) throw DomainError("twin_beam_c_theory: need |xi| < 1");
    return -2.0 * eta * eta * x2 / (1.0 - x2);
}

namespace {

void check_reduced_spec(const ReducedStateSpec& spec) {
    if (!(std::abs(spec.xi) < 1.0)) throw DomainError("reduced state: need |xi| < 1");
    if (!(spec.eta_r > 0.0 && spec.eta_r <= 1.0))
        throw DomainError("reduced state: eta_r must lie in (0, 1]");
    if (spec.kind == ReducedStateSpec::Kind::photocount && spec.n < 0)
        throw DomainError("reduced state: the photocount outcome must be >= 0");
}

void check_sr_kernel_domain(const ReducedStateSpec& spec, double eta_h) {
    check_reduced_spec(spec);
    if (!(eta_h > 0.0 && eta_h <= 1.0))
        throw EtaOutOfDomain("sr_fidelity: eta_h must lie in (0, 1]");
    if (2.0 * eta_h <= spec.eta_xi())
        throw EtaBoundViolation("sr_fidelity: the kernel is unbounded unless eta_h > eta_xi/2");
}

// Fidelity kernel for a photocount-conditioned arm: the nth power-series
// coefficient (in the conditioning count) of g(z) * Phi(1, 1/2; w(z)) with
//   g(z) = A/(B+z),    w(z) = -2 eta_h (eta_xi - z)/(B + z) x^2,
//   A = 2 eta_h eta_xi,  B = 2 eta_h - eta_xi,
// scaled by eta_xi^n. The composition uses the closed derivative rule
// d^k/dw^k Phi(1, 1/2; w) = k!/((1/2)_k) Phi(k+1, k+1/2; w).
double photocount_fidelity_kernel(int n, double eta_h, double eta_xi, double x) {
    const double A = 2.0 * eta_h * eta_xi;
    const double B = 2.0 * eta_h - eta_xi;
    const double w0 = -(A / B) * x * x;

    // u = w - w0 has coefficients u_k = -2 eta_h x^2 (B + eta_xi)(-1)^k / B^{k+1}
    std::vector<double> u(n + 1, 0.0);
    const double ubase = -2.0 * eta_h * x * x * (B + eta_xi);
    double pw = 1.0 / B;
    for (int k = 1; k <= n; ++k) {
        pw /= -B;
        u[k] = ubase * pw;
    }

    std::vector<double> phi(n + 1, 0.0);
    std::vector<double> upow(n + 1, 0.0);
    upow[0] = 1.0;
    double poch = 1.0; // (1/2)_k
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            std::vector<double> next(n + 1, 0.0);
            for (int a = k - 1; a <= n; ++a)
                for (int b = 1; a + b <= n; ++b) next[a + b] += upow[a] * u[b];
            upow = std::move(next);
            poch *= 0.5 + (k - 1);
        }
        const double dk = confluent_phi(k + 1.0, k + 0.5, w0) / poch;
        for (int j = k; j <= n; ++j) phi[j] += dk * upow[j];
    }

    // multiply by g(z) = (A/B) sum_k (-1/B)^k z^k and read off order n
    double rn = 0.0;
    double gk = A / B;
    for (int i = 0; i <= n; ++i) {
        rn += gk * phi[n - i];
        gk *= -1.0 / B;
    }
    return std::pow(eta_xi, n) * rn;
}

} // namespace

double ReducedStateSpec::eta_xi() const { return 1.0 + (eta_r - 1.0) * std::norm(xi); }

Complex ReducedStateSpec::gamma() const { return xi * eta_r * std::conj(alpha) / eta_xi(); }

double ReducedStateSpec::fidelity_theory() const {
    const double e = eta_xi();
    if (kind == Kind::heterodyne) return e / (2.0 - e);
    const double q = 1.0 - e;
    return std::pow(e, 2 + 2 * n) * gauss_f(2 * n + 1, 2 * n + 1, 1.0, q * q);
}

DensityMatrix reduced_state_matrix(const ReducedStateSpec& spec) {
    check_reduced_spec(spec);
    const double e = spec.eta_xi();
    if (spec.kind == ReducedStateSpec::Kind::heterodyne) {
        const double n_th = (1.0 - e) / e;
        return make_state(StateSpec::make_squeezed_thermal(n_th, 0.0, spec.gamma()));
    }
    // photocount: p(j) = C(j,n) eta_xi^{n+1} (1-eta_xi)^{j-n}, j >= n
    const int n = spec.n;
    const double q = 1.0 - e;
    std::vector<double> p;
    p.reserve(64);
    double mass = 0.0;
    double term = std::pow(e, n + 1);
    for (int j = n; j < n + 4096; ++j) {
        p.push_back(term);
        mass += term;
        if (1.0 - mass < 1e-12) break;
        term *= q * (j + 1.0) / (j + 1.0 - n);
    }
    if (1.0 - mass >= 1e-12)
        throw Divergent("reduced state: the photocount distribution tail did not close");
    const int dim = n + static_cast<int>(p.size());
    DensityMatrix rho;
    rho.modes = 1;
    rho.dim = dim;
    rho.entries = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t i = 0; i < p.size(); ++i)
        rho.entries(n + static_cast<int>(i), n + static_cast<int>(i)) = p[i] / mass;
    rho.captured = mass;
    rho.physical = true;
    return rho;
}

DataSet sample_reduced_state(const ReducedStateSpec& spec, std::size_t n_records, double eta_h,
                             PhasePolicy policy, std::uint64_t seed, int threads) {
    check_reduced_spec(spec);
    if (spec.kind == ReducedStateSpec::Kind::heterodyne) {
        // displaced thermal state: sampled in closed form
        const double e = spec.eta_xi();
        const StateSpec s = StateSpec::make_squeezed_thermal((1.0 - e) / e, 0.0, spec.gamma());
        return sample_homodyne(s, n_records, eta_h, policy, seed, threads);
    }
    return sample_homodyne(reduced_state_matrix(spec), n_records, eta_h, policy, seed, threads);
}

double sr_fidelity_kernel(const ReducedStateSpec& spec, double eta_h, double x, double phi) {
    check_sr_kernel_domain(spec, eta_h);
    const double e = spec.eta_xi();
    if (spec.kind == ReducedStateSpec::Kind::heterodyne) {
        const double c = 2.0 * eta_h * e / (2.0 * eta_h - e);
        const double gp = (spec.gamma() * std::polar(1.0, -phi)).real();
        const double dx = x - gp;
        return c * confluent_phi(1.0, 0.5, -c * dx * dx);
    }
    return photocount_fidelity_kernel(spec.n, eta_h, e, x);
}

SrFidelity sr_fidelity(const ReducedStateSpec& spec, const DataSet& data, int n_blocks,
                       int threads) {
    if (data.empty()) throw EmptyData("sr_fidelity: data set is empty");
    if (n_blocks < 2) throw DomainError("sr_fidelity: need at least 2 blocks");
    check_sr_kernel_domain(spec, data.eta);
    const double eta_h = data.eta;
    const double e = spec.eta_xi();

    BlockAccumulator acc(data.size(), n_blocks);
    if (spec.kind == ReducedStateSpec::Kind::heterodyne) {
        const double c = 2.0 * eta_h * e / (2.0 * eta_h - e);
        const Complex g = spec.gamma();
        parallel_for(acc.blocks(), static_cast<unsigned>(threads), [&](std::size_t blk) {
            const std::size_t lo = acc.block_begin(static_cast<int>(blk));
            const std::size_t hi = acc.block_end(static_cast<int>(blk));
            for (std::size_t i = lo; i < hi; ++i) {
                const double gp = (g * std::polar(1.0, -data.phi[i])).real();
                const double dx = data.x[i] - gp;
                acc.add(i, Complex(c * confluent_phi(1.0, 0.5, -c * dx * dx), 0.0));
            }
        });
    } else {
        parallel_for(acc.blocks(), static_cast<unsigned>(threads), [&](std::size_t blk) {
            const std::size_t lo = acc.block_begin(static_cast<int>(blk));
            const std::size_t hi = acc.block_end(static_cast<int>(blk));
            for (std::size_t i = lo; i < hi; ++i)
                acc.add(i, Complex(photocount_fidelity_kernel(spec.n, eta_h, e, data.x[i]), 0.0));
        });
    }

    const AverageResult r = acc.finish();
    SrFidelity out;
    out.f = r.mean.real();
    out.std_error = r.std_error;
    out.f_theory = spec.fidelity_theory();
    out.n = r.n;
    return out;
}

ProcessMatrix estimate_process_matrix(Complex z, Complex xi, double eta, std::size_t n_records,
                                      int cutoff, int n_blocks, std::uint64_t seed, int threads) {
    if (cutoff < 1) throw DomainError("estimate_process_matrix: cutoff must be positive");
    const double ax = std::abs(xi);
    if (!(ax > 0.0 && ax < 1.0))
        throw DomainError("estimate_process_matrix: need 0 < |xi| < 1");
    if (n_records < 2) throw EmptyData("estimate_process_matrix: need at least 2 records");
    if (n_blocks < 2) throw DomainError("estimate_process_matrix: need at least 2 blocks");
    const KernelBank bank(cutoff, eta); // validates eta in (1/2, 1]

    const TwoModeDataSet data = sample_twin_beam_two_lo(xi, n_records, eta, seed, z, threads);
    const int M = cutoff;
    const int P = M * M;
    const std::size_t N = data.size();
    const int B = static_cast<int>(std::min<std::size_t>(n_blocks, N));

    // w_j w_k = conj(xi)^{-(j+k)} / (1 - |xi|^2): the inverse of the twin
    // beam acting as the probe on arm 2
    std::vector<Complex> w(M);
    {
        const Complex inv = 1.0 / std::conj(xi);
        Complex cur = 1.0 / std::sqrt(1.0 - ax * ax);
        for (int j = 0; j < M; ++j) {
            w[j] = cur;
            cur *= inv;
        }
    }

    std::vector<Eigen::MatrixXcd> bsum(B, Eigen::MatrixXcd::Zero(P, P));
    std::vector<Eigen::MatrixXd> bsq(B, Eigen::MatrixXd::Zero(P, P));
    parallel_for(B, static_cast<unsigned>(threads), [&](std::size_t b) {
        const std::size_t lo = N * b / B;
        const std::size_t hi = N * (b + 1) / B;
        Eigen::MatrixXcd k1(M, M), k2(M, M), k2w(M, M);
        Eigen::MatrixXd a2(M, M);
        Eigen::MatrixXcd& sum = bsum[b];
        Eigen::MatrixXd& sq = bsq[b];
        for (std::size_t i = lo; i < hi; ++i) {
            bank.eval(data.x1[i], data.phi1[i], k1);
            bank.eval(data.x2[i], data.phi2[i], k2);
            for (int jj = 0; jj < M; ++jj)
                for (int kk = 0; kk < M; ++kk) k2w(jj, kk) = k2(jj, kk) * (w[jj] * w[kk]);
            a2 = k2w.cwiseAbs2();
            // entries((i,j),(l,k)) accumulate k1(i,l) * k2w(j,k): the update
            // is a Kronecker product done block by block
            for (int ii = 0; ii < M; ++ii)
                for (int ll = 0; ll < M; ++ll) {
                    const Complex kv = k1(ii, ll);
                    sum.block(ii * M, ll * M, M, M).noalias() += kv * k2w;
                    sq.block(ii * M, ll * M, M, M).noalias() += std::norm(kv) * a2;
                }
        }
    });

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(P, P);
    Eigen::MatrixXd sq_total = Eigen::MatrixXd::Zero(P, P);
    for (int b = 0; b < B; ++b) {
        total += bsum[b];
        sq_total += bsq[b];
    }

    ProcessMatrix pm;
    pm.cutoff = M;
    pm.n = N;
    pm.blocks = B;
    pm.variance_warning = ax < 0.5;
    pm.entries = total / static_cast<double>(N);
    pm.std_error.resize(P, P);
    const double dn = static_cast<double>(N);
    for (int r = 0; r < P; ++r)
        for (int c = 0; c < P; ++c) {
            const double var =
                (sq_total(r, c) - dn * std::norm(pm.entries(r, c))) / ((dn - 1.0) * dn);
            pm.std_error(r, c) = std::sqrt(std::max(0.0, var));
        }

    pm.a_diag.resize(M);
    pm.a_std_error.resize(M);
    pm.a_theory.resize(M);
    const double z2 = std::norm(z);
    for (int nn = 0; nn < M; ++nn) {
        const int p = nn * M + nn;
        const double rhat = pm.entries(p, p).real();
        const double a = std::sqrt(std::max(0.0, rhat));
        const double sr = pm.std_error(p, p);
        pm.a_diag[nn] = a;
        // delta-method error bar, regularized where the square root's slope
        // diverges (a -> 0)
        pm.a_std_error[nn] = sr == 0.0 ? 0.0 : sr / (2.0 * std::max(a, std::sqrt(sr)));
        pm.a_theory[nn] = std::exp(-0.5 * z2) * std::abs(laguerre(nn, 0, z2));
    }
    return pm;
}

void save_process_diag_csv(const ProcessMatrix& pm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "n,A,stderr,theory\n";
    char line[160];
    for (int n = 0; n < pm.cutoff; ++n) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", n, pm.a_diag[n],
                      pm.a_std_error[n], pm.a_theory[n]);
        out << line;
    }
    if (!out) throw IoError("failed writing: " + path);
}

void to_json(nlohmann::json& j, const NonclassicalityReport& rep) {
    j = nlohmann::json{{"schema", "qtomo-nonclassicality-v1"},
                       {"quantity", rep.quantity},
                       {"value", rep.value},
                       {"std_error", rep.std_error},
                       {"pmf", rep.pmf},
                       {"pmf_std_error", rep.pmf_std_error},
                       {"verdict", rep.verdict},
                       {"n", rep.n}};
}

void to_json(nlohmann::json& j, const SrFidelity& f) {
    j = nlohmann::json{{"schema", "qtomo-sr-fidelity-v1"},
                       {"f", f.f},
                       {"std_error", f.std_error},
                       {"f_theory", f.f_theory},
                       {"n", f.n}};
}

void to_json(nlohmann::json& j, const ProcessMatrix& pm) {
    nlohmann::json ent = nlohmann::json::array();
    nlohmann::json err = nlohmann::json::array();
    for (Eigen::Index r = 0; r < pm.entries.rows(); ++r)
        for (Eigen::Index c = 0; c < pm.entries.cols(); ++c) {
            ent.push_back(pm.entries(r, c).real());
            ent.push_back(pm.entries(r, c).imag());
            err.push_back(pm.std_error(r, c));
        }
    j = nlohmann::json{{"schema", "qtomo-process-matrix-v1"},
                       {"cutoff", pm.cutoff},
                       {"n", pm.n},
                       {"blocks", pm.blocks},
                       {"variance_warning", pm.variance_warning},
                       {"a_diag", pm.a_diag},
                       {"a_std_error", pm.a_std_error},
                       {"a_theory", pm.a_theory},
                       {"entries", std::move(ent)},
                       {"std_error", std::move(err)}};
}

} // namespace qtomo
