#include "qtomo/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

std::vector<double> ModeAngles::amplitudes() const {
    if (psi.empty() || theta.size() + 1 != psi.size())
        throw DomainError("ModeAngles: need one phase per mode and one fewer mixing angle");
    const std::size_t modes = psi.size();
    std::vector<double> u(modes);
    double run = 1.0;
    for (std::size_t l = 0; l < modes; ++l) {
        if (l + 1 < modes) {
            u[l] = run * std::cos(theta[l]);
            run *= std::sin(theta[l]);
        } else {
            u[l] = run;
        }
    }
    return u;
}

double kappa_param(double eta) {
    if (eta <= 0.5 || eta > 1.0)
        throw EtaOutOfDomain("multimode kernels require 1/2 < eta <= 1");
    return 2.0 * eta / (2.0 * eta - 1.0);
}

namespace {

// Generalized Laguerre table: column k holds L_k^d(z_j) over the nodes.
void laguerre_table(const Eigen::ArrayXd& z, int d, Eigen::MatrixXd& out) {
    const Eigen::Index cols = out.cols();
    if (cols == 0) return;
    out.col(0).setOnes();
    if (cols > 1) out.col(1) = (d + 1.0 - z).matrix();
    for (Eigen::Index k = 1; k + 1 < cols; ++k)
        out.col(k + 1) = (((2.0 * k + d + 1.0 - z) * out.col(k).array() -
                           (k + static_cast<double>(d)) * out.col(k - 1).array()) /
                          (k + 1.0))
                             .matrix();
}

struct RadialRule {
    Eigen::ArrayXd t;
    Eigen::ArrayXd w;
    Eigen::ArrayXd sqrt_t;

    explicit RadialRule(int nodes) {
        QuadratureRule gl = gauss_laguerre(nodes);
        t = Eigen::Map<const Eigen::ArrayXd>(gl.x.data(), gl.x.size());
        w = Eigen::Map<const Eigen::ArrayXd>(gl.w.data(), gl.w.size());
        sqrt_t = t.sqrt();
    }

    // weight * e^{2 i sqrt(kappa t) x}, split into real and imaginary parts.
    void phase_rows(double kappa, double x, Eigen::ArrayXd& re, Eigen::ArrayXd& im) const {
        const Eigen::ArrayXd arg = 2.0 * std::sqrt(kappa) * x * sqrt_t;
        re = w * arg.cos();
        im = w * arg.sin();
    }
};

} // namespace

Complex mm_kernel_value(const std::vector<int>& bra, const std::vector<int>& ket, double eta,
                        double x, const ModeAngles& angles, int nodes) {
    if (bra.size() != ket.size() || bra.empty())
        throw DomainError("mm_kernel_value: bra and ket need the same nonzero length");
    if (bra.size() != angles.psi.size())
        throw DomainError("mm_kernel_value: angle count does not match mode count");
    const double kappa = kappa_param(eta);
    const std::vector<double> u = angles.amplitudes();
    const int M = static_cast<int>(bra.size()) - 1;

    // Prefactor: kappa^{M+1}/M! * prod_l (-i sqrt(kappa) u_l)^{d_l} sqrt(nu_l!/mu_l!)
    // and the LO-phase factor e^{+i sum (bra_l - ket_l) psi_l}, which selects
    // the (bra, ket) element of the density matrix.
    double log_mag = (M + 1) * std::log(kappa) - log_factorial(M);
    double phase = 0.0;
    double sign = 1.0;
    int d_total = 0;
    for (std::size_t l = 0; l < bra.size(); ++l) {
        if (bra[l] < 0 || ket[l] < 0) throw DomainError("mm_kernel_value: negative occupation");
        const int mu = std::max(bra[l], ket[l]);
        const int nu = std::min(bra[l], ket[l]);
        const int d = mu - nu;
        d_total += d;
        log_mag += 0.5 * (log_factorial(nu) - log_factorial(mu)) + 0.5 * d * std::log(kappa);
        if (d > 0) {
            if (u[l] == 0.0) return Complex(0.0, 0.0);
            if (u[l] < 0.0 && d % 2) sign = -sign;
            log_mag += d * std::log(std::abs(u[l]));
        }
        phase += -0.5 * M_PI * d + (bra[l] - ket[l]) * angles.psi[l];
    }

    RadialRule rule(nodes);
    Eigen::ArrayXd re, im;
    rule.phase_rows(kappa, x, re, im);
    Eigen::ArrayXd integrand = rule.t.pow(M + 0.5 * d_total);
    Eigen::MatrixXd table;
    for (std::size_t l = 0; l < bra.size(); ++l) {
        const int nu = std::min(bra[l], ket[l]);
        const int d = std::max(bra[l], ket[l]) - nu;
        table.resize(rule.t.size(), nu + 1);
        laguerre_table(kappa * u[l] * u[l] * rule.t, d, table);
        integrand *= table.col(nu).array();
    }
    const Complex integral((re * integrand).sum(), (im * integrand).sum());
    return std::polar(sign * std::exp(log_mag), phase) * integral;
}

namespace {

ModeAngles record_angles(const HomodyneRecord& r) {
    return ModeAngles{{r.theta}, {r.psi0, r.psi1}};
}

} // namespace

Estimator kernel_mm_matrix_element(std::vector<int> bra, std::vector<int> ket, double eta,
                                   int nodes) {
    if (bra.size() != 2 || ket.size() != 2)
        throw DomainError("kernel_mm_matrix_element: record adapter covers two modes; "
                          "use mm_kernel_value for other mode counts");
    kappa_param(eta);
    Estimator est;
    char label[96];
    std::snprintf(label, sizeof label, "rho((%d,%d),(%d,%d))", bra[0], bra[1], ket[0], ket[1]);
    est.target = label;
    est.eta_min = est.eta_max = eta;
    est.eval = [bra = std::move(bra), ket = std::move(ket), eta, nodes](const HomodyneRecord& r) {
        return mm_kernel_value(bra, ket, eta, r.x, record_angles(r), nodes);
    };
    return est;
}

Estimator kernel_joint_photon(int n, int m, double eta, int nodes) {
    if (n < 0 || m < 0) throw DomainError("kernel_joint_photon: negative photon number");
    const double kappa = kappa_param(eta);
    auto rule = std::make_shared<RadialRule>(nodes);
    Estimator est;
    est.target = "p(" + std::to_string(n) + "," + std::to_string(m) + ")";
    est.eta_min = est.eta_max = eta;
    est.eval = [rule, kappa, n, m](const HomodyneRecord& r) {
        const double c = std::cos(r.theta), s = std::sin(r.theta);
        Eigen::ArrayXd re, im;
        rule->phase_rows(kappa, r.x, re, im);
        Eigen::MatrixXd tn(rule->t.size(), n + 1), tm(rule->t.size(), m + 1);
        laguerre_table(kappa * c * c * rule->t, 0, tn);
        laguerre_table(kappa * s * s * rule->t, 0, tm);
        const Eigen::ArrayXd f =
            kappa * kappa * rule->t * tn.col(n).array() * tm.col(m).array();
        return Complex((re * f).sum(), (im * f).sum());
    };
    return est;
}

Estimator kernel_total_photon(int n, double eta, int nodes) {
    if (n < 0) throw DomainError("kernel_total_photon: negative photon number");
    const double kappa = kappa_param(eta);
    auto rule = std::make_shared<RadialRule>(nodes);
    Estimator est;
    est.target = "p_tot(" + std::to_string(n) + ")";
    est.eta_min = est.eta_max = eta;
    est.eval = [rule, kappa, n](const HomodyneRecord& r) {
        Eigen::ArrayXd re, im;
        rule->phase_rows(kappa, r.x, re, im);
        Eigen::MatrixXd tab(rule->t.size(), n + 1);
        laguerre_table(kappa * rule->t, 1, tab);
        const Eigen::ArrayXd f = kappa * kappa * rule->t * tab.col(n).array();
        return Complex((re * f).sum(), (im * f).sum());
    };
    return est;
}

TotalPhotonMoments total_photon_moments(const DataSet& data, int n_blocks, int threads) {
    const double kappa = kappa_param(data.eta);
    Estimator first = make_phase_poly_estimator(
        "n_tot", {{{0, {Complex(2.0 / kappa - 2.0), Complex(0.0), Complex(4.0)}}}}, data.eta);
    Estimator second = make_phase_poly_estimator(
        "n_tot^2",
        {{{0,
           {Complex(6.0 / (kappa * kappa) - 10.0 / kappa + 4.0), Complex(0.0),
            Complex(24.0 / kappa - 20.0), Complex(0.0), Complex(8.0)}}}},
        data.eta);
    return TotalPhotonMoments{average(first, data, n_blocks, threads),
                              average(second, data, n_blocks, threads)};
}

namespace {

struct BlockStats {
    Eigen::MatrixXcd sum;
    Eigen::MatrixXd sum_abs2;
    std::size_t count = 0;
};

// Merge per-block matrix sums into mean / std-error / imag fields.
template <typename Assign>
std::size_t merge_blocks(const std::vector<BlockStats>& blocks, Eigen::Index rows,
                         Eigen::Index cols, Assign&& assign) {
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(rows, cols);
    Eigen::MatrixXd total_abs2 = Eigen::MatrixXd::Zero(rows, cols);
    std::size_t n = 0;
    for (const BlockStats& b : blocks) {
        if (b.count == 0) continue;
        total += b.sum;
        total_abs2 += b.sum_abs2;
        n += b.count;
    }
    const double dn = static_cast<double>(n);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Complex mean = total(r, c) / dn;
            double err = 0.0;
            if (n > 1) {
                const double ss = std::max(0.0, total_abs2(r, c) - dn * std::norm(mean));
                err = std::sqrt(ss / (dn * (dn - 1.0)));
            }
            assign(r, c, mean, err);
        }
    return n;
}

} // namespace

JointPmf reconstruct_joint_pmf(const DataSet& data, int cutoff, double eta, int threads,
                               int nodes) {
    if (data.empty()) throw EmptyData("reconstruct_joint_pmf: data set is empty");
    if (!data.multimode())
        throw DomainError("reconstruct_joint_pmf: needs two-mode records with mixing angles");
    if (cutoff < 1) throw DomainError("reconstruct_joint_pmf: cutoff must be positive");
    const double kappa = kappa_param(eta);
    const RadialRule rule(nodes);

    const std::size_t N = data.size();
    const int n_blocks = static_cast<int>(std::min<std::size_t>(20, N));
    const std::size_t bsize = (N + n_blocks - 1) / n_blocks;
    std::vector<BlockStats> blocks(n_blocks);
    for (BlockStats& b : blocks) {
        b.sum = Eigen::MatrixXcd::Zero(cutoff, cutoff);
        b.sum_abs2 = Eigen::MatrixXd::Zero(cutoff, cutoff);
    }

    parallel_for(n_blocks, static_cast<unsigned>(threads), [&](std::size_t bi) {
        BlockStats& blk = blocks[bi];
        const std::size_t lo = std::min(N, bi * bsize);
        const std::size_t hi = std::min(N, lo + bsize);
        Eigen::MatrixXd tn(rule.t.size(), cutoff), tm(rule.t.size(), cutoff);
        Eigen::MatrixXd wn(rule.t.size(), cutoff);
        Eigen::ArrayXd re, im;
        Eigen::MatrixXd p_re(cutoff, cutoff), p_im(cutoff, cutoff);
        for (std::size_t i = lo; i < hi; ++i) {
            const double c = std::cos(data.theta[i]), s = std::sin(data.theta[i]);
            rule.phase_rows(kappa, data.x[i], re, im);
            laguerre_table(kappa * c * c * rule.t, 0, tn);
            laguerre_table(kappa * s * s * rule.t, 0, tm);
            const Eigen::ArrayXd base = kappa * kappa * rule.t;
            wn = (re * base).matrix().asDiagonal() * tm;
            p_re.noalias() = tn.transpose() * wn;
            wn = (im * base).matrix().asDiagonal() * tm;
            p_im.noalias() = tn.transpose() * wn;
            blk.sum.real() += p_re;
            blk.sum.imag() += p_im;
            blk.sum_abs2 += p_re.cwiseAbs2() + p_im.cwiseAbs2();
            ++blk.count;
        }
    });

    JointPmf out;
    out.p.resize(cutoff, cutoff);
    out.std_error.resize(cutoff, cutoff);
    out.imag.resize(cutoff, cutoff);
    out.n = merge_blocks(blocks, cutoff, cutoff, [&](auto r, auto c, Complex mean, double err) {
        out.p(r, c) = mean.real();
        out.imag(r, c) = mean.imag();
        out.std_error(r, c) = err;
    });
    return out;
}

TotalPmf reconstruct_total_pmf(const DataSet& data, int cutoff, double eta, int threads,
                               int nodes) {
    if (data.empty()) throw EmptyData("reconstruct_total_pmf: data set is empty");
    if (cutoff < 1) throw DomainError("reconstruct_total_pmf: cutoff must be positive");
    const double kappa = kappa_param(eta);
    const RadialRule rule(nodes);

    const std::size_t N = data.size();
    const int n_blocks = static_cast<int>(std::min<std::size_t>(20, N));
    const std::size_t bsize = (N + n_blocks - 1) / n_blocks;
    std::vector<BlockStats> blocks(n_blocks);
    for (BlockStats& b : blocks) {
        b.sum = Eigen::MatrixXcd::Zero(cutoff, 1);
        b.sum_abs2 = Eigen::MatrixXd::Zero(cutoff, 1);
    }

    Eigen::MatrixXd l1(rule.t.size(), cutoff);
    laguerre_table(kappa * rule.t, 1, l1);
    const Eigen::ArrayXd base = kappa * kappa * rule.t;

    parallel_for(n_blocks, static_cast<unsigned>(threads), [&](std::size_t bi) {
        BlockStats& blk = blocks[bi];
        const std::size_t lo = std::min(N, bi * bsize);
        const std::size_t hi = std::min(N, lo + bsize);
        Eigen::ArrayXd re, im;
        Eigen::VectorXd v_re(cutoff), v_im(cutoff);
        for (std::size_t i = lo; i < hi; ++i) {
            rule.phase_rows(kappa, data.x[i], re, im);
            v_re.noalias() = l1.transpose() * (re * base).matrix();
            v_im.noalias() = l1.transpose() * (im * base).matrix();
            blk.sum.real() += v_re;
            blk.sum.imag() += v_im;
            blk.sum_abs2 += v_re.cwiseAbs2() + v_im.cwiseAbs2();
            ++blk.count;
        }
    });

    TotalPmf out;
    out.p.resize(cutoff);
    out.std_error.resize(cutoff);
    out.imag.resize(cutoff);
    out.n = merge_blocks(blocks, cutoff, 1, [&](auto r, auto, Complex mean, double err) {
        out.p[r] = mean.real();
        out.imag[r] = mean.imag();
        out.std_error[r] = err;
    });
    return out;
}

void save_joint_pmf_csv(const JointPmf& pmf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "n,m,p,stderr\n";
    char line[128];
    for (Eigen::Index n = 0; n < pmf.p.rows(); ++n)
        for (Eigen::Index m = 0; m < pmf.p.cols(); ++m) {
            std::snprintf(line, sizeof line, "%lld,%lld,%.17g,%.17g\n",
                          static_cast<long long>(n), static_cast<long long>(m), pmf.p(n, m),
                          pmf.std_error(n, m));
            out << line;
        }
    if (!out) throw IoError("failed writing: " + path);
}

} // namespace qtomo
