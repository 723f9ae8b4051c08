#include "qtomo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

BlockAccumulator::BlockAccumulator(std::size_t n_records, int n_blocks) : n_(n_records) {
    if (n_records == 0) throw EmptyData("BlockAccumulator: no records");
    n_blocks_ = std::max(1, std::min<int>(n_blocks, static_cast<int>(n_records)));
    sum_.assign(n_blocks_, Complex(0.0, 0.0));
    sum_abs2_.assign(n_blocks_, 0.0);
    count_.assign(n_blocks_, 0);
}

std::size_t BlockAccumulator::block_begin(int b) const {
    const std::size_t size = (n_ + n_blocks_ - 1) / n_blocks_;
    return std::min(n_, b * size);
}

std::size_t BlockAccumulator::block_end(int b) const { return block_begin(b + 1); }

void BlockAccumulator::add(std::size_t index, Complex value) {
    const std::size_t size = (n_ + n_blocks_ - 1) / n_blocks_;
    const int b = std::min<int>(n_blocks_ - 1, static_cast<int>(index / size));
    sum_[b] += value;
    sum_abs2_[b] += std::norm(value);
    ++count_[b];
}

AverageResult BlockAccumulator::finish() const {
    AverageResult r;
    Complex total(0.0, 0.0);
    double total_abs2 = 0.0;
    std::size_t n = 0;
    for (int b = 0; b < n_blocks_; ++b) {
        if (count_[b] == 0) continue;
        total += sum_[b];
        total_abs2 += sum_abs2_[b];
        n += count_[b];
        r.block_means.push_back(sum_[b] / static_cast<double>(count_[b]));
    }
    if (n == 0) throw EmptyData("BlockAccumulator: no values were added");
    r.n = n;
    r.blocks = static_cast<int>(r.block_means.size());
    r.mean = total / static_cast<double>(n);
    if (n > 1) {
        const double ss = std::max(0.0, total_abs2 - static_cast<double>(n) * std::norm(r.mean));
        r.std_error = std::sqrt(ss / (static_cast<double>(n) * (static_cast<double>(n) - 1.0)));
    }
    return r;
}

AverageResult average_values(const std::vector<Complex>& values, int n_blocks) {
    if (values.empty()) throw EmptyData("average_values: no values");
    BlockAccumulator acc(values.size(), n_blocks);
    for (std::size_t i = 0; i < values.size(); ++i) acc.add(i, values[i]);
    return acc.finish();
}

double gaussianity_chi2(const AverageResult& r) {
    if (r.n < 2 || r.std_error == 0.0) return 0.0;
    const double var1 = r.std_error * r.std_error * static_cast<double>(r.n);
    const double per_block = static_cast<double>(r.n) / r.blocks;
    double chi2 = 0.0;
    for (const Complex& m : r.block_means) chi2 += per_block * std::norm(m - r.mean) / var1;
    return chi2;
}

namespace {

constexpr double kEtaTol = 1e-12;

// Scaled oscillator solutions used by the factorized kernels: u[j] is the
// regular wavefunction times e^{+x^2}, v[j] the irregular solution times
// e^{-x^2}; both obey the same two-term recurrence.
void uv_rows(int len, double x, std::vector<double>& u, std::vector<double>& v) {
    u.resize(len);
    v.resize(len);
    const double c0 = std::pow(2.0 / M_PI, 0.25);
    const double cv = std::pow(M_PI / 2.0, 0.25);
    const double xp = std::sqrt(2.0) * x;
    const double dw = dawson(xp);
    u[0] = c0;
    v[0] = std::sqrt(2.0) * cv * dw;
    if (len > 1) {
        u[1] = 2.0 * c0 * x;
        v[1] = cv * (2.0 * xp * dw - 1.0);
    }
    for (int j = 1; j + 1 < len; ++j) {
        const double a = 2.0 * x / std::sqrt(j + 1.0);
        const double b = std::sqrt(j / (j + 1.0));
        u[j + 1] = a * u[j] - b * u[j - 1];
        v[j + 1] = a * v[j] - b * v[j - 1];
    }
}

double factorized_value(const std::vector<double>& u, const std::vector<double>& v, int n, int d,
                        double x) {
    return 4.0 * x * u[n] * v[n + d] - 2.0 * std::sqrt(n + 1.0) * u[n + 1] * v[n + d] -
           2.0 * std::sqrt(n + d + 1.0) * u[n] * v[n + d + 1];
}

// Quadrature data for the numeric matrix-element kernels at one efficiency:
// a single node set shared by every (n,d), plus per-element coefficient rows
// so a record only needs one cos/sin table.
struct NumericKernelTable {
    std::vector<double> k;               // nodes
    std::vector<std::vector<double>> c;  // coefficient row per (n,d) pair id
    std::vector<int> pair_d;             // d of each pair id

    static double beta(double eta) { return (2.0 * eta - 1.0) / (2.0 * eta); }

    NumericKernelTable(int cutoff, double eta) {
        const double b = beta(eta);
        const double k_max = std::sqrt(27.63 / b);
        QuadratureRule rule = gauss_legendre(200, 0.0, k_max);
        k = rule.x;
        for (int d = 0; d < cutoff; ++d) {
            for (int n = 0; n + d < cutoff; ++n) {
                std::vector<double> row(k.size());
                const double norm =
                    std::exp(0.5 * (log_factorial(n) - log_factorial(n + d)));
                for (std::size_t j = 0; j < k.size(); ++j) {
                    const double kj = k[j];
                    row[j] = 2.0 * rule.w[j] * std::pow(kj, d + 1) *
                             std::exp(-b * kj * kj) * laguerre(n, d, kj * kj) * norm;
                }
                c.push_back(std::move(row));
                pair_d.push_back(d);
            }
        }
    }
};

// i^d folded with the sign of the half-line trig reduction.
double trig_sign(int d) { return (d % 4 == 0 || d % 4 == 1) ? 1.0 : -1.0; }

Complex numeric_kernel_eval(const std::vector<double>& k, const std::vector<double>& c, int d,
                            double x, double phi) {
    double t = 0.0;
    if (d % 2 == 0)
        for (std::size_t j = 0; j < k.size(); ++j) t += c[j] * std::cos(2.0 * k[j] * x);
    else
        for (std::size_t j = 0; j < k.size(); ++j) t += c[j] * std::sin(2.0 * k[j] * x);
    return std::polar(trig_sign(d) * t, d * phi);
}

std::function<Complex(const HomodyneRecord&)> phase_poly_eval(PhasePolyPayload p) {
    return [p = std::move(p)](const HomodyneRecord& rec) {
        Complex acc(0.0, 0.0);
        for (const PhasePolyTerm& t : p.terms) {
            Complex pv(0.0, 0.0);
            for (std::size_t k = t.coeffs.size(); k-- > 0;) pv = pv * rec.x + t.coeffs[k];
            acc += std::polar(1.0, t.harmonic * rec.phi) * pv;
        }
        return acc;
    };
}

// Monomial coefficients of the physicists' Hermite polynomial H_q.
std::vector<double> hermite_coeffs(int q) {
    std::vector<double> hm{1.0};
    if (q == 0) return hm;
    std::vector<double> h{0.0, 2.0};
    for (int k = 1; k < q; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (std::size_t j = 0; j < h.size(); ++j) {
            next[j + 1] += 2.0 * h[j];
            if (j < hm.size()) next[j] -= 2.0 * k * hm[j];
        }
        hm = std::move(h);
        h = std::move(next);
    }
    return h;
}

void check_kernel_eta(double eta) {
    if (eta <= 0.5 || eta > 1.0)
        throw EtaOutOfDomain("matrix-element kernels are bounded only for 1/2 < eta <= 1");
}

} // namespace

Estimator kernel_matrix_element(int n, int d, double eta) {
    if (n < 0 || d < 0) throw DomainError("kernel_matrix_element: need n >= 0 and d >= 0");
    check_kernel_eta(eta);
    const double b = NumericKernelTable::beta(eta);
    const double k_max = std::sqrt(27.63 / b);
    QuadratureRule rule = gauss_legendre(200, 0.0, k_max);
    auto coefs = std::make_shared<std::vector<double>>(rule.x.size());
    const double norm = std::exp(0.5 * (log_factorial(n) - log_factorial(n + d)));
    double bound = 0.0;
    for (std::size_t j = 0; j < rule.x.size(); ++j) {
        const double kj = rule.x[j];
        (*coefs)[j] = 2.0 * rule.w[j] * std::pow(kj, d + 1) * std::exp(-b * kj * kj) *
                      laguerre(n, d, kj * kj) * norm;
        bound += std::abs((*coefs)[j]);
    }
    auto nodes = std::make_shared<std::vector<double>>(std::move(rule.x));
    Estimator est;
    est.target = "rho(" + std::to_string(n + d) + "," + std::to_string(n) + ")";
    est.eta_min = est.eta_max = eta;
    est.bound = bound;
    est.payload = MatrixElementPayload{n, d, eta};
    est.eval = [nodes, coefs, d](const HomodyneRecord& r) {
        return numeric_kernel_eval(*nodes, *coefs, d, r.x, r.phi);
    };
    return est;
}

Estimator kernel_factorized(int n, int d) {
    if (n < 0 || d < 0) throw DomainError("kernel_factorized: need n >= 0 and d >= 0");
    Estimator est;
    est.target = "rho(" + std::to_string(n + d) + "," + std::to_string(n) + ")";
    est.eta_min = est.eta_max = 1.0;
    est.payload = FactorizedPayload{n, d};
    est.eval = [n, d](const HomodyneRecord& r) {
        thread_local std::vector<double> u, v;
        uv_rows(n + d + 2, r.x, u, v);
        return std::polar(factorized_value(u, v, n, d, r.x), d * r.phi);
    };
    return est;
}

Observable Observable::annihilation() { return Observable{Kind::a, 0, 0, 0.0, {0.0, 0.0}}; }
Observable Observable::annihilation_sq() { return Observable{Kind::a2, 0, 0, 0.0, {0.0, 0.0}}; }
Observable Observable::photon_number() { return Observable{Kind::n, 0, 0, 0.0, {0.0, 0.0}}; }
Observable Observable::photon_number_sq() { return Observable{Kind::n2, 0, 0, 0.0, {0.0, 0.0}}; }
Observable Observable::normal_moment(int n, int m) {
    if (n < 0 || m < 0) throw DomainError("normal_moment: orders must be nonnegative");
    return Observable{Kind::normal_moment, n, m, 0.0, {0.0, 0.0}};
}
Observable Observable::wigner_point(double s, Complex alpha) {
    return Observable{Kind::wigner_point, 0, 0, s, alpha};
}

Estimator make_phase_poly_estimator(std::string target, PhasePolyPayload payload, double eta) {
    if (eta <= 0.0 || eta > 1.0) throw EtaOutOfDomain("estimator efficiency must be in (0,1]");
    Estimator est;
    est.target = std::move(target);
    est.eta_min = est.eta_max = eta;
    est.eval = phase_poly_eval(payload);
    est.payload = std::move(payload);
    return est;
}

Estimator kernel_observable(const Observable& o, double eta) {
    if (eta <= 0.0 || eta > 1.0) throw EtaOutOfDomain("kernel_observable: eta must be in (0,1]");
    switch (o.kind) {
    case Observable::Kind::a:
        return make_phase_poly_estimator("a", {{{1, {Complex(0.0), Complex(2.0)}}}}, eta);
    case Observable::Kind::a2:
        return make_phase_poly_estimator(
            "a^2", {{{2, {Complex(-1.0 / eta), Complex(0.0), Complex(4.0)}}}}, eta);
    case Observable::Kind::n:
        return make_phase_poly_estimator(
            "n", {{{0, {Complex(-0.5 / eta), Complex(0.0), Complex(2.0)}}}}, eta);
    case Observable::Kind::n2:
        return make_phase_poly_estimator(
            "n^2",
            {{{0,
               {Complex((1.0 - eta) / (2.0 * eta * eta)), Complex(0.0),
                Complex(-(4.0 - 2.0 * eta) / eta), Complex(0.0), Complex(8.0 / 3.0)}}}},
            eta);
    case Observable::Kind::normal_moment: {
        const int q = o.ord_n + o.ord_m;
        const double s = std::sqrt(2.0 * eta);
        std::vector<double> h = hermite_coeffs(q);
        double binom = 1.0;
        for (int k = 0; k < o.ord_n; ++k) binom = binom * (q - k) / (k + 1);
        PhasePolyTerm term;
        term.harmonic = o.ord_m - o.ord_n;
        term.coeffs.resize(q + 1, Complex(0.0, 0.0));
        for (int k = q % 2; k <= q; k += 2)
            term.coeffs[k] = h[k] * std::pow(s, k - q) / binom;
        char label[64];
        std::snprintf(label, sizeof label, "adag^%d a^%d", o.ord_n, o.ord_m);
        return make_phase_poly_estimator(label, {{std::move(term)}}, eta);
    }
    case Observable::Kind::wigner_point: {
        const double u = (1.0 - o.s) - 1.0 / eta;
        if (u <= 0.0)
            throw SOutOfDomain("wigner_point: requires s < 1 - 1/eta");
        const double scale = 2.0 * std::sqrt(2.0 / u);
        const Complex alpha = o.alpha;
        Estimator est;
        char label[96];
        std::snprintf(label, sizeof label, "W_s(s=%g) at (%g,%g)", o.s, alpha.real(),
                      alpha.imag());
        est.target = label;
        est.eta_min = est.eta_max = eta;
        est.bound = 2.0 / (M_PI * u) * 2.0; // |1 - b D(b/2)| <= ~2 on the real line
        est.payload = WignerPayload{o.s, alpha, eta};
        est.eval = [u, scale, alpha](const HomodyneRecord& r) {
            const double xc = r.x - (alpha * std::polar(1.0, -r.phi)).real();
            const double b = scale * xc;
            return Complex(2.0 / (M_PI * u) * (1.0 - b * dawson(0.5 * b)), 0.0);
        };
        return est;
    }
    }
    throw DomainError("kernel_observable: unknown observable");
}

Complex ParityEstimator::eval(Complex alpha) const {
    const double a2 = std::norm(alpha);
    const double mag = 4.0 * std::exp(0.5 * (log_factorial(n) - log_factorial(n + d)) - 2.0 * a2) *
                       laguerre(n, d, 4.0 * a2);
    Complex z = ((n + d) % 2 ? -mag : mag);
    for (int j = 0; j < d; ++j) z *= 2.0 * alpha;
    return z;
}

ParityEstimator kernel_displaced_parity(int n, int d) {
    if (n < 0 || d < 0) throw DomainError("kernel_displaced_parity: need n >= 0 and d >= 0");
    return ParityEstimator{n, d};
}

AverageResult average(const Estimator& est, const DataSet& data, int n_blocks, int threads) {
    if (data.empty()) throw EmptyData("average: data set is empty");
    if (data.eta < est.eta_min - kEtaTol || data.eta > est.eta_max + kEtaTol)
        throw EtaOutOfDomain("average: data efficiency outside the kernel's domain");
    BlockAccumulator acc(data.size(), n_blocks);
    parallel_for(acc.blocks(), static_cast<unsigned>(threads), [&](std::size_t b) {
        const std::size_t lo = acc.block_begin(static_cast<int>(b));
        const std::size_t hi = acc.block_end(static_cast<int>(b));
        for (std::size_t i = lo; i < hi; ++i) acc.add(i, est.eval(data.record(i)));
    });
    return acc.finish();
}

AverageResult average_parity(const ParityEstimator& est, const std::vector<ParityRecord>& records,
                             double radius, int n_blocks) {
    if (records.empty()) throw EmptyData("average_parity: no records");
    const double w = radius * radius;
    BlockAccumulator acc(records.size(), n_blocks);
    for (std::size_t i = 0; i < records.size(); ++i)
        acc.add(i, w * static_cast<double>(records[i].parity) * est.eval(records[i].alpha));
    return acc.finish();
}

struct KernelBank::Table : NumericKernelTable {
    using NumericKernelTable::NumericKernelTable;
};

KernelBank::KernelBank(int cutoff, double eta) : cutoff_(cutoff), eta_(eta) {
    if (cutoff < 1) throw DomainError("KernelBank: cutoff must be positive");
    check_kernel_eta(eta);
    ideal_ = eta >= 1.0 - kEtaTol;
    if (!ideal_) table_ = std::make_shared<const Table>(cutoff, eta);
}

void KernelBank::eval(double x, double phi, Eigen::MatrixXcd& out) const {
    const int M = cutoff_;
    out.resize(M, M);
    thread_local std::vector<double> u, v, cos_t, sin_t;
    thread_local std::vector<Complex> phase;
    phase.resize(M);
    phase[0] = Complex(1.0, 0.0);
    const Complex e = std::polar(1.0, phi);
    for (int d = 1; d < M; ++d) phase[d] = phase[d - 1] * e;
    if (ideal_) {
        uv_rows(M + 1, x, u, v);
        for (int d = 0; d < M; ++d)
            for (int n = 0; n + d < M; ++n) {
                const Complex val = phase[d] * factorized_value(u, v, n, d, x);
                out(n + d, n) = val;
                out(n, n + d) = std::conj(val);
            }
    } else {
        const std::size_t nk = table_->k.size();
        cos_t.resize(nk);
        sin_t.resize(nk);
        for (std::size_t j = 0; j < nk; ++j) {
            cos_t[j] = std::cos(2.0 * table_->k[j] * x);
            sin_t[j] = std::sin(2.0 * table_->k[j] * x);
        }
        std::size_t pid = 0;
        for (int d = 0; d < M; ++d)
            for (int n = 0; n + d < M; ++n, ++pid) {
                const std::vector<double>& row = table_->c[pid];
                const std::vector<double>& trig = d % 2 == 0 ? cos_t : sin_t;
                double t = 0.0;
                for (std::size_t j = 0; j < nk; ++j) t += row[j] * trig[j];
                const Complex val = phase[d] * (trig_sign(d) * t);
                out(n + d, n) = val;
                out(n, n + d) = std::conj(val);
            }
    }
}

void KernelBank::eval_diagonal(double x, Eigen::VectorXd& out) const {
    const int M = cutoff_;
    out.resize(M);
    thread_local std::vector<double> u, v, cos_t;
    if (ideal_) {
        uv_rows(M + 1, x, u, v);
        for (int n = 0; n < M; ++n) out(n) = factorized_value(u, v, n, 0, x);
    } else {
        const std::size_t nk = table_->k.size();
        cos_t.resize(nk);
        for (std::size_t j = 0; j < nk; ++j) cos_t[j] = std::cos(2.0 * table_->k[j] * x);
        // d = 0 occupies the first `cutoff` pair ids.
        for (int n = 0; n < M; ++n) {
            const std::vector<double>& row = table_->c[n];
            double t = 0.0;
            for (std::size_t j = 0; j < nk; ++j) t += row[j] * cos_t[j];
            out(n) = t;
        }
    }
}

Reconstruction reconstruct_matrix(const DataSet& data, int cutoff, double eta, int threads) {
    if (data.empty()) throw EmptyData("reconstruct_matrix: data set is empty");
    if (cutoff < 1) throw DomainError("reconstruct_matrix: cutoff must be positive");
    check_kernel_eta(eta);
    const int M = cutoff;
    const std::size_t n_pairs = static_cast<std::size_t>(M) * (M + 1) / 2;
    std::vector<BlockAccumulator> acc(n_pairs, BlockAccumulator(data.size(), 20));
    // Pair id layout follows NumericKernelTable: d-major, then n.
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(n_pairs);
    for (int d = 0; d < M; ++d)
        for (int n = 0; n + d < M; ++n) pairs.emplace_back(n, d);

    const bool ideal = eta >= 1.0 - kEtaTol;
    std::unique_ptr<NumericKernelTable> table;
    if (!ideal) table = std::make_unique<NumericKernelTable>(M, eta);

    const int n_blocks = acc[0].blocks();
    parallel_for(n_blocks, static_cast<unsigned>(threads), [&](std::size_t blk) {
        const std::size_t lo = acc[0].block_begin(static_cast<int>(blk));
        const std::size_t hi = acc[0].block_end(static_cast<int>(blk));
        std::vector<double> u, v, cos_t, sin_t;
        std::vector<Complex> phase(M);
        for (std::size_t i = lo; i < hi; ++i) {
            const double x = data.x[i];
            const double phi = data.phi[i];
            phase[0] = Complex(1.0, 0.0);
            const Complex e = std::polar(1.0, phi);
            for (int d = 1; d < M; ++d) phase[d] = phase[d - 1] * e;
            if (ideal) {
                uv_rows(M + 1, x, u, v);
                std::size_t pid = 0;
                for (int d = 0; d < M; ++d)
                    for (int n = 0; n + d < M; ++n, ++pid)
                        acc[pid].add(i, phase[d] * factorized_value(u, v, n, d, x));
            } else {
                const std::size_t nk = table->k.size();
                cos_t.resize(nk);
                sin_t.resize(nk);
                for (std::size_t j = 0; j < nk; ++j) {
                    cos_t[j] = std::cos(2.0 * table->k[j] * x);
                    sin_t[j] = std::sin(2.0 * table->k[j] * x);
                }
                for (std::size_t pid = 0; pid < n_pairs; ++pid) {
                    const int d = table->pair_d[pid];
                    const std::vector<double>& row = table->c[pid];
                    const std::vector<double>& trig = d % 2 == 0 ? cos_t : sin_t;
                    double t = 0.0;
                    for (std::size_t j = 0; j < nk; ++j) t += row[j] * trig[j];
                    acc[pid].add(i, phase[d] * (trig_sign(d) * t));
                }
            }
        }
    });

    Reconstruction rec;
    rec.rho.modes = 1;
    rec.rho.dim = M;
    rec.rho.entries = Eigen::MatrixXcd::Zero(M, M);
    rec.std_error = Eigen::MatrixXd::Zero(M, M);
    double max_err = 0.0;
    for (std::size_t pid = 0; pid < n_pairs; ++pid) {
        const auto [n, d] = pairs[pid];
        const AverageResult r = acc[pid].finish();
        // The e^{+id phi} kernel estimates the (n+d, n) element.
        const Complex v = d == 0 ? Complex(r.mean.real(), 0.0) : r.mean;
        rec.rho.entries(n + d, n) = v;
        rec.rho.entries(n, n + d) = std::conj(v);
        rec.std_error(n, n + d) = r.std_error;
        rec.std_error(n + d, n) = r.std_error;
        max_err = std::max(max_err, r.std_error);
    }
    rec.rho.captured = rec.rho.entries.trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rec.rho.entries,
                                                       Eigen::EigenvaluesOnly);
    rec.rho.physical = es.eigenvalues().minCoeff() >= -3.0 * max_err;
    return rec;
}

void to_json(nlohmann::json& j, const Reconstruction& rec) {
    nlohmann::json err = nlohmann::json::array();
    for (Eigen::Index r = 0; r < rec.std_error.rows(); ++r)
        for (Eigen::Index c = 0; c < rec.std_error.cols(); ++c)
            err.push_back(rec.std_error(r, c));
    j = nlohmann::json{{"schema", "qtomo-reconstruction-v1"},
                       {"rho", rec.rho},
                       {"std_error", std::move(err)}};
}

void from_json(const nlohmann::json& j, Reconstruction& rec) {
    j.at("rho").get_to(rec.rho);
    const auto& err = j.at("std_error");
    const Eigen::Index side = rec.rho.entries.rows();
    if (static_cast<Eigen::Index>(err.size()) != side * side)
        throw ConfigError("reconstruction std_error size mismatch");
    rec.std_error.resize(side, side);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < side; ++r)
        for (Eigen::Index c = 0; c < side; ++c, ++i) rec.std_error(r, c) = err.at(i).get<double>();
}

void save_reconstruction_csv(const Reconstruction& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "n,d,re,im,stderr\n";
    char line[160];
    const int M = rec.rho.dim;
    for (int d = 0; d < M; ++d)
        for (int n = 0; n + d < M; ++n) {
            const Complex v = rec.rho.entries(n, n + d);
            std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g\n", n, d, v.real(),
                          v.imag(), rec.std_error(n, n + d));
            out << line;
        }
    if (!out) throw IoError("failed writing: " + path);
}

} // namespace qtomo
