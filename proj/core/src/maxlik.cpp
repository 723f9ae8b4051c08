#include "qtomo/maxlik.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/estimators.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

namespace {

// The default GSL handler aborts the process; the minimizer must instead
// report soft failures (e.g. a stalled simplex) through status codes.
const bool kGslHandlerOff = [] {
    gsl_set_error_handler_off();
    return true;
}();

struct SimplexDeleter {
    void operator()(gsl_multimin_fminimizer* p) const { gsl_multimin_fminimizer_free(p); }
};
struct GslVectorDeleter {
    void operator()(gsl_vector* p) const { gsl_vector_free(p); }
};

struct SimplexResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace; // best-so-far objective every 100 iterations
};

struct ObjectiveCtx {
    const std::function<double(const Eigen::VectorXd&)>* fn;
    Eigen::VectorXd buf;
};

double objective_trampoline(const gsl_vector* v, void* raw) {
    auto* ctx = static_cast<ObjectiveCtx*>(raw);
    for (std::size_t i = 0; i < v->size; ++i) ctx->buf[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i);
    return (*ctx->fn)(ctx->buf);
}

// Downhill-simplex minimization with two stopping rules: the simplex shrinks
// below size_tol, or the best value improves by less than tol (relative)
// over a progress window. The window scales with the parameter count: a
// Nelder-Mead step replaces one vertex, so the best vertex can stay put for
// O(P) iterations even far from the optimum. A stalled simplex (no further
// progress possible) also counts as converged.
SimplexResult run_simplex(const std::function<double(const Eigen::VectorXd&)>& fn,
                          const Eigen::VectorXd& start, const Eigen::VectorXd& steps,
                          int max_iter, double tol, double size_tol) {
    const std::size_t P = static_cast<std::size_t>(start.size());
    ObjectiveCtx ctx{&fn, Eigen::VectorXd(start.size())};
    gsl_multimin_function F;
    F.n = P;
    F.f = &objective_trampoline;
    F.params = &ctx;

    std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(P));
    std::unique_ptr<gsl_vector, GslVectorDeleter> ss(gsl_vector_alloc(P));
    for (std::size_t i = 0; i < P; ++i) {
        gsl_vector_set(x.get(), i, start[static_cast<Eigen::Index>(i)]);
        gsl_vector_set(ss.get(), i, std::max(steps[static_cast<Eigen::Index>(i)], 1e-3));
    }
    std::unique_ptr<gsl_multimin_fminimizer, SimplexDeleter> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, P));
    gsl_multimin_fminimizer_set(s.get(), &F, x.get(), ss.get());

    SimplexResult out;
    double window_ref = s->fval;
    const int window = std::max(100, 20 * static_cast<int>(P));
    int iter = 0;
    while (iter < max_iter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(s.get()) != 0) {
            out.converged = true; // simplex collapsed: no further progress possible
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol) ==
            GSL_SUCCESS) {
            out.converged = true;
            break;
        }
        if (iter % window == 0) {
            out.trace.push_back(s->fval);
            const double improvement = window_ref - s->fval;
            if (improvement < tol * (1.0 + std::abs(s->fval))) {
                out.converged = true;
                break;
            }
            window_ref = s->fval;
        }
    }
    out.iterations = iter;
    out.f = s->fval;
    out.x.resize(start.size());
    for (std::size_t i = 0; i < P; ++i)
        out.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i);
    return out;
}

// Kraus amplitudes of the photon-loss channel: B(m, j) is the amplitude for
// losing j of m photons at transmissivity eta.
Eigen::MatrixXd loss_amplitudes(int dim, double eta) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
    const double lq = std::log(eta);
    if (eta >= 1.0) {
        for (int m = 0; m < dim; ++m) B(m, 0) = 1.0;
        return B;
    }
    const double lp = std::log1p(-eta);
    for (int m = 0; m < dim; ++m) {
        for (int j = 0; j <= m; ++j) {
            const double lc =
                std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
            B(m, j) = std::exp(0.5 * (lc + j * lp + (m - j) * lq));
        }
    }
    return B;
}

// Fill the packed POVM element for one record. With u_m = psi_m(sqrt(eta) x)
// the element is H(n, m) = sqrt(eta) S(n, m) e^{i (n-m) phi}, where S sums
// the loss amplitudes over the number of lost photons.
void povm_row_into(double x, double phi, double eta, const Eigen::MatrixXd& B,
                   Eigen::VectorXd& u, Eigen::MatrixXd& S, Eigen::VectorXd& row) {
    const int M = static_cast<int>(B.rows());
    const double rt_eta = std::sqrt(eta);
    for (int m = 0; m < M; ++m) u[m] = oscillator_psi(m, rt_eta * x);
    for (int n = 0; n < M; ++n)
        for (int m = n; m < M; ++m) {
            double acc = 0.0;
            for (int j = 0; j <= n; ++j) acc += B(n, j) * B(m, j) * u[n - j] * u[m - j];
            S(n, m) = rt_eta * acc;
        }
    for (int i = 0; i < M; ++i) row[i] = S(i, i);
    Eigen::Index idx = M;
    const double rt2 = std::sqrt(2.0);
    for (int n = 0; n < M; ++n)
        for (int m = n + 1; m < M; ++m) {
            const double ang = (n - m) * phi;
            row[idx++] = rt2 * S(n, m) * std::cos(ang);
            row[idx++] = rt2 * S(n, m) * std::sin(ang);
        }
}

// Nearest density matrix: Hermitize, clamp negative eigenvalues, renormalize.
Eigen::MatrixXcd project_physical(const Eigen::MatrixXcd& m) {
    const Eigen::Index M = m.rows();
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (!(tr > 0.0)) return Eigen::MatrixXcd::Identity(M, M) / static_cast<double>(M);
    ev /= tr;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Lower-triangular T with real diagonal and rho = T^dag T: Cholesky of the
// index-reversed matrix (if J rho J = L L^dag with L lower, then T = (J L J)^dag
// is lower and T^dag T = rho). A ridge keeps the factorization alive when
// rho has zero eigenvalues.
Eigen::MatrixXcd lower_factor(const Eigen::MatrixXcd& rho) {
    const Eigen::Index M = rho.rows();
    for (double ridge : {1e-10, 1e-6, 1e-2}) {
        Eigen::MatrixXcd work = rho + ridge * Eigen::MatrixXcd::Identity(M, M);
        work /= work.trace().real();
        const Eigen::MatrixXcd flip = work.reverse();
        Eigen::LLT<Eigen::MatrixXcd> llt(flip);
        if (llt.info() != Eigen::Success) continue;
        const Eigen::MatrixXcd L = llt.matrixL();
        const Eigen::MatrixXcd upper = L.reverse();
        return upper.adjoint();
    }
    return Eigen::MatrixXcd::Identity(M, M) * std::sqrt(1.0 / static_cast<double>(M));
}

Eigen::VectorXd params_from_factor(const Eigen::MatrixXcd& T) {
    const Eigen::Index M = T.rows();
    Eigen::VectorXd p(M * M);
    for (Eigen::Index i = 0; i < M; ++i) p[i] = T(i, i).real();
    Eigen::Index idx = M;
    for (Eigen::Index n = 0; n < M; ++n)
        for (Eigen::Index m = n + 1; m < M; ++m) {
            p[idx++] = T(m, n).real();
            p[idx++] = T(m, n).imag();
        }
    return p;
}

void factor_from_params(const Eigen::VectorXd& p, Eigen::MatrixXcd& T) {
    const Eigen::Index M = T.rows();
    T.setZero();
    for (Eigen::Index i = 0; i < M; ++i) T(i, i) = p[i];
    Eigen::Index idx = M;
    for (Eigen::Index n = 0; n < M; ++n)
        for (Eigen::Index m = n + 1; m < M; ++m) {
            const double re = p[idx++];
            const double im = p[idx++];
            T(m, n) = Complex(re, im);
        }
}

// Mean negative log-likelihood of the Cholesky parameter vector against the
// packed POVM rows. Chunked so evaluation parallelizes with a partition
// (and therefore a summation order) independent of the worker count.
struct PovmObjective {
    const Eigen::MatrixXd* rows = nullptr;
    unsigned threads = 1;
    mutable Eigen::MatrixXcd T, rho;
    mutable Eigen::VectorXd packed;
    mutable std::vector<double> partial;

    double operator()(const Eigen::VectorXd& p) const {
        factor_from_params(p, T);
        rho.noalias() = T.adjoint() * T;
        const double tr = rho.trace().real();
        if (!(tr > 1e-300)) return 1e9;
        rho /= tr;
        packed = pack_hermitian(rho);
        const Eigen::Index N = rows->rows();
        const Eigen::Index chunk = 16384;
        const std::size_t n_chunks = static_cast<std::size_t>((N + chunk - 1) / chunk);
        partial.assign(n_chunks, 0.0);
        parallel_for(n_chunks, threads, [&](std::size_t c) {
            const Eigen::Index a = static_cast<Eigen::Index>(c) * chunk;
            const Eigen::Index len = std::min(chunk, N - a);
            const Eigen::VectorXd q = rows->middleRows(a, len) * packed;
            double s = 0.0;
            for (Eigen::Index i = 0; i < len; ++i) s += std::log(std::max(q[i], 1e-300));
            partial[c] = s;
        });
        double total = 0.0;
        for (double v : partial) total += v;
        return -total / static_cast<double>(N);
    }
};

// cos(sqrt(z)), sin(sqrt(z))/sqrt(z) and (cos(sqrt(z)) - 1)/z as entire
// functions of real z (hyperbolic branch for z < 0, series near 0).
void evolution_basis(double z, double& C, double& S, double& T) {
    if (std::abs(z) < 1e-6) {
        C = 1.0 - z / 2.0 + z * z / 24.0;
        S = 1.0 - z / 6.0 + z * z / 120.0;
        T = -0.5 + z / 24.0 - z * z / 720.0;
        return;
    }
    const double rt = std::sqrt(std::abs(z));
    if (z > 0.0) {
        C = std::cos(rt);
        S = std::sin(rt) / rt;
    } else {
        C = std::cosh(rt);
        S = std::sinh(rt) / rt;
    }
    T = (C - 1.0) / z;
}

} // namespace

Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& h) {
    const Eigen::Index M = h.rows();
    if (h.cols() != M) throw DomainError("pack_hermitian: square matrix required");
    Eigen::VectorXd out(M * M);
    for (Eigen::Index i = 0; i < M; ++i) out[i] = h(i, i).real();
    Eigen::Index idx = M;
    const double rt2 = std::sqrt(2.0);
    for (Eigen::Index n = 0; n < M; ++n)
        for (Eigen::Index m = n + 1; m < M; ++m) {
            out[idx++] = rt2 * h(n, m).real();
            out[idx++] = rt2 * h(n, m).imag();
        }
    return out;
}

Eigen::VectorXd homodyne_povm_row(double x, double phi, double eta, int dim) {
    if (dim < 1) throw DomainError("homodyne_povm_row: dimension must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0))
        throw EtaOutOfDomain("homodyne_povm_row: eta must lie in (0, 1]");
    const Eigen::MatrixXd B = loss_amplitudes(dim, eta);
    Eigen::VectorXd u(dim), row(static_cast<Eigen::Index>(dim) * dim);
    Eigen::MatrixXd S(dim, dim);
    povm_row_into(x, phi, eta, B, u, S, row);
    return row;
}

MlFit ml_fit_povm(const Eigen::MatrixXd& rows, int dim, const MlOptions& opts,
                  const std::optional<Eigen::MatrixXcd>& init) {
    if (dim < 1) throw DomainError("ml_fit_povm: dimension must be >= 1");
    if (rows.rows() == 0) throw EmptyData("ml_fit_povm: no data rows");
    if (rows.cols() != static_cast<Eigen::Index>(dim) * dim)
        throw DomainError("ml_fit_povm: row length must equal dim^2");
    if (opts.restarts < 1 || opts.max_iter < 1)
        throw DomainError("ml_fit_povm: restarts and max_iter must be positive");
    if (init && (init->rows() != dim || init->cols() != dim))
        throw DomainError("ml_fit_povm: init dimension mismatch");

    const Eigen::MatrixXcd rho0 =
        init ? project_physical(*init)
             : Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
    const Eigen::VectorXd p0 = params_from_factor(lower_factor(rho0));

    PovmObjective obj;
    obj.rows = &rows;
    obj.threads = resolve_threads(static_cast<unsigned>(std::max(0, opts.threads)));
    obj.T.resize(dim, dim);
    obj.rho.resize(dim, dim);
    auto fn = std::function<double(const Eigen::VectorXd&)>(
        [&obj](const Eigen::VectorXd& p) { return obj(p); });

    const double scale =
        std::max(p0.norm() / std::sqrt(static_cast<double>(p0.size())), 1e-2);
    const double N = static_cast<double>(rows.rows());

    MlFit fit;
    double best_f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    for (int k = 0; k < opts.restarts; ++k) {
        Eigen::VectorXd start = p0;
        if (k > 0) {
            Rng rng(opts.seed, static_cast<std::uint64_t>(k));
            for (Eigen::Index i = 0; i < start.size(); ++i) start[i] += 0.1 * scale * rng.gauss();
        }
        Eigen::VectorXd steps(start.size());
        for (Eigen::Index i = 0; i < start.size(); ++i)
            steps[i] = std::max(0.1 * scale, 0.2 * std::abs(start[i]));
        SimplexResult r = run_simplex(fn, start, steps, opts.max_iter, opts.tol, 1e-8);
        fit.restarts.push_back({-r.f * N, r.iterations, r.converged});
        if (r.f < best_f) {
            best_f = r.f;
            best_x = r.x;
            fit.converged = r.converged;
            fit.trace.assign(r.trace.size(), 0.0);
            for (std::size_t i = 0; i < r.trace.size(); ++i) fit.trace[i] = -r.trace[i] * N;
        }
    }

    factor_from_params(best_x, obj.T);
    Eigen::MatrixXcd rho = obj.T.adjoint() * obj.T;
    rho /= rho.trace().real();
    fit.rho.modes = 1;
    fit.rho.dim = dim;
    fit.rho.entries = rho;
    fit.rho.captured = 1.0;
    fit.rho.physical = true;
    fit.log_likelihood = -best_f * N;
    fit.truncation_tail = rho(dim - 1, dim - 1).real();
    return fit;
}

MlFit ml_reconstruct(const DataSet& data, int cutoff, const MlOptions& opts) {
    if (data.empty()) throw EmptyData("ml_reconstruct: empty data set");
    if (data.multimode()) throw DomainError("ml_reconstruct: single-mode data required");
    if (cutoff < 1) throw DomainError("ml_reconstruct: cutoff must be >= 1");
    const double eta = std::min(data.eta, 1.0);
    if (!(data.eta > 0.0 && data.eta <= 1.0 + 1e-12))
        throw EtaOutOfDomain("ml_reconstruct: data efficiency must lie in (0, 1]");

    const int M = cutoff;
    const Eigen::Index N = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd rows(N, static_cast<Eigen::Index>(M) * M);
    const Eigen::MatrixXd B = loss_amplitudes(M, eta);
    const unsigned workers = resolve_threads(static_cast<unsigned>(std::max(0, opts.threads)));
    const Eigen::Index chunk = 16384;
    const std::size_t n_chunks = static_cast<std::size_t>((N + chunk - 1) / chunk);
    parallel_for(n_chunks, workers, [&](std::size_t c) {
        Eigen::VectorXd u(M), row(static_cast<Eigen::Index>(M) * M);
        Eigen::MatrixXd S(M, M);
        const Eigen::Index a = static_cast<Eigen::Index>(c) * chunk;
        const Eigen::Index len = std::min(chunk, N - a);
        for (Eigen::Index i = a; i < a + len; ++i) {
            povm_row_into(data.x[static_cast<std::size_t>(i)],
                          data.phi[static_cast<std::size_t>(i)], eta, B, u, S, row);
            rows.row(i) = row.transpose();
        }
    });

    // The linear pattern-function estimate seeds the search when the data
    // efficiency admits bounded kernels; otherwise start maximally mixed.
    std::optional<Eigen::MatrixXcd> init;
    if (eta > 0.5 + 1e-9) {
        const Reconstruction lin = reconstruct_matrix(data, M, eta, opts.threads);
        init = lin.rho.entries;
    }
    return ml_fit_povm(rows, M, opts, init);
}

namespace {

// Exact negative log-likelihood of a displaced squeezed thermal state on
// quadrature records, vectorized over precomputed phase columns. `noise` is
// the efficiency smearing (1-eta)/(4 eta) added to every variance.
struct GaussianObjective {
    Eigen::ArrayXd x, c, s, c2, s2;
    double noise = 0.0;
    mutable Eigen::ArrayXd sig2, resid;

    double total(double n_th, double r, double re, double im) const {
        const double vfac = 0.25 * (2.0 * n_th + 1.0);
        const double e2r = std::exp(2.0 * r);
        const double em2r = std::exp(-2.0 * r);
        sig2 = vfac * (e2r * c2 + em2r * s2) + noise;
        resid = x - re * c - im * s;
        return (0.5 * (2.0 * M_PI * sig2).log() + resid.square() / (2.0 * sig2)).sum();
    }
    // Simplex coordinates (t, r, Re mu, Im mu) with n_th = t^2 >= 0.
    double operator()(const Eigen::VectorXd& p) const {
        if (!(std::abs(p[1]) < 50.0)) return 1e9 + std::abs(p[1]);
        if (!(std::abs(p[0]) < 1e6)) return 1e9 + std::abs(p[0]);
        return total(p[0] * p[0], p[1], p[2], p[3]) / static_cast<double>(x.size());
    }
};

} // namespace

GaussianFit ml_gaussian_fit(const DataSet& data, const MlOptions& opts) {
    if (data.empty()) throw EmptyData("ml_gaussian_fit: empty data set");
    if (data.multimode()) throw DomainError("ml_gaussian_fit: single-mode data required");
    if (!(data.eta > 0.0 && data.eta <= 1.0 + 1e-12))
        throw EtaOutOfDomain("ml_gaussian_fit: data efficiency must lie in (0, 1]");
    if (opts.restarts < 1 || opts.max_iter < 1)
        throw DomainError("ml_gaussian_fit: restarts and max_iter must be positive");
    const double eta = std::min(data.eta, 1.0);
    const Eigen::Index N = static_cast<Eigen::Index>(data.size());

    GaussianObjective obj;
    obj.x = Eigen::Map<const Eigen::ArrayXd>(data.x.data(), N);
    const Eigen::ArrayXd phi = Eigen::Map<const Eigen::ArrayXd>(data.phi.data(), N);
    obj.c = phi.cos();
    obj.s = phi.sin();
    obj.c2 = obj.c.square();
    obj.s2 = obj.s.square();
    obj.noise = (1.0 - eta) / (4.0 * eta);

    // Moment starting point: first harmonic for the displacement, residual
    // variance (less the efficiency smearing) for the thermal occupation.
    const double re0 = 2.0 * (obj.x * obj.c).mean();
    const double im0 = 2.0 * (obj.x * obj.s).mean();
    const double resid2 = (obj.x - re0 * obj.c - im0 * obj.s).square().mean();
    const double nth0 = std::max(0.0, 0.5 * (4.0 * (resid2 - obj.noise) - 1.0));
    Eigen::VectorXd p0(4);
    p0 << std::sqrt(nth0), 0.0, re0, im0;

    auto fn = std::function<double(const Eigen::VectorXd&)>(
        [&obj](const Eigen::VectorXd& p) { return obj(p); });

    double best_f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    bool best_converged = false;
    for (int k = 0; k < opts.restarts; ++k) {
        Eigen::VectorXd start = p0;
        if (k > 0) {
            Rng rng(opts.seed, static_cast<std::uint64_t>(k));
            for (Eigen::Index i = 0; i < 4; ++i)
                start[i] += 0.15 * std::max(0.2, std::abs(p0[i])) * rng.gauss();
        }
        Eigen::VectorXd steps(4);
        for (Eigen::Index i = 0; i < 4; ++i) steps[i] = std::max(0.1, 0.2 * std::abs(start[i]));
        SimplexResult r = run_simplex(fn, start, steps, opts.max_iter, opts.tol, 1e-10);
        if (r.f < best_f) {
            best_f = r.f;
            best_x = r.x;
            best_converged = r.converged;
        }
    }

    const double n_th = best_x[0] * best_x[0];
    GaussianFit fit;
    fit.params.delta = 1.0 / std::sqrt(2.0 * n_th + 1.0);
    fit.params.r = best_x[1];
    fit.params.mu = Complex(best_x[2], best_x[3]);
    fit.converged = best_converged;
    fit.n = static_cast<std::size_t>(N);
    fit.log_likelihood = -best_f * static_cast<double>(N);

    // Observed-information covariance in (n_th, r, Re mu, Im mu): numerical
    // Hessian of the total negative log-likelihood by central differences.
    Eigen::Vector4d center(n_th, best_x[1], best_x[2], best_x[3]);
    const auto g = [&obj](const Eigen::Vector4d& q) {
        return obj.total(q[0], q[1], q[2], q[3]);
    };
    Eigen::Vector4d h;
    for (int i = 0; i < 4; ++i) h[i] = std::max(1e-5, 1e-4 * std::abs(center[i]));
    Eigen::Matrix4d hess;
    const double g0 = g(center);
    for (int i = 0; i < 4; ++i) {
        Eigen::Vector4d qp = center, qm = center;
        qp[i] += h[i];
        qm[i] -= h[i];
        hess(i, i) = (g(qp) - 2.0 * g0 + g(qm)) / (h[i] * h[i]);
        for (int j = i + 1; j < 4; ++j) {
            Eigen::Vector4d qpp = center, qpm = center, qmp = center, qmm = center;
            qpp[i] += h[i]; qpp[j] += h[j];
            qpm[i] += h[i]; qpm[j] -= h[j];
            qmp[i] -= h[i]; qmp[j] += h[j];
            qmm[i] -= h[i]; qmm[j] -= h[j];
            hess(i, j) = (g(qpp) - g(qpm) - g(qmp) + g(qmm)) / (4.0 * h[i] * h[j]);
            hess(j, i) = hess(i, j);
        }
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(hess);
    if (lu.isInvertible()) {
        const Eigen::Matrix4d cov = lu.inverse();
        if (cov.allFinite()) fit.covariance = cov;
    }
    return fit;
}

double overlap(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.entries.rows() != b.entries.rows() || a.entries.cols() != b.entries.cols())
        throw DomainError("overlap: operators live in different dimensions");
    const double pa = a.entries.squaredNorm();
    const double pb = b.entries.squaredNorm();
    if (!(pa > 0.0) || !(pb > 0.0)) throw ZeroState("overlap: zero-purity operator");
    const Complex cross = a.entries.cwiseProduct(b.entries.conjugate()).sum();
    return cross.real() / std::sqrt(pa * pb);
}

double squeezed_thermal_pn(int n, double n_th, double r) {
    if (n < 0) throw DomainError("squeezed_thermal_pn: n must be >= 0");
    if (n_th < 0.0) throw DomainError("squeezed_thermal_pn: n_th must be >= 0");
    constexpr int kNodes = 256;
    const double e2r = std::exp(2.0 * r);
    const double em2r = std::exp(-2.0 * r);
    double acc = 0.0;
    for (int k = 0; k < kNodes; ++k) {
        const double phi = 2.0 * M_PI * k / kNodes;
        const double cn = std::cos(phi);
        const double sn = std::sin(phi);
        const double C = (n_th + 0.5) * (e2r * cn * cn + em2r * sn * sn) + 0.5;
        double num = 1.0;
        for (int i = 0; i < n; ++i) num *= C - 1.0;
        acc += num / std::pow(C, n + 1.0);
    }
    return acc / kNodes;
}

EvolutionCoeffs evolution_coeffs(const HamiltonianParams& h) {
    const double z = h.phi * h.phi - std::norm(h.xi);
    double C, S, T;
    evolution_basis(z, C, S, T);
    EvolutionCoeffs c;
    c.gamma = Complex(C, -h.phi * S);
    c.delta = Complex(0.0, -1.0) * std::conj(h.xi) * S;
    c.mu = (h.phi * std::conj(h.alpha) - std::conj(h.xi) * h.alpha) * T -
           Complex(0.0, 1.0) * std::conj(h.alpha) * S;
    return c;
}

Complex evolve_gaussian_mean(const EvolutionCoeffs& c, Complex mean_in) {
    return c.gamma * mean_in + c.delta * std::conj(mean_in) + c.mu;
}

HamiltonianParams evolution_invert(const EvolutionCoeffs& target) {
    const auto unpack = [](const Eigen::VectorXd& p) {
        return HamiltonianParams{Complex(p[3], p[4]), p[0], Complex(p[1], p[2])};
    };
    auto fn = std::function<double(const Eigen::VectorXd&)>(
        [&target, &unpack](const Eigen::VectorXd& p) {
            const EvolutionCoeffs c = evolution_coeffs(unpack(p));
            return std::norm(c.gamma - target.gamma) + std::norm(c.delta - target.delta) +
                   std::norm(c.mu - target.mu);
        });

    // First-order seed: for small generators S ~ 1, so phi ~ -Im gamma and
    // xi ~ conj(i delta); alpha then solves the 2x2 linear system for mu.
    const double phi0 = -target.gamma.imag();
    const Complex xi0 = std::conj(Complex(0.0, 1.0) * target.delta);
    double C, S, T;
    evolution_basis(phi0 * phi0 - std::norm(xi0), C, S, T);
    const Complex A(phi0 * T, -S);
    const Complex Bc = -std::conj(xi0) * T;
    const double det = std::norm(Bc) - std::norm(A);
    Complex alpha0 = Complex(0.0, -1.0) * std::conj(target.mu);
    if (std::abs(det) > 1e-9)
        alpha0 = (std::conj(Bc) * target.mu - A * std::conj(target.mu)) / det;

    Eigen::VectorXd seed(5);
    seed << phi0, xi0.real(), xi0.imag(), alpha0.real(), alpha0.imag();

    double best_f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = seed;
    for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd start = seed;
        if (k == 1)
            start.setZero();
        else if (k > 1) {
            Rng rng(0x5eed, static_cast<std::uint64_t>(k));
            for (Eigen::Index i = 0; i < 5; ++i) start[i] += rng.uniform(-0.7, 0.7);
        }
        Eigen::VectorXd steps(5);
        for (Eigen::Index i = 0; i < 5; ++i) steps[i] = std::max(0.05, 0.1 * std::abs(start[i]));
        const SimplexResult r = run_simplex(fn, start, steps, 5000, 1e-14, 1e-12);
        if (r.f < best_f) {
            best_f = r.f;
            best_x = r.x;
        }
    }
    return unpack(best_x);
}

void to_json(nlohmann::json& j, const MlFit& fit) {
    nlohmann::json restarts = nlohmann::json::array();
    for (const MlRestart& r : fit.restarts)
        restarts.push_back({{"log_likelihood", r.log_likelihood},
                            {"iterations", r.iterations},
                            {"converged", r.converged}});
    j = nlohmann::json{{"schema", "qtomo-mlfit-v1"},
                       {"log_likelihood", fit.log_likelihood},
                       {"converged", fit.converged},
                       {"truncation_tail", fit.truncation_tail},
                       {"restarts", std::move(restarts)},
                       {"trace", fit.trace},
                       {"rho", fit.rho}};
}

void to_json(nlohmann::json& j, const GaussianFit& fit) {
    nlohmann::json cov = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cov.push_back(fit.covariance(r, c));
    j = nlohmann::json{{"schema", "qtomo-gaussianfit-v1"},
                       {"delta", fit.params.delta},
                       {"r", fit.params.r},
                       {"mu", {fit.params.mu.real(), fit.params.mu.imag()}},
                       {"n_th", fit.params.n_th()},
                       {"n_sq", fit.params.n_sq()},
                       {"n_coh", fit.params.n_coh()},
                       {"log_likelihood", fit.log_likelihood},
                       {"converged", fit.converged},
                       {"n", fit.n},
                       {"covariance", std::move(cov)}};
}

} // namespace qtomo
