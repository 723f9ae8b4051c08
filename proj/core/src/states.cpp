#include "qtomo/states.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "qtomo/errors.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

namespace {

constexpr double kCaptureGoal = 1.0 - 1e-6;

// Unnormalized truncated matrix plus the fraction of the full trace it holds.
struct Built {
    Eigen::MatrixXcd entries;
    double captured = 0.0;
    int modes = 1;
};

Eigen::VectorXcd coherent_amplitudes(Complex alpha, int len) {
    Eigen::VectorXcd c(len);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < len; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c;
}

// S(r)|0> in the Fock basis: nonzero on even levels only, all positive for
// r > 0 with this operator ordering.
Eigen::VectorXd squeezed_vacuum_amplitudes(double r, int len) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(len);
    const double t = std::tanh(r);
    double cur = std::sqrt(1.0 / std::cosh(r));
    s(0) = cur;
    for (int m = 1; 2 * m < len; ++m) {
        cur *= t * std::sqrt((2.0 * m - 1.0) / (2.0 * m));
        s(2 * m) = cur;
    }
    return s;
}

Built from_amplitudes(const Eigen::VectorXcd& amps, int cutoff, double full_norm2) {
    Eigen::VectorXcd head = amps.head(cutoff);
    Built b;
    b.entries = head * head.adjoint();
    b.captured = head.squaredNorm() / full_norm2;
    return b;
}

Built build_at(const StateSpec& spec, int M) {
    switch (spec.kind) {
    case StateKind::vacuum: {
        Built b;
        b.entries = Eigen::MatrixXcd::Zero(M, M);
        b.entries(0, 0) = 1.0;
        b.captured = 1.0;
        return b;
    }
    case StateKind::coherent:
        return from_amplitudes(coherent_amplitudes(spec.alpha, M), M, 1.0);
    case StateKind::fock: {
        Built b;
        b.entries = Eigen::MatrixXcd::Zero(M, M);
        b.captured = 0.0;
        if (spec.n < M) {
            b.entries(spec.n, spec.n) = 1.0;
            b.captured = 1.0;
        }
        return b;
    }
    case StateKind::thermal: {
        Built b;
        b.entries = Eigen::MatrixXcd::Zero(M, M);
        const double q = spec.n_th / (1.0 + spec.n_th);
        double p = 1.0 / (1.0 + spec.n_th);
        double sum = 0.0;
        for (int n = 0; n < M; ++n, p *= q) {
            b.entries(n, n) = p;
            sum += p;
        }
        b.captured = sum;
        return b;
    }
    case StateKind::displaced_squeezed: {
        const int pad = M + std::max(48, M / 2);
        Eigen::VectorXcd sv = squeezed_vacuum_amplitudes(spec.r, pad).cast<Complex>();
        Eigen::VectorXcd c = displacement_matrix(spec.alpha, pad) * sv;
        return from_amplitudes(c, M, 1.0);
    }
    case StateKind::squeezed_thermal: {
        const int pad = M + std::max(48, M / 2);
        Eigen::MatrixXcd S = squeeze_matrix(spec.r, pad).cast<Complex>();
        Eigen::VectorXd pth(pad);
        const double q = spec.n_th / (1.0 + spec.n_th);
        double p = 1.0 / (1.0 + spec.n_th);
        for (int n = 0; n < pad; ++n, p *= q) pth(n) = p;
        Eigen::MatrixXcd rho = S * pth.asDiagonal() * S.adjoint();
        if (std::abs(spec.alpha) > 0.0) {
            Eigen::MatrixXcd D = displacement_matrix(spec.alpha, pad);
            rho = D * rho * D.adjoint();
        }
        Built b;
        b.entries = rho.topLeftCorner(M, M);
        b.captured = b.entries.trace().real();
        return b;
    }
    case StateKind::cat: {
        Eigen::VectorXcd c = 2.0 * coherent_amplitudes(spec.alpha, M);
        for (int n = 1; n < M; n += 2) c(n) = 0.0;
        const double norm2 = 2.0 * (1.0 + std::exp(-2.0 * std::norm(spec.alpha)));
        return from_amplitudes(c, M, norm2);
    }
    case StateKind::twin_beam: {
        const double xi2 = std::norm(spec.xi);
        Eigen::VectorXcd c(M);
        c(0) = 1.0;
        for (int n = 1; n < M; ++n) c(n) = c(n - 1) * spec.xi;
        Built b;
        b.modes = 2;
        b.entries = Eigen::MatrixXcd::Zero(M * M, M * M);
        for (int n = 0; n < M; ++n)
            for (int m = 0; m < M; ++m)
                b.entries(n * M + n, m * M + m) = (1.0 - xi2) * c(n) * std::conj(c(m));
        b.captured = xi2 < 1.0 ? 1.0 - std::pow(xi2, M) : 0.0;
        return b;
    }
    }
    throw DomainError("make_state: unknown state kind");
}

} // namespace

StateSpec StateSpec::make_vacuum(int cutoff) {
    StateSpec s;
    s.kind = StateKind::vacuum;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_coherent(Complex alpha, int cutoff) {
    StateSpec s;
    s.kind = StateKind::coherent;
    s.alpha = alpha;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_fock(int n, int cutoff) {
    if (n < 0) throw DomainError("fock: level must be nonnegative");
    StateSpec s;
    s.kind = StateKind::fock;
    s.n = n;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_thermal(double n_th, int cutoff) {
    if (n_th < 0.0) throw DomainError("thermal: occupation must be nonnegative");
    StateSpec s;
    s.kind = StateKind::thermal;
    s.n_th = n_th;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_displaced_squeezed(Complex alpha, double r, int cutoff) {
    StateSpec s;
    s.kind = StateKind::displaced_squeezed;
    s.alpha = alpha;
    s.r = r;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_squeezed_thermal(double n_th, double r, Complex alpha, int cutoff) {
    if (n_th < 0.0) throw DomainError("squeezed_thermal: occupation must be nonnegative");
    StateSpec s;
    s.kind = StateKind::squeezed_thermal;
    s.n_th = n_th;
    s.r = r;
    s.alpha = alpha;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_cat(Complex alpha, int cutoff) {
    StateSpec s;
    s.kind = StateKind::cat;
    s.alpha = alpha;
    s.cutoff = cutoff;
    return s;
}

StateSpec StateSpec::make_twin_beam(Complex xi, int cutoff) {
    if (std::abs(xi) >= 1.0) throw DomainError("twin_beam: requires |xi| < 1");
    StateSpec s;
    s.kind = StateKind::twin_beam;
    s.xi = xi;
    s.cutoff = cutoff;
    return s;
}

double StateSpec::mean_photons() const {
    switch (kind) {
    case StateKind::vacuum: return 0.0;
    case StateKind::coherent: return std::norm(alpha);
    case StateKind::fock: return n;
    case StateKind::thermal: return n_th;
    case StateKind::displaced_squeezed: {
        const double sh = std::sinh(r);
        return std::norm(alpha) + sh * sh;
    }
    case StateKind::squeezed_thermal:
        return (n_th + 0.5) * std::cosh(2.0 * r) - 0.5 + std::norm(alpha);
    case StateKind::cat: {
        const double a2 = std::norm(alpha);
        return a2 * std::tanh(a2);
    }
    case StateKind::twin_beam: {
        const double xi2 = std::norm(xi);
        return xi2 / (1.0 - xi2);
    }
    }
    return 0.0;
}

int StateSpec::resolve_cutoff() const {
    if (cutoff > 0) return cutoff;
    if (kind == StateKind::twin_beam) {
        const double xi2 = std::norm(xi);
        if (xi2 == 0.0) return 2;
        return static_cast<int>(std::ceil(std::log(1e-7) / std::log(xi2))) + 2;
    }
    const double nbar = mean_photons();
    int M = static_cast<int>(std::ceil(nbar + 6.0 * std::sqrt(nbar + 1.0))) + 4;
    if (kind == StateKind::fock) M = std::max(M, n + 2);
    return M;
}

bool StateSpec::is_gaussian() const {
    switch (kind) {
    case StateKind::vacuum:
    case StateKind::coherent:
    case StateKind::thermal:
    case StateKind::displaced_squeezed:
    case StateKind::squeezed_thermal:
        return true;
    default:
        return false;
    }
}

DensityMatrix make_state(const StateSpec& spec) {
    if (spec.kind == StateKind::twin_beam && std::abs(spec.xi) >= 1.0)
        throw DomainError("make_state: twin_beam requires |xi| < 1");
    const bool auto_cut = spec.cutoff == 0;
    int M = spec.resolve_cutoff();
    for (;;) {
        Built b = build_at(spec, M);
        if (b.captured >= kCaptureGoal) {
            DensityMatrix rho;
            rho.modes = b.modes;
            rho.dim = M;
            const double tr = b.entries.trace().real();
            rho.entries = ((b.entries + b.entries.adjoint()) / (2.0 * tr)).eval();
            rho.captured = b.captured;
            rho.physical = true;
            return rho;
        }
        if (!auto_cut)
            throw CutoffTooSmall("make_state: cutoff " + std::to_string(M) + " captures only " +
                                 std::to_string(b.captured) + " of the trace");
        if (M >= 4096)
            throw CutoffTooSmall("make_state: automatic cutoff search exceeded 4096 levels");
        M = static_cast<int>(std::ceil(1.5 * M)) + 8;
    }
}

Eigen::MatrixXcd displacement_matrix(Complex alpha, int dim) {
    if (dim < 1) throw DomainError("displacement_matrix: dimension must be positive");
    Eigen::MatrixXcd D(dim, dim);
    const double a2 = std::norm(alpha);
    if (a2 == 0.0) return Eigen::MatrixXcd::Identity(dim, dim);
    const double log_a = 0.5 * std::log(a2);
    const double arg_a = std::arg(alpha);
    for (int n = 0; n < dim; ++n) {
        for (int k = 0; k <= n; ++k) {
            const int d = n - k;
            const double mag = std::exp(0.5 * (log_factorial(k) - log_factorial(n)) +
                                        d * log_a - 0.5 * a2);
            const double lag = laguerre(k, d, a2);
            D(n, k) = std::polar(mag, d * arg_a) * lag;
            if (n != k) D(k, n) = std::polar(mag, -d * arg_a) * (d % 2 ? -lag : lag);
        }
    }
    return D;
}

Eigen::MatrixXd squeeze_matrix(double r, int dim) {
    if (dim < 1) throw DomainError("squeeze_matrix: dimension must be positive");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 2 < dim; ++n) {
        const double c = 0.5 * r * std::sqrt((n + 1.0) * (n + 2.0));
        A(n + 2, n) = c;
        A(n, n + 2) = -c;
    }
    return A.exp();
}

double wigner_eval(const DensityMatrix& rho, Complex alpha) {
    if (rho.modes != 1) throw DomainError("wigner_eval: single mode only");
    const int M = rho.dim;
    const double a2 = std::norm(alpha);
    const double r2 = 4.0 * a2;
    const Complex eiphi = a2 > 0.0 ? alpha / std::abs(alpha) : Complex(1.0, 0.0);
    double total = 0.0;
    Complex phase(1.0, 0.0);
    for (int d = 0; d < M; ++d, phase *= eiphi) {
        if (d > 0 && a2 == 0.0) break;
        // ratio(n) = (-1)^n sqrt(n!/(n+d)!) (2|alpha|)^d e^{-2|alpha|^2},
        // updated multiplicatively in n; Laguerre L_n^d(r2) by recurrence.
        double coef = std::exp(0.5 * (0.0 - log_factorial(d)) +
                               (d > 0 ? 0.5 * d * std::log(r2) : 0.0) - 0.5 * r2);
        Complex sum(0.0, 0.0);
        double lm = 0.0, l = 1.0; // L_{n-1}^d, L_n^d at n = 0
        for (int n = 0; n + d < M; ++n) {
            sum += rho.entries(n, n + d) * (coef * l);
            const double next = ((2.0 * n + 1.0 + d - r2) * l - (n + d) * lm) / (n + 1.0);
            lm = l;
            l = next;
            coef *= -std::sqrt((n + 1.0) / (n + 1.0 + d));
        }
        total += (d == 0 ? 2.0 : 4.0) * (phase * sum).real();
    }
    return total / M_PI;
}

WignerGrid wigner_grid(const DensityMatrix& rho, double x0, double x1, int nx, double y0,
                       double y1, int ny) {
    if (nx < 2 || ny < 2) throw DomainError("wigner_grid: need at least 2 points per axis");
    WignerGrid g;
    g.x0 = x0;
    g.y0 = y0;
    g.dx = (x1 - x0) / (nx - 1);
    g.dy = (y1 - y0) / (ny - 1);
    g.nx = nx;
    g.ny = ny;
    g.s = 0.0;
    g.values.resize(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            g.at(ix, iy) = wigner_eval(rho, Complex(g.x_at(ix), g.y_at(iy)));
    return g;
}

WignerGrid wigner_s_convolve(const WignerGrid& grid, double s) {
    if (s >= grid.s) throw DomainError("wigner_s_convolve: target ordering must be below the source");
    const double tau = grid.s - s;
    WignerGrid out = grid;
    out.s = s;
    // Separable Gaussian kernel exp(-2 t^2 / tau), discretized per axis and
    // normalized so the grid sum (hence the integral) is preserved.
    auto axis_kernel = [tau](double step) {
        const int radius = static_cast<int>(std::ceil(std::sqrt(0.5 * tau * 28.0) / step)) + 1;
        std::vector<double> k(2 * radius + 1);
        double sum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            k[i + radius] = std::exp(-2.0 * (i * step) * (i * step) / tau);
            sum += k[i + radius];
        }
        for (double& v : k) v /= sum;
        return k;
    };
    const std::vector<double> kx = axis_kernel(grid.dx);
    const std::vector<double> ky = axis_kernel(grid.dy);
    const int rx = (static_cast<int>(kx.size()) - 1) / 2;
    const int ry = (static_cast<int>(ky.size()) - 1) / 2;
    WignerGrid tmp = grid;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            double acc = 0.0;
            for (int j = -rx; j <= rx; ++j) {
                const int src = ix + j;
                if (src < 0 || src >= grid.nx) continue;
                acc += kx[j + rx] * grid.at(src, iy);
            }
            tmp.at(ix, iy) = acc;
        }
    }
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            double acc = 0.0;
            for (int j = -ry; j <= ry; ++j) {
                const int src = iy + j;
                if (src < 0 || src >= grid.ny) continue;
                acc += ky[j + ry] * tmp.at(ix, src);
            }
            out.at(ix, iy) = acc;
        }
    }
    return out;
}

namespace {

double pdf_ideal(const DensityMatrix& rho, double x, double phi) {
    const int M = rho.dim;
    Eigen::VectorXcd z(M);
    for (int n = 0; n < M; ++n)
        z(n) = std::polar(oscillator_psi(n, x), n * phi);
    const Complex p = z.adjoint() * rho.entries * z;
    return std::max(0.0, p.real());
}

} // namespace

double quadrature_pdf(const DensityMatrix& rho, double x, double phi, double eta) {
    if (rho.modes != 1) throw DomainError("quadrature_pdf: single mode only");
    if (eta <= 0.0 || eta > 1.0) throw EtaOutOfDomain("quadrature_pdf: eta must be in (0,1]");
    if (eta == 1.0) return pdf_ideal(rho, x, phi);
    const double delta2 = (1.0 - eta) / (4.0 * eta);
    const double scale = std::sqrt(2.0 * delta2);
    const QuadratureRule& gh = gauss_hermite(96);
    double acc = 0.0;
    for (std::size_t i = 0; i < gh.x.size(); ++i)
        acc += gh.w[i] * pdf_ideal(rho, x - scale * gh.x[i], phi);
    return acc / std::sqrt(M_PI);
}

DensityMatrix truncated(const DensityMatrix& rho, int new_dim) {
    if (new_dim < 1) throw DomainError("truncated: dimension must be positive");
    DensityMatrix out;
    out.modes = rho.modes;
    out.dim = new_dim;
    out.captured = rho.captured;
    out.physical = rho.physical;
    if (rho.modes == 1) {
        out.entries = Eigen::MatrixXcd::Zero(new_dim, new_dim);
        const int c = std::min(new_dim, rho.dim);
        out.entries.topLeftCorner(c, c) = rho.entries.topLeftCorner(c, c);
    } else {
        const int c = std::min(new_dim, rho.dim);
        out.entries = Eigen::MatrixXcd::Zero(new_dim * new_dim, new_dim * new_dim);
        for (int n1 = 0; n1 < c; ++n1)
            for (int n2 = 0; n2 < c; ++n2)
                for (int m1 = 0; m1 < c; ++m1)
                    for (int m2 = 0; m2 < c; ++m2)
                        out.entries(n1 * new_dim + n2, m1 * new_dim + m2) =
                            rho.entries(n1 * rho.dim + n2, m1 * rho.dim + m2);
    }
    return out;
}

std::optional<std::pair<double, double>> gaussian_quadrature_moments(const StateSpec& spec,
                                                                     double phi, double eta) {
    if (!spec.is_gaussian()) return std::nullopt;
    if (eta <= 0.0 || eta > 1.0) throw EtaOutOfDomain("gaussian_quadrature_moments: eta in (0,1]");
    double n_th = 0.0, r = 0.0;
    Complex alpha = spec.alpha;
    switch (spec.kind) {
    case StateKind::vacuum: alpha = 0.0; break;
    case StateKind::coherent: break;
    case StateKind::thermal: n_th = spec.n_th; alpha = 0.0; break;
    case StateKind::displaced_squeezed: r = spec.r; break;
    case StateKind::squeezed_thermal: n_th = spec.n_th; r = spec.r; break;
    default: return std::nullopt;
    }
    const double c = std::cos(phi), s = std::sin(phi);
    const double var = (2.0 * n_th + 1.0) *
                           (std::exp(2.0 * r) * c * c + std::exp(-2.0 * r) * s * s) / 4.0 +
                       (1.0 - eta) / (4.0 * eta);
    const double mean = (alpha * std::polar(1.0, -phi)).real();
    return std::make_pair(mean, var);
}

namespace {

const char* kind_name(StateKind k) {
    switch (k) {
    case StateKind::vacuum: return "vacuum";
    case StateKind::coherent: return "coherent";
    case StateKind::fock: return "fock";
    case StateKind::thermal: return "thermal";
    case StateKind::displaced_squeezed: return "displaced_squeezed";
    case StateKind::squeezed_thermal: return "squeezed_thermal";
    case StateKind::cat: return "cat";
    case StateKind::twin_beam: return "twin_beam";
    }
    return "vacuum";
}

StateKind kind_from_name(const std::string& name) {
    for (StateKind k : {StateKind::vacuum, StateKind::coherent, StateKind::fock,
                        StateKind::thermal, StateKind::displaced_squeezed,
                        StateKind::squeezed_thermal, StateKind::cat, StateKind::twin_beam})
        if (name == kind_name(k)) return k;
    throw ConfigError("unknown state kind: " + name);
}

nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(const nlohmann::json& j) {
    return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

} // namespace

void to_json(nlohmann::json& j, const StateSpec& spec) {
    j = nlohmann::json{{"schema", "qtomo-state-spec-v1"}, {"kind", kind_name(spec.kind)}};
    if (spec.cutoff > 0) j["cutoff"] = spec.cutoff;
    switch (spec.kind) {
    case StateKind::vacuum: break;
    case StateKind::coherent:
    case StateKind::cat: j["alpha"] = complex_to_json(spec.alpha); break;
    case StateKind::fock: j["n"] = spec.n; break;
    case StateKind::thermal: j["n_th"] = spec.n_th; break;
    case StateKind::displaced_squeezed:
        j["alpha"] = complex_to_json(spec.alpha);
        j["r"] = spec.r;
        break;
    case StateKind::squeezed_thermal:
        j["alpha"] = complex_to_json(spec.alpha);
        j["r"] = spec.r;
        j["n_th"] = spec.n_th;
        break;
    case StateKind::twin_beam: j["xi"] = complex_to_json(spec.xi); break;
    }
}

void from_json(const nlohmann::json& j, StateSpec& spec) {
    spec = StateSpec{};
    spec.kind = kind_from_name(j.at("kind").get<std::string>());
    spec.cutoff = j.value("cutoff", 0);
    if (j.contains("alpha")) spec.alpha = complex_from_json(j.at("alpha"));
    if (j.contains("r")) spec.r = j.at("r").get<double>();
    if (j.contains("n_th")) spec.n_th = j.at("n_th").get<double>();
    if (j.contains("n")) spec.n = j.at("n").get<int>();
    if (j.contains("xi")) spec.xi = complex_from_json(j.at("xi"));
}

void to_json(nlohmann::json& j, const DensityMatrix& rho) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < rho.entries.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.entries.cols(); ++c)
            entries.push_back(complex_to_json(rho.entries(r, c)));
    j = nlohmann::json{{"schema", "qtomo-density-matrix-v1"},
                       {"modes", rho.modes},
                       {"dim", rho.dim},
                       {"captured", rho.captured},
                       {"physical", rho.physical},
                       {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, DensityMatrix& rho) {
    rho.modes = j.at("modes").get<int>();
    rho.dim = j.at("dim").get<int>();
    rho.captured = j.value("captured", 1.0);
    rho.physical = j.value("physical", true);
    const Eigen::Index side = rho.modes == 1 ? rho.dim : rho.dim * rho.dim;
    const auto& entries = j.at("entries");
    if (static_cast<Eigen::Index>(entries.size()) != side * side)
        throw ConfigError("density matrix entry count does not match dimensions");
    rho.entries.resize(side, side);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < side; ++r)
        for (Eigen::Index c = 0; c < side; ++c, ++i)
            rho.entries(r, c) = complex_from_json(entries.at(i));
}

} // namespace qtomo
