#include "qtomo/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/specfun.hpp"

namespace qtomo {

namespace {

double bilinear(const ImagePlane& img, double px, double py) {
    const double fj = (px - img.x0) / img.step;
    const double fi = (py - img.y0) / img.step;
    const double j0f = std::floor(fj);
    const double i0f = std::floor(fi);
    const Eigen::Index j0 = static_cast<Eigen::Index>(j0f);
    const Eigen::Index i0 = static_cast<Eigen::Index>(i0f);
    const double tx = fj - j0f;
    const double ty = fi - i0f;
    const Eigen::Index rows = img.values.rows();
    const Eigen::Index cols = img.values.cols();
    double out = 0.0;
    for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj) {
            const Eigen::Index i = i0 + di;
            const Eigen::Index j = j0 + dj;
            if (i < 0 || j < 0 || i >= rows || j >= cols) continue;
            out += (di ? ty : 1.0 - ty) * (dj ? tx : 1.0 - tx) * img.values(i, j);
        }
    return out;
}

// Trapezoid weights for an ascending list of node positions.
std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h2 = 0.5 * (x[k + 1] - x[k]);
        w[k] += h2;
        w[k + 1] += h2;
    }
    return w;
}

} // namespace

ImagePlane ImagePlane::zeros(double x0, double y0, double step, int rows, int cols) {
    if (rows < 1 || cols < 1 || step <= 0.0)
        throw DomainError("ImagePlane: need positive grid dimensions and step");
    ImagePlane img;
    img.x0 = x0;
    img.y0 = y0;
    img.step = step;
    img.values = Eigen::MatrixXd::Zero(rows, cols);
    return img;
}

double RadonProfile::integral() const {
    double s = 0.0;
    for (Eigen::Index k = 0; k + 1 < p.size(); ++k) s += 0.5 * (p(k) + p(k + 1));
    return s * step;
}

ImagePlane make_disc_image(double radius, double step, double pad) {
    if (radius <= 0.0 || step <= 0.0 || pad < 0.0)
        throw DomainError("make_disc_image: need positive radius and step");
    const double half = radius + pad;
    const int n = 2 * static_cast<int>(std::ceil(half / step)) + 1;
    ImagePlane img = ImagePlane::zeros(-step * ((n - 1) / 2), -step * ((n - 1) / 2), step, n, n);
    const double r2 = radius * radius;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int hits = 0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    const double x = img.x_at(j) + step * ((a + 0.5) / 4.0 - 0.5);
                    const double y = img.y_at(i) + step * ((b + 0.5) / 4.0 - 0.5);
                    if (x * x + y * y <= r2) ++hits;
                }
            img.values(i, j) = hits / 16.0;
        }
    return img;
}

RadonProfileSet disc_profiles(double radius, int n_angles, double half_range, double step) {
    if (radius <= 0.0 || n_angles < 1 || half_range <= 0.0 || step <= 0.0)
        throw DomainError("disc_profiles: need positive radius, angle count, range and step");
    const int n = 2 * static_cast<int>(std::ceil(half_range / step)) + 1;
    Eigen::VectorXd p(n);
    const double x0 = -step * ((n - 1) / 2);
    for (int k = 0; k < n; ++k) {
        const double x = x0 + step * k;
        const double t = radius * radius - x * x;
        p(k) = t > 0.0 ? 2.0 / M_PI * std::sqrt(t) : 0.0;
    }
    RadonProfileSet set;
    set.profiles.resize(n_angles);
    for (int a = 0; a < n_angles; ++a) {
        set.profiles[a].theta = M_PI * a / n_angles;
        set.profiles[a].x0 = x0;
        set.profiles[a].step = step;
        set.profiles[a].p = p;
    }
    return set;
}

RadonProfileSet radon_project(const ImagePlane& img, const std::vector<double>& angles,
                              int threads) {
    if (angles.empty()) throw DomainError("radon_project: need at least one angle");
    if (img.values.size() == 0) throw DomainError("radon_project: empty image");
    const double h = img.step;
    // projection nodes must cover the rotated grid: use the corner radius
    const double xw = std::max(std::abs(img.x0), std::abs(img.x_at(img.values.cols() - 1)));
    const double yw = std::max(std::abs(img.y0), std::abs(img.y_at(img.values.rows() - 1)));
    const double rad = std::hypot(xw, yw);
    const int half = static_cast<int>(std::ceil(rad / h));
    const int n_nodes = 2 * half + 1;

    RadonProfileSet set;
    set.profiles.resize(angles.size());
    parallel_for(angles.size(), static_cast<unsigned>(threads), [&](std::size_t a) {
        const double th = angles[a];
        const double c = std::cos(th);
        const double s = std::sin(th);
        RadonProfile& pr = set.profiles[a];
        pr.theta = th;
        pr.x0 = -half * h;
        pr.step = h;
        pr.p.resize(n_nodes);
        for (int k = 0; k < n_nodes; ++k) {
            const double xp = pr.x0 + h * k;
            double acc = 0.0;
            for (int t = -half; t <= half; ++t) {
                const double tt = h * t;
                acc += bilinear(img, xp * c - tt * s, xp * s + tt * c);
            }
            pr.p(k) = acc * h / M_PI;
        }
    });
    return set;
}

DataSet sample_spots(const RadonProfileSet& profiles, std::size_t n_per_angle,
                     std::uint64_t seed) {
    if (profiles.empty()) throw EmptyData("sample_spots: no profiles");
    if (n_per_angle == 0) throw DomainError("sample_spots: need at least one spot per angle");
    const std::size_t n_angles = profiles.size();

    // per-angle cumulative cell masses (negative profile values clamped)
    struct Cdf {
        double x0, step;
        std::vector<double> cum; // cum[k]: mass of cells 0..k-1
    };
    std::vector<Cdf> cdfs(n_angles);
    for (std::size_t a = 0; a < n_angles; ++a) {
        const RadonProfile& pr = profiles.profiles[a];
        if (pr.p.size() < 2) throw DomainError("sample_spots: profile needs at least two nodes");
        Cdf& c = cdfs[a];
        c.x0 = pr.x0;
        c.step = pr.step;
        c.cum.resize(pr.p.size());
        c.cum[0] = 0.0;
        for (Eigen::Index k = 0; k + 1 < pr.p.size(); ++k) {
            const double cell =
                0.5 * (std::max(pr.p(k), 0.0) + std::max(pr.p(k + 1), 0.0)) * pr.step;
            c.cum[k + 1] = c.cum[k] + cell;
        }
        if (c.cum.back() <= 0.0) throw DomainError("sample_spots: profile has no mass");
    }

    DataSet ds;
    const std::size_t n_total = n_per_angle * n_angles;
    ds.reserve(n_total, false);
    ds.eta = 1.0;
    ds.seed = seed;
    ds.state_spec = nlohmann::json{{"kind", "image_spots"},
                                   {"angles", n_angles},
                                   {"n_per_angle", n_per_angle}};
    Rng rng(seed);
    for (std::size_t i = 0; i < n_total; ++i) {
        const std::size_t a = i % n_angles;
        const Cdf& c = cdfs[a];
        const double u = rng.uniform() * c.cum.back();
        const auto it = std::upper_bound(c.cum.begin(), c.cum.end(), u);
        std::size_t k = it == c.cum.end() ? c.cum.size() - 1
                                          : static_cast<std::size_t>(it - c.cum.begin());
        if (k == 0) k = 1;
        const double cell = c.cum[k] - c.cum[k - 1];
        const double frac = cell > 0.0 ? (u - c.cum[k - 1]) / cell : 0.5;
        ds.x.push_back(c.x0 + c.step * (static_cast<double>(k - 1) + frac));
        ds.phi.push_back(profiles.profiles[a].theta);
    }
    return ds;
}

Reconstruction image_reconstruct(const DataSet& spots, int d_h, int threads) {
    if (spots.empty()) throw EmptyData("image_reconstruct: no spots");
    return reconstruct_matrix(spots, d_h, 1.0, threads);
}

Reconstruction image_reconstruct_profiles(const RadonProfileSet& profiles, int d_h, int threads) {
    if (profiles.empty()) throw EmptyData("image_reconstruct_profiles: no profiles");
    if (d_h < 1) throw DomainError("image_reconstruct_profiles: cutoff must be positive");
    const std::size_t n_angles = profiles.size();
    for (const RadonProfile& pr : profiles.profiles) {
        if (pr.p.size() < 3)
            throw DomainError("image_reconstruct_profiles: profile needs at least three nodes");
        if (pr.integral() <= 0.0)
            throw DomainError("image_reconstruct_profiles: profile has no mass");
    }
    const int M = d_h;
    const KernelBank bank(M, 1.0);
    std::vector<Eigen::MatrixXcd> fine(n_angles), coarse(n_angles);
    parallel_for(n_angles, static_cast<unsigned>(threads), [&](std::size_t a) {
        const RadonProfile& pr = profiles.profiles[a];
        const Eigen::Index n_nodes = pr.p.size();
        Eigen::MatrixXcd ker(M, M);

        // full-resolution pass and a half-resolution pass; their difference
        // estimates the quadrature error
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::Index stride = pass == 0 ? 1 : 2;
            std::vector<double> xs;
            std::vector<Eigen::Index> idx;
            for (Eigen::Index k = 0; k < n_nodes; k += stride) {
                xs.push_back(pr.x0 + pr.step * k);
                idx.push_back(k);
            }
            if (idx.back() != n_nodes - 1) {
                xs.push_back(pr.x0 + pr.step * (n_nodes - 1));
                idx.push_back(n_nodes - 1);
            }
            const std::vector<double> w = trapezoid_weights(xs);
            double total = 0.0;
            for (std::size_t k = 0; k < idx.size(); ++k) total += w[k] * pr.p(idx[k]);
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(M, M);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const double cw = w[k] * pr.p(idx[k]) / total;
                if (cw == 0.0) continue;
                bank.eval(xs[k], pr.theta, ker);
                acc += cw * ker;
            }
            (pass == 0 ? fine : coarse)[a] = std::move(acc);
        }
    });

    Eigen::MatrixXcd rf = Eigen::MatrixXcd::Zero(M, M);
    Eigen::MatrixXcd rc = Eigen::MatrixXcd::Zero(M, M);
    for (std::size_t a = 0; a < n_angles; ++a) {
        rf += fine[a];
        rc += coarse[a];
    }
    rf /= static_cast<double>(n_angles);
    rc /= static_cast<double>(n_angles);

    Reconstruction rec;
    rec.rho.modes = 1;
    rec.rho.dim = M;
    rec.rho.entries = rf;
    rec.rho.captured = rf.trace().real();
    rec.std_error = ((rf - rc).cwiseAbs().array() + 1e-14).matrix();
    const double max_err = rec.std_error.maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rf, Eigen::EigenvaluesOnly);
    rec.rho.physical = es.eigenvalues().minCoeff() >= -3.0 * max_err;
    return rec;
}

ImagePlane image_render(const DensityMatrix& rho, double x0, double y0, double step, int rows,
                        int cols, int threads) {
    if (rho.modes != 1) throw DomainError("image_render: single-mode matrices only");
    if (rho.dim < 1) throw DomainError("image_render: empty matrix");
    ImagePlane img = ImagePlane::zeros(x0, y0, step, rows, cols);
    const int M = rho.dim;
    parallel_for(rows, static_cast<unsigned>(threads), [&](std::size_t i) {
        for (int j = 0; j < cols; ++j) {
            const double x = img.x_at(j);
            const double y = img.y_at(static_cast<Eigen::Index>(i));
            const double r2 = x * x + y * y;
            const double r = std::sqrt(r2);
            const double yy = 4.0 * r2;
            const Complex ephi = r > 0.0 ? Complex(x / r, y / r) : Complex(1.0, 0.0);
            Complex ph(1.0, 0.0);
            double g = std::exp(-2.0 * r2); // (2r)^d e^{-2 r^2}
            Complex acc(0.0, 0.0);
            for (int d = 0; d < M; ++d) {
                double s = std::exp(-0.5 * log_factorial(d)); // sqrt(n!/(n+d)!) at n = 0
                double lnm = 0.0, lcur = 1.0;                 // generalized Laguerre recurrence
                double sign = 1.0;
                Complex inner(0.0, 0.0);
                for (int n = 0; n + d < M; ++n) {
                    if (n > 0) {
                        const double lnext =
                            ((2.0 * (n - 1) + 1.0 + d - yy) * lcur - (n - 1.0 + d) * lnm) / n;
                        lnm = lcur;
                        lcur = lnext;
                    }
                    inner += rho.entries(n, n + d) * (sign * s * lcur);
                    sign = -sign;
                    s *= std::sqrt((n + 1.0) / (n + 1.0 + d));
                }
                acc += ph * inner * (2.0 * (d == 0 ? 1.0 : 2.0) * g);
                ph *= ephi;
                g *= 2.0 * r;
            }
            img.values(static_cast<Eigen::Index>(i), j) = acc.real() / M_PI;
        }
    });
    return img;
}

double hilbert_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.modes != 1 || b.modes != 1)
        throw DomainError("hilbert_distance: single-mode matrices only");
    const int dim = std::max(a.dim, b.dim);
    double out = 0.0;
    for (int n = 0; n < dim; ++n)
        for (int m = 0; m < dim; ++m) {
            const Complex va = n < a.dim && m < a.dim ? a.entries(n, m) : Complex(0.0, 0.0);
            const Complex vb = n < b.dim && m < b.dim ? b.entries(n, m) : Complex(0.0, 0.0);
            out += std::norm(va - vb);
        }
    return out;
}

DensityMatrix disc_matrix(double radius, int cutoff) {
    if (radius <= 0.0) throw DomainError("disc_matrix: radius must be positive");
    if (cutoff < 1) throw DomainError("disc_matrix: cutoff must be positive");
    const double r2 = radius * radius;
    const QuadratureRule rule = gauss_legendre(200, 0.0, r2);
    DensityMatrix rho;
    rho.modes = 1;
    rho.dim = cutoff;
    rho.entries = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    bool nonneg = true;
    for (int n = 0; n < cutoff; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k)
            acc += rule.w[k] * 2.0 * std::exp(-2.0 * rule.x[k]) * laguerre(n, 0, 4.0 * rule.x[k]);
        const double v = (n % 2 == 0 ? 1.0 : -1.0) * acc / r2;
        rho.entries(n, n) = v;
        if (v < 0.0) nonneg = false;
    }
    rho.captured = rho.entries.trace().real();
    rho.physical = nonneg;
    return rho;
}

ImagePlane inverse_radon_baseline(const RadonProfileSet& profiles, double x0, double y0,
                                  double step, int rows, int cols, int threads) {
    if (profiles.empty()) throw EmptyData("inverse_radon_baseline: no profiles");
    const std::size_t n_angles = profiles.size();
    for (const RadonProfile& pr : profiles.profiles)
        if (pr.p.size() < 3)
            throw DomainError("inverse_radon_baseline: profile needs at least three nodes");

    // principal-value filtered profiles on their own grids: the singular
    // cell is excluded symmetrically and restored by the local linear term
    struct Filtered {
        double x0, step, c, s;
        std::vector<double> g;
        std::vector<double> dp;
    };
    std::vector<Filtered> filt(n_angles);
    parallel_for(n_angles, static_cast<unsigned>(threads), [&](std::size_t a) {
        const RadonProfile& pr = profiles.profiles[a];
        const Eigen::Index K = pr.p.size();
        Filtered& f = filt[a];
        f.x0 = pr.x0;
        f.step = pr.step;
        f.c = std::cos(pr.theta);
        f.s = std::sin(pr.theta);
        f.dp.resize(K);
        f.dp[0] = (pr.p(1) - pr.p(0)) / pr.step;
        f.dp[K - 1] = (pr.p(K - 1) - pr.p(K - 2)) / pr.step;
        for (Eigen::Index k = 1; k + 1 < K; ++k)
            f.dp[k] = (pr.p(k + 1) - pr.p(k - 1)) / (2.0 * pr.step);
        f.g.resize(K);
        for (Eigen::Index j0 = 0; j0 < K; ++j0) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < K; ++j)
                if (j != j0) acc += f.dp[j] / static_cast<double>(j0 - j);
            if (j0 > 0 && j0 + 1 < K)
                acc -= (pr.p(j0 + 1) - 2.0 * pr.p(j0) + pr.p(j0 - 1)) / pr.step;
            f.g[j0] = acc;
        }
    });

    ImagePlane img = ImagePlane::zeros(x0, y0, step, rows, cols);
    parallel_for(rows, static_cast<unsigned>(threads), [&](std::size_t i) {
        for (int j = 0; j < cols; ++j) {
            const double px = img.x_at(j);
            const double py = img.y_at(static_cast<Eigen::Index>(i));
            double acc = 0.0;
            for (const Filtered& f : filt) {
                const double alpha = px * f.c + py * f.s;
                const double sgrid = (alpha - f.x0) / f.step;
                const Eigen::Index K = static_cast<Eigen::Index>(f.g.size());
                if (sgrid >= 0.0 && sgrid <= static_cast<double>(K - 1)) {
                    const double fl = std::floor(sgrid);
                    Eigen::Index k0 = static_cast<Eigen::Index>(fl);
                    if (k0 == K - 1) --k0;
                    const double fr = sgrid - static_cast<double>(k0);
                    acc += (1.0 - fr) * f.g[k0] + fr * f.g[k0 + 1];
                } else {
                    // outside the scanned range there is no singular node
                    double direct = 0.0;
                    for (Eigen::Index k = 0; k < K; ++k)
                        direct += f.dp[k] / (sgrid - static_cast<double>(k));
                    acc += direct;
                }
            }
            img.values(static_cast<Eigen::Index>(i), j) =
                acc / (2.0 * static_cast<double>(n_angles));
        }
    });
    return img;
}

void save_image_pgm(const ImagePlane& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const Eigen::Index rows = img.values.rows();
    const Eigen::Index cols = img.values.cols();
    const double vmax = img.values.maxCoeff();
    out << "P5\n# x0 " << img.x0 << " y0 " << img.y0 << " step " << img.step << "\n"
        << cols << ' ' << rows << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(cols) * 2);
    for (Eigen::Index i = rows; i-- > 0;) { // top row = largest y
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = vmax > 0.0 ? std::clamp(img.values(i, j) / vmax, 0.0, 1.0) : 0.0;
            const unsigned g = static_cast<unsigned>(std::lround(v * 65535.0));
            row[2 * j] = static_cast<unsigned char>((g >> 8) & 0xff);
            row[2 * j + 1] = static_cast<unsigned char>(g & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("failed writing: " + path);
}

void save_image_csv(const ImagePlane& img, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", img.x0, img.y0, img.step);
    out << buf << img.values.rows() << ',' << img.values.cols() << '\n';
    for (Eigen::Index i = 0; i < img.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < img.values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", img.values(i, j));
            out << buf << (j + 1 < img.values.cols() ? "," : "");
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing: " + path);
}

ImagePlane load_image_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty image file: " + path);
    ImagePlane img;
    long rows = 0, cols = 0;
    {
        std::istringstream hdr(line);
        std::string tok;
        double* dsts[3] = {&img.x0, &img.y0, &img.step};
        for (double* d : dsts) {
            if (!std::getline(hdr, tok, ',')) throw ConfigError("bad image header: " + path);
            *d = std::stod(tok);
        }
        if (!std::getline(hdr, tok, ',')) throw ConfigError("bad image header: " + path);
        rows = std::stol(tok);
        if (!std::getline(hdr, tok, ',')) throw ConfigError("bad image header: " + path);
        cols = std::stol(tok);
    }
    if (rows < 1 || cols < 1 || img.step <= 0.0) throw ConfigError("bad image header: " + path);
    img.values.resize(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw ConfigError("truncated image file: " + path);
        std::istringstream row(line);
        std::string tok;
        for (long j = 0; j < cols; ++j) {
            if (!std::getline(row, tok, ',')) throw ConfigError("truncated image row: " + path);
            img.values(i, j) = std::stod(tok);
        }
    }
    return img;
}

} // namespace qtomo
