#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/dataset.hpp"
#include "qtomo/estimators.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

// A sampled plane image. values(i, j) sits at x = x0 + j*step,
// y = y0 + i*step; source images are >= 0, reconstructions may dip below.
struct ImagePlane {
    double x0 = 0.0;
    double y0 = 0.0;
    double step = 1.0;
    Eigen::MatrixXd values;

    double x_at(Eigen::Index j) const { return x0 + step * static_cast<double>(j); }
    double y_at(Eigen::Index i) const { return y0 + step * static_cast<double>(i); }
    double mass() const { return values.sum() * step * step; }

    static ImagePlane zeros(double x0, double y0, double step, int rows, int cols);
};

// One projection: p(k) sampled at x = x0 + k*step along the axis at angle
// theta (radians). integral() is the trapezoid mass of the profile.
struct RadonProfile {
    double theta = 0.0;
    double x0 = 0.0;
    double step = 1.0;
    Eigen::VectorXd p;

    double integral() const;
};

struct RadonProfileSet {
    std::vector<RadonProfile> profiles;

    std::size_t size() const { return profiles.size(); }
    bool empty() const { return profiles.empty(); }
};

// Centered disc of the given radius, rasterized with 4x4 supersampled edge
// coverage; the grid spans [-radius - pad, radius + pad] in both directions.
ImagePlane make_disc_image(double radius, double step, double pad = 0.5);

// Exact profiles of the centered disc: p(x) = (2/pi) sqrt(R^2 - x^2) on a
// grid of the given half range and step, replicated over n_angles equally
// spaced angles pi*j/n_angles.
RadonProfileSet disc_profiles(double radius, int n_angles, double half_range, double step);

// Line integrals (1/pi measure) of the image along the direction
// perpendicular to each projection axis, by bilinear interpolation at the
// image's own grid spacing. A mass-m image yields profiles of integral m/pi.
RadonProfileSet radon_project(const ImagePlane& img, const std::vector<double>& angles,
                              int threads = 1);

// Draw x-spots per angle by inverse CDF on each (clamped-nonnegative,
// internally normalized) profile. Record i carries the angle of profile
// i % F in the phi column; n_per_angle spots are drawn for each angle.
DataSet sample_spots(const RadonProfileSet& profiles, std::size_t n_per_angle, std::uint64_t seed);

// Compress a spot set into a Fock-basis matrix with the ideal-detection
// kernels; the matrix may be non-physical (it describes an image, not a
// state). Thin wrapper over the elementwise reconstruction.
Reconstruction image_reconstruct(const DataSet& spots, int d_h, int threads = 1);

// Deterministic variant on sampled profiles: per-angle trapezoid quadrature
// of the kernels against the normalized profiles. std_error holds a
// quadrature refinement estimate (full-resolution vs half-resolution
// difference), not a statistical error; the angle set is taken as given.
Reconstruction image_reconstruct_profiles(const RadonProfileSet& profiles, int d_h,
                                          int threads = 1);

// Render the phase-space density of a matrix on a grid: a truncated
// harmonic series in arg(alpha) with Laguerre radial factors. A trace-one
// matrix integrates to 1 over the plane; rescale by the source mass to
// restore gray levels.
ImagePlane image_render(const DensityMatrix& rho, double x0, double y0, double step, int rows,
                        int cols, int threads = 1);

// Squared distance between two matrices, sum |a - b|^2 over elements (equal
// to the plane integral of the squared rendered difference). The smaller
// matrix is zero-padded to the larger cutoff.
double hilbert_distance(const DensityMatrix& a, const DensityMatrix& b);

// Exact matrix of the centered disc (diagonal by isotropy):
// rho_nn = (-1)^n (1/R^2) Int_0^{R^2} 2 e^{-2s} L_n(4s) ds.
DensityMatrix disc_matrix(double radius, int cutoff);

// Filtered back-projection baseline: principal-value filtering of the
// profile derivative (symmetric exclusion of the singular cell plus the
// local correction), then backprojection over equally spaced angles.
// Documented as biased near edges and outside the support.
ImagePlane inverse_radon_baseline(const RadonProfileSet& profiles, double x0, double y0,
                                  double step, int rows, int cols, int threads = 1);

// 16-bit binary PGM, gray levels spanning [0, max value]; rows are written
// top-down (largest y first). A comment line records x0, y0 and step.
void save_image_pgm(const ImagePlane& img, const std::string& path);

// CSV grid: header row `x0,y0,step,rows,cols`, then one row per grid row.
void save_image_csv(const ImagePlane& img, const std::string& path);
ImagePlane load_image_csv(const std::string& path);

} // namespace qtomo
