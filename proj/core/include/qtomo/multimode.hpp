#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/dataset.hpp"
#include "qtomo/estimators.hpp"

namespace qtomo {

// Hyper-spherical parameterization of a normalized mode combination
// A = sum_l e^{-i psi_l} u_l(theta) a_l over M+1 modes.  theta has M entries,
// psi has M+1; amplitudes() returns the unit vector u.
struct ModeAngles {
    std::vector<double> theta;
    std::vector<double> psi;

    std::vector<double> amplitudes() const;
};

// kappa = 2 eta / (2 eta - 1); throws EtaOutOfDomain unless 1/2 < eta <= 1.
double kappa_param(double eta);

// Single-LO estimator value for the matrix element <bra| rho |ket> given one
// quadrature outcome x of the combined mode selected by `angles`.  Works for
// any mode count (bra/ket/psi same length, theta one shorter); the radial
// integral uses Gauss-Laguerre quadrature with `nodes` points.
Complex mm_kernel_value(const std::vector<int>& bra, const std::vector<int>& ket, double eta,
                        double x, const ModeAngles& angles, int nodes = 150);

// Two-mode estimator adapters over homodyne records carrying (x, theta,
// psi0, psi1).  Each averages (via `average`) to the stated quantity.
Estimator kernel_mm_matrix_element(std::vector<int> bra, std::vector<int> ket, double eta,
                                   int nodes = 150);
Estimator kernel_joint_photon(int n, int m, double eta, int nodes = 150);  // p(n, m)
Estimator kernel_total_photon(int n, double eta, int nodes = 150);         // Prob(N_tot = n)

struct TotalPhotonMoments {
    AverageResult first;   // <a^+a + b^+b>
    AverageResult second;  // <(a^+a + b^+b)^2>
};

// Closed-form polynomial estimators for the first two total-photon moments,
// averaged over the data set (no angles needed).
TotalPhotonMoments total_photon_moments(const DataSet& data, int n_blocks = 20, int threads = 1);

// Joint photon-number distribution p(n, m) for n, m < cutoff from two-mode
// single-LO data.  The kernel is complex; `imag` holds the imaginary part of
// the averages as a consistency diagnostic (it estimates zero).
struct JointPmf {
    Eigen::MatrixXd p;
    Eigen::MatrixXd std_error;
    Eigen::MatrixXd imag;
    std::size_t n = 0;
};
JointPmf reconstruct_joint_pmf(const DataSet& data, int cutoff, double eta, int threads = 1,
                               int nodes = 150);

// Total photon-number distribution Prob(N_tot = n) for n < cutoff; works
// even when the mixing angles were not recorded.
struct TotalPmf {
    std::vector<double> p;
    std::vector<double> std_error;
    std::vector<double> imag;
    std::size_t n = 0;
};
TotalPmf reconstruct_total_pmf(const DataSet& data, int cutoff, double eta, int threads = 1,
                               int nodes = 150);

void save_joint_pmf_csv(const JointPmf& pmf, const std::string& path);

} // namespace qtomo
