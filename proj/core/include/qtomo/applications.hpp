#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qtomo/dataset.hpp"
#include "qtomo/detector_sim.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

// How photon statistics are read off data taken with a lossy detector:
// `deconvolved` undoes the loss inside the kernels, so the result refers to
// the state in front of the detector (needs eta > 1/2); `noisy_state` keeps
// the ideal kernels and describes the smeared state the detector actually
// sees, which works at any efficiency.
enum class EtaMode { deconvolved, noisy_state };

// Result of a nonclassicality test. For the three-point test `value[k]`
// holds B(k) built from the reported pmf; for the two-mode test `value`
// holds the single correlation figure C. Errors are delete-one-block
// jackknife estimates; `verdict` counts entries below -5 standard errors.
struct NonclassicalityReport {
    std::string quantity; // "B" or "C"
    std::vector<double> value;
    std::vector<double> std_error;
    std::vector<double> pmf;           // photon pmf behind a B test
    std::vector<double> pmf_std_error; // its per-element standard errors
    int verdict = 0;
    std::size_t n = 0;
};

// Three-point photon-number test on homodyne data:
//   B(k) = (k+2) p(k) p(k+2) - (k+1) p(k+1)^2,  k = 0 .. cutoff-3.
// Any mixture of coherent states has B(k) >= 0 everywhere, so a
// significantly negative entry certifies a nonclassical state.
NonclassicalityReport test_b(const DataSet& data, int cutoff, EtaMode mode, int n_blocks = 20,
                             int threads = 1);

// Same figures from an exact distribution: zero errors, verdict counts
// strictly negative entries (beyond numerical noise).
NonclassicalityReport test_b_pmf(const std::vector<double>& pmf);

// Two-mode photon-correlation test on joint homodyne data:
//   C = <(n1 - n2)^2> - <n1 - n2>^2 - <n1 + n2>,
// negative only when the mode-difference fluctuations beat the shot-noise
// floor. Moments are taken with ideal-detector kernels, so the verdict
// refers to the smeared state seen at efficiency data.eta.
NonclassicalityReport test_c(const TwoModeDataSet& data, int n_blocks = 20, int threads = 1);

// C predicted for a twin beam of parameter xi observed at efficiency eta.
double twin_beam_c_theory(Complex xi, double eta);

// One arm of a twin beam conditioned on a measurement of the other arm
// through a detector of efficiency eta_r: a heterodyne outcome alpha leaves
// a displaced thermal state, a photocount n a mixture of Fock states.
struct ReducedStateSpec {
    enum class Kind { heterodyne, photocount };
    Kind kind = Kind::heterodyne;
    Complex xi{0.0, 0.0};
    double eta_r = 1.0;
    Complex alpha{0.0, 0.0}; // heterodyne outcome
    int n = 0;               // photocount outcome

    // Twin-beam parameter with the conditioning loss folded in.
    double eta_xi() const;
    // Center of the conditioned state (heterodyne case).
    Complex gamma() const;
    // Fidelity between the conditioned state and the one an ideal
    // conditioning detector (eta_r = 1) would have left.
    double fidelity_theory() const;
};

// The conditioned state as an explicit density matrix (Fock cutoff grown
// until the captured trace reaches 1 - 1e-12).
DensityMatrix reduced_state_matrix(const ReducedStateSpec& spec);

// Homodyne records of the conditioned state at detector efficiency eta_h.
DataSet sample_reduced_state(const ReducedStateSpec& spec, std::size_t n_records, double eta_h,
                             PhasePolicy policy, std::uint64_t seed, int threads = 1);

// Per-record kernel whose homodyne average gives the fidelity between the
// conditioned state and its loss-free counterpart. Bounded only for
// eta_h > eta_xi()/2; throws EtaBoundViolation at or below that threshold.
double sr_fidelity_kernel(const ReducedStateSpec& spec, double eta_h, double x, double phi);

struct SrFidelity {
    double f = 0.0;
    double std_error = 0.0;
    double f_theory = 0.0;
    std::size_t n = 0;
};

// Fidelity estimate from homodyne data of the conditioned state; the data
// efficiency data.eta is the homodyne efficiency entering the kernel.
SrFidelity sr_fidelity(const ReducedStateSpec& spec, const DataSet& data, int n_blocks = 20,
                       int threads = 1);

// Fock-basis matrix of a single-mode map measured with a twin beam: the map
// acts on arm 1, both arms are read by independent homodyne detectors, and
// every element <<i,j| R |l,k>> is a weighted average of kernel products.
// Pair indices are row-major, (i,j) -> i*cutoff + j. a_diag holds
// A_n = sqrt(<<n,n|R|n,n>>) with propagated errors; a_theory the exact
// |<n|D(z)|n>| of the displacement map used as the benchmark.
struct ProcessMatrix {
    int cutoff = 0;
    Eigen::MatrixXcd entries;
    Eigen::MatrixXd std_error;
    std::vector<double> a_diag;
    std::vector<double> a_std_error;
    std::vector<double> a_theory;
    bool variance_warning = false; // |xi| < 1/2: the 1/xi^(j+k) weights amplify noise
    std::size_t n = 0;
    int blocks = 0;
};

// Simulate the twin-beam measurement of the displacement map D(z) and
// estimate its process matrix. Requires eta in (1/2, 1] and 0 < |xi| < 1.
ProcessMatrix estimate_process_matrix(Complex z, Complex xi, double eta, std::size_t n_records,
                                      int cutoff, int n_blocks = 150, std::uint64_t seed = 1,
                                      int threads = 1);

// CSV rows `n,A,stderr,theory` for the diagonal amplitudes.
void save_process_diag_csv(const ProcessMatrix& pm, const std::string& path);

void to_json(nlohmann::json& j, const NonclassicalityReport& rep);
void to_json(nlohmann::json& j, const SrFidelity& f);
void to_json(nlohmann::json& j, const ProcessMatrix& pm);

} // namespace qtomo
