#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qtomo/dataset.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

// Phase schedule for the local oscillator. uniform_random draws each phase
// from [0, pi); equally_spaced cycles deterministically through F phases
// pi*j/F, j = 0..F-1.
struct PhasePolicy {
    enum class Kind { uniform_random, equally_spaced };
    Kind kind = Kind::uniform_random;
    int phases = 0;

    static PhasePolicy uniform_random() { return {}; }
    static PhasePolicy equally_spaced(int f);
};

// Homodyne records for a single-mode state. x is drawn from the ideal
// quadrature density by a tabulated inverse CDF (grid step 1e-3 over
// mean +/- 8 sigma); detection loss adds Gaussian noise of variance
// (1-eta)/(4 eta). Reproducible: blocks of 65536 records each use an RNG
// stream derived from (seed, block), concatenated in block order.
DataSet sample_homodyne(const DensityMatrix& rho, std::size_t n, double eta, PhasePolicy policy,
                        std::uint64_t seed, int threads = 1);

// Same, by state description. Gaussian state kinds use the closed-form
// quadrature distribution instead of the table.
DataSet sample_homodyne(const StateSpec& spec, std::size_t n, double eta, PhasePolicy policy,
                        std::uint64_t seed, int threads = 1);

// Photon counts: ideal level drawn from the diagonal, then each photon
// survives with probability eta (Bernoulli thinning).
std::vector<int> sample_photocount(const DensityMatrix& rho, std::size_t n, double eta,
                                   std::uint64_t seed);

// Heterodyne outcomes: z drawn from the Husimi Q density of rho (polar-grid
// inverse CDF), then complex Gaussian noise of total variance (1-eta)/eta.
std::vector<Complex> sample_heterodyne(const DensityMatrix& rho, std::size_t n, double eta,
                                       std::uint64_t seed);

// Normally ordered moment <a^dag^n a^m> recovered from heterodyne outcomes:
// the sample average of conj(z)^n z^m is corrected for the detection noise
// (power (1-eta)/eta per contraction) and reordered to normal form.
Complex heterodyne_moment(const std::vector<Complex>& samples, int n, int m, double eta);

// Single-LO homodyne of the two-mode twin-beam state: per record, cos(2 theta)
// uniform on [-1,1], psi0/psi1 uniform on [0,2pi), then x Gaussian with
// variance [1+|xi|^2+2|xi| sin(2 theta) cos(psi0+psi1-arg xi)]/[4(1-|xi|^2)]
// plus (1-eta)/(4 eta).
DataSet sample_twin_beam_homodyne(Complex xi, std::size_t n, double eta, std::uint64_t seed,
                                  int threads = 1);

// Two independent homodyne detectors on the twin beam, LO phases phi1/phi2
// uniform on [0, pi); the pair (x1,x2) is jointly Gaussian with per-mode
// variance (2 nbar+1)/4 + (1-eta)/(4 eta) and covariance
// Re[xi exp(-i(phi1+phi2))]/(2(1-|xi|^2)). displace1 displaces mode 1.
TwoModeDataSet sample_twin_beam_two_lo(Complex xi, std::size_t n, double eta, std::uint64_t seed,
                                       Complex displace1 = {0.0, 0.0}, int threads = 1);

// One displaced-parity measurement: displacement alpha and the measured
// parity outcome (+1/-1).
struct ParityRecord {
    Complex alpha;
    int parity = 1;
};

// Displacements uniform on the disc |alpha| <= radius; parity +1 with
// probability (1 + pi/2 W(alpha))/2.
std::vector<ParityRecord> sample_displaced_parity(const DensityMatrix& rho, std::size_t n,
                                                  double radius, std::uint64_t seed);

} // namespace qtomo
