#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qtomo/dataset.hpp"
#include "qtomo/detector_sim.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

// One phase harmonic carrying a polynomial in x:
// e^{i harmonic phi} * sum_k coeffs[k] x^k.
struct PhasePolyTerm {
    int harmonic = 0;
    std::vector<Complex> coeffs;
};

// Structured descriptions of what an estimator computes. Estimators built by
// this module carry one of these so that later passes (efficiency
// deconvolution, adaptive optimization) can transform them exactly instead
// of guessing from the opaque callable.
struct PhasePolyPayload {
    std::vector<PhasePolyTerm> terms;
};
struct MatrixElementPayload {
    int n = 0, d = 0;
    double eta = 1.0;
};
struct FactorizedPayload {
    int n = 0, d = 0;
};
struct WignerPayload {
    double s = 0.0;
    Complex alpha{0.0, 0.0};
    double eta = 1.0;
};
struct CustomPayload {};
using EstimatorPayload = std::variant<CustomPayload, PhasePolyPayload, MatrixElementPayload,
                                      FactorizedPayload, WignerPayload>;

// A pattern function: maps one homodyne record to a complex value whose data
// average estimates `target`. eta_min/eta_max delimit the data efficiency
// the kernel is valid for; `bound` is set when |eval| has a finite sup.
struct Estimator {
    std::string target;
    std::function<Complex(const HomodyneRecord&)> eval;
    double eta_min = 0.0;
    double eta_max = 1.0;
    std::optional<double> bound;
    EstimatorPayload payload{};
};

// Monte Carlo average with the block bookkeeping needed for error bars and
// the Gaussianity diagnostic. std_error is the standard error
// sqrt(sum |z_i - mean|^2 / (N(N-1))) over the complex values.
struct AverageResult {
    Complex mean{0.0, 0.0};
    double std_error = 0.0;
    std::size_t n = 0;
    int blocks = 0;
    std::vector<Complex> block_means;
};

// Streaming block reducer: values are attributed to contiguous blocks by
// record index, so any evaluation order (including parallel) yields the
// same result.
class BlockAccumulator {
  public:
    BlockAccumulator(std::size_t n_records, int n_blocks = 20);
    void add(std::size_t index, Complex value);
    AverageResult finish() const;
    int blocks() const { return n_blocks_; }
    std::size_t block_begin(int b) const;
    std::size_t block_end(int b) const;

  private:
    std::size_t n_ = 0;
    int n_blocks_ = 0;
    std::vector<Complex> sum_;
    std::vector<double> sum_abs2_;
    std::vector<std::size_t> count_;
};

// Reduce an explicit value list (block partition by index order).
AverageResult average_values(const std::vector<Complex>& values, int n_blocks = 20);

// Advisory normality score of the block means: sum over blocks of
// N_b |z_b - mean|^2 / (N std_error^2); approximately the block count for
// Gaussian statistics.
double gaussianity_chi2(const AverageResult& r);

// Kernel averaging to the matrix element <n|rho|n+d> (d >= 0) from data at
// efficiency eta in (1/2, 1]; the k-integral is evaluated once at
// construction on a 200-node Gauss-Legendre rule truncated where the
// Gaussian damping reaches 1e-12. Throws EtaOutOfDomain for eta <= 1/2.
Estimator kernel_matrix_element(int n, int d, double eta);

// Ideal-detection (eta = 1) kernel for <n|rho|n+d> in factorized form:
// e^{i d phi} [4x u_n v_{n+d} - 2 sqrt(n+1) u_{n+1} v_{n+d}
//              - 2 sqrt(n+d+1) u_n v_{n+d+1}]
// with u the oscillator wavefunctions and v the irregular second solutions.
Estimator kernel_factorized(int n, int d);

// Observables with closed-form kernels.
struct Observable {
    enum class Kind { a, a2, n, n2, normal_moment, wigner_point };
    Kind kind = Kind::n;
    int ord_n = 0, ord_m = 0; // normal_moment <a^dag^n a^m>
    double s = 0.0;           // wigner_point ordering
    Complex alpha{0.0, 0.0};  // wigner_point location

    static Observable annihilation();
    static Observable annihilation_sq();
    static Observable photon_number();
    static Observable photon_number_sq();
    static Observable normal_moment(int n, int m);
    static Observable wigner_point(double s, Complex alpha);
};

// Estimator converging to Tr[rho O] on data at efficiency eta. For
// wigner_point the ordering must satisfy s < 1 - 1/eta (SOutOfDomain
// otherwise).
Estimator kernel_observable(const Observable& o, double eta);

// Wrap a phase-harmonic polynomial payload as an estimator valid for data
// at the given efficiency.
Estimator make_phase_poly_estimator(std::string target, PhasePolyPayload payload, double eta);

// Kernel over displaced-parity records, averaging to <n|rho|n+d>.
struct ParityEstimator {
    int n = 0, d = 0;
    Complex eval(Complex alpha) const;
};
ParityEstimator kernel_displaced_parity(int n, int d);

// Average a kernel over a data set. Throws EmptyData on an empty set and
// EtaOutOfDomain when the data efficiency is outside the kernel's domain.
AverageResult average(const Estimator& est, const DataSet& data, int n_blocks = 20,
                      int threads = 1);

// Average a displaced-parity kernel over records drawn uniformly on the
// disc of the given radius (the weight radius^2 * parity * kernel makes the
// disc average an unbiased estimate up to the outside-disc tail).
AverageResult average_parity(const ParityEstimator& est, const std::vector<ParityRecord>& records,
                             double radius, int n_blocks = 20);

// Per-record evaluation of every matrix-element kernel up to a cutoff,
// sharing one node table across elements and records. eval fills
// out(row, col) with the kernel whose data average estimates <row|rho|col>
// (both triangles); eval_diagonal fills only the photon-number kernels
// out(n) -> <n|rho|n>. Same efficiency domain as kernel_matrix_element.
class KernelBank {
  public:
    KernelBank(int cutoff, double eta);
    int cutoff() const { return cutoff_; }
    double eta() const { return eta_; }
    void eval(double x, double phi, Eigen::MatrixXcd& out) const;
    void eval_diagonal(double x, Eigen::VectorXd& out) const;

  private:
    struct Table;
    int cutoff_ = 0;
    double eta_ = 1.0;
    bool ideal_ = true;
    std::shared_ptr<const Table> table_; // null on the ideal path
};

// Density matrix reconstructed element by element with its standard errors.
struct Reconstruction {
    DensityMatrix rho;
    Eigen::MatrixXd std_error;
};

// Reconstruct all elements (n, n+d), 0 <= n, n+d < cutoff, sharing the
// per-record tables across elements. eta = 1 uses the factorized kernels;
// 1/2 < eta < 1 the numeric ones. The matrix is flagged non-physical when
// an eigenvalue drops below -3 max(std_error).
Reconstruction reconstruct_matrix(const DataSet& data, int cutoff, double eta, int threads = 1);

void to_json(nlohmann::json& j, const Reconstruction& rec);
void from_json(const nlohmann::json& j, Reconstruction& rec);

// CSV rows `n,d,re,im,stderr` for every reconstructed element.
void save_reconstruction_csv(const Reconstruction& rec, const std::string& path);

} // namespace qtomo
