#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qtomo {

// One quadrature sample. For single-LO multimode data the mixing angles are
// carried along; single-mode records leave them at zero.
struct HomodyneRecord {
    double x = 0.0;
    double phi = 0.0;
    double theta = 0.0;
    double psi0 = 0.0;
    double psi1 = 0.0;
    double eta = 1.0;
};

// Column-oriented set of homodyne records plus provenance. The angle columns
// are allocated only for multimode data.
class DataSet {
  public:
    std::vector<double> x;
    std::vector<double> phi;
    std::vector<double> theta; // empty unless multimode
    std::vector<double> psi0;  // empty unless multimode
    std::vector<double> psi1;  // empty unless multimode

    double eta = 1.0;
    std::uint64_t seed = 0;
    nlohmann::json state_spec; // provenance: what was simulated

    std::size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }
    bool multimode() const { return !theta.empty(); }

    HomodyneRecord record(std::size_t i) const {
        HomodyneRecord r;
        r.x = x[i];
        r.phi = phi[i];
        r.eta = eta;
        if (multimode()) {
            r.theta = theta[i];
            r.psi0 = psi0[i];
            r.psi1 = psi1[i];
        }
        return r;
    }

    void reserve(std::size_t n, bool with_angles) {
        x.reserve(n);
        phi.reserve(n);
        if (with_angles) {
            theta.reserve(n);
            psi0.reserve(n);
            psi1.reserve(n);
        }
    }

    // CSV (header `x,phi[,theta,psi0,psi1]`) plus a JSON sidecar holding
    // seed, eta, state spec and record count. `path` names the CSV; the
    // sidecar gets the extra extension ".json".
    void save(const std::string& csv_path) const;
    static DataSet load(const std::string& csv_path);
};

// Two independently detected modes (two local oscillators): per-record
// quadratures and phases of each mode.
class TwoModeDataSet {
  public:
    std::vector<double> x1, phi1, x2, phi2;
    double eta = 1.0;
    std::uint64_t seed = 0;
    nlohmann::json state_spec;

    std::size_t size() const { return x1.size(); }
    bool empty() const { return x1.empty(); }

    void save(const std::string& csv_path) const;
    static TwoModeDataSet load(const std::string& csv_path);
};

} // namespace qtomo
