#include "qtomo/spin.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qtomo/errors.hpp"

namespace qtomo {

namespace {

int axis_index(const std::string& name) {
    if (name == "x" || name == "X") return 0;
    if (name == "y" || name == "Y") return 1;
    if (name == "z" || name == "Z") return 2;
    throw ConfigError("spin counts: unknown axis '" + name + "'");
}

std::string trimmed(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

double SpinCounts::pauli_mean(int axis) const {
    const std::uint64_t plus = counts[axis][0];
    const std::uint64_t minus = counts[axis][1];
    const std::uint64_t tot = plus + minus;
    if (tot == 0) throw EmptyData("spin counts: axis has no outcomes");
    return (static_cast<double>(plus) - static_cast<double>(minus)) / static_cast<double>(tot);
}

SpinCounts SpinCounts::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spin counts file: " + path);
    SpinCounts out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string row = trimmed(line);
        if (row.empty()) continue;
        if (first) {
            first = false;
            if (row.rfind("axis", 0) == 0) continue; // header
        }
        std::istringstream ss(row);
        std::string axis_field, outcome_field, count_field;
        if (!std::getline(ss, axis_field, ',') || !std::getline(ss, outcome_field, ',') ||
            !std::getline(ss, count_field, ','))
            throw ConfigError("spin counts: malformed row '" + row + "'");
        const int axis = axis_index(trimmed(axis_field));
        double outcome = 0.0;
        long long count = 0;
        try {
            outcome = std::stod(trimmed(outcome_field));
            count = std::stoll(trimmed(count_field));
        } catch (const std::exception&) {
            throw ConfigError("spin counts: malformed row '" + row + "'");
        }
        if (outcome == 0.0)
            throw ConfigError("spin counts: outcome must be signed, got 0 in '" + row + "'");
        if (count < 0) throw ConfigError("spin counts: negative count in '" + row + "'");
        out.counts[axis][outcome > 0.0 ? 0 : 1] += static_cast<std::uint64_t>(count);
    }
    return out;
}

void SpinCounts::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "axis,outcome,count\n";
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
        out << names[a] << ",0.5," << counts[a][0] << "\n";
        out << names[a] << ",-0.5," << counts[a][1] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

DensityMatrix spin12_reconstruct(const SpinCounts& counts, double p_depol) {
    if (!(p_depol >= 0.0 && p_depol < 1.0))
        throw DomainError("spin12_reconstruct: depolarizing strength must lie in [0, 1)");
    double s[3];
    for (int a = 0; a < 3; ++a) s[a] = counts.pauli_mean(a) / (1.0 - p_depol);

    DensityMatrix rho;
    rho.modes = 1;
    rho.dim = 2;
    rho.entries.resize(2, 2);
    rho.entries(0, 0) = Complex(0.5 * (1.0 + s[2]), 0.0);
    rho.entries(1, 1) = Complex(0.5 * (1.0 - s[2]), 0.0);
    rho.entries(0, 1) = Complex(0.5 * s[0], -0.5 * s[1]);
    rho.entries(1, 0) = std::conj(rho.entries(0, 1));
    rho.captured = 1.0;
    // Eigenvalues are (1 +- |s|)/2, so the Bloch length decides physicality.
    const double bloch = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    rho.physical = bloch <= 1.0 + 1e-12;
    return rho;
}

} // namespace qtomo
