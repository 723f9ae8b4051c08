#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "qtomo/states.hpp"

namespace qtomo {

// Outcome counts of projective spin-1/2 measurements along the three Pauli
// axes. Axis order is x, y, z; bucket 0 counts the spin-up (+1/2) outcome,
// bucket 1 the spin-down one.
struct SpinCounts {
    std::array<std::array<std::uint64_t, 2>, 3> counts{};

    std::uint64_t total(int axis) const { return counts[axis][0] + counts[axis][1]; }

    // Empirical Pauli expectation on the axis: (N+ - N-)/(N+ + N-).
    double pauli_mean(int axis) const;

    // CSV with header `axis,outcome,count`; axis is one of x, y, z and the
    // sign of the outcome column selects the bucket. Rows accumulate.
    static SpinCounts load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
};

// Linear reconstruction of a spin-1/2 state from the three-axis frequencies:
// rho = I/2 + sum_a s_a sigma_a / 2 with s_a the empirical Pauli means,
// divided by (1 - p_depol) to unbias a depolarizing channel of that
// strength. Sampling noise can push the estimate outside the Bloch ball;
// such outputs are flagged non-physical, never projected (projection would
// bias the otherwise unbiased linear estimate).
DensityMatrix spin12_reconstruct(const SpinCounts& counts, double p_depol = 0.0);

} // namespace qtomo
