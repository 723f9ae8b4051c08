#pragma once

#include <cstddef>
#include <vector>

namespace qtomo {

// Uniform rectangular grid of real values over a region of the complex
// plane (alpha = x + i y). values is row-major: values[iy * nx + ix] holds
// the sample at (x0 + ix*dx, y0 + iy*dy). `s` records which ordering of the
// quasi-probability family the samples belong to (s = 0 Wigner, s = -1 Q, ...).
struct PlaneGrid {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    int nx = 0;
    int ny = 0;
    double s = 0.0;
    std::vector<double> values;

    double x_at(int ix) const { return x0 + ix * dx; }
    double y_at(int iy) const { return y0 + iy * dy; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
};

} // namespace qtomo
