#pragma once

// Gain evaluation over the whole UV disc: regular grids for gain maps and the
// hemisphere-wide peak search behind the noise penalty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include "covrage/array_model.hpp"

namespace covrage {

// Square grid over [-1, 1]^2 in UV space, cell centres at
// -1 + 2 (i + 0.5) / resolution. Row index runs along v, column along u.
struct UvGrid {
  int resolution = 512;

  double coord(int i) const { return -1.0 + 2.0 * (i + 0.5) / resolution; }
  double cell_size() const { return 2.0 / resolution; }
  UvPoint point(int row, int col) const { return {coord(col), coord(row)}; }
};

// Gain values over a UvGrid, row-major; cells outside the unit disc hold NaN.
struct GainGrid {
  UvGrid grid;
  std::vector<double> gain_dbi;

  double at(int row, int col) const {
    return gain_dbi[static_cast<std::size_t>(row) * static_cast<std::size_t>(grid.resolution) +
                    static_cast<std::size_t>(col)];
  }
  bool valid(int row, int col) const { return !std::isnan(at(row, col)); }
};

// Gain of `awv` on every grid cell. Uses the separable form of the array
// coefficient, so the cost is O(R * nx * ny + R^2 * nx) instead of
// O(R^2 * nx * ny). Rows are split across `threads` workers; each worker owns
// a disjoint slice of the output, so the result does not depend on scheduling.
inline GainGrid evaluate_gain_grid(const Awv& awv, const ArrayConfig& cfg, UvGrid grid, unsigned threads = 0) {
  if (awv.nx() != cfg.nx || awv.ny() != cfg.ny) throw ConfigError("AWV shape does not match the array");
  if (grid.resolution < 2) throw ConfigError("grid resolution must be >= 2");
  const int r = grid.resolution;
  const int nx = cfg.nx;
  const int ny = cfg.ny;
  const double k = 2.0 * kPi * cfg.spacing_wavelengths;

  std::vector<Complex> phase_u(static_cast<std::size_t>(r) * static_cast<std::size_t>(nx));
  for (int c = 0; c < r; ++c)
    for (int x = 0; x < nx; ++x)
      phase_u[static_cast<std::size_t>(c) * nx + x] = unit_phasor(-k * x * grid.coord(c));

  GainGrid out{grid, std::vector<double>(static_cast<std::size_t>(r) * static_cast<std::size_t>(r))};

  auto work = [&](int row_begin, int row_end) {
    std::vector<Complex> partial(static_cast<std::size_t>(nx));
    for (int row = row_begin; row < row_end; ++row) {
      const double v = grid.coord(row);
      // partial[x] = sum_y w(x, y) e^{-jk y v}
      std::fill(partial.begin(), partial.end(), Complex{0.0, 0.0});
      for (int y = 0; y < ny; ++y) {
        const Complex py = unit_phasor(-k * y * v);
        for (int x = 0; x < nx; ++x) partial[static_cast<std::size_t>(x)] += awv.at(x, y) * py;
      }
      for (int col = 0; col < r; ++col) {
        const double u = grid.coord(col);
        double& slot = out.gain_dbi[static_cast<std::size_t>(row) * r + col];
        if (u * u + v * v > 1.0) {
          slot = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        Complex c{0.0, 0.0};
        const Complex* pu = &phase_u[static_cast<std::size_t>(col) * nx];
        for (int x = 0; x < nx; ++x) c += partial[static_cast<std::size_t>(x)] * pu[x];
        slot = gain_from_coefficient(c);
      }
    }
  };

  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(r));
  if (n_threads <= 1) {
    work(0, r);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (r + static_cast<int>(n_threads) - 1) / static_cast<int>(n_threads);
    for (int begin = 0; begin < r; begin += chunk) pool.emplace_back(work, begin, std::min(r, begin + chunk));
  }
  return out;
}

struct GainPeak {
  UvPoint location;
  double gain_dbi = kGainFloorDbi;
};

// Global maximum of the gain over the UV disc: coarse grid search, then a
// local pattern search (step halving) around the best cell.
inline GainPeak find_gain_peak(const Awv& awv, const ArrayConfig& cfg, int resolution = 512) {
  const GainGrid g = evaluate_gain_grid(awv, cfg, UvGrid{resolution});
  GainPeak best;
  best.gain_dbi = -std::numeric_limits<double>::infinity();
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      const double val = g.at(row, col);
      if (!std::isnan(val) && val > best.gain_dbi) best = {g.grid.point(row, col), val};
    }
  }

  double step = g.grid.cell_size() / 2.0;
  while (step > 1e-7) {
    bool moved = false;
    for (const auto& [du, dv] : {std::pair{1.0, 0.0}, std::pair{-1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{0.0, -1.0}}) {
      const UvPoint cand{best.location.u + du * step, best.location.v + dv * step};
      if (!cand.valid()) continue;
      const double val = directional_gain(awv, cfg, cand);
      if (val > best.gain_dbi) {
        best = {cand, val};
        moved = true;
      }
    }
    if (!moved) step /= 2.0;
  }
  return best;
}

}  // namespace covrage
