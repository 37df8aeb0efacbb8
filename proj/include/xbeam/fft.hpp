#pragma once

/// \file
/// Minimal RAII layer over FFTW for 2D complex transforms on a TransverseGrid.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "xbeam/core.hpp"

namespace xbeam::fft {

namespace detail {
// The FFTW planner is not re-entrant; execution of an existing plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;
}  // namespace detail

/// Forward and backward 2D plans for one grid shape. FFTW_ESTIMATE keeps the
/// chosen algorithm, and therefore every rounding, reproducible run to run.
class Plan2D {
 public:
  explicit Plan2D(const TransverseGrid& grid) : nx_(grid.nx()), ny_(grid.ny()) {
    std::vector<complex> scratch(nx_ * ny_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(detail::planner_mutex());
    const int n0 = static_cast<int>(ny_), n1 = static_cast<int>(nx_);
    forward_.reset(fftw_plan_dft_2d(n0, n1, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED));
    backward_.reset(fftw_plan_dft_2d(n0, n1, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED));
  }

  /// In-place unnormalized forward transform.
  void forward(std::vector<complex>& data) const { run(forward_.get(), data); }

  /// In-place inverse transform including the 1/(nx ny) factor.
  void backward(std::vector<complex>& data) const {
    run(backward_.get(), data);
    const double scale = 1.0 / static_cast<double>(nx_ * ny_);
    for (auto& v : data) v *= scale;
  }

 private:
  void run(fftw_plan p, std::vector<complex>& data) const {
    auto* d = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, d, d);
  }

  std::size_t nx_, ny_;
  detail::PlanHandle forward_, backward_;
};

}  // namespace xbeam::fft
