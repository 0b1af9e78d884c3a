#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "qcmd/grid.hpp"

namespace qcmd {

/**
 * In-place complex FFT of a fixed length, backed by FFTW.
 *
 * Plans are created with FFTW_ESTIMATE so results are reproducible run to
 * run. Planning is serialized internally; execution is reentrant, so one
 * instance may be shared read-only across threads.
 *
 * forward() computes sum_j f_j e^{-2 pi i jm/n} (no scaling); inverse()
 * computes (1/n) sum_m F_m e^{+2 pi i jm/n}, so inverse(forward(f)) == f.
 */
class FourierTransform {
 public:
  explicit FourierTransform(std::size_t n);
  ~FourierTransform();

  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;
  FourierTransform(FourierTransform&&) noexcept;
  FourierTransform& operator=(FourierTransform&&) noexcept;

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace qcmd
