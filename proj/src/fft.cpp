#include "qcmd/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace qcmd {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::span<Complex> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

struct FourierTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

FourierTransform::FourierTransform(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("fft: zero length");
  std::lock_guard lock(planner_mutex());
  auto* scratch = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_1d(len, scratch, scratch, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_1d(len, scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
  if (plans_->forward == nullptr || plans_->backward == nullptr) {
    throw std::runtime_error("fft: FFTW planning failed");
  }
}

FourierTransform::~FourierTransform() = default;

FourierTransform::FourierTransform(FourierTransform&&) noexcept = default;
FourierTransform& FourierTransform::operator=(FourierTransform&&) noexcept = default;

void FourierTransform::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw std::invalid_argument("fft: length mismatch");
  fftw_execute_dft(plans_->forward, as_fftw(data), as_fftw(data));
}

void FourierTransform::inverse(std::span<Complex> data) const {
  if (data.size() != n_) throw std::invalid_argument("fft: length mismatch");
  fftw_execute_dft(plans_->backward, as_fftw(data), as_fftw(data));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& z : data) z *= scale;
}

}  // namespace qcmd
