#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace phaselab {

using cplx = std::complex<double>;

namespace detail {

// Unnormalized 1D complex DFT of a fixed size.
//
// Plans are created once per size (planning is not thread-safe in FFTW, so it
// happens under a lock) and executed through the new-array interface, which
// is. FFTW_ESTIMATE keeps planning deterministic; FFTW_UNALIGNED lets us run
// on any std::vector storage.
class FftPlan {
 public:
  static const FftPlan& get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new FftPlan(n));
    return *slot;
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t size() const noexcept { return n_; }

  /// out[q] = sum_j in[j] exp(-2 pi i q j / n)
  void forward(std::span<const cplx> in, std::span<cplx> out) const { run(forward_, in, out); }

  /// out[j] = sum_q in[q] exp(+2 pi i q j / n)
  void backward(std::span<const cplx> in, std::span<cplx> out) const { run(backward_, in, out); }

 private:
  explicit FftPlan(std::size_t n) : n_(n) {
    std::vector<cplx> a(n), b(n);
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  }

  static fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

  void run(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) const {
    // Out-of-place complex transforms leave the input untouched.
    fftw_execute_dft(plan, as_fftw(const_cast<cplx*>(in.data())), as_fftw(out.data()));
  }

  std::size_t n_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace detail
}  // namespace phaselab
