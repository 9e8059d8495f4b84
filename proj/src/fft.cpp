#include "cmmn/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <unordered_map>

#include "cmmn/errors.hpp"

namespace cmmn::fft {

namespace {

// FFTW's planner is not thread-safe, so plan creation is serialized behind a
// mutex. Plans are created with FFTW_UNALIGNED and executed through the
// new-array interface, which makes them safe to run concurrently on
// caller-owned buffers of any alignment.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c(std::size_t n) {
    std::scoped_lock lock(mutex_);
    auto it = r2c_.find(n);
    if (it != r2c_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    r2c_.emplace(n, plan);
    return plan;
  }

  fftw_plan c2r(std::size_t n) {
    std::scoped_lock lock(mutex_);
    auto it = c2r_.find(n);
    if (it != c2r_.end()) return it->second;
    std::vector<std::complex<double>> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                          reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    c2r_.emplace(n, plan);
    return plan;
  }

  fftw_plan c2c_backward(std::size_t n) {
    std::scoped_lock lock(mutex_);
    auto it = c2c_back_.find(n);
    if (it != c2c_back_.end()) return it->second;
    std::vector<std::complex<double>> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    c2c_back_.emplace(n, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, p] : r2c_) fftw_destroy_plan(p);
    for (auto& [n, p] : c2r_) fftw_destroy_plan(p);
    for (auto& [n, p] : c2c_back_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::unordered_map<std::size_t, fftw_plan> r2c_;
  std::unordered_map<std::size_t, fftw_plan> c2r_;
  std::unordered_map<std::size_t, fftw_plan> c2c_back_;
};

}  // namespace

std::vector<std::complex<double>> forward_real(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) fail(ErrorCode::EmptyInput, "forward_real: empty signal");
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(PlanCache::instance().r2c(n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse_hermitian(std::span<const std::complex<double>> half, std::size_t n) {
  if (n == 0) fail(ErrorCode::EmptyInput, "inverse_hermitian: zero length");
  if (half.size() != n / 2 + 1)
    fail(ErrorCode::LengthMismatch, "inverse_hermitian: half spectrum must hold n/2+1 bins");
  // c2r destroys its input, so work on a copy.
  std::vector<std::complex<double>> in(half.begin(), half.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(PlanCache::instance().c2r(n), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<std::complex<double>> inverse_complex(std::span<const std::complex<double>> spectrum) {
  const std::size_t n = spectrum.size();
  if (n == 0) fail(ErrorCode::EmptyInput, "inverse_complex: empty spectrum");
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
  std::vector<std::complex<double>> out(n);
  fftw_execute_dft(PlanCache::instance().c2c_backward(n),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  const auto half = forward_real(x);
  std::vector<double> half_power(half.size());
  for (std::size_t j = 0; j < half.size(); ++j) half_power[j] = std::norm(half[j]);
  return mirror_to_two_sided(half_power, n);
}

std::vector<double> mirror_to_two_sided(std::span<const double> half, std::size_t n) {
  if (half.size() != n / 2 + 1)
    fail(ErrorCode::LengthMismatch, "mirror_to_two_sided: half spectrum must hold n/2+1 bins");
  std::vector<double> full(n);
  for (std::size_t j = 0; j < half.size(); ++j) full[j] = half[j];
  for (std::size_t j = half.size(); j < n; ++j) full[j] = half[n - j];
  return full;
}

}  // namespace cmmn::fft
