#include "fft_engine.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace airysim::detail {
namespace {

// Plan creation/destruction is not thread-safe in FFTW; execution is.
// Plans are made with FFTW_UNALIGNED so fftw_execute_dft may run on any
// caller buffer of the right length.
class PlanCache {
 public:
  fftw_plan get(int n, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_plan plan =
        fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void dft_inplace(std::complex<double>* data, int n, int sign) {
  fftw_plan plan = cache().get(n, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
}

}  // namespace airysim::detail
