#include "geoxray/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "geoxray/common.hpp"

namespace geoxray {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Fft::Plan {
    fftw_plan plan = nullptr;
    int sign = FFTW_FORWARD;
};

Fft::Fft(std::vector<int> dims, Direction dir) : plan_(std::make_unique<Plan>()) {
    if (dims.empty()) throw ParameterError("FFT needs at least one dimension");
    size_ = 1;
    for (int d : dims) {
        if (d < 1) throw ParameterError("FFT dimension must be positive");
        size_ *= static_cast<std::size_t>(d);
    }
    plan_->sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    std::lock_guard lock(planner_mutex());
    // Planned on an unaligned-safe scratch buffer; execution uses new-array
    // calls, so FFTW_UNALIGNED lets callers pass std::vector storage.
    auto* buf = fftw_alloc_complex(size_);
    plan_->plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, plan_->sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan_->plan) throw Error("FFTW planning failed");
}

Fft::~Fft() {
    if (plan_ && plan_->plan) {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_->plan);
    }
}

void Fft::execute(std::vector<Complex>& data) const {
    if (data.size() != size_) throw ParameterError("FFT buffer has the wrong length");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_->plan, p, p);
}

double dft_frequency(int k, int n, double h) {
    const int kk = k <= n / 2 ? k : k - n;
    return kTwoPi * kk / (n * h);
}

std::string fft_library_version() { return fftw_version; }

}  // namespace geoxray
