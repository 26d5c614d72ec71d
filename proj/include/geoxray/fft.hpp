#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace geoxray {

using Complex = std::complex<double>;

// Unnormalized complex DFT, X_k = sum_n x_n exp(-+ 2 pi i k n / N).
// Backed by FFTW; plans are created under a global lock and executed on
// caller-owned buffers, so one Fft object may be shared across threads.
class Fft {
public:
    enum class Direction { Forward, Inverse };

    Fft(std::vector<int> dims, Direction dir);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return size_; }
    // In place on data (length size()).
    void execute(std::vector<Complex>& data) const;

private:
    struct Plan;
    std::unique_ptr<Plan> plan_;
    std::size_t size_ = 0;
};

// Version string of the FFT backend.
std::string fft_library_version();

// Frequency of DFT bin k for length n and sample spacing h (angular units).
double dft_frequency(int k, int n, double h);

}  // namespace geoxray
