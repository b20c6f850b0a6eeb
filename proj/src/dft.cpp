#include "sac/dft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace sac {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> a(n), b(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                          reinterpret_cast<fftw_complex*>(a.data()),
                                          reinterpret_cast<fftw_complex*>(b.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
        if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

std::vector<Complex> transform(std::span<const Complex> in, std::size_t n, int sign,
                               double scale) {
    std::vector<Complex> padded;
    std::span<const Complex> src = in;
    if (in.size() != n) {
        padded.assign(n, Complex{});
        std::copy(in.begin(), in.end(), padded.begin());
        src = padded;
    }
    std::vector<Complex> out(n);
    if (n == 0) return out;
    // Input is preserved (FFTW_PRESERVE_INPUT), so the const_cast is sound.
    fftw_execute_dft(cache().get(n, sign),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(src.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    for (auto& v : out) v *= scale;
    return out;
}

}  // namespace

std::vector<Complex> unitary_dft(std::span<const Complex> in) {
    return transform(in, in.size(), FFTW_FORWARD, 1.0 / std::sqrt(static_cast<double>(in.size())));
}

std::vector<Complex> unitary_idft(std::span<const Complex> in) {
    return transform(in, in.size(), FFTW_BACKWARD,
                     1.0 / std::sqrt(static_cast<double>(in.size())));
}

std::vector<Complex> padded_dft(std::span<const Complex> in, std::size_t out_size) {
    if (out_size < in.size()) throw std::invalid_argument("padded_dft: output shorter than input");
    return transform(in, out_size, FFTW_FORWARD, 1.0 / std::sqrt(static_cast<double>(in.size())));
}

}  // namespace sac
