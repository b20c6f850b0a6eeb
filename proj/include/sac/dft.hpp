#pragma once

#include <span>
#include <vector>

#include "sac/common.hpp"

namespace sac {

// Unitary DFT pair (1/sqrt(n) in both directions), backed by FFTW.
// Plans are cached per size; the functions are safe to call from several
// threads at once.
std::vector<Complex> unitary_dft(std::span<const Complex> in);
std::vector<Complex> unitary_idft(std::span<const Complex> in);

// Zero-padded forward transform scaled by 1/sqrt(in.size()) rather than
// 1/sqrt(out_size), so white noise keeps its per-bin variance.
std::vector<Complex> padded_dft(std::span<const Complex> in, std::size_t out_size);

}  // namespace sac
