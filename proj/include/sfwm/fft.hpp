#pragma once

#include <complex>
#include <vector>

namespace sfwm {

// In-place 1-D complex DFT, out[k] = sum_n in[n] exp(sign * 2 pi i n k / N).
void dft(std::vector<std::complex<double>>& data, int sign);

}  // namespace sfwm
