#pragma once

#include <span>

#include "dccs/data_model.hpp"

// Unitary (1/sqrt(N)) transforms backed by FFTW. Plans are cached per size and
// created under a lock; execution is reentrant.
namespace dccs::fft {

// In-place 2-D DFT of one nx*ny row-major frame.
void forward_2d(std::span<cplx> frame, int nx, int ny);
void inverse_2d(std::span<cplx> frame, int nx, int ny);

// In-place 1-D DFT along time for every pixel of a frame-major series.
void forward_time(DynamicDataset &d);
void inverse_time(DynamicDataset &d);

} // namespace dccs::fft
