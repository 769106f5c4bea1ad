#include "dccs/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace dccs::fft {
namespace {

// Key: (rank-1 length or ny, nx, howmany, sign)
using PlanKey = std::tuple<int, int, int, int>;

class PlanCache {
public:
    ~PlanCache() {
        for (auto &[k, p] : plans_) fftw_destroy_plan(p);
    }

    fftw_plan frame_plan(int nx, int ny, int sign) {
        std::lock_guard lock(mutex_);
        const PlanKey key{ny, nx, 0, sign};
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto *buf = fftw_alloc_complex(static_cast<std::size_t>(nx) * ny);
        fftw_plan p = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, p);
        return p;
    }

    fftw_plan time_plan(int nt, int pixels, int sign) {
        std::lock_guard lock(mutex_);
        const PlanKey key{nt, 0, pixels, sign};
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto *buf = fftw_alloc_complex(static_cast<std::size_t>(nt) * pixels);
        int n[1] = {nt};
        fftw_plan p = fftw_plan_many_dft(1, n, pixels, buf, nullptr, pixels, 1, buf, nullptr, pixels, 1, sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache &cache() {
    static PlanCache c;
    return c;
}

fftw_complex *as_fftw(std::span<cplx> v) { return reinterpret_cast<fftw_complex *>(v.data()); }

void scale(std::span<cplx> v, double s) {
    for (auto &z : v) z *= s;
}

void run_2d(std::span<cplx> frame, int nx, int ny, int sign) {
    if (frame.size() != static_cast<std::size_t>(nx) * ny) throw ShapeMismatch("frame size does not match nx*ny");
    fftw_execute_dft(cache().frame_plan(nx, ny, sign), as_fftw(frame), as_fftw(frame));
    scale(frame, 1.0 / std::sqrt(static_cast<double>(nx) * ny));
}

void run_time(DynamicDataset &d, int sign) {
    const int pixels = static_cast<int>(d.shape().frame_size());
    fftw_execute_dft(cache().time_plan(d.nt(), pixels, sign), as_fftw(d.values()), as_fftw(d.values()));
    scale(d.values(), 1.0 / std::sqrt(static_cast<double>(d.nt())));
}

} // namespace

void forward_2d(std::span<cplx> frame, int nx, int ny) { run_2d(frame, nx, ny, FFTW_FORWARD); }
void inverse_2d(std::span<cplx> frame, int nx, int ny) { run_2d(frame, nx, ny, FFTW_BACKWARD); }
void forward_time(DynamicDataset &d) { run_time(d, FFTW_FORWARD); }
void inverse_time(DynamicDataset &d) { run_time(d, FFTW_BACKWARD); }

} // namespace dccs::fft
