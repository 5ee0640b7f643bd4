// Thin wrapper around FFTW: each thread keeps its own plans and aligned
// buffers per lattice shape, planner calls are serialized by a global mutex
// because the FFTW planner is not reentrant.
//
// Transforms run in long double. With double transforms the roundoff left in
// high modes is amplified by |xi_max / xi|^{2s} under the fractional
// multiplier, which caps plane-wave accuracy near 2e-12 at M = 256.
#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace kirchpeak::detail {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Plan {
    int dim = 0;
    int points = 0;
    std::size_t real_size = 0;
    std::size_t spec_size = 0;
    long double* rbuf = nullptr;
    fftwl_complex* cbuf = nullptr;
    fftwl_plan fwd = nullptr;
    fftwl_plan bwd = nullptr;

    Plan(int d, int m) : dim(d), points(m) {
        GridSpec g(d, 1.0, m);
        real_size = g.size();
        spec_size = g.spectral_size();
        std::lock_guard<std::mutex> lock(planner_mutex());
        rbuf = fftwl_alloc_real(real_size);
        cbuf = fftwl_alloc_complex(spec_size);
        int n[3] = {m, m, m};
        fwd = fftwl_plan_dft_r2c(d, n, rbuf, cbuf, FFTW_ESTIMATE);
        bwd = fftwl_plan_dft_c2r(d, n, cbuf, rbuf, FFTW_ESTIMATE);
    }
    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftwl_destroy_plan(fwd);
        fftwl_destroy_plan(bwd);
        fftwl_free(rbuf);
        fftwl_free(cbuf);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
};

Plan& plan_for(const GridSpec& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
    auto key = std::make_pair(g.dim, g.points);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Plan>(g.dim, g.points)).first;
    return *it->second;
}

}  // namespace

void forward(const GridSpec& g, const double* in, cplx* out) {
    Plan& p = plan_for(g);
    std::copy(in, in + p.real_size, p.rbuf);
    fftwl_execute(p.fwd);
    for (std::size_t i = 0; i < p.spec_size; ++i)
        out[i] = cplx(static_cast<double>(p.cbuf[i][0]), static_cast<double>(p.cbuf[i][1]));
}

void backward(const GridSpec& g, const cplx* in, double* out) {
    Plan& p = plan_for(g);
    for (std::size_t i = 0; i < p.spec_size; ++i) {
        p.cbuf[i][0] = in[i].real();
        p.cbuf[i][1] = in[i].imag();
    }
    fftwl_execute(p.bwd);
    const long double scale = 1.0L / static_cast<long double>(p.real_size);
    for (std::size_t i = 0; i < p.real_size; ++i) out[i] = static_cast<double>(p.rbuf[i] * scale);
}

}  // namespace kirchpeak::detail
