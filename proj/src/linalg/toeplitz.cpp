#include "bqpg/linalg/toeplitz.hpp"

#include <bit>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace bqpg::linalg {

namespace {

// FFTW's planner is not thread safe; execution through the new-array API is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct ToeplitzSpec::Impl {
    Vec first_column;
    Index m = 0;
    Index embed = 0;  // circulant size, power of two >= 2m-1
    std::vector<std::complex<double>> column_fft;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

ToeplitzSpec::ToeplitzSpec(Vec first_column) {
    if (first_column.size() == 0) throw DimensionError("ToeplitzSpec: empty first column");

    auto impl = std::make_shared<Impl>();
    impl->m = first_column.size();
    impl->first_column = std::move(first_column);
    impl->embed = static_cast<Index>(std::bit_ceil(static_cast<std::uint64_t>(2 * impl->m - 1)));

    const Index L = impl->embed;
    std::vector<double> circ(static_cast<std::size_t>(L), 0.0);
    circ[0] = impl->first_column[0];
    for (Index j = 1; j < impl->m; ++j) {
        circ[static_cast<std::size_t>(j)] = impl->first_column[j];
        circ[static_cast<std::size_t>(L - j)] = impl->first_column[j];
    }

    impl->column_fft.resize(static_cast<std::size_t>(L / 2 + 1));
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        // FFTW_UNALIGNED so the plans stay valid for any later scratch buffers.
        impl->fwd = fftw_plan_dft_r2c_1d(
            static_cast<int>(L), circ.data(),
            reinterpret_cast<fftw_complex*>(impl->column_fft.data()),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        std::vector<std::complex<double>> ctmp(static_cast<std::size_t>(L / 2 + 1));
        std::vector<double> rtmp(static_cast<std::size_t>(L));
        impl->bwd = fftw_plan_dft_c2r_1d(
            static_cast<int>(L), reinterpret_cast<fftw_complex*>(ctmp.data()), rtmp.data(),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(impl->fwd);  // fills column_fft from circ

    impl_ = std::move(impl);
}

Index ToeplitzSpec::size() const { return impl_->m; }

const Vec& ToeplitzSpec::first_column() const { return impl_->first_column; }

Vec ToeplitzSpec::mvm(const Vec& v) const {
    const Impl& im = *impl_;
    if (v.size() != im.m) throw DimensionError("toeplitz_mvm: vector length != m");

    const Index L = im.embed;
    std::vector<double> real(static_cast<std::size_t>(L), 0.0);
    for (Index i = 0; i < im.m; ++i) real[static_cast<std::size_t>(i)] = v[i];
    std::vector<std::complex<double>> freq(static_cast<std::size_t>(L / 2 + 1));

    fftw_execute_dft_r2c(im.fwd, real.data(), reinterpret_cast<fftw_complex*>(freq.data()));
    for (std::size_t i = 0; i < freq.size(); ++i) freq[i] *= im.column_fft[i];
    fftw_execute_dft_c2r(im.bwd, reinterpret_cast<fftw_complex*>(freq.data()), real.data());

    Vec out(im.m);
    const double scale = 1.0 / static_cast<double>(L);
    for (Index i = 0; i < im.m; ++i) out[i] = real[static_cast<std::size_t>(i)] * scale;
    return out;
}

}  // namespace bqpg::linalg
