#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

#include "threshold/free_resolvent.hpp"
#include "threshold/kernels.hpp"
#include "threshold/parallel.hpp"

using namespace thr;
using cd = std::complex<double>;

namespace {

struct Data {
    std::vector<double> w, f, g, a, b, lower, upper;
    std::vector<cd> cf, cg, ca, cb;
};

Data make_data(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Data d;
    for (std::size_t i = 0; i < n; ++i) {
        d.w.push_back(0.5 + 0.5 * u(rng));
        d.f.push_back(u(rng));
        d.g.push_back(u(rng));
        d.a.push_back(u(rng));
        d.b.push_back(u(rng));
        d.lower.push_back(std::abs(u(rng)));
        d.upper.push_back(std::abs(u(rng)));
        d.cf.emplace_back(u(rng), u(rng));
        d.cg.emplace_back(u(rng), u(rng));
        d.ca.emplace_back(u(rng), u(rng));
        d.cb.emplace_back(u(rng), u(rng));
    }
    return d;
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

}  // namespace

TEST_CASE("backend selection and names") {
    const auto b = kernels::active_backend();
    CHECK((b == kernels::Backend::Scalar || b == kernels::Backend::Avx2));
    CHECK(kernels::backend_name(kernels::Backend::Scalar) == "scalar");
    kernels::set_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    kernels::set_backend(kernels::Backend::Avx2);
    CHECK(kernels::active_backend() == (kernels::avx2_supported() ? kernels::Backend::Avx2 : kernels::Backend::Scalar));
    kernels::set_backend(b);
}

TEST_CASE("AVX2 kernels agree with the scalar reference for every remainder length") {
    if (!kernels::avx2_supported()) {
        MESSAGE("AVX2 not available on this machine; dispatch equivalence only");
        return;
    }
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 257u}) {
        const Data d = make_data(n, 11 + static_cast<unsigned>(n));
        CHECK(rel(kernels::avx2::weighted_dot(d.w.data(), d.f.data(), d.g.data(), n),
                  kernels::scalar::weighted_dot(d.w.data(), d.f.data(), d.g.data(), n)) < 1e-14);
        const cd c1 = kernels::avx2::weighted_cdot(d.w.data(), d.cf.data(), d.cg.data(), n);
        const cd c0 = kernels::scalar::weighted_cdot(d.w.data(), d.cf.data(), d.cg.data(), n);
        CHECK(std::abs(c1 - c0) < 1e-14 * std::max(1.0, std::abs(c0)));

        std::vector<double> y0 = d.g, y1 = d.g;
        kernels::scalar::axpy(0.7, d.f.data(), y0.data(), n);
        kernels::avx2::axpy(0.7, d.f.data(), y1.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel(y1[i], y0[i]) < 1e-15);

        std::vector<cd> z0 = d.cg, z1 = d.cg;
        kernels::scalar::caxpy(cd(0.3, -1.1), d.cf.data(), z0.data(), n);
        kernels::avx2::caxpy(cd(0.3, -1.1), d.cf.data(), z1.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(z1[i] - z0[i]) < 1e-15);

        std::vector<double> r0(n, 0.25), r1(n, 0.25);
        kernels::scalar::separable_row(0.4, -0.9, d.a.data(), d.b.data(), d.lower.data(), d.upper.data(), r0.data(), n);
        kernels::avx2::separable_row(0.4, -0.9, d.a.data(), d.b.data(), d.lower.data(), d.upper.data(), r1.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel(r1[i], r0[i]) < 1e-15);

        std::vector<cd> q0(n, cd(0.1, 0.2)), q1(n, cd(0.1, 0.2));
        kernels::scalar::separable_row(cd(0.4, 0.1), cd(-0.9, 0.3), d.ca.data(), d.cb.data(), d.lower.data(),
                                       d.upper.data(), q0.data(), n);
        kernels::avx2::separable_row(cd(0.4, 0.1), cd(-0.9, 0.3), d.ca.data(), d.cb.data(), d.lower.data(),
                                     d.upper.data(), q1.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(q1[i] - q0[i]) < 1e-15);
    }
}

TEST_CASE("kernel assembly is identical under both backends") {
    const RadialGrid g = RadialGrid::panels({0.0, 1.0}, 10.0, 0.5, 1.4, 8);
    const auto b = kernels::active_backend();
    kernels::set_backend(kernels::Backend::Scalar);
    const MatC A0 = partial_wave_G0(0, g).A;
    const MatC R0 = exact_free_resolvent(cdouble(-0.3, 0.2), g).A;
    kernels::set_backend(kernels::Backend::Avx2);
    const MatC A1 = partial_wave_G0(0, g).A;
    const MatC R1 = exact_free_resolvent(cdouble(-0.3, 0.2), g).A;
    kernels::set_backend(b);
    CHECK((A1 - A0).norm() <= 1e-14 * A0.norm());
    CHECK((R1 - R0).norm() <= 1e-14 * R0.norm());
}

TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK(thread_count() >= 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 3) throw ValidationError("x"); }), ValidationError);
}
