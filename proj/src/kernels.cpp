#include "threshold/kernels.hpp"

#include <atomic>

namespace thr::kernels {

namespace scalar {

double weighted_dot(const double* w, const double* f, const double* g, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * f[i] * g[i];
    return s;
}

std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fr = f[i].real(), fi = f[i].imag();
        const double gr = g[i].real(), gi = g[i].imag();
        re += w[i] * (fr * gr + fi * gi);
        im += w[i] * (fr * gi - fi * gr);
    }
    return {re, im};
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void caxpy(std::complex<double> alpha, const std::complex<double>* x,
           std::complex<double>* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void separable_row(double ai, double bi, const double* a, const double* b,
                   const double* lower, const double* upper, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] += bi * lower[j] * a[j] + ai * upper[j] * b[j];
}

void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n) {
    for (std::size_t j = 0; j < n; ++j)
        out[j] += bi * (lower[j] * a[j]) + ai * (upper[j] * b[j]);
}

}  // namespace scalar

namespace {

Backend detect() {
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

bool avx2_supported() { return detect() == Backend::Avx2; }

Backend active_backend() { return current().load(); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported()) return;
    current().store(b);
}

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

double weighted_dot(const double* w, const double* f, const double* g, std::size_t n) {
    return active_backend() == Backend::Avx2 ? avx2::weighted_dot(w, f, g, n)
                                             : scalar::weighted_dot(w, f, g, n);
}

std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n) {
    return active_backend() == Backend::Avx2 ? avx2::weighted_cdot(w, f, g, n)
                                             : scalar::weighted_cdot(w, f, g, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    if (active_backend() == Backend::Avx2)
        avx2::axpy(alpha, x, y, n);
    else
        scalar::axpy(alpha, x, y, n);
}

void caxpy(std::complex<double> alpha, const std::complex<double>* x,
           std::complex<double>* y, std::size_t n) {
    if (active_backend() == Backend::Avx2)
        avx2::caxpy(alpha, x, y, n);
    else
        scalar::caxpy(alpha, x, y, n);
}

void separable_row(double ai, double bi, const double* a, const double* b,
                   const double* lower, const double* upper, double* out, std::size_t n) {
    if (active_backend() == Backend::Avx2)
        avx2::separable_row(ai, bi, a, b, lower, upper, out, n);
    else
        scalar::separable_row(ai, bi, a, b, lower, upper, out, n);
}

void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n) {
    if (active_backend() == Backend::Avx2)
        avx2::separable_row(ai, bi, a, b, lower, upper, out, n);
    else
        scalar::separable_row(ai, bi, a, b, lower, upper, out, n);
}

}  // namespace thr::kernels
