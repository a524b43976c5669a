#pragma once

#include <complex>
#include <cstddef>
#include <string>

// Inner loops of quadrature and kernel assembly. Each routine has a scalar
// reference and an AVX2/FMA variant chosen once at runtime.
namespace thr::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
std::string backend_name(Backend b);
// Force a backend (tests); requesting Avx2 on a machine without it is ignored.
void set_backend(Backend b);
bool avx2_supported();

// sum_i w_i f_i g_i
double weighted_dot(const double* w, const double* f, const double* g, std::size_t n);
// sum_i w_i conj(f_i) g_i
std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y += alpha * x (complex)
void caxpy(std::complex<double> alpha, const std::complex<double>* x,
           std::complex<double>* y, std::size_t n);

// One row of a product-integrated semi-separable kernel a(r<) b(r>):
//   out_j += b_i * lower_j * a_j + a_i * upper_j * b_j
// with lower/upper the cumulative quadrature weights of the row.
void separable_row(double ai, double bi, const double* a, const double* b,
                   const double* lower, const double* upper, double* out, std::size_t n);
void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n);

namespace scalar {
double weighted_dot(const double* w, const double* f, const double* g, std::size_t n);
std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void caxpy(std::complex<double> alpha, const std::complex<double>* x,
           std::complex<double>* y, std::size_t n);
void separable_row(double ai, double bi, const double* a, const double* b,
                   const double* lower, const double* upper, double* out, std::size_t n);
void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n);
}  // namespace scalar

namespace avx2 {
double weighted_dot(const double* w, const double* f, const double* g, std::size_t n);
std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void caxpy(std::complex<double> alpha, const std::complex<double>* x,
           std::complex<double>* y, std::size_t n);
void separable_row(double ai, double bi, const double* a, const double* b,
                   const double* lower, const double* upper, double* out, std::size_t n);
void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n);
}  // namespace avx2

}  // namespace thr::kernels
