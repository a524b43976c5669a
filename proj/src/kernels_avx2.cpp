#include "threshold/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define THR_AVX2 __attribute__((target("avx2,fma")))
#define THR_HAVE_X86 1
#endif

namespace thr::kernels::avx2 {

#ifdef THR_HAVE_X86

namespace {

THR_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// [w0, w0, w1, w1] from two consecutive reals.
THR_AVX2 inline __m256d dup_pair(const double* w) {
    __m256d t = _mm256_castpd128_pd256(_mm_loadu_pd(w));
    return _mm256_permute4x64_pd(t, 0x50);
}

// alpha * x for two interleaved complex numbers.
THR_AVX2 inline __m256d cmul(__m256d ar, __m256d ai, __m256d x) {
    __m256d xs = _mm256_permute_pd(x, 0x5);
    return _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, xs));
}

}  // namespace

THR_AVX2 double weighted_dot(const double* w, const double* f, const double* g, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d wf = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(f + i));
        acc = _mm256_fmadd_pd(wf, _mm256_loadu_pd(g + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * f[i] * g[i];
    return s;
}

THR_AVX2 std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                            const std::complex<double>* g, std::size_t n) {
    const double* fp = reinterpret_cast<const double*>(f);
    const double* gp = reinterpret_cast<const double*>(g);
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d wd = dup_pair(w + i);
        __m256d fv = _mm256_mul_pd(wd, _mm256_loadu_pd(fp + 2 * i));
        __m256d gv = _mm256_loadu_pd(gp + 2 * i);
        acc_re = _mm256_fmadd_pd(fv, gv, acc_re);
        __m256d gs = _mm256_permute_pd(gv, 0x5);
        acc_im = _mm256_fmadd_pd(_mm256_mul_pd(fv, sign), gs, acc_im);
    }
    double re = hsum(acc_re), im = hsum(acc_im);
    for (; i < n; ++i) {
        re += w[i] * (f[i].real() * g[i].real() + f[i].imag() * g[i].imag());
        im += w[i] * (f[i].real() * g[i].imag() - f[i].imag() * g[i].real());
    }
    return {re, im};
}

THR_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

THR_AVX2 void caxpy(std::complex<double> alpha, const std::complex<double>* x,
                    std::complex<double>* y, std::size_t n) {
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d prod = cmul(ar, ai, _mm256_loadu_pd(xp + 2 * i));
        _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

THR_AVX2 void separable_row(double ai, double bi, const double* a, const double* b,
                            const double* lower, const double* upper, double* out,
                            std::size_t n) {
    const __m256d va = _mm256_set1_pd(ai);
    const __m256d vb = _mm256_set1_pd(bi);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(lower + j), _mm256_loadu_pd(a + j));
        __m256d t2 = _mm256_mul_pd(_mm256_loadu_pd(upper + j), _mm256_loadu_pd(b + j));
        __m256d o = _mm256_loadu_pd(out + j);
        o = _mm256_add_pd(o, _mm256_add_pd(_mm256_mul_pd(vb, t1), _mm256_mul_pd(va, t2)));
        _mm256_storeu_pd(out + j, o);
    }
    for (; j < n; ++j) out[j] += bi * lower[j] * a[j] + ai * upper[j] * b[j];
}

THR_AVX2 void separable_row(std::complex<double> ai, std::complex<double> bi,
                            const std::complex<double>* a, const std::complex<double>* b,
                            const double* lower, const double* upper,
                            std::complex<double>* out, std::size_t n) {
    const double* ap = reinterpret_cast<const double*>(a);
    const double* bp = reinterpret_cast<const double*>(b);
    double* op = reinterpret_cast<double*>(out);
    const __m256d ar = _mm256_set1_pd(ai.real()), aim = _mm256_set1_pd(ai.imag());
    const __m256d br = _mm256_set1_pd(bi.real()), bim = _mm256_set1_pd(bi.imag());
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        __m256d t1 = _mm256_mul_pd(dup_pair(lower + j), _mm256_loadu_pd(ap + 2 * j));
        __m256d t2 = _mm256_mul_pd(dup_pair(upper + j), _mm256_loadu_pd(bp + 2 * j));
        __m256d s = _mm256_add_pd(cmul(br, bim, t1), cmul(ar, aim, t2));
        _mm256_storeu_pd(op + 2 * j, _mm256_add_pd(_mm256_loadu_pd(op + 2 * j), s));
    }
    for (; j < n; ++j) out[j] += bi * (lower[j] * a[j]) + ai * (upper[j] * b[j]);
}

#else

double weighted_dot(const double* w, const double* f, const double* g, std::size_t n) {
    return scalar::weighted_dot(w, f, g, n);
}
std::complex<double> weighted_cdot(const double* w, const std::complex<double>* f,
                                   const std::complex<double>* g, std::size_t n) {
    return scalar::weighted_cdot(w, f, g, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void caxpy(std::complex<double> alpha, const std::complex<double>* x, std::complex<double>* y,
           std::size_t n) {
    scalar::caxpy(alpha, x, y, n);
}
void separable_row(double ai, double bi, const double* a, const double* b, const double* lower,
                   const double* upper, double* out, std::size_t n) {
    scalar::separable_row(ai, bi, a, b, lower, upper, out, n);
}
void separable_row(std::complex<double> ai, std::complex<double> bi,
                   const std::complex<double>* a, const std::complex<double>* b,
                   const double* lower, const double* upper, std::complex<double>* out,
                   std::size_t n) {
    scalar::separable_row(ai, bi, a, b, lower, upper, out, n);
}

#endif

}  // namespace thr::kernels::avx2
