#pragma once

#include "optrans/kernels.hpp"

namespace optrans::kernels {

namespace scalar {
cplx dotc(const cplx* a, const cplx* b, std::size_t n);
cplx dotu(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void rotate(cplx* x, cplx* y, std::size_t n, double c, double s, cplx ph);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void mul(const cplx* a, const cplx* b, cplx* out, std::size_t n);
}  // namespace scalar

#ifdef OPTRANS_HAVE_AVX2
namespace avx2 {
cplx dotc(const cplx* a, const cplx* b, std::size_t n);
cplx dotu(const cplx* a, const cplx* b, std::size_t n);
double norm_sq(const cplx* a, std::size_t n);
void rotate(cplx* x, cplx* y, std::size_t n, double c, double s, cplx ph);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void mul(const cplx* a, const cplx* b, cplx* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace optrans::kernels
