#pragma once

// Complex inner-loop kernels shared by the SVD, the phase-space transforms
// and the Gram assembly. Every kernel has a scalar reference version and,
// on x86-64, an AVX2/FMA version; the active table is chosen once per
// process from CPUID (override with OPTRANS_FORCE_SCALAR=1).

#include <complex>
#include <span>
#include <string_view>

namespace optrans::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  /// sum conj(a[i]) * b[i]
  cplx (*dotc)(const cplx* a, const cplx* b, std::size_t n);
  /// sum a[i] * b[i]
  cplx (*dotu)(const cplx* a, const cplx* b, std::size_t n);
  /// sum |a[i]|^2
  double (*norm_sq)(const cplx* a, std::size_t n);
  /// x <- c*x - s*ph*y ; y <- s*x + c*ph*y  (plane rotation after a phase on y)
  void (*rotate)(cplx* x, cplx* y, std::size_t n, double c, double s, cplx ph);
  /// y <- y + alpha*x
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*mul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table, or nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

/// Table used by the library; fixed for the lifetime of the process.
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dotc(a.data(), b.data(), a.size());
}
inline cplx dotu(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dotu(a.data(), b.data(), a.size());
}
inline double norm_sq(std::span<const cplx> a) {
  return active().norm_sq(a.data(), a.size());
}
inline void rotate(std::span<cplx> x, std::span<cplx> y, double c, double s, cplx ph) {
  active().rotate(x.data(), y.data(), x.size(), c, s, ph);
}
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void mul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  active().mul(a.data(), b.data(), out.data(), a.size());
}

}  // namespace optrans::kernels
