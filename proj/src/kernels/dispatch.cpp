#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace optrans::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar, scalar::dotc, scalar::dotu, scalar::norm_sq,
                              scalar::rotate, scalar::axpy, scalar::mul};

#ifdef OPTRANS_HAVE_AVX2
constexpr KernelTable kAvx2{Isa::avx2, avx2::dotc, avx2::dotu, avx2::norm_sq,
                            avx2::rotate, avx2::axpy, avx2::mul};

bool cpu_has_avx2() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

bool scalar_forced() noexcept {
  const char* env = std::getenv("OPTRANS_FORCE_SCALAR");
  return env != nullptr && std::strcmp(env, "") != 0 && std::strcmp(env, "0") != 0;
}

const KernelTable& select() noexcept {
  if (scalar_forced()) return kScalar;
  if (const KernelTable* t = avx2_table()) return *t;
  return kScalar;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#ifdef OPTRANS_HAVE_AVX2
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace optrans::kernels
