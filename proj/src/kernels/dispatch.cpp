#include "solitonlab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace solitonlab::kernels {

bool available(Isa isa)
{
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(SOLITONLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa)
{
#if defined(SOLITONLAB_HAVE_AVX2)
    if (isa == Isa::Avx2 && available(Isa::Avx2))
        return detail::kAvx2Table;
#endif
    (void)isa;
    return detail::kScalarTable;
}

namespace {

Isa choose()
{
    const char* env = std::getenv("SOLITONLAB_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0)
        return Isa::Scalar;
    return available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

} // namespace

Isa active_isa()
{
    static const Isa isa = choose();
    return isa;
}

const KernelTable& active()
{
    static const KernelTable& t = table(active_isa());
    return t;
}

const char* name(Isa isa)
{
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

} // namespace solitonlab::kernels
