#include "gsmpm/kernels.hpp"

#include "gsmpm/errors.hpp"

#include <cstdlib>
#include <string>

namespace gsmpm::kernels {

const KernelTable* avx2_table_impl();  // nullptr when not compiled in

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    return avx2_table_impl() != nullptr && __builtin_cpu_supports("avx2") &&
           __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend env_backend() {
    const char* env = std::getenv("GSPLATMPM_BACKEND");
    if (env == nullptr) return Backend::Auto;
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2") return Backend::Avx2;
    if (v == "auto" || v.empty()) return Backend::Auto;
    throw ValidationError("GSPLATMPM_BACKEND must be auto, scalar, or avx2; got \"" + v + "\"");
}

const KernelTable& table(Backend backend) {
    if (backend == Backend::Auto) {
        backend = env_backend();
        if (backend == Backend::Auto) backend = avx2_available() ? Backend::Avx2 : Backend::Scalar;
    }
    if (backend == Backend::Avx2) {
        if (!avx2_available()) throw ValidationError("AVX2 kernels are unavailable on this CPU");
        return *avx2_table_impl();
    }
    return scalar_table();
}

}  // namespace gsmpm::kernels
