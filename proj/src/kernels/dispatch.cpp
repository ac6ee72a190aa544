#include <atomic>
#include <cstdlib>
#include <string>

#include "weakgraph/error.hpp"
#include "weakgraph/kernels.hpp"

namespace weakgraph::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* resolve(const std::string& name) {
    if (name == "scalar") return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!avx2_supported()) throw Error("kernel backend 'avx2' not supported on this CPU");
        return &avx2_ops();
    }
#endif
    if (name == "auto") {
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2_supported()) return &avx2_ops();
#endif
        return &scalar_ops();
    }
    throw Error("unknown kernel backend '" + name + "'");
}

const Ops* initial_backend() {
    const char* env = std::getenv("WEAKGRAPH_KERNELS");
    return resolve(env != nullptr ? env : "auto");
}

} // namespace

const Ops& active_ops() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (ops == nullptr) {
        ops = initial_backend();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void force_backend(const std::string& name) {
    g_active.store(resolve(name), std::memory_order_release);
}

} // namespace weakgraph::kernels
