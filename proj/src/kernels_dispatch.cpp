#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hmnss/kernels.hpp"

namespace hmnss::kernels {

const Table* avx2_table();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* pick_auto() {
  const Table* v = avx2();
  return v ? v : &scalar();
}

const Table* initial() {
  const char* env = std::getenv("HMNSS_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar();
  return pick_auto();
}

std::atomic<const Table*> g_active{nullptr};

}  // namespace

const Table* avx2() {
  static const bool ok = cpu_has_avx2();
  return ok ? avx2_table() : nullptr;
}

const Table& active() {
  const Table* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = initial();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    g_active.store(&scalar(), std::memory_order_release);
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (!avx2()) return false;
    g_active.store(avx2(), std::memory_order_release);
    return true;
  }
  if (std::strcmp(name, "auto") == 0) {
    g_active.store(pick_auto(), std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace hmnss::kernels
