#include "itnumm/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace itnumm {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() {
  if (const unsigned n = g_threads.load(); n > 0) return n;
  if (const char* env = std::getenv("ITNUMM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace itnumm
