#include "bumpkit/parallel.hpp"

#include <atomic>

namespace bumpkit {

namespace {
std::atomic<unsigned> g_jobs{1};
}

void set_jobs(unsigned j) { g_jobs = std::max(1u, j); }
unsigned jobs() { return g_jobs; }

} // namespace bumpkit
