#include "hpo/worker_pool.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace hpo {

std::size_t default_workers() {
  if (const char* env = std::getenv("HPO_WORKERS")) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
    if (ec == std::errc() && *ptr == '\0' && value > 0) return value;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace hpo
