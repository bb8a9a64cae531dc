#include "linearrag/network_guard.hpp"

#include <atomic>

#include <dlfcn.h>
#include <sys/socket.h>

namespace {

std::atomic<std::uint64_t> g_sockets{0};
std::atomic<std::uint64_t> g_connects{0};

bool is_inet(int domain) { return domain == AF_INET || domain == AF_INET6; }

template <typename Fn>
Fn next_symbol(const char* name) {
  return reinterpret_cast<Fn>(dlsym(RTLD_NEXT, name));
}

}  // namespace

extern "C" int socket(int domain, int type, int protocol) {
  using Fn = int (*)(int, int, int);
  static const Fn real = next_symbol<Fn>("socket");
  if (is_inet(domain)) g_sockets.fetch_add(1, std::memory_order_relaxed);
  return real(domain, type, protocol);
}

extern "C" int connect(int fd, const struct sockaddr* addr, socklen_t len) {
  using Fn = int (*)(int, const struct sockaddr*, socklen_t);
  static const Fn real = next_symbol<Fn>("connect");
  if (addr && is_inet(addr->sa_family)) g_connects.fetch_add(1, std::memory_order_relaxed);
  return real(fd, addr, len);
}

namespace linearrag::netguard {

std::uint64_t socket_attempts() noexcept { return g_sockets.load(std::memory_order_relaxed); }
std::uint64_t connect_attempts() noexcept { return g_connects.load(std::memory_order_relaxed); }

void reset() noexcept {
  g_sockets.store(0, std::memory_order_relaxed);
  g_connects.store(0, std::memory_order_relaxed);
}

}  // namespace linearrag::netguard
