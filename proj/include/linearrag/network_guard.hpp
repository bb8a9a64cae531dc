#pragma once

#include <cstdint>

// Process-level observer for outbound network use. Linking this library
// interposes socket() and connect(); every call creating or connecting an
// AF_INET/AF_INET6 socket is counted and then forwarded to libc unchanged.

namespace linearrag::netguard {

std::uint64_t socket_attempts() noexcept;
std::uint64_t connect_attempts() noexcept;
inline std::uint64_t outbound_attempts() noexcept { return socket_attempts() + connect_attempts(); }
void reset() noexcept;

}  // namespace linearrag::netguard
