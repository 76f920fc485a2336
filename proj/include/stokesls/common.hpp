// Shared error handling and small numeric helpers.

#ifndef STOKESLS_COMMON_HPP
#define STOKESLS_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stokesls {

/// Diagnostic categories, mapped to CLI exit codes.
enum class errc : int {
  parse = 1,
  topology = 2,
  degenerate = 3,
  config = 4,
  unsupported = 5,
  numeric = 6,
  io = 7,
  internal = 8,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::parse: return "parse";
    case errc::topology: return "topology";
    case errc::degenerate: return "degenerate";
    case errc::config: return "config";
    case errc::unsupported: return "unsupported";
    case errc::numeric: return "numeric";
    case errc::io: return "io";
    case errc::internal: return "internal";
  }
  return "unknown";
}

class error : public std::runtime_error {
public:
  error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code(c) {}
  errc code;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

inline void check(bool cond, errc c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

template <int Dim>
using VecD = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using MatD = Eigen::Matrix<double, Dim, Dim>;

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace stokesls

#endif
