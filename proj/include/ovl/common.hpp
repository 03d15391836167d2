#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ovl {

using Sample = uint16_t;

enum class ErrorCode {
    TruncatedStream,
    CorruptStream,
    CorruptPayload,
    BrokenReference,
    InternalState,
    UnsupportedFormat,
    EncodeConfig,
    OutOfMemory,
    WatchdogTimeout,
    Io,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string msg, int64_t poc = -1)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
          m_code(code), m_poc(poc) {}

    ErrorCode code() const { return m_code; }
    int64_t poc() const { return m_poc; }

private:
    ErrorCode m_code;
    int64_t m_poc;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg, int64_t poc = -1) {
    throw Error(code, msg, poc);
}

inline void check(bool cond, ErrorCode code, const std::string& msg, int64_t poc = -1) {
    if (!cond) fail(code, msg, poc);
}

template <typename T>
constexpr T clip3(T lo, T hi, T v) {
    return v < lo ? lo : (v > hi ? hi : v);
}

constexpr Sample clip_sample(int32_t v, int bit_depth) {
    int32_t hi = (1 << bit_depth) - 1;
    return static_cast<Sample>(v < 0 ? 0 : (v > hi ? hi : v));
}

constexpr int ceil_div(int a, int b) { return (a + b - 1) / b; }

constexpr int ilog2(uint32_t v) {
    int r = 0;
    while (v > 1) { v >>= 1; ++r; }
    return r;
}

} // namespace ovl
