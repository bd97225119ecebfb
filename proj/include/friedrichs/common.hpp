#pragma once
//
// Shared plumbing: error type, deterministic summation, thread-budgeted loops.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace friedrichs {

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double pi  = std::numbers::pi;

//
// Validation errors are caller mistakes (bad parameters, bad files); runtime
// errors are numerical failures discovered while computing.
//
enum class ErrorKind { validation, runtime };

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(what), kind_(kind), code_(std::move(code))
    {}

    ErrorKind          kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind   kind_;
    std::string code_;
};

[[noreturn]] inline void fail_validation(const std::string& code, const std::string& what)
{
    throw Error(ErrorKind::validation, code, what);
}

[[noreturn]] inline void fail_runtime(const std::string& code, const std::string& what)
{
    throw Error(ErrorKind::runtime, code, what);
}

// Pairwise summation; result depends only on the input order.
inline double pairwise_sum(std::span<const double> x)
{
    constexpr std::size_t block = 32;
    if (x.size() <= block) {
        double s = 0.0;
        for (double v : x)
            s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& x)
{
    return pairwise_sum(std::span<const double>(x));
}

//
// Thread budget: explicit value wins, then FRIEDRICHS_LAB_THREADS, then 1.
//
inline unsigned resolve_threads(unsigned requested = 0)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("FRIEDRICHS_LAB_THREADS")) {
        char* end = nullptr;
        long  v   = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    return 1;
}

//
// Runs body(i) for i in [0, n). Each index is processed exactly once and
// callers write into index-addressed slots, so results do not depend on the
// thread count.
//
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body)
{
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    const unsigned                  nt = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(nt);
    std::vector<std::thread>        pool;
    pool.reserve(nt);
    for (unsigned w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += nt)
                    body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline bool rel_close(double a, double b, double rtol)
{
    if (a == b)
        return true;
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b));
}

} // namespace friedrichs
