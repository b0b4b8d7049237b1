#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace fvqtl {

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// workers. Chunk boundaries depend only on n and threads; callers write
/// results into per-index slots so output never depends on scheduling.
/// Exceptions thrown by a worker are rethrown on the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

/// Worker count for a --threads style request: values < 1 mean "all cores".
int resolve_threads(int requested);

/// Independent RNG stream for (seed, domain, index) via splitmix64 mixing.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index);

/// Stream domains, so different consumers of one master seed never collide.
namespace stream {
inline constexpr std::uint64_t kPermutation = 0x7065726d;
inline constexpr std::uint64_t kGenotype = 0x67656e6f;
inline constexpr std::uint64_t kPhenotype = 0x7068656e;
inline constexpr std::uint64_t kReplicate = 0x7265706c;
inline constexpr std::uint64_t kNullReplicate = 0x6e756c6c;
}  // namespace stream

}  // namespace fvqtl
