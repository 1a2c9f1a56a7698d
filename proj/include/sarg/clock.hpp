#pragma once

#include <chrono>
#include <cstdint>
#include <memory>

namespace sarg {

// Time source for stage timings. The real implementation reads the monotonic
// clock; the deterministic one advances only when provider calls tick it, so
// reports stay bit-identical across runs and worker counts in mock mode.
class VirtualClock {
public:
    virtual ~VirtualClock() = default;
    virtual std::uint64_t now_us() = 0;
    virtual void tick(std::uint64_t /*us*/) {}
};

class SteadyClock final : public VirtualClock {
public:
    std::uint64_t now_us() override {
        auto now = std::chrono::steady_clock::now().time_since_epoch();
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(now).count());
    }
};

class DeterministicClock final : public VirtualClock {
public:
    std::uint64_t now_us() override { return counter_; }
    void tick(std::uint64_t us) override { counter_ += us; }

private:
    std::uint64_t counter_ = 0;
};

// Synthetic per-call costs charged to a DeterministicClock.
inline constexpr std::uint64_t kMockEmbedCostUs = 10;
inline constexpr std::uint64_t kMockGenerateCostUs = 1000;

} // namespace sarg
