#ifndef LER_CLOCK_HPP
#define LER_CLOCK_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace ler {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;
using Seconds = std::int64_t;

class Clock {
public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
  Timestamp now() const override {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// Test clock; only moves when told to.
class ManualClock final : public Clock {
public:
  explicit ManualClock(Timestamp start = 1'700'000'000) : now_(start) {}
  Timestamp now() const override { return now_.load(); }
  void set(Timestamp t) { now_.store(t); }
  void advance(Seconds s) { now_.fetch_add(s); }

private:
  std::atomic<Timestamp> now_;
};

inline std::shared_ptr<Clock> system_clock() {
  static auto clock = std::make_shared<SystemClock>();
  return clock;
}

} // namespace ler

#endif // LER_CLOCK_HPP
