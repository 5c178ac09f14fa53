#include <thread>

#include "valvebench/devicebus/transport.hpp"

namespace valvebench::devicebus {

Micros SteadyClock::now() const {
  return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::sleep(Micros d) { std::this_thread::sleep_for(d); }

}  // namespace valvebench::devicebus
