#include <doctest.h>

#include <cmath>

#include "valvebench/common/errors.hpp"
#include "valvebench/common/rng.hpp"
#include "valvebench/devicebus/fault_script.hpp"
#include "valvebench/devicebus/hardware_env.hpp"
#include "valvebench/devicebus/mock_bus.hpp"
#include "valvebench/devicebus/packet.hpp"
#include "valvebench/devicebus/registers.hpp"
#include "valvebench/devicebus/servo_bus.hpp"
#include "valvebench/devicebus/supervisor.hpp"
#include "valvebench/env/angles.hpp"
#include "valvebench/env/scripted_controller.hpp"

using namespace valvebench;
using namespace valvebench::devicebus;

namespace {

// Table-driven CRC-16 (poly 0x8005, MSB first), built independently of crc16().
std::uint16_t table_crc(std::span<const std::uint8_t> data) {
  static const auto table = [] {
    std::array<std::uint16_t, 256> t{};
    for (int i = 0; i < 256; ++i) {
      std::uint16_t c = static_cast<std::uint16_t>(i << 8);
      for (int b = 0; b < 8; ++b) c = static_cast<std::uint16_t>((c & 0x8000) ? (c << 1) ^ 0x8005 : c << 1);
      t[std::size_t(i)] = c;
    }
    return t;
  }();
  std::uint16_t crc = 0;
  for (auto byte : data) crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ byte) & 0xFF]);
  return crc;
}

Packet random_packet(CounterRng& rng) {
  static const Instruction kinds[] = {Instruction::Ping, Instruction::Read, Instruction::Write,
                                      Instruction::Reboot, Instruction::Status};
  Packet p;
  p.id = static_cast<std::uint8_t>(rng.below(254));
  p.instruction = kinds[rng.below(5)];
  p.params.resize(rng.below(12));
  for (auto& b : p.params) b = static_cast<std::uint8_t>(rng.below(256));
  return p;
}

struct Rig {
  VirtualClock clock;
  MockBus mock = MockBus::gripper(clock);
  ServoBus bus{mock, clock, BusLayout::gripper()};
};

}  // namespace

TEST_CASE("crc matches the known ping frame and a table-driven reference") {
  const Bytes ping{0xFF, 0xFF, 0xFD, 0x00, 0x01, 0x03, 0x00, 0x01, 0x19, 0x4E};
  CHECK(crc16(std::span(ping).first(8)) == 0x4E19);
  CHECK(encode_packet({1, Instruction::Ping, {}}) == ping);
  const auto decoded = decode_packet(ping);
  CHECK(decoded.id == 1);
  CHECK(decoded.instruction == Instruction::Ping);

  CounterRng rng(1, 1);
  for (int i = 0; i < 2000; ++i) {
    Bytes data(rng.below(64));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
    REQUIRE(crc16(data) == table_crc(data));
  }
}

TEST_CASE("encode/decode round-trips and reports consumed bytes") {
  CounterRng rng(2, 1);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_packet(rng);
    auto bytes = encode_packet(p);
    const auto frame_size = bytes.size();
    CHECK(frame_size == 10 + p.params.size());
    CHECK(declared_frame_size(bytes) == frame_size);
    bytes.push_back(0xAA);  // trailing byte of the next frame
    std::size_t used = 0;
    REQUIRE(decode_packet(bytes, &used) == p);
    REQUIRE(used == frame_size);
  }
}

TEST_CASE("decode classifies malformed frames") {
  const auto good = encode_packet({3, Instruction::Read, {37, 0, 2, 0}});
  auto kind_of = [](const Bytes& b) {
    try {
      decode_packet(b);
    } catch (const PacketError& e) {
      return e.kind();
    }
    FAIL("frame was accepted");
    return FrameError::Framing;
  };
  Bytes bad_header = good;
  bad_header[2] = 0xFE;
  CHECK(kind_of(bad_header) == FrameError::Framing);
  CHECK(kind_of(Bytes(good.begin(), good.begin() + 5)) == FrameError::Incomplete);
  CHECK(kind_of(Bytes(good.begin(), good.end() - 1)) == FrameError::Incomplete);
  Bytes bad_crc = good;
  bad_crc.back() ^= 0x01;
  CHECK(kind_of(bad_crc) == FrameError::Integrity);
  Bytes bad_id{0xFF, 0xFF, 0xFD, 0x00, 0xFF, 0x03, 0x00, 0x01};
  const auto crc = table_crc(bad_id);
  bad_id.push_back(std::uint8_t(crc & 0xFF));
  bad_id.push_back(std::uint8_t(crc >> 8));
  CHECK(kind_of(bad_id) == FrameError::Framing);
  CHECK_THROWS_AS(encode_packet({255, Instruction::Ping, {}}), ContractViolation);
  Bytes short_len = {0xFF, 0xFF, 0xFD, 0x00, 0x01, 0x02, 0x00, 0x01, 0x00};
  CHECK(kind_of(short_len) == FrameError::Framing);
  CHECK_THROWS_AS(encode_packet({1, Instruction::Ping, Bytes(70000, 0)}), ContractViolation);
}

TEST_CASE("random byte soup never crashes the decoder") {
  CounterRng rng(3, 1);
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes b(rng.below(40));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(256));
    if (rng.below(2) && b.size() >= 4) std::copy(std::begin(kHeader), std::end(kHeader), b.begin());
    try {
      std::size_t used = 0;
      decode_packet(b, &used);
      REQUIRE(used <= b.size());
      ++accepted;
    } catch (const PacketError&) {
    }
  }
  CHECK(accepted < 20);
}

TEST_CASE("every single-bit flip of a frame is detected") {
  CounterRng rng(4, 1);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_packet(rng);
    const auto frame = encode_packet(p);
    for (std::size_t bit = 0; bit < frame.size() * 8; ++bit) {
      Bytes damaged = frame;
      damaged[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      bool detected = true;
      try {
        std::size_t used = 0;
        const auto q = decode_packet(damaged, &used);
        detected = used != damaged.size() || !(q == p);
      } catch (const PacketError&) {
      }
      REQUIRE(detected);
    }
  }
}

TEST_CASE("degree/tick conversion") {
  CHECK(degrees_from_ticks(2048) == 180.0);
  CHECK(ticks_from_degrees(180.0) == 2048);
  CHECK(ticks_from_degrees(-5.0) == 0);
  CHECK(ticks_from_degrees(400.0) == 4095);
  CHECK(kDegreesPerTick == doctest::Approx(0.087890625));
  CounterRng rng(5, 1);
  for (int i = 0; i < 100000; ++i) {
    const double d = rng.uniform(0, 359.9);
    REQUIRE(std::abs(degrees_from_ticks(ticks_from_degrees(d)) - d) <= kDegreesPerTick / 2 + 1e-12);
  }
  CHECK(register_width(kRegGoalPosition) == 2);
  CHECK(register_width(kRegTorqueEnable) == 1);
  CHECK_FALSE(register_width(31).has_value());
  CHECK_FALSE(register_writable(kRegPresentPosition));
}

TEST_CASE("fault script parsing") {
  const auto s = FaultScript::parse(
      "# comment\n"
      "nth 3 drop_response\n"
      "id 4 instruction READ error_status 0x80 times 2\n"
      "instruction PING corrupt_crc\n"
      "id 7 recover_after_reboot\n"
      "delay_past_timeout times 1  # trailing comment\n");
  REQUIRE(s.rules().size() == 5);
  CHECK(*s.rules()[0].nth == 3);
  CHECK(s.rules()[1].effect == FaultEffect::ErrorStatus);
  CHECK(s.rules()[1].error_code == 0x80);
  CHECK(*s.rules()[1].times == 2);
  CHECK(*s.rules()[1].instruction == Instruction::Read);
  CHECK(*s.rules()[2].instruction == Instruction::Ping);
  CHECK(s.rules()[3].effect == FaultEffect::RecoverAfterReboot);
  CHECK(*s.rules()[4].times == 1);

  for (const char* bad : {"id 4\n", "explode\n", "nth 0 drop_response\n", "id 300 drop_response\n",
                          "instruction JUMP drop_response\n", "error_status 0 \n", "times\n",
                          "drop_response corrupt_crc\n"}) {
    CHECK_THROWS_AS(FaultScript::parse(bad), FormatError);
  }
}

TEST_CASE("fault rules match, count down and retire on reboot") {
  auto s = FaultScript::parse("id 4 error_status times 2\nid 5 recover_after_reboot\n");
  const Packet read4{4, Instruction::Read, {37, 0, 2, 0}};
  CHECK(s.apply(1, read4)->effect == FaultEffect::ErrorStatus);
  CHECK(s.apply(2, read4).has_value());
  CHECK_FALSE(s.apply(3, read4).has_value());
  const Packet ping5{5, Instruction::Ping, {}};
  // Until the reboot a recover rule behaves like a dropped reply.
  CHECK(s.apply(4, ping5)->effect == FaultEffect::DropResponse);
  s.apply(5, Packet{5, Instruction::Reboot, {}});
  CHECK_FALSE(s.apply(6, ping5).has_value());
}

TEST_CASE("healthy mock bus: ping, read, write") {
  Rig r;
  for (const auto id : r.bus.layout().all_ids()) {
    const auto info = r.bus.ping(id);
    CHECK(info.model == (id == 10 ? kEncoderModel : kServoModel));
    CHECK(info.round_trip.count() > 0);
  }
  r.bus.set_torque(2, true);
  r.bus.write_goal(2, 200.0);
  r.clock.sleep(Micros{100'000});
  CHECK(r.bus.read_position(2) == doctest::Approx(200.0).epsilon(1e-3));
  CHECK(r.bus.read_register(2, kRegGoalPosition) == ticks_from_degrees(200.0));
  try {
    r.bus.write_register(2, kRegPresentPosition, 5);
    FAIL("expected a device status error");
  } catch (const BusError& e) {
    CHECK(e.kind() == BusErrorKind::DeviceStatus);
    CHECK(e.id() == 2);
  }
  CHECK_THROWS_AS(r.bus.read_register(2, 31), ContractViolation);
}

TEST_CASE("injected faults surface as typed bus errors") {
  Rig r;
  r.mock.set_fault_script(FaultScript::parse(
      "id 1 drop_response times 1\nid 2 corrupt_crc times 1\nid 3 delay_past_timeout times 1\n"
      "id 4 error_status 0x80 times 1\n"));
  auto kind = [&](std::uint8_t id) {
    try {
      r.bus.ping(id);
    } catch (const BusError& e) {
      return e.kind();
    }
    FAIL("no error");
    return BusErrorKind::Timeout;
  };
  const auto t0 = r.clock.now();
  CHECK(kind(1) == BusErrorKind::Timeout);
  CHECK(r.clock.now() - t0 >= r.bus.timeout());
  CHECK(kind(2) == BusErrorKind::Corrupt);
  CHECK(kind(3) == BusErrorKind::Timeout);
  CHECK(kind(4) == BusErrorKind::DeviceStatus);
  for (std::uint8_t id = 1; id <= 4; ++id) CHECK_NOTHROW(r.bus.ping(id));
}

TEST_CASE("error status means the command was not executed") {
  Rig r;
  r.mock.set_fault_script(FaultScript::parse("id 5 instruction WRITE error_status times 1\n"));
  const auto goal_before = r.mock.device(5).goal;
  CHECK_THROWS_AS(r.bus.write_goal(5, 90.0), BusError);
  CHECK(r.mock.device(5).goal == goal_before);
  r.bus.write_goal(5, 90.0);
  CHECK(r.mock.device(5).goal == ticks_from_degrees(90.0));
}

TEST_CASE("grouped goal write: one transaction per chain, failures named") {
  Rig r;
  std::array<double, 9> goals{};
  for (std::size_t j = 0; j < 9; ++j) goals[j] = 150.0 + 5.0 * double(j);
  const auto before = r.mock.transactions();
  auto report = r.bus.sync_write_goals(goals);
  CHECK(report.ok());
  CHECK(report.transactions == 3);
  CHECK(r.mock.transactions() - before == 3);
  for (std::size_t j = 0; j < 9; ++j) CHECK(r.mock.device(std::uint8_t(j + 1)).goal == ticks_from_degrees(goals[j]));

  r.mock.set_fault_script(FaultScript::parse("id 5 instruction WRITE drop_response times 1\n"));
  goals[4] = 100.0;
  goals[3] = 101.0;
  report = r.bus.sync_write_goals(goals);
  CHECK(report.transactions == 3);
  REQUIRE(report.failed_ids == std::vector<std::uint8_t>{5});
  CHECK(report.reasons.at(5).find("5") != std::string::npos);
  CHECK(r.mock.device(4).goal == ticks_from_degrees(101.0));
  CHECK(r.mock.device(5).goal != ticks_from_degrees(100.0));
}

TEST_CASE("supervisor: transient fault recovers after exactly one reboot") {
  Rig r;
  r.mock.set_fault_script(FaultScript::parse("id 4 recover_after_reboot\n"));
  Supervisor sup(r.bus);
  const auto info = sup.call(4, [&] { return r.bus.ping(4); });
  CHECK(info.model == kServoModel);
  CHECK(sup.last().reboots == 1);
  CHECK(sup.last().failures == 3);
  CHECK(sup.total_reboots() == 1);
  CHECK(r.mock.device(4).reboots == 1);
  CHECK(r.mock.device(5).reboots == 0);
}

TEST_CASE("supervisor: permanent fault escalates after max_reboots") {
  Rig r;
  r.mock.set_fault_script(FaultScript::parse("id 4 instruction PING drop_response\n"));
  Supervisor sup(r.bus);
  try {
    sup.call(4, [&] { return r.bus.ping(4); });
    FAIL("expected escalation");
  } catch (const ManualInterventionRequired& e) {
    CHECK(e.id() == 4);
    CHECK(e.trace().reboots == 3);
    CHECK(e.trace().attempts == 3 * 4);
  }
  CHECK(sup.total_reboots() == 3);
  // First cycle targets the device, later cycles its whole chain.
  CHECK(r.mock.device(4).reboots == 3);
  CHECK(r.mock.device(5).reboots == 2);
  CHECK(r.mock.device(6).reboots == 2);
  CHECK(r.mock.device(1).reboots == 0);
}

TEST_CASE("supervisor: healthy bus never reboots") {
  Rig r;
  Supervisor sup(r.bus);
  for (int i = 0; i < 10000; ++i) {
    const auto id = std::uint8_t(1 + i % 10);
    sup.call(id, [&] { return r.bus.read_position(id); });
  }
  CHECK(sup.total_reboots() == 0);
  CHECK(sup.total_retries() == 0);
}

TEST_CASE("supervisor: a flaky read costs retries, not reboots") {
  Rig r;
  r.mock.set_fault_script(FaultScript::parse("id 2 corrupt_crc times 2\n"));
  Supervisor sup(r.bus);
  sup.call(2, [&] { return r.bus.read_position(2); });
  CHECK(sup.last().attempts == 3);
  CHECK(sup.last().reboots == 0);
  CHECK(sup.total_retries() == 2);
  SupervisorPolicy bad;
  bad.failure_threshold = 0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("hardware adapter tracks the simulator within quantization") {
  env::EnvConfig cfg;
  Rig r;
  const double start = 37.0;
  r.mock.attach_valve(cfg, start);
  Supervisor sup(r.bus);
  HardwareValveEnv hw(sup, {cfg});
  env::GripperValveEnv sim(cfg);
  env::ScriptedController ctl_hw(cfg), ctl_sim(cfg);

  CounterRng unused(1, 1), goal_a(1, 2), goal_b(1, 2);
  hw.reset({unused, goal_a});
  CHECK(unused.cursor() == 0);
  CHECK(std::abs(env::angdiff(hw.valve_angle(), start)) <= kDegreesPerTick);
  sim.reset_to(start, env::wrap360(start + env::sample_goal_offset(cfg.task.kind, goal_b)));
  CHECK(std::abs(env::angdiff(hw.goal_angle(), sim.goal_angle())) <= kDegreesPerTick);
  ctl_hw.begin_episode();
  ctl_sim.begin_episode();

  env::StepResult rh, rs;
  std::vector<double> action;
  int steps = 0;
  double worst_joint = 0, worst_valve = 0;
  do {
    // Drive both with the simulator's actions so the command streams are identical.
    const auto a = ctl_sim.act(sim.observation());
    rs = sim.step(a);
    rh = hw.step(a);
    ++steps;
    for (std::size_t j = 0; j < 9; ++j) worst_joint = std::max(worst_joint, std::abs(hw.joints()[j] - sim.joints()[j]));
    worst_valve = std::max(worst_valve, std::abs(env::angdiff(hw.valve_angle(), sim.valve_angle())));
  } while (!rs.done && !rh.done);
  CHECK(worst_joint <= kDegreesPerTick);
  CHECK(worst_valve <= 1.0);
  CHECK(rs.reached);
  CHECK(rh.reached);
  CHECK(std::abs(rs.step_index - rh.step_index) <= 1);
}

TEST_CASE("hardware adapter marks the episode invalid on escalation") {
  env::EnvConfig cfg;
  Rig r;
  r.mock.attach_valve(cfg, 0.0);
  Supervisor sup(r.bus);
  HardwareValveEnv hw(sup, {cfg});
  CounterRng v(2, 1), g(2, 2);
  hw.reset({v, g});
  r.mock.set_fault_script(FaultScript::parse("id 8 drop_response\n"));
  CHECK_THROWS_AS(hw.step(std::vector<double>(9, 0.0)), HardwareEscalation);
  CHECK(hw.episode_invalid());
  CHECK_THROWS_AS(hw.step(std::vector<double>(9, 0.0)), ContractViolation);
  r.mock.set_fault_script({});
  CHECK_NOTHROW(hw.reset({v, g}));
  CHECK_FALSE(hw.episode_invalid());
}
