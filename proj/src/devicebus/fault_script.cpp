#include "valvebench/devicebus/fault_script.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/errors.hpp"

namespace valvebench::devicebus {

std::string_view effect_name(FaultEffect e) {
  switch (e) {
    case FaultEffect::DropResponse: return "drop_response";
    case FaultEffect::CorruptCrc: return "corrupt_crc";
    case FaultEffect::DelayPastTimeout: return "delay_past_timeout";
    case FaultEffect::ErrorStatus: return "error_status";
    case FaultEffect::RecoverAfterReboot: return "recover_after_reboot";
  }
  return "?";
}

namespace {

std::optional<FaultEffect> effect_from(std::string_view word) {
  for (auto e : {FaultEffect::DropResponse, FaultEffect::CorruptCrc, FaultEffect::DelayPastTimeout,
                 FaultEffect::ErrorStatus, FaultEffect::RecoverAfterReboot}) {
    if (effect_name(e) == word) return e;
  }
  return std::nullopt;
}

std::uint64_t parse_number(const std::string& s) {
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    std::size_t pos = 0;
    const auto v = std::stoull(s.substr(2), &pos, 16);
    if (pos != s.size() - 2) throw FormatError("bad number '" + s + "'");
    return v;
  }
  return parse_uint(s);
}

bool matches(const FaultRule& r, std::uint64_t nth, const Packet& p, bool check_instruction) {
  if (r.nth && *r.nth != nth) return false;
  if (check_instruction && r.instruction && *r.instruction != p.instruction) return false;
  if (r.id && *r.id != p.id) return false;
  return true;
}

}  // namespace

FaultScript FaultScript::parse(std::string_view text) {
  FaultScript script;
  std::istringstream lines{std::string(text)};
  std::string line;
  for (int line_no = 1; std::getline(lines, line); ++line_no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    const std::string where = "fault script line " + std::to_string(line_no) + ": ";
    FaultRule rule;
    bool have_effect = false;
    try {
      for (std::size_t i = 0; i < tok.size(); ++i) {
        auto arg = [&]() -> const std::string& {
          if (i + 1 >= tok.size()) throw FormatError("'" + tok[i] + "' needs a value");
          return tok[++i];
        };
        if (tok[i] == "nth") {
          rule.nth = parse_number(arg());
          if (*rule.nth == 0) throw FormatError("nth counts from 1");
        } else if (tok[i] == "instruction") {
          try {
            rule.instruction = instruction_from_string(arg());
          } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
          }
        } else if (tok[i] == "id") {
          const auto id = parse_number(arg());
          if (id > kMaxDeviceId) throw FormatError("id out of range");
          rule.id = static_cast<std::uint8_t>(id);
        } else if (tok[i] == "times") {
          rule.times = parse_number(arg());
        } else if (auto e = effect_from(tok[i])) {
          if (have_effect) throw FormatError("more than one effect");
          rule.effect = *e;
          have_effect = true;
          if (*e == FaultEffect::ErrorStatus && i + 1 < tok.size() &&
              std::isdigit(static_cast<unsigned char>(tok[i + 1][0]))) {
            const auto code = parse_number(tok[++i]);
            if (code == 0 || code > 0xFF) throw FormatError("error code must be 1..255");
            rule.error_code = static_cast<std::uint8_t>(code);
          }
        } else {
          throw FormatError("unknown word '" + tok[i] + "'");
        }
      }
      if (!have_effect) throw FormatError("rule has no effect");
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
    script.add(rule);
  }
  return script;
}

FaultScript FaultScript::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read fault script '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse(s.str());
}

std::optional<FaultHit> FaultScript::apply(std::uint64_t nth, const Packet& request) {
  if (request.instruction == Instruction::Reboot) {
    bool recovered = false;
    for (auto& r : rules_) {
      if (!r.retired && r.effect == FaultEffect::RecoverAfterReboot && matches(r, nth, request, false)) {
        r.retired = true;
        recovered = true;
      }
    }
    if (recovered) return std::nullopt;
  }
  for (auto& r : rules_) {
    if (r.retired || (r.times && r.applied >= *r.times)) continue;
    if (!matches(r, nth, request, r.effect != FaultEffect::RecoverAfterReboot)) continue;
    ++r.applied;
    const auto effect =
        r.effect == FaultEffect::RecoverAfterReboot ? FaultEffect::DropResponse : r.effect;
    return FaultHit{effect, r.error_code};
  }
  return std::nullopt;
}

}  // namespace valvebench::devicebus
