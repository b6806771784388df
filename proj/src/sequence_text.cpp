// Line-oriented pulse-program format:
//
//   dt 0.01us
//   end 25us
//   ensemble fwhm=850kHz spacing=10kHz groups=201
//   pulse name=D channel=probe at=1us dur=0.1us rabi=1.25MHz detune=0MHz
//
// '#' starts a comment. Units are mandatory.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "starkecho/sequence.hpp"

namespace starkecho {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Base unit each quantity is returned in.
enum class Dimension { time_us, freq_mhz, freq_khz };

class LineParser {
 public:
  explicit LineParser(int line) : line_(line) {}

  [[noreturn]] void fail(int column, const std::string& message) const {
    throw ParseError(line_, column, message);
  }

  // Value with a mandatory unit suffix; returns us or MHz.
  double quantity(const Token& tok, std::string_view value, int column, Dimension dim) const {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc() || ptr == value.data())
      fail(column, "expected a number in '" + std::string(tok.text) + "'");
    if (!std::isfinite(x)) fail(column, "non-finite number in '" + std::string(tok.text) + "'");
    const std::string unit = lower(std::string_view(ptr, value.data() + value.size() - ptr));
    if (unit.empty()) fail(column, "missing unit in '" + std::string(tok.text) + "'");
    const bool is_time = dim == Dimension::time_us;
    // Scale to the base unit; a matching unit passes through untouched.
    static const std::map<std::string, double, std::less<>> time_units = {
        {"us", 1.0}, {"ns", 1e-3}, {"ms", 1e3}};
    static const std::map<std::string, double, std::less<>> freq_units = {
        {"hz", 1e-6}, {"khz", 1e-3}, {"mhz", 1.0}, {"ghz", 1e3}};
    const auto& table = is_time ? time_units : freq_units;
    auto it = table.find(unit);
    if (it == table.end())
      fail(column + static_cast<int>(ptr - value.data()),
           "unknown " + std::string(is_time ? "time" : "frequency") + " unit '" +
               std::string(ptr, value.data() + value.size() - ptr) + "'");
    if (dim == Dimension::freq_khz) return unit == "khz" ? x : x * it->second * 1e3;
    return it->second == 1.0 ? x : x * it->second;
  }

  struct KeyValue {
    std::string_view value;
    int column;  // column of the value
    const Token* token;
  };

  std::map<std::string, KeyValue, std::less<>> key_values(const std::vector<Token>& toks,
                                                          const std::set<std::string>& allowed) const {
    std::map<std::string, KeyValue, std::less<>> out;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const Token& t = toks[i];
      auto eq = t.text.find('=');
      if (eq == std::string_view::npos || eq == 0)
        fail(t.column, "expected key=value, got '" + std::string(t.text) + "'");
      std::string key(t.text.substr(0, eq));
      if (!allowed.contains(key)) fail(t.column, "unknown key '" + key + "'");
      KeyValue kv{t.text.substr(eq + 1), t.column + static_cast<int>(eq) + 1, &t};
      if (kv.value.empty()) fail(kv.column, "empty value for '" + key + "'");
      if (!out.emplace(key, kv).second) fail(t.column, "duplicate key '" + key + "'");
    }
    return out;
  }

  const KeyValue& require(const std::map<std::string, KeyValue, std::less<>>& kv,
                          std::string_view key, int column) const {
    auto it = kv.find(key);
    if (it == kv.end()) fail(column, "missing key '" + std::string(key) + "'");
    return it->second;
  }

 private:
  int line_;
};

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

PulseSequence parse_sequence(std::string_view text) {
  PulseSequence seq;
  seq.pulses.clear();
  std::optional<double> dt, end;
  bool have_ensemble = false;
  std::map<std::string, int> pulse_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto toks = tokenize(line);
    if (toks.empty()) continue;
    LineParser lp(line_no);
    const Token& head = toks.front();

    if (head.text == "dt" || head.text == "end") {
      if (toks.size() != 2)
        lp.fail(head.column, "'" + std::string(head.text) + "' takes exactly one value");
      auto& slot = head.text == "dt" ? dt : end;
      if (slot) lp.fail(head.column, "duplicate '" + std::string(head.text) + "' directive");
      slot = lp.quantity(toks[1], toks[1].text, toks[1].column, Dimension::time_us);
    } else if (head.text == "ensemble") {
      if (have_ensemble) lp.fail(head.column, "duplicate 'ensemble' directive");
      have_ensemble = true;
      auto kv = lp.key_values(toks, {"fwhm", "spacing", "groups"});
      const auto& fwhm = lp.require(kv, "fwhm", head.column);
      const auto& spacing = lp.require(kv, "spacing", head.column);
      const auto& groups = lp.require(kv, "groups", head.column);
      seq.ensemble.fwhm_khz = lp.quantity(*fwhm.token, fwhm.value, fwhm.column, Dimension::freq_khz);
      seq.ensemble.spacing_khz =
          lp.quantity(*spacing.token, spacing.value, spacing.column, Dimension::freq_khz);
      int n = 0;
      auto [ptr, ec] = std::from_chars(groups.value.data(), groups.value.data() + groups.value.size(), n);
      if (ec != std::errc() || ptr != groups.value.data() + groups.value.size())
        lp.fail(groups.column, "groups must be an integer");
      seq.ensemble.group_count = n;
    } else if (head.text == "pulse") {
      auto kv = lp.key_values(toks, {"name", "channel", "at", "dur", "rabi", "detune"});
      Pulse p;
      const auto& name = lp.require(kv, "name", head.column);
      if (!valid_name(name.value)) lp.fail(name.column, "bad pulse name '" + std::string(name.value) + "'");
      p.name = std::string(name.value);
      const auto& channel = lp.require(kv, "channel", head.column);
      if (channel.value == "probe") {
        p.channel = Channel::probe;
      } else if (channel.value == "control") {
        p.channel = Channel::control;
      } else {
        lp.fail(channel.column, "unknown channel '" + std::string(channel.value) + "'");
      }
      const auto& at = lp.require(kv, "at", head.column);
      const auto& dur = lp.require(kv, "dur", head.column);
      const auto& rabi = lp.require(kv, "rabi", head.column);
      p.t_on_us = lp.quantity(*at.token, at.value, at.column, Dimension::time_us);
      p.duration_us = lp.quantity(*dur.token, dur.value, dur.column, Dimension::time_us);
      p.rabi_mhz = lp.quantity(*rabi.token, rabi.value, rabi.column, Dimension::freq_mhz);
      if (auto it = kv.find("detune"); it != kv.end())
        p.detune_mhz = lp.quantity(*it->second.token, it->second.value, it->second.column,
                                   Dimension::freq_mhz);
      if (auto [it, fresh] = pulse_lines.emplace(p.name, line_no); !fresh)
        lp.fail(name.column, "duplicate pulse name '" + p.name + "' (first defined on line " +
                                 std::to_string(it->second) + ")");
      seq.pulses.push_back(std::move(p));
    } else {
      lp.fail(head.column, "unknown directive '" + std::string(head.text) + "'");
    }
  }

  if (!dt) throw ParseError(line_no, 1, "missing 'dt' directive");
  if (!end) throw ParseError(line_no, 1, "missing 'end' directive");
  seq.dt_us = *dt;
  seq.t_end_us = *end;
  require_valid(seq);
  return seq;
}

namespace {

std::string number(double x) {
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

std::string serialize_sequence(const PulseSequence& seq) {
  std::vector<const Pulse*> order;
  for (const auto& p : seq.pulses) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Pulse* a, const Pulse* b) {
    if (a->t_on_us != b->t_on_us) return a->t_on_us < b->t_on_us;
    if (a->channel != b->channel) return a->channel < b->channel;
    return a->name < b->name;
  });

  std::string out;
  out += "dt " + number(seq.dt_us) + "us\n";
  out += "end " + number(seq.t_end_us) + "us\n";
  out += "ensemble fwhm=" + number(seq.ensemble.fwhm_khz) + "kHz spacing=" +
         number(seq.ensemble.spacing_khz) + "kHz groups=" + std::to_string(seq.ensemble.group_count) +
         "\n";
  for (const Pulse* p : order) {
    out += "pulse name=" + p->name + " channel=" + std::string(to_string(p->channel)) +
           " at=" + number(p->t_on_us) + "us dur=" + number(p->duration_us) +
           "us rabi=" + number(p->rabi_mhz) + "MHz detune=" + number(p->detune_mhz) + "MHz\n";
  }
  return out;
}

}  // namespace starkecho
