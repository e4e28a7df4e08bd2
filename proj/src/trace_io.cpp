#include "isingflip/trace_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "file_util.hpp"
#include "isingflip/error.hpp"
#include "json_util.hpp"

namespace isingflip {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary trace codec assumes a little-endian host");

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw ParseError(std::string("truncated trace: missing ") + what, 0, pos_);
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t count, const char* what) {
    if (bytes_.size() - pos_ < count) {
      throw ParseError(std::string("truncated trace: missing ") + what, 0, pos_);
    }
    auto s = bytes_.substr(pos_, count);
    pos_ += count;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

/// Checks what the FlipTrace constructor would reject, so malformed input is
/// reported with its position.
struct EventChecker {
  std::size_t n;
  double horizon;
  double last = -1.0;

  const char* problem(const FlipEvent& e) {
    if (e.site >= n) {
      return "event site out of range";
    }
    if (!(e.time >= 0.0) || e.time > horizon) {
      return "event time outside [0, horizon]";
    }
    if (!(e.time > last)) {
      return "event times not strictly increasing";
    }
    last = e.time;
    return nullptr;
  }
};

/// Fast path for the exact shape this library writes: {"t":<num>,"s":<int>}
bool parse_event_fast(std::string_view line, FlipEvent& out) {
  constexpr std::string_view kT = "{\"t\":";
  constexpr std::string_view kS = ",\"s\":";
  if (line.substr(0, kT.size()) != kT) {
    return false;
  }
  const char* p = line.data() + kT.size();
  const char* end = line.data() + line.size();
  auto r1 = std::from_chars(p, end, out.time);
  if (r1.ec != std::errc{} || std::string_view(r1.ptr, static_cast<std::size_t>(end - r1.ptr))
                                      .substr(0, kS.size()) != kS) {
    return false;
  }
  p = r1.ptr + kS.size();
  auto r2 = std::from_chars(p, end, out.site);
  if (r2.ec != std::errc{} || r2.ptr + 1 != end || *r2.ptr != '}') {
    return false;
  }
  return true;
}

}  // namespace

std::string trace_to_jsonl(const FlipTrace& trace) {
  std::string out;
  out.reserve(32 + 4 * trace.size() + 28 * trace.events().size());
  out += "{\"n\":";
  out += std::to_string(trace.size());
  out += ",\"horizon\":";
  append_double(out, trace.horizon());
  out += ",\"initial\":[";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i != 0) {
      out += ',';
    }
    out += trace.initial().spin(i) > 0 ? "1" : "-1";
  }
  out += "]}\n";
  for (const auto& e : trace.events()) {
    out += "{\"t\":";
    append_double(out, e.time);
    out += ",\"s\":";
    out += std::to_string(e.site);
    out += "}\n";
  }
  return out;
}

FlipTrace trace_from_jsonl(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      const auto stop = nl == std::string_view::npos ? text.size() : nl;
      line = text.substr(pos, stop - pos);
      if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
      }
      pos = stop + 1;
      ++line_no;
      if (line.find_first_not_of(" \t") != std::string_view::npos) {
        return true;
      }
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line)) {
    throw ParseError("empty trace document", 1, 0);
  }
  const auto header = detail::parse_json(line, line_no);
  std::size_t n = 0;
  double horizon = 0.0;
  std::vector<int> initial;
  try {
    n = detail::require<std::size_t>(header, "n");
    horizon = detail::require<double>(header, "horizon");
    initial = detail::require<std::vector<int>>(header, "initial");
  } catch (const Error& e) {
    throw ParseError(std::string("bad trace header: ") + e.what(), line_no, 0);
  }
  if (initial.size() != n) {
    throw ParseError("header 'initial' length differs from n", line_no, 0);
  }
  for (int s : initial) {
    if (s != 1 && s != -1) {
      throw ParseError("initial spins must be +-1", line_no, 0);
    }
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ParseError("horizon must be finite and >= 0", line_no, 0);
  }

  EventChecker check{n, horizon};
  std::vector<FlipEvent> events;
  while (next_line(line)) {
    FlipEvent e;
    if (!parse_event_fast(line, e)) {
      const auto doc = detail::parse_json(line, line_no);
      if (!doc.is_object() || !doc.contains("t") || !doc.contains("s") ||
          !doc["t"].is_number() || !doc["s"].is_number_unsigned()) {
        throw ParseError("event lines need numeric 't' and unsigned 's'", line_no, 0);
      }
      e.time = doc["t"].get<double>();
      e.site = doc["s"].get<std::uint32_t>();
    }
    if (const char* why = check.problem(e)) {
      throw ParseError(why, line_no, 0);
    }
    events.push_back(e);
  }
  return FlipTrace(SpinConfig::from_spins(initial), horizon, std::move(events));
}

std::string trace_to_binary(const FlipTrace& trace) {
  std::string out;
  const std::size_t n = trace.size();
  out.reserve(4 + 4 + 8 + (n + 7) / 8 + 8 + 12 * trace.events().size());
  out.append(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  put<double>(out, trace.horizon());
  std::string bits((n + 7) / 8, '\0');
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.initial().is_plus(i)) {
      bits[i / 8] = static_cast<char>(bits[i / 8] | (1 << (i % 8)));
    }
  }
  out += bits;
  put<std::uint64_t>(out, trace.events().size());
  for (const auto& e : trace.events()) {
    put<double>(out, e.time);
    put<std::uint32_t>(out, e.site);
  }
  return out;
}

FlipTrace trace_from_binary(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4, "magic") != std::string_view(kMagic, 4)) {
    throw ParseError("bad magic, expected FLT1", 0, 0);
  }
  const auto n = r.get<std::uint32_t>("site count");
  const auto horizon = r.get<double>("horizon");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ParseError("horizon must be finite and >= 0", 0, r.pos() - 8);
  }
  const auto bits = r.take((static_cast<std::size_t>(n) + 7) / 8, "initial spins");
  SpinConfig initial(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if ((static_cast<unsigned char>(bits[i / 8]) >> (i % 8)) & 1U) {
      initial.set(i, +1);
    }
  }
  const auto count = r.get<std::uint64_t>("event count");
  if (count > r.remaining() / 12) {
    throw ParseError("truncated trace: header promises " + std::to_string(count) + " events",
                     0, r.pos());
  }
  if (r.remaining() != count * 12) {
    throw ParseError("trailing bytes after the last event", 0, r.pos() + count * 12);
  }
  EventChecker check{n, horizon};
  std::vector<FlipEvent> events;
  events.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::size_t at = r.pos();
    FlipEvent e;
    e.time = r.get<double>("event time");
    e.site = r.get<std::uint32_t>("event site");
    if (const char* why = check.problem(e)) {
      throw ParseError(why, 0, at);
    }
    events.push_back(e);
  }
  return FlipTrace(std::move(initial), horizon, std::move(events));
}

FlipTrace trace_from_bytes(std::string_view bytes) {
  if (bytes.substr(0, 4) == std::string_view(kMagic, 4)) {
    return trace_from_binary(bytes);
  }
  return trace_from_jsonl(bytes);
}

void save_trace(const FlipTrace& trace, const std::filesystem::path& path, TraceFormat format) {
  detail::write_file(path,
                     format == TraceFormat::kJsonl ? trace_to_jsonl(trace) : trace_to_binary(trace));
}

void save_trace(const FlipTrace& trace, const std::filesystem::path& path) {
  save_trace(trace, path, path.extension() == ".jsonl" ? TraceFormat::kJsonl : TraceFormat::kBinary);
}

FlipTrace load_trace(const std::filesystem::path& path) {
  return trace_from_bytes(detail::read_file(path));
}

}  // namespace isingflip
