#include "hom/stream_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hom/error.hpp"

namespace hom::io {
namespace {

constexpr char kMagic[4] = {'P', 'H', 'T', 'S'};

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

mc::Origin origin_from_code(unsigned code) {
  if (code > 3) throw ValidationError("unknown origin tag in stream");
  return static_cast<mc::Origin>(code);
}

mc::Channel channel_from_code(unsigned code) {
  if (code == 2) return mc::Channel::D2;
  if (code == 3) return mc::Channel::D3;
  throw ValidationError("unknown channel code " + std::to_string(code) + " in stream");
}

const char* origin_name(mc::Origin o) {
  switch (o) {
    case mc::Origin::Dot: return "dot";
    case mc::Origin::Laser: return "laser";
    case mc::Origin::Dark: return "dark";
    case mc::Origin::Untagged: break;
  }
  return "";
}

void finish_stream(mc::TimestampStream& s) {
  double last = 0.0;
  bool tagged = false;
  for (const auto& c : s.clicks) {
    if (c.time_ps < 0.0) throw ValidationError("negative click time in stream");
    last = std::max(last, c.time_ps);
    tagged = tagged || c.origin != mc::Origin::Untagged;
  }
  s.tagged = tagged;
  s.duration_ps = last;
  // Externally produced files need not be time ordered.
  std::stable_sort(s.clicks.begin(), s.clicks.end(),
                   [](const mc::Click& a, const mc::Click& b) { return a.time_ps < b.time_ps; });
}

}  // namespace

void write_phts(std::ostream& out, const mc::TimestampStream& stream) {
  out.write(kMagic, 4);
  const char version[2] = {static_cast<char>(kPhtsVersion & 0xFF),
                           static_cast<char>(kPhtsVersion >> 8)};
  out.write(version, 2);
  for (const auto& c : stream.clicks) {
    const auto code = static_cast<unsigned>(c.channel) | (static_cast<unsigned>(c.origin) << 4);
    out.put(static_cast<char>(code));
    put_u64_le(out, std::bit_cast<std::uint64_t>(c.time_ps));
  }
  if (!out) throw ValidationError("failed writing PHTS stream");
}

mc::TimestampStream read_phts(std::istream& in) {
  char header[6];
  if (!in.read(header, 6) || std::memcmp(header, kMagic, 4) != 0) {
    throw ValidationError("not a PHTS stream (bad magic)");
  }
  const unsigned version = static_cast<unsigned char>(header[4]) |
                           (static_cast<unsigned>(static_cast<unsigned char>(header[5])) << 8);
  if (version != kPhtsVersion) {
    throw ValidationError("unsupported PHTS version " + std::to_string(version));
  }

  mc::TimestampStream s;
  unsigned char rec[9];
  while (in.read(reinterpret_cast<char*>(rec), 9)) {
    const double t = std::bit_cast<double>(get_u64_le(rec + 1));
    s.clicks.push_back({t, channel_from_code(rec[0] & 0x0F), origin_from_code(rec[0] >> 4)});
  }
  if (in.gcount() != 0) throw ValidationError("truncated PHTS record");
  finish_stream(s);
  return s;
}

void write_stream_csv(std::ostream& out, const mc::TimestampStream& stream) {
  const auto prec = out.precision(17);
  out << "time_ps,channel" << (stream.tagged ? ",origin" : "") << '\n';
  for (const auto& c : stream.clicks) {
    out << c.time_ps << ',' << (c.channel == mc::Channel::D2 ? "D2" : "D3");
    if (stream.tagged) out << ',' << origin_name(c.origin);
    out << '\n';
  }
  out.precision(prec);
}

mc::TimestampStream read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("stream CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool tagged = line == "time_ps,channel,origin";
  if (!tagged && line != "time_ps,channel") {
    throw ValidationError("stream CSV header must be 'time_ps,channel[,origin]'");
  }
  mc::TimestampStream s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string time_s, ch_s, origin_s;
    std::getline(row, time_s, ',');
    std::getline(row, ch_s, ',');
    if (tagged) std::getline(row, origin_s, ',');
    mc::Click c{0.0, mc::Channel::D2, mc::Origin::Untagged};
    try {
      c.time_ps = std::stod(time_s);
    } catch (const std::exception&) {
      throw ValidationError("stream CSV line " + std::to_string(line_no) + ": bad time");
    }
    if (ch_s == "D2" || ch_s == "2") {
      c.channel = mc::Channel::D2;
    } else if (ch_s == "D3" || ch_s == "3") {
      c.channel = mc::Channel::D3;
    } else {
      throw ValidationError("stream CSV line " + std::to_string(line_no) + ": bad channel '" + ch_s + "'");
    }
    if (tagged) {
      if (origin_s == "dot") c.origin = mc::Origin::Dot;
      else if (origin_s == "laser") c.origin = mc::Origin::Laser;
      else if (origin_s == "dark") c.origin = mc::Origin::Dark;
      else throw ValidationError("stream CSV line " + std::to_string(line_no) + ": bad origin");
    }
    s.clicks.push_back(c);
  }
  finish_stream(s);
  s.tagged = tagged;
  return s;
}

void write_metadata(std::ostream& out, const mc::TimestampStream& stream) {
  const auto prec = out.precision(17);
  out << "format_version = " << kPhtsVersion << '\n'
      << "duration_ps = " << stream.duration_ps << '\n'
      << "seed = " << stream.seed << '\n'
      << "config_hash = " << stream.config_hash << '\n'
      << "tagged = " << (stream.tagged ? 1 : 0) << '\n'
      << "clicks_D2 = " << stream.count(mc::Channel::D2) << '\n'
      << "clicks_D3 = " << stream.count(mc::Channel::D3) << '\n';
  out.precision(prec);
}

StreamMetadata read_metadata(std::istream& in) {
  StreamMetadata m;
  bool have_duration = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto value = line.substr(eq + 1);
    try {
      if (key == "duration_ps") {
        m.duration_ps = std::stod(value);
        have_duration = true;
      } else if (key == "seed") {
        m.seed = std::stoull(value);
      } else if (key == "config_hash") {
        m.config_hash = std::stoull(value);
      } else if (key == "tagged") {
        m.tagged = std::stoi(value) != 0;
      }
    } catch (const std::exception&) {
      throw ValidationError("bad value for '" + key + "' in stream metadata");
    }
  }
  if (!have_duration) throw ValidationError("stream metadata lacks duration_ps");
  return m;
}

std::filesystem::path metadata_path(const std::filesystem::path& stream_path) {
  auto p = stream_path;
  p += ".meta";
  return p;
}

mc::TimestampStream load_stream(const std::filesystem::path& path,
                                std::optional<double> duration_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open stream file '" + path.string() + "'");
  // Binary files announce themselves; anything else is read as CSV.
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  mc::TimestampStream s = binary ? read_phts(in) : read_stream_csv(in);

  if (duration_override) {
    s.duration_ps = *duration_override;
  } else if (std::ifstream meta(metadata_path(path)); meta) {
    const auto m = read_metadata(meta);
    s.duration_ps = m.duration_ps;
    s.seed = m.seed;
    s.config_hash = m.config_hash;
  }
  if (!(s.duration_ps > 0.0)) throw ValidationError("stream duration must be > 0");
  return s;
}

}  // namespace hom::io
