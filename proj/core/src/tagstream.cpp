#include "qtb/tagstream.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qtb/errors.hpp"

namespace qtb {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'T', 'A', 'G'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kNameLen = 15;

template <typename T>
void write_le(std::ostream& out, T value) {
  // Host is little endian on every supported target; serialize byte-wise
  // anyway so the format stays fixed.
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::uint8_t TagStream::channel_id(const std::string& name) const {
  auto it = channel_map.find(name);
  if (it == channel_map.end()) throw ConfigError(name, "unknown channel name");
  return it->second;
}

bool TagStream::is_sorted() const {
  return std::is_sorted(records.begin(), records.end());
}

void TagStream::sort_records() { std::sort(records.begin(), records.end()); }

std::vector<std::int64_t> TagStream::channel_times(std::uint8_t id) const {
  std::vector<std::int64_t> times;
  for (const TagRecord& r : records) {
    if (r.channel == id) times.push_back(static_cast<std::int64_t>(r.time_ps));
  }
  return times;
}

void write_ttag(const TagStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot open TTAG output");
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint16_t>(out, kVersion);
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(stream.channel_map.size()));
  for (const auto& [name, id] : stream.channel_map) {
    if (name.size() > kNameLen) throw ConfigError(name, "channel name longer than 15 bytes");
    out.put(static_cast<char>(id));
    char buf[kNameLen] = {};
    std::memcpy(buf, name.data(), name.size());
    out.write(buf, kNameLen);
  }
  // Buffered bulk write: records are already in the packed on-disk layout
  // except for field order, so serialize in chunks.
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<char> buf(kChunk * 9);
  std::size_t filled = 0;
  for (const TagRecord& r : stream.records) {
    char* p = buf.data() + filled * 9;
    p[0] = static_cast<char>(r.channel);
    std::memcpy(p + 1, &r.time_ps, 8);
    if (++filled == kChunk) {
      out.write(buf.data(), filled * 9);
      filled = 0;
    }
  }
  if (filled > 0) out.write(buf.data(), filled * 9);
  if (!out) throw ConfigError(path, "TTAG write failed");
}

TagStream read_ttag(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open TTAG input");
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError(path, "not a TTAG file (bad magic)");
  const auto version = read_le<std::uint16_t>(in);
  if (version != kVersion) throw ConfigError(path, "unsupported TTAG version");
  const auto n_channels = read_le<std::uint16_t>(in);

  TagStream stream;
  for (std::uint16_t i = 0; i < n_channels; ++i) {
    const auto id = static_cast<std::uint8_t>(in.get());
    char buf[kNameLen + 1] = {};
    in.read(buf, kNameLen);
    stream.channel_map[std::string(buf)] = id;
  }
  char rec[9];
  while (in.read(rec, 9)) {
    TagRecord r;
    r.channel = static_cast<std::uint8_t>(rec[0]);
    std::memcpy(&r.time_ps, rec + 1, 8);
    stream.records.push_back(r);
  }
  if (!stream.is_sorted()) throw ConfigError(path, "TTAG records not in time order");
  return stream;
}

TagStream read_tagstream_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open tag stream TSV");
  TagStream stream;
  std::uint8_t next_id = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError(path, "expected channel<TAB>time_ps: " + line);
    const std::string name = line.substr(0, tab);
    TagRecord r;
    try {
      r.time_ps = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ConfigError(path, "bad timestamp in row: " + line);
    }
    auto it = stream.channel_map.find(name);
    if (it == stream.channel_map.end()) {
      it = stream.channel_map.emplace(name, next_id++).first;
    }
    r.channel = it->second;
    stream.records.push_back(r);
  }
  stream.sort_records();
  return stream;
}

TagStream read_tagstream(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ConfigError(path, "cannot open tag stream");
  std::array<char, 4> magic{};
  probe.read(magic.data(), magic.size());
  probe.close();
  if (magic == kMagic) return read_ttag(path);
  return read_tagstream_tsv(path);
}

}  // namespace qtb
