#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtb/quantities.hpp"

namespace qtb {

/// One detection record. Packed so that large streams (10^8+ tags) stay
/// within memory; time is unsigned picoseconds since the stream epoch.
#pragma pack(push, 1)
struct TagRecord {
  std::uint64_t time_ps = 0;
  std::uint8_t channel = 0;

  friend bool operator<(const TagRecord& a, const TagRecord& b) {
    return a.time_ps != b.time_ps ? a.time_ps < b.time_ps : a.channel < b.channel;
  }
  friend bool operator==(const TagRecord& a, const TagRecord& b) {
    return a.time_ps == b.time_ps && a.channel == b.channel;
  }
};
#pragma pack(pop)

/// Ordered sequence of (channel, timestamp) detection records plus the
/// channel-name map. Records are sorted by time, ties broken by channel id.
struct TagStream {
  std::map<std::string, std::uint8_t> channel_map;
  std::vector<TagRecord> records;

  std::uint8_t channel_id(const std::string& name) const;
  bool is_sorted() const;
  void sort_records();

  /// Sorted times (ps) of one channel; the usual input to counting ops.
  std::vector<std::int64_t> channel_times(std::uint8_t id) const;
  std::vector<std::int64_t> channel_times(const std::string& name) const {
    return channel_times(channel_id(name));
  }
};

/// Binary TTAG container, bit-exact: magic "TTAG", u16 version = 1,
/// u16 channel count, channel entries (u8 id, 15-byte zero-padded ASCII
/// name), then records of (u8 channel id, u64 time in ps), little endian,
/// in time order.
void write_ttag(const TagStream& stream, const std::string& path);
TagStream read_ttag(const std::string& path);

/// TSV alternative accepted on input: `channel\ttime_ps` per line, channel
/// given by name or numeric id. Lines starting with '#' are comments.
TagStream read_tagstream_tsv(const std::string& path);

/// Dispatches on the TTAG magic bytes, falling back to TSV.
TagStream read_tagstream(const std::string& path);

}  // namespace qtb
