#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "qtb/errors.hpp"
#include "qtb/tagstream.hpp"

using namespace qtb;

namespace {

TagStream random_stream(std::size_t n, std::uint64_t seed) {
  TagStream s;
  s.channel_map = {{"CLOCK", 0}, {"A1", 1}, {"B1", 3}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> t(0, 1'000'000'000);
  std::uniform_int_distribution<int> c(0, 2);
  const std::uint8_t ids[] = {0, 1, 3};
  for (std::size_t i = 0; i < n; ++i) s.records.push_back({t(rng), ids[c(rng)]});
  s.sort_records();
  return s;
}

}  // namespace

TEST_CASE("TTAG round trip is lossless") {
  const std::string path = "roundtrip.ttag";
  const TagStream original = random_stream(5000, 3);
  write_ttag(original, path);
  const TagStream loaded = read_ttag(path);
  CHECK(loaded.channel_map == original.channel_map);
  REQUIRE(loaded.records.size() == original.records.size());
  CHECK(loaded.records == original.records);
  std::remove(path.c_str());
}

TEST_CASE("TTAG writes are byte-identical across runs") {
  const TagStream s = random_stream(2000, 9);
  write_ttag(s, "digest_a.ttag");
  write_ttag(s, "digest_b.ttag");
  std::ifstream a("digest_a.ttag", std::ios::binary), b("digest_b.ttag", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
  // Header: magic + version + channel count + 3 channel entries, then
  // 9 bytes per record.
  CHECK(bytes_a.size() == 4 + 2 + 2 + 3 * 16 + 9 * s.records.size());
  std::remove("digest_a.ttag");
  std::remove("digest_b.ttag");
}

TEST_CASE("record memory layout is packed") {
  CHECK(sizeof(TagRecord) == 9);
}

TEST_CASE("channel helpers") {
  const TagStream s = random_stream(1000, 4);
  CHECK(s.is_sorted());
  const auto clock = s.channel_times("CLOCK");
  CHECK(std::is_sorted(clock.begin(), clock.end()));
  const auto a1 = s.channel_times("A1");
  const auto b1 = s.channel_times("B1");
  CHECK(clock.size() + a1.size() + b1.size() == s.records.size());
  CHECK_THROWS_AS((void)s.channel_id("NOPE"), ConfigError);
}

TEST_CASE("TSV input parses names and comments") {
  const std::string path = "tags.tsv";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "SIG\t100\n";
    out << "IDL\t250\n";
    out << "SIG\t400\n";
  }
  const TagStream s = read_tagstream(path);
  CHECK(s.records.size() == 3);
  CHECK(s.channel_times("SIG").size() == 2);
  CHECK(s.channel_times("IDL")[0] == 250);
  std::remove(path.c_str());
}

TEST_CASE("reader dispatches on the TTAG magic") {
  const std::string path = "dispatch.ttag";
  const TagStream original = random_stream(100, 12);
  write_ttag(original, path);
  const TagStream loaded = read_tagstream(path);
  CHECK(loaded.records == original.records);
  std::remove(path.c_str());
}
