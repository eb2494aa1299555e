#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "secforage/metrics.hpp"
#include "secforage/sec_agent.hpp"

namespace secforage {

/// Final LTM contents of every agent, as written to ltm_final.snapshot.
struct LtmSnapshot {
    std::vector<std::vector<EpisodicSequence>> agents;  // oldest first
    std::vector<std::uint64_t> acquired_count;

    MemorySnapshot hashes() const;
    friend bool operator==(const LtmSnapshot&, const LtmSnapshot&) = default;
};

/// JSON lines. Line 1 is a header
///   {"format":"secforage-ltm","version":1,"agents":k,"acquired_count":[..],"sequences":n}
/// followed by n distinct sequences
///   {"id":j,"hash":"<16 hex>","reward":r,"couplets":[["<54 digits>",action],..]}
/// and k agent lines {"agent":i,"ltm":[j,..]} listing sequence ids oldest first.
/// Every observation code is a single decimal digit.
void write_ltm_snapshot(std::ostream& out, const LtmSnapshot& snapshot);
void write_ltm_snapshot(const std::filesystem::path& path, const LtmSnapshot& snapshot);

/// Throws DataError naming the line on malformed input or a hash that
/// does not match its couplets.
LtmSnapshot read_ltm_snapshot(std::istream& in);
LtmSnapshot read_ltm_snapshot(const std::filesystem::path& path);

}  // namespace secforage
