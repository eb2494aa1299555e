#include "secforage/snapshot.hpp"

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "secforage/errors.hpp"

namespace secforage {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "secforage-ltm";
constexpr int kVersion = 1;

std::string encode_state(const Observation& o) {
    std::string s(o.values.size(), '0');
    for (std::size_t i = 0; i < o.values.size(); ++i) s[i] = static_cast<char>('0' + o.values[i]);
    return s;
}

Observation decode_state(const std::string& s, std::size_t line) {
    if (s.size() != static_cast<std::size_t>(kObservationSize))
        throw DataError("snapshot line " + std::to_string(line) + ": state must have 54 digits");
    Observation o;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9')
            throw DataError("snapshot line " + std::to_string(line) + ": non-digit in state");
        o.values[i] = static_cast<std::uint8_t>(s[i] - '0');
    }
    if (!o.valid()) throw DataError("snapshot line " + std::to_string(line) + ": state code out of range");
    return o;
}

json parse_line(const std::string& text, std::size_t line) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("snapshot line " + std::to_string(line) + ": " + e.what());
    }
}

}  // namespace

MemorySnapshot LtmSnapshot::hashes() const {
    MemorySnapshot s;
    for (const auto& ltm : agents) {
        std::vector<std::uint64_t> h;
        h.reserve(ltm.size());
        for (const auto& seq : ltm) h.push_back(seq.content_hash);
        s.hashes.push_back(std::move(h));
    }
    s.acquired_count = acquired_count;
    return s;
}

void write_ltm_snapshot(std::ostream& out, const LtmSnapshot& snapshot) {
    // Distinct sequences in first-appearance order; the hash narrows the
    // search, full equality decides.
    std::vector<const EpisodicSequence*> table;
    std::multimap<std::uint64_t, std::size_t> by_hash;
    std::vector<std::vector<std::size_t>> refs(snapshot.agents.size());
    for (std::size_t a = 0; a < snapshot.agents.size(); ++a) {
        for (const EpisodicSequence& seq : snapshot.agents[a]) {
            std::size_t id = table.size();
            auto [lo, hi] = by_hash.equal_range(seq.content_hash);
            for (auto it = lo; it != hi; ++it)
                if (*table[it->second] == seq) {
                    id = it->second;
                    break;
                }
            if (id == table.size()) {
                table.push_back(&seq);
                by_hash.emplace(seq.content_hash, id);
            }
            refs[a].push_back(id);
        }
    }
    json header = {{"format", kFormat},
                   {"version", kVersion},
                   {"agents", snapshot.agents.size()},
                   {"acquired_count", snapshot.acquired_count},
                   {"sequences", table.size()}};
    out << header.dump() << '\n';
    for (std::size_t id = 0; id < table.size(); ++id) {
        json couplets = json::array();
        for (const Couplet& c : table[id]->couplets)
            couplets.push_back(json::array({encode_state(c.state), static_cast<int>(c.action)}));
        json line = {{"id", id},
                     {"hash", hash_to_hex(table[id]->content_hash)},
                     {"reward", table[id]->reward},
                     {"couplets", std::move(couplets)}};
        out << line.dump() << '\n';
    }
    for (std::size_t a = 0; a < refs.size(); ++a) out << json{{"agent", a}, {"ltm", refs[a]}}.dump() << '\n';
}

void write_ltm_snapshot(const std::filesystem::path& path, const LtmSnapshot& snapshot) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_ltm_snapshot(out, snapshot);
    if (!out) throw DataError("write failed: " + path.string());
}

LtmSnapshot read_ltm_snapshot(std::istream& in) {
    std::string text;
    std::size_t line = 1;
    if (!std::getline(in, text)) throw DataError("snapshot: empty file");
    const json header = parse_line(text, line);
    if (!header.is_object() || header.value("format", "") != kFormat || header.value("version", 0) != kVersion)
        throw DataError("snapshot line 1: not a secforage-ltm v1 header");
    LtmSnapshot snap;
    std::size_t agents = 0, sequences = 0;
    try {
        agents = header.at("agents").get<std::size_t>();
        sequences = header.at("sequences").get<std::size_t>();
        snap.acquired_count = header.at("acquired_count").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
        throw DataError(std::string("snapshot line 1: ") + e.what());
    }
    if (snap.acquired_count.size() != agents) throw DataError("snapshot line 1: acquired_count length");

    std::vector<EpisodicSequence> table;
    table.reserve(sequences);
    for (std::size_t id = 0; id < sequences; ++id) {
        ++line;
        if (!std::getline(in, text)) throw DataError("snapshot: truncated at line " + std::to_string(line));
        const json j = parse_line(text, line);
        try {
            if (j.at("id").get<std::size_t>() != id) throw DataError("snapshot line " + std::to_string(line) + ": id out of order");
            std::vector<Couplet> couplets;
            for (const json& c : j.at("couplets")) {
                const int action = c.at(1).get<int>();
                if (action < 0 || action >= kNumActions)
                    throw DataError("snapshot line " + std::to_string(line) + ": action out of range");
                couplets.push_back(Couplet{decode_state(c.at(0).get<std::string>(), line), static_cast<Action>(action)});
            }
            if (couplets.empty()) throw DataError("snapshot line " + std::to_string(line) + ": empty sequence");
            EpisodicSequence seq = EpisodicSequence::make(std::move(couplets), j.at("reward").get<double>());
            if (hash_to_hex(seq.content_hash) != j.at("hash").get<std::string>())
                throw DataError("snapshot line " + std::to_string(line) + ": hash does not match couplets");
            table.push_back(std::move(seq));
        } catch (const json::exception& e) {
            throw DataError("snapshot line " + std::to_string(line) + ": " + e.what());
        }
    }
    snap.agents.resize(agents);
    for (std::size_t a = 0; a < agents; ++a) {
        ++line;
        if (!std::getline(in, text)) throw DataError("snapshot: truncated at line " + std::to_string(line));
        const json j = parse_line(text, line);
        try {
            if (j.at("agent").get<std::size_t>() != a) throw DataError("snapshot line " + std::to_string(line) + ": agent out of order");
            for (const json& ref : j.at("ltm")) {
                const auto id = ref.get<std::size_t>();
                if (id >= table.size()) throw DataError("snapshot line " + std::to_string(line) + ": unknown sequence id");
                snap.agents[a].push_back(table[id]);
            }
        } catch (const json::exception& e) {
            throw DataError("snapshot line " + std::to_string(line) + ": " + e.what());
        }
    }
    while (std::getline(in, text))
        if (!text.empty()) throw DataError("snapshot: trailing data after line " + std::to_string(line));
    return snap;
}

LtmSnapshot read_ltm_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_ltm_snapshot(in);
}

}  // namespace secforage
