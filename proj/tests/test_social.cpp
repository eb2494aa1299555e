#include <doctest.h>

#include <cmath>

#include "secforage/errors.hpp"
#include "secforage/social.hpp"
#include "test_support.hpp"

using namespace secforage;
using namespace secforage::testing;

namespace {

Observation coded(int k) {
    Observation o;
    for (std::size_t i = 0; i < o.values.size(); ++i) o.values[i] = static_cast<std::uint8_t>(i % 5);
    o.values[0] = static_cast<std::uint8_t>(k & 0xff);
    o.values[1] = static_cast<std::uint8_t>(k >> 8);
    return o;
}

EpisodicSequence make_sequence(int first, int length, double reward = 1.0) {
    std::vector<Couplet> c;
    for (int i = 0; i < length; ++i) c.push_back({coded(first + i), static_cast<Action>(i % kNumActions)});
    return EpisodicSequence::make(std::move(c), reward);
}

bool is_subsequence(const std::vector<Couplet>& sub, const std::vector<Couplet>& full) {
    std::size_t j = 0;
    for (const Couplet& c : full)
        if (j < sub.size() && sub[j] == c) ++j;
    return j == sub.size();
}

SocialStreams streams(std::uint64_t seed) { return {Rng(seed), Rng(seed + 1)}; }

}  // namespace

TEST_CASE("transfer episodes follow the modulus") {
    SocialParams p;
    for (int e = 0; e < 100; ++e) CHECK_FALSE(is_transfer_episode(e, p));
    p.transfer_rate = 1;
    for (int e = 0; e < 100; ++e) CHECK(is_transfer_episode(e, p));
    p.transfer_rate = 10;
    CHECK(is_transfer_episode(0, p));
    CHECK(is_transfer_episode(10, p));
    CHECK_FALSE(is_transfer_episode(5, p));
    int count = 0;
    p.transfer_rate = 50;
    for (int e = 0; e < 500; ++e) count += is_transfer_episode(e, p);
    CHECK(count == 10);

    SocialParams bad;
    bad.transfer_noise = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SocialParams{};
    bad.transfer_rate = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("selection is proportional to reward") {
    SUBCASE("equal rewards") {
        AgentMemory m(20);
        for (int s = 0; s < 4; ++s) m.store(make_sequence(10 * s, 3, 1.0));
        Rng rng(1);
        std::array<int, 4> counts{};
        for (int i = 0; i < 10000; ++i) {
            const auto chosen = select_memory_for_sharing(m, rng);
            REQUIRE(chosen);
            for (std::size_t s = 0; s < 4; ++s)
                if (chosen->content_hash == m.ltm_at(s).content_hash) ++counts[s];
        }
        for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) <= 0.02);
    }
    SUBCASE("unequal rewards") {
        AgentMemory m(20);
        m.store(make_sequence(0, 3, 3.0));
        m.store(make_sequence(50, 3, 1.0));
        Rng rng(2);
        int first = 0;
        for (int i = 0; i < 10000; ++i) first += select_memory_for_sharing(m, rng)->content_hash == m.ltm_at(0).content_hash;
        CHECK(std::abs(first / 10000.0 - 0.75) <= 0.02);
    }
    SUBCASE("empty LTM") {
        AgentMemory m(20);
        Rng rng(3);
        CHECK_FALSE(select_memory_for_sharing(m, rng).has_value());
    }
}

TEST_CASE("noise-free transmission is exact and draws nothing") {
    const auto seq = make_sequence(0, 20);
    SocialParams p;
    Rng rng(4), untouched(4);
    const auto tx = transmit(seq, p, rng);
    REQUIRE(tx.received);
    CHECK(tx.received->couplets == seq.couplets);
    CHECK(tx.received->content_hash == seq.content_hash);
    CHECK(tx.received->reward == seq.reward);
    CHECK(tx.elements_dropped == 0);
    CHECK(rng.next() == untouched.next());
}

TEST_CASE("noisy transmission drops couplets independently") {
    const auto seq = make_sequence(0, 20);
    SocialParams p;
    p.transfer_noise = 0.1;
    Rng rng(5);
    const int n = 10000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto tx = transmit(seq, p, rng);
        total += static_cast<double>(tx.elements_dropped) / 20.0;
        if (tx.received) {
            REQUIRE(tx.received->length() + tx.elements_dropped == 20);
            REQUIRE(is_subsequence(tx.received->couplets, seq.couplets));
            REQUIRE(tx.received->reward == seq.reward);
            REQUIRE(tx.received->content_hash == content_hash(tx.received->couplets));
        }
    }
    // Binomial oracle: sd of the mean drop fraction = sqrt(p(1-p)/(20n)).
    const double mean = total / n;
    const double sd = std::sqrt(0.1 * 0.9 / (20.0 * n));
    CHECK(std::abs(mean - 0.1) <= 4 * sd);
    CHECK(std::abs(mean - 0.1) <= 0.01);
}

TEST_CASE("a transmission that loses every couplet aborts") {
    const auto seq = make_sequence(0, 5);
    SocialParams p;
    p.transfer_noise = 1.0;
    Rng rng(6);
    const auto tx = transmit(seq, p, rng);
    CHECK_FALSE(tx.received.has_value());
    CHECK(tx.elements_dropped == 5);

    // Length-1 sequences abort with probability p.
    p.transfer_noise = 0.3;
    const auto one = make_sequence(0, 1);
    int aborted = 0;
    for (int i = 0; i < 10000; ++i) aborted += !transmit(one, p, rng).received;
    CHECK(std::abs(aborted / 10000.0 - 0.3) <= 0.02);
}

TEST_CASE("reciprocal sharing between facing agents") {
    WorldState w = bare_world();
    add_agent(w, {4, 4}, Heading::east);
    add_agent(w, {4, 5}, Heading::west);
    std::vector<AgentMemory> agents(2, AgentMemory(20));
    const auto a = make_sequence(0, 4), b = make_sequence(100, 6);
    agents[0].store(a);
    agents[1].store(b);
    SocialParams p;
    p.transfer_rate = 1;
    RefractoryClocks clocks(2);
    auto rngs = streams(7);

    const auto events = social_learning_phase(w, agents, p, 0, 3, clocks, rngs);
    REQUIRE(events.size() == 2);
    CHECK(events[0].sender == 0);
    CHECK(events[0].receiver == 1);
    CHECK(events[1].sender == 1);
    CHECK(events[1].receiver == 0);
    for (const auto& e : events) {
        CHECK(e.original_hash == e.received_hash);
        CHECK(e.timestep == 3);
        CHECK_FALSE(e.aborted);
    }
    REQUIRE(agents[0].ltm_size() == 2);
    REQUIRE(agents[1].ltm_size() == 2);
    CHECK(agents[0].ltm_at(1).couplets == b.couplets);
    CHECK(agents[1].ltm_at(1).couplets == a.couplets);
    CHECK(clocks[0] == 25);
    CHECK(clocks[1] == 25);

    // Refractory: nothing for 24 more steps, clock at 15 after ten ticks.
    for (int t = 4; t < 14; ++t) CHECK(social_learning_phase(w, agents, p, 0, t, clocks, rngs).empty());
    CHECK(clocks[0] == 15);
    for (int t = 14; t < 28; ++t) CHECK(social_learning_phase(w, agents, p, 0, t, clocks, rngs).empty());
    CHECK(social_learning_phase(w, agents, p, 0, 28, clocks, rngs).size() == 2);
}

TEST_CASE("one-sided visibility shares one way only") {
    WorldState w = bare_world();
    add_agent(w, {4, 4}, Heading::east);
    add_agent(w, {4, 5}, Heading::east);
    std::vector<AgentMemory> agents(2, AgentMemory(20));
    agents[0].store(make_sequence(0, 3));
    agents[1].store(make_sequence(50, 3));
    SocialParams p;
    p.transfer_rate = 1;
    RefractoryClocks clocks(2);
    auto rngs = streams(8);
    const auto events = social_learning_phase(w, agents, p, 0, 0, clocks, rngs);
    REQUIRE(events.size() == 1);
    CHECK(events[0].sender == 0);
    CHECK(events[0].receiver == 1);
    CHECK(agents[0].ltm_size() == 1);
    CHECK(agents[1].ltm_size() == 2);
}

TEST_CASE("no sharing outside transfer episodes, with empty LTMs, or out of view") {
    WorldState w = bare_world();
    add_agent(w, {4, 4}, Heading::east);
    add_agent(w, {4, 5}, Heading::west);
    add_agent(w, {8, 8}, Heading::south);
    std::vector<AgentMemory> agents(3, AgentMemory(20));
    SocialParams p;
    p.transfer_rate = 10;
    RefractoryClocks clocks(3);
    auto rngs = streams(9);
    agents[2].store(make_sequence(0, 3));
    CHECK(social_learning_phase(w, agents, p, 3, 0, clocks, rngs).empty());
    // Agents 0 and 1 see each other but have nothing to send; agent 2 sees nobody.
    CHECK(social_learning_phase(w, agents, p, 10, 0, clocks, rngs).empty());
    CHECK(clocks[0] == 0);
    CHECK(clocks[1] == 0);
    CHECK(clocks[2] == 0);

    // Exchanges are simultaneous: a memory received in this phase is not
    // passed straight back.
    agents[0].store(make_sequence(40, 3));
    const auto events = social_learning_phase(w, agents, p, 10, 1, clocks, rngs);
    REQUIRE(events.size() == 1);
    CHECK(events[0].sender == 0);
    CHECK(agents[1].ltm_size() == 1);
    CHECK(agents[0].ltm_size() == 1);

    WorldState apart = bare_world();
    add_agent(apart, {2, 2}, Heading::east);
    add_agent(apart, {8, 12}, Heading::west);
    add_agent(apart, {5, 2}, Heading::west);
    RefractoryClocks fresh(3);
    CHECK(social_learning_phase(apart, agents, p, 10, 0, fresh, rngs).empty());
}

TEST_CASE("aborted transfers still start the refractory clock") {
    WorldState w = bare_world();
    add_agent(w, {4, 4}, Heading::east);
    add_agent(w, {4, 5}, Heading::north);
    std::vector<AgentMemory> agents(2, AgentMemory(20));
    agents[0].store(make_sequence(0, 3));
    SocialParams p;
    p.transfer_rate = 1;
    p.transfer_noise = 1.0;
    RefractoryClocks clocks(2);
    auto rngs = streams(10);
    const auto events = social_learning_phase(w, agents, p, 0, 0, clocks, rngs);
    REQUIRE(events.size() == 1);
    CHECK(events[0].aborted);
    CHECK(events[0].received_hash == 0);
    CHECK(events[0].elements_dropped == 3);
    CHECK(agents[1].ltm_size() == 0);
    CHECK(clocks[0] == 25);
}

TEST_CASE("sharing never mutates the sender and counts acquisitions") {
    Rng layout(11);
    for (int trial = 0; trial < 50; ++trial) {
        WorldState w = reset(EnvConfig{}, layout);
        std::vector<AgentMemory> agents(4, AgentMemory(20));
        for (std::size_t i = 0; i < 4; ++i)
            for (int s = 0; s < 3; ++s) agents[i].store(make_sequence(static_cast<int>(i * 100 + s * 10), 5, 1.0 + s));
        std::vector<std::vector<std::uint64_t>> before;
        for (const auto& a : agents) before.push_back(a.ltm_hashes());
        SocialParams p;
        p.transfer_rate = 1;
        p.transfer_noise = trial % 2 ? 0.1 : 0.0;
        RefractoryClocks clocks(4);
        auto rngs = streams(static_cast<std::uint64_t>(trial));
        const auto events = social_learning_phase(w, agents, p, 0, 0, clocks, rngs);
        std::vector<std::size_t> received(4, 0);
        for (const auto& e : events) {
            CHECK(e.sender != e.receiver);
            if (!e.aborted) ++received[e.receiver];
            if (p.transfer_noise == 0.0) CHECK(e.original_hash == e.received_hash);
        }
        for (std::size_t i = 0; i < 4; ++i) {
            const auto after = agents[i].ltm_hashes();
            REQUIRE(after.size() == before[i].size() + received[i]);
            CHECK(std::equal(before[i].begin(), before[i].end(), after.begin()));
            CHECK(agents[i].acquired_count() == 3 + received[i]);
        }
    }
}
