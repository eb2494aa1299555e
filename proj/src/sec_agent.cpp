#include "secforage/sec_agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "secforage/errors.hpp"

namespace secforage {

std::uint64_t content_hash(std::span<const Couplet> couplets) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Couplet& c : couplets) {
        h = fnv1a64(c.state.values.data(), c.state.values.size(), h);
        const auto a = static_cast<std::uint8_t>(c.action);
        h = fnv1a64(&a, 1, h);
    }
    return h;
}

std::string hash_to_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_from_hex(const std::string& hex) {
    if (hex.empty() || hex.size() > 16) throw ContractViolation("bad hash: '" + hex + "'");
    std::uint64_t h = 0;
    for (char ch : hex) {
        int d;
        if (ch >= '0' && ch <= '9') d = ch - '0';
        else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
        else throw ContractViolation("bad hash: '" + hex + "'");
        h = (h << 4) | static_cast<std::uint64_t>(d);
    }
    return h;
}

EpisodicSequence EpisodicSequence::make(std::vector<Couplet> couplets, double reward) {
    EpisodicSequence s;
    s.content_hash = secforage::content_hash(couplets);
    s.couplets = std::move(couplets);
    s.reward = reward;
    return s;
}

void SecParams::validate() const {
    auto in_unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("sec.") + name + ": must be in [0, 1]");
    };
    in_unit(beta_i, "beta_i");
    in_unit(beta_d, "beta_d");
    in_unit(tau, "tau");
    in_unit(theta_prop, "theta_prop");
    in_unit(theta_abs, "theta_abs");
}

bool SecParams::exact_match_only() const {
    return static_cast<double>(kObservationSize - 1) / kObservationSize < theta_abs;
}

double similarity(const Observation& a, const Observation& b) {
    int same = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) same += a.values[i] == b.values[i];
    return static_cast<double>(same) / static_cast<double>(a.values.size());
}

double similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size())
        throw ContractViolation("similarity: length mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
    if (a.empty()) throw ContractViolation("similarity: empty observation");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return static_cast<double>(same) / static_cast<double>(a.size());
}

// --- AgentMemory ---

namespace {
constexpr std::size_t kDecayTableSize = 4096;
}

AgentMemory::AgentMemory(std::size_t stm_capacity, SecParams params, std::size_t ltm_capacity, BiasEngine engine)
    : stm_capacity_(stm_capacity),
      ltm_capacity_(ltm_capacity),
      params_(params),
      engine_(engine),
      exact_(params.exact_match_only()),
      decay_(1.0 - params.beta_d) {
    if (stm_capacity_ == 0) throw ConfigError("stm length must be >= 1");
    if (ltm_capacity_ == 0) throw ConfigError("ltm capacity must be >= 1");
    params_.validate();
    if (engine_ == BiasEngine::automatic) engine_ = exact_ ? BiasEngine::aggregated : BiasEngine::per_element;
    if (engine_ == BiasEngine::aggregated && !exact_)
        throw ConfigError("aggregated bias engine requires thresholds that admit only exact matches");
    decay_table_.resize(kDecayTableSize);
    double f = 1.0;
    for (double& v : decay_table_) {
        v = f;
        f *= decay_;
    }
}

double AgentMemory::decay_pow(std::uint64_t age) const {
    if (age < decay_table_.size()) return decay_table_[age];
    return std::pow(decay_, static_cast<double>(age));
}

double AgentMemory::element_weight(const Stored& s, std::size_t index) const {
    return s.sequence.reward * std::pow(params_.tau, static_cast<double>(s.sequence.length() - 1 - index));
}

double AgentMemory::element_bias(const Stored& s, std::size_t index) const {
    if (engine_ == BiasEngine::per_element) return read(s.bias[index]);
    if (index == 0) return 0.0;
    const double since_store = read(keys_[s.keys[index - 1]].retrievals) -
                               s.baseline[index] * decay_pow(clock_ - s.stored_at);
    return std::max(0.0, since_store);
}

AgentMemory::KeyId AgentMemory::intern(const Observation& obs) {
    auto it = key_ids_.find(obs);
    KeyId id;
    if (it != key_ids_.end()) {
        id = it->second;
    } else {
        if (!free_keys_.empty()) {
            id = free_keys_.back();
            free_keys_.pop_back();
        } else {
            id = static_cast<KeyId>(keys_.size());
            keys_.emplace_back();
        }
        keys_[id] = KeyStats{};
        keys_[id].key = obs;
        keys_[id].retrievals.stamp = clock_;
        keys_[id].baseline_stamp = clock_;
        key_ids_.emplace(obs, id);
    }
    ++keys_[id].refs;
    return id;
}

void AgentMemory::release(KeyId id) {
    KeyStats& k = keys_[id];
    if (--k.refs > 0) return;
    key_ids_.erase(k.key);
    k = KeyStats{};
    free_keys_.push_back(id);
}

const AgentMemory::KeyStats* AgentMemory::lookup(const Observation& obs) const {
    auto it = key_ids_.find(obs);
    return it == key_ids_.end() ? nullptr : &keys_[it->second];
}

void AgentMemory::record_step(const Observation& state, Action action) {
    if (stm_.size() == stm_capacity_) stm_.pop_front();
    stm_.push_back(Couplet{state, action});
}

bool AgentMemory::consolidate(double reward) {
    if (stm_.empty()) {
        ++skipped_;
        return false;
    }
    store(EpisodicSequence::make(std::vector<Couplet>(stm_.begin(), stm_.end()), reward));
    stm_.clear();
    return true;
}

void AgentMemory::store(EpisodicSequence sequence) {
    if (sequence.couplets.empty()) throw ContractViolation("store: empty sequence");
    if (ltm_.size() == ltm_capacity_) evict_oldest();
    const std::uint64_t id = first_id_ + ltm_.size();
    const std::size_t n = sequence.couplets.size();

    Stored st;
    st.sequence = std::move(sequence);
    st.stored_at = clock_;
    // Intern everything first: interning may grow keys_.
    st.keys.reserve(n);
    for (const Couplet& c : st.sequence.couplets) st.keys.push_back(intern(c.state));
    for (std::size_t i = 1; i < n; ++i) ++keys_[st.keys[i - 1]].refs;

    if (engine_ == BiasEngine::per_element) {
        st.bias.assign(n, Decaying{0.0, clock_});
    } else {
        st.baseline.assign(n, 0.0);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        KeyStats& k = keys_[st.keys[i]];
        k.elements.push_back(ElementRef{id, i});
        if (engine_ != BiasEngine::aggregated) continue;
        const auto a = static_cast<std::size_t>(st.sequence.couplets[i].action);
        const double w = element_weight(st, i);
        k.static_weight[a] += w;
        if (i == 0) continue;
        const KeyId pred = st.keys[i - 1];
        const double g = read(keys_[pred].retrievals);
        st.baseline[i] = g;
        auto slot = std::find_if(k.by_predecessor.begin(), k.by_predecessor.end(),
                                 [&](const PredecessorWeights& p) { return p.predecessor == pred; });
        if (slot == k.by_predecessor.end()) slot = k.by_predecessor.insert(k.by_predecessor.end(), {pred});
        ++slot->count;
        slot->weight[a] += w;
        if (g != 0.0) {
            const double f = decay_pow(clock_ - k.baseline_stamp);
            for (double& b : k.baseline) b *= f;
            k.baseline_stamp = clock_;
            k.baseline[a] += w * g;
        }
    }
    ltm_.push_back(std::move(st));
    ++acquired_;
}

void AgentMemory::evict_oldest() {
    Stored& old = ltm_.front();
    const std::size_t n = old.sequence.couplets.size();
    if (engine_ == BiasEngine::aggregated) {
        const double age = decay_pow(clock_ - old.stored_at);
        for (std::size_t i = 0; i < n; ++i) {
            KeyStats& k = keys_[old.keys[i]];
            const auto a = static_cast<std::size_t>(old.sequence.couplets[i].action);
            const double w = element_weight(old, i);
            k.static_weight[a] -= w;
            if (i == 0) continue;
            const KeyId pred = old.keys[i - 1];
            auto slot = std::find_if(k.by_predecessor.begin(), k.by_predecessor.end(),
                                     [&](const PredecessorWeights& p) { return p.predecessor == pred; });
            if (--slot->count == 0) k.by_predecessor.erase(slot);
            else slot->weight[a] -= w;
            if (old.baseline[i] != 0.0) {
                const double f = decay_pow(clock_ - k.baseline_stamp);
                for (double& b : k.baseline) b *= f;
                k.baseline_stamp = clock_;
                k.baseline[a] -= w * old.baseline[i] * age;
            }
        }
    }
    // The oldest sequence's refs form a prefix of each element list.
    std::vector<KeyId> distinct(old.keys);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (KeyId id : distinct) {
        KeyStats& k = keys_[id];
        auto end = k.elements.begin();
        while (end != k.elements.end() && end->sequence_id == first_id_) ++end;
        k.elements.erase(k.elements.begin(), end);
        if (k.elements.empty()) {
            // No element has this state any more: drop accumulated rounding.
            k.static_weight = {};
            k.baseline = {};
            k.by_predecessor.clear();
        }
    }
    for (std::size_t i = 0; i < n; ++i) release(old.keys[i]);
    for (std::size_t i = 1; i < n; ++i) release(old.keys[i - 1]);
    ltm_.pop_front();
    ++first_id_;
}

const EpisodicSequence* AgentMemory::find(std::uint64_t sequence_id) const {
    if (sequence_id < first_id_ || sequence_id - first_id_ >= ltm_.size()) return nullptr;
    return &ltm_[sequence_id - first_id_].sequence;
}

double AgentMemory::bias(std::uint64_t sequence_id, std::size_t index) const {
    if (sequence_id < first_id_ || sequence_id - first_id_ >= ltm_.size())
        throw ContractViolation("bias: unknown sequence id");
    const Stored& s = ltm_[sequence_id - first_id_];
    if (index >= s.sequence.length()) throw ContractViolation("bias: index out of range");
    return element_bias(s, index);
}

std::vector<std::uint64_t> AgentMemory::ltm_hashes() const {
    std::vector<std::uint64_t> out;
    out.reserve(ltm_.size());
    for (const Stored& s : ltm_) out.push_back(s.sequence.content_hash);
    return out;
}

void AgentMemory::collect_exact(const Observation& current, std::vector<EligibleElement>& out) const {
    const KeyStats* k = lookup(current);
    if (!k) return;
    out.reserve(k->elements.size());
    // Any match makes the LTM maximum similarity 1, which clears both thresholds.
    for (const ElementRef& ref : k->elements) {
        const Stored& s = ltm_[ref.sequence_id - first_id_];
        out.push_back(EligibleElement{ref.sequence_id, ref.index, 1.0, 1.0 + element_bias(s, ref.index)});
    }
}

void AgentMemory::collect_linear(const Observation& current, std::vector<EligibleElement>& out) const {
    double s_max = 0.0;
    std::vector<double> sims;
    for (const Stored& s : ltm_)
        for (const Couplet& c : s.sequence.couplets) {
            sims.push_back(similarity(current, c.state));
            s_max = std::max(s_max, sims.back());
        }
    const double relative = params_.theta_prop * s_max;
    std::size_t k = 0;
    for (std::size_t pos = 0; pos < ltm_.size(); ++pos) {
        const Stored& s = ltm_[pos];
        for (std::uint32_t i = 0; i < s.sequence.length(); ++i, ++k) {
            const double sim = sims[k];
            if (sim >= params_.theta_abs && sim >= relative)
                out.push_back(EligibleElement{first_id_ + pos, i, sim, sim * (1.0 + element_bias(s, i))});
        }
    }
}

void AgentMemory::apply_retrieval_side_effects(const Observation& current,
                                               const std::vector<EligibleElement>& out) {
    if (engine_ == BiasEngine::per_element) {
        for (const EligibleElement& e : out) {
            Stored& s = ltm_[e.sequence_id - first_id_];
            const std::size_t next = e.index + 1;
            if (next < s.bias.size()) s.bias[next] = Decaying{read(s.bias[next]) + params_.beta_i, clock_};
        }
    } else if (auto it = key_ids_.find(current); it != key_ids_.end()) {
        Decaying& r = keys_[it->second].retrievals;
        r = Decaying{read(r) + params_.beta_i, clock_};
    }
    ++clock_;
}

std::vector<EligibleElement> AgentMemory::retrieve(const Observation& current) {
    std::vector<EligibleElement> out;
    if (exact_) collect_exact(current, out);
    else collect_linear(current, out);
    apply_retrieval_side_effects(current, out);
    return out;
}

ActionDistribution AgentMemory::aggregated_distribution(const KeyStats& k) const {
    ActionDistribution q = k.static_weight;
    for (const PredecessorWeights& p : k.by_predecessor) {
        const double g = read(keys_[p.predecessor].retrievals);
        if (g == 0.0) continue;
        for (std::size_t a = 0; a < q.size(); ++a) q[a] += g * p.weight[a];
    }
    const double f = decay_pow(clock_ - k.baseline_stamp);
    double total = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        q[a] = std::max(0.0, q[a] - k.baseline[a] * f);
        total += q[a];
    }
    if (!(total > 0.0)) {
        q.fill(1.0 / kNumActions);
        return q;
    }
    for (double& v : q) v /= total;
    return q;
}

ActionDistribution AgentMemory::retrieve_distribution(const Observation& current) {
    if (engine_ != BiasEngine::aggregated) {
        const auto eligible = retrieve(current);
        return action_distribution(eligible, *this);
    }
    ActionDistribution q;
    const KeyStats* k = lookup(current);
    if (k && !k->elements.empty()) q = aggregated_distribution(*k);
    else q.fill(1.0 / kNumActions);
    apply_retrieval_side_effects(current, {});
    return q;
}

ActionDistribution action_distribution(std::span<const EligibleElement> eligible, const AgentMemory& memory) {
    ActionDistribution q{};
    if (eligible.empty()) {
        q.fill(1.0 / kNumActions);
        return q;
    }
    double r_max = 0.0;
    std::size_t max_len = 0;
    for (const EligibleElement& e : eligible) {
        const EpisodicSequence* s = memory.find(e.sequence_id);
        if (!s) throw ContractViolation("action_distribution: eligible element refers to an evicted sequence");
        r_max = std::max(r_max, s->reward);
        max_len = std::max(max_len, s->length());
    }
    std::vector<double> tau_pow(max_len, 1.0);
    for (std::size_t k = 1; k < max_len; ++k) tau_pow[k] = tau_pow[k - 1] * memory.params().tau;

    for (const EligibleElement& e : eligible) {
        const EpisodicSequence& s = *memory.find(e.sequence_id);
        const double reward_factor = r_max > 0.0 ? s.reward / r_max : 1.0;
        const double w = e.eligibility * reward_factor * tau_pow[s.length() - 1 - e.index];
        q[static_cast<std::size_t>(s.couplets[e.index].action)] += w;
    }
    double total = 0.0;
    for (double v : q) total += v;
    if (!(total > 0.0)) {
        q.fill(1.0 / kNumActions);
        return q;
    }
    for (double& v : q) v /= total;
    return q;
}

Action sample_action(const ActionDistribution& q, Rng& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int last_positive = 0;
    for (int a = 0; a < kNumActions; ++a) {
        if (q[static_cast<std::size_t>(a)] <= 0.0) continue;
        last_positive = a;
        cumulative += q[static_cast<std::size_t>(a)];
        if (u < cumulative) return static_cast<Action>(a);
    }
    // Rounding left u above the final cumulative sum.
    return static_cast<Action>(last_positive);
}

Action select_action(AgentMemory& memory, const Observation& current, Rng& rng) {
    return sample_action(memory.retrieve_distribution(current), rng);
}

}  // namespace secforage
