#include "secforage/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "secforage/errors.hpp"

#ifndef SECFORAGE_VERSION
#define SECFORAGE_VERSION "dev"
#endif

namespace secforage {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& known) {
    if (!obj.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw ConfigError(join(prefix, key) + ": unknown key");
}

template <typename T>
void read(const json& obj, const std::string& prefix, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string path = join(prefix, key);
    try {
        if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError(path + ": expected an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ConfigError(path + ": expected a number");
        }
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

template <typename T>
void read_list(const json& obj, const char* key, std::vector<T>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array()) throw ConfigError(std::string(key) + ": expected a list");
    std::vector<T> values;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& v = (*it)[i];
        const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path + ": must be >= 0");
        } else if (!v.is_number()) {
            throw ConfigError(path + ": expected a number");
        }
        values.push_back(v.get<T>());
    }
    out = std::move(values);
}

ViewMode parse_view(const std::string& s) {
    if (s == "forward") return ViewMode::forward;
    if (s == "centered") return ViewMode::centered;
    throw ConfigError("env.view: expected \"forward\" or \"centered\", got \"" + s + "\"");
}

EvennessMeasure parse_evenness(const std::string& s) {
    if (s == "min_max") return EvennessMeasure::min_max;
    if (s == "gini") return EvennessMeasure::gini;
    throw ConfigError("reward_evenness: expected \"min_max\" or \"gini\", got \"" + s + "\"");
}

json to_json(const ExperimentConfig& c, bool with_local) {
    json env = {{"rows", c.env.rows},
                {"cols", c.env.cols},
                {"agents", c.env.num_agents},
                {"fruits", c.env.num_fruits},
                {"nest", {c.env.nest.row, c.env.nest.col}},
                {"view", c.env.view == ViewMode::forward ? "forward" : "centered"}};
    json sec = {{"beta_i", c.sec.beta_i},
                {"beta_d", c.sec.beta_d},
                {"tau", c.sec.tau},
                {"theta_prop", c.sec.theta_prop},
                {"theta_abs", c.sec.theta_abs}};
    json j = {{"episodes", c.episodes},
              {"max_steps_per_episode", c.env.max_steps},
              {"env", env},
              {"stm_lengths", c.stm_lengths},
              {"transfer_rates", c.transfer_rates},
              {"transfer_noises", c.transfer_noises},
              {"seeds", c.seeds},
              {"metric_checkpoint_interval", c.metric_checkpoint_interval},
              {"ltm_capacity", c.ltm_capacity},
              {"refractory_steps", c.refractory_steps},
              {"sec", sec},
              {"reward_evenness", c.evenness == EvennessMeasure::gini ? "gini" : "min_max"}};
    if (with_local) {
        j["output_dir"] = c.output_dir;
        j["workers"] = c.workers;
    }
    return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    reject_unknown(j, "",
                   {"episodes", "max_steps_per_episode", "env", "stm_lengths", "transfer_rates", "transfer_noises",
                    "seeds", "metric_checkpoint_interval", "ltm_capacity", "refractory_steps", "sec",
                    "reward_evenness", "output_dir", "workers"});
    ExperimentConfig c;
    read(j, "", "episodes", c.episodes);
    read(j, "", "max_steps_per_episode", c.env.max_steps);
    if (const auto it = j.find("env"); it != j.end()) {
        reject_unknown(*it, "env", {"rows", "cols", "agents", "fruits", "nest", "view"});
        read(*it, "env", "rows", c.env.rows);
        read(*it, "env", "cols", c.env.cols);
        read(*it, "env", "agents", c.env.num_agents);
        read(*it, "env", "fruits", c.env.num_fruits);
        if (const auto n = it->find("nest"); n != it->end()) {
            if (!n->is_array() || n->size() != 2 || !(*n)[0].is_number_integer() || !(*n)[1].is_number_integer())
                throw ConfigError("env.nest: expected [row, col]");
            c.env.nest = Pos{(*n)[0].get<int>(), (*n)[1].get<int>()};
        }
        if (it->contains("view")) {
            if (!(*it)["view"].is_string()) throw ConfigError("env.view: expected a string");
            c.env.view = parse_view((*it)["view"].get<std::string>());
        }
    }
    read_list(j, "stm_lengths", c.stm_lengths);
    read_list(j, "transfer_rates", c.transfer_rates);
    read_list(j, "transfer_noises", c.transfer_noises);
    read_list(j, "seeds", c.seeds);
    read(j, "", "metric_checkpoint_interval", c.metric_checkpoint_interval);
    read(j, "", "ltm_capacity", c.ltm_capacity);
    read(j, "", "refractory_steps", c.refractory_steps);
    if (const auto it = j.find("sec"); it != j.end()) {
        reject_unknown(*it, "sec", {"beta_i", "beta_d", "tau", "theta_prop", "theta_abs"});
        read(*it, "sec", "beta_i", c.sec.beta_i);
        read(*it, "sec", "beta_d", c.sec.beta_d);
        read(*it, "sec", "tau", c.sec.tau);
        read(*it, "sec", "theta_prop", c.sec.theta_prop);
        read(*it, "sec", "theta_abs", c.sec.theta_abs);
    }
    if (j.contains("reward_evenness")) {
        if (!j["reward_evenness"].is_string()) throw ConfigError("reward_evenness: expected a string");
        c.evenness = parse_evenness(j["reward_evenness"].get<std::string>());
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir: expected a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    read(j, "", "workers", c.workers);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config, true).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) {
    const std::string canonical = to_json(config, false).dump();
    return hash_to_hex(fnv1a64(canonical.data(), canonical.size()));
}

std::string_view code_version() { return SECFORAGE_VERSION; }

}  // namespace secforage
