#include "secforage/results_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "secforage/config.hpp"
#include "secforage/errors.hpp"

namespace secforage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* evenness_name(EvennessMeasure m) { return m == EvennessMeasure::gini ? "gini" : "min_max"; }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Header-checked CSV rows.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::vector<std::string>& header) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || split(line) != header)
        throw DataError(path.string() + ": unexpected header");
    std::vector<std::vector<std::string>> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != header.size())
            throw DataError(path.string() + ": line " + std::to_string(n) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(header.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

template <typename T>
T parse_number(const std::string& s, const fs::path& file) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw DataError(file.string() + ": bad number \"" + s + "\"");
    return v;
}

const std::vector<std::string> kRewardsHeader{"episode", "agent", "reward", "steps"};
const std::vector<std::string> kTransfersHeader{"episode", "timestep", "sender", "receiver", "original_hash",
                                                "received_hash", "original_length", "elements_dropped", "aborted"};
const std::vector<std::string> kMetricNames{"reward_evenness", "relative_diversity_mean", "group_diversity",
                                            "group_alignment", "memory_distribution"};

std::vector<std::string> metrics_header(std::size_t agents) {
    std::vector<std::string> h{"episode"};
    h.insert(h.end(), kMetricNames.begin(), kMetricNames.end());
    for (std::size_t a = 0; a < agents; ++a) h.push_back("cumulative_reward_" + std::to_string(a));
    return h;
}

std::vector<double> metric_values(const MetricsReport& r) {
    return {r.reward_evenness, r.relative_diversity_mean, r.group_diversity, r.group_alignment,
            r.memory_distribution};
}

std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out + '\n';
}

json condition_json(const Condition& c) {
    return {{"id", c.id()},
            {"stm_length", c.stm_length},
            {"transfer_rate", c.transfer_rate},
            {"transfer_noise", c.transfer_noise}};
}

struct Stats {
    double mean = 0.0;
    double sd = 0.0;  // sample sd; 0 for a single value
};

Stats stats(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

fs::path run_directory(const fs::path& out, const Condition& c, std::uint64_t seed) {
    return out / c.id() / std::to_string(seed);
}

void write_run(const fs::path& dir, const RunRecord& record, const ExperimentConfig& config) {
    const std::size_t agents = static_cast<std::size_t>(config.env.num_agents);

    std::string rewards = join_csv(kRewardsHeader);
    for (std::size_t e = 0; e < record.episodes.size(); ++e)
        for (std::size_t a = 0; a < record.episodes[e].rewards.size(); ++a)
            rewards += join_csv({std::to_string(e), std::to_string(a), format_double(record.episodes[e].rewards[a]),
                                 std::to_string(record.episodes[e].steps)});
    write_file(dir / kRewardsFile, rewards);

    std::string transfers = join_csv(kTransfersHeader);
    for (const TransferEvent& t : record.transfers)
        transfers += join_csv({std::to_string(t.episode), std::to_string(t.timestep), std::to_string(t.sender),
                               std::to_string(t.receiver), hash_to_hex(t.original_hash), hash_to_hex(t.received_hash),
                               std::to_string(t.original_length), std::to_string(t.elements_dropped),
                               t.aborted ? "1" : "0"});
    write_file(dir / kTransfersFile, transfers);

    std::string metrics = join_csv(metrics_header(agents));
    for (const Checkpoint& c : record.checkpoints) {
        std::vector<std::string> row{std::to_string(c.episode)};
        for (double v : metric_values(c.report)) row.push_back(format_double(v));
        for (double v : c.report.cumulative_reward) row.push_back(format_double(v));
        metrics += join_csv(row);
    }
    write_file(dir / kMetricsFile, metrics);

    if (!record.final_ltm.empty())
        write_ltm_snapshot(dir / kSnapshotFile, LtmSnapshot{record.final_ltm, record.final_snapshot.acquired_count});

    json run = {{"condition", condition_json(record.condition)},
                {"seed", record.seed},
                {"episodes", record.episodes.size()},
                {"max_steps_per_episode", config.env.max_steps},
                {"agents", agents},
                {"fruits", config.env.num_fruits},
                {"ltm_capacity", config.ltm_capacity},
                {"reward_evenness", evenness_name(config.evenness)},
                {"total_reward", record.total_reward()},
                {"transfers", record.transfers.size()},
                {"acquired_count", record.final_snapshot.acquired_count},
                {"config_hash", config_hash(config)},
                {"code_version", code_version()}};
    write_file(dir / kRunFile, run.dump(2) + "\n");
}

double StoredRun::total_reward() const {
    double total = 0.0;
    for (const auto& e : episode_results)
        for (double r : e.rewards) total += r;
    return total;
}

StoredRun read_run(const fs::path& dir, bool load_snapshot) {
    StoredRun run;
    run.dir = dir;
    const fs::path run_file = dir / kRunFile;
    try {
        const json j = json::parse(read_file(run_file));
        const json& c = j.at("condition");
        run.condition = Condition{c.at("stm_length").get<int>(), c.at("transfer_rate").get<int>(),
                                  c.at("transfer_noise").get<double>()};
        run.seed = j.at("seed").get<std::uint64_t>();
        run.episodes = j.at("episodes").get<int>();
        run.max_steps = j.at("max_steps_per_episode").get<int>();
        run.agents = j.at("agents").get<std::size_t>();
        run.fruits = j.at("fruits").get<int>();
        run.ltm_capacity = j.at("ltm_capacity").get<std::size_t>();
        run.config_hash = j.at("config_hash").get<std::string>();
        run.evenness = j.at("reward_evenness").get<std::string>() == "gini" ? EvennessMeasure::gini
                                                                            : EvennessMeasure::min_max;
    } catch (const json::exception& e) {
        throw DataError(run_file.string() + ": " + e.what());
    }

    const fs::path rewards_file = dir / kRewardsFile;
    run.episode_results.resize(static_cast<std::size_t>(run.episodes));
    for (auto& e : run.episode_results) e.rewards.assign(run.agents, 0.0);
    for (const auto& row : read_csv(rewards_file, kRewardsHeader)) {
        const auto e = parse_number<std::size_t>(row[0], rewards_file);
        const auto a = parse_number<std::size_t>(row[1], rewards_file);
        if (e >= run.episode_results.size() || a >= run.agents)
            throw DataError(rewards_file.string() + ": episode or agent out of range");
        run.episode_results[e].rewards[a] = parse_number<double>(row[2], rewards_file);
        run.episode_results[e].steps = parse_number<int>(row[3], rewards_file);
    }

    const fs::path transfers_file = dir / kTransfersFile;
    for (const auto& row : read_csv(transfers_file, kTransfersHeader)) {
        TransferEvent t;
        t.episode = parse_number<int>(row[0], transfers_file);
        t.timestep = parse_number<int>(row[1], transfers_file);
        t.sender = parse_number<std::size_t>(row[2], transfers_file);
        t.receiver = parse_number<std::size_t>(row[3], transfers_file);
        try {
            t.original_hash = hash_from_hex(row[4]);
            t.received_hash = hash_from_hex(row[5]);
        } catch (const ContractViolation&) {
            throw DataError(transfers_file.string() + ": bad hash");
        }
        t.original_length = parse_number<std::size_t>(row[6], transfers_file);
        t.elements_dropped = parse_number<std::size_t>(row[7], transfers_file);
        t.aborted = row[8] == "1";
        run.transfers.push_back(t);
    }

    const fs::path metrics_file = dir / kMetricsFile;
    for (const auto& row : read_csv(metrics_file, metrics_header(run.agents))) {
        Checkpoint c;
        c.episode = parse_number<int>(row[0], metrics_file);
        c.report.reward_evenness = parse_number<double>(row[1], metrics_file);
        c.report.relative_diversity_mean = parse_number<double>(row[2], metrics_file);
        c.report.group_diversity = parse_number<double>(row[3], metrics_file);
        c.report.group_alignment = parse_number<double>(row[4], metrics_file);
        c.report.memory_distribution = parse_number<double>(row[5], metrics_file);
        for (std::size_t a = 0; a < run.agents; ++a)
            c.report.cumulative_reward.push_back(parse_number<double>(row[6 + a], metrics_file));
        run.checkpoints.push_back(std::move(c));
    }

    if (load_snapshot) run.snapshot = read_ltm_snapshot(dir / kSnapshotFile);
    return run;
}

std::vector<fs::path> find_runs(const fs::path& out) {
    std::vector<std::pair<std::pair<std::string, std::uint64_t>, fs::path>> found;
    if (!fs::is_directory(out)) throw DataError(out.string() + ": not a directory");
    for (const auto& cond : fs::directory_iterator(out)) {
        if (!cond.is_directory()) continue;
        for (const auto& seed : fs::directory_iterator(cond.path())) {
            const std::string name = seed.path().filename().string();
            std::uint64_t value = 0;
            const auto res = std::from_chars(name.data(), name.data() + name.size(), value);
            if (!seed.is_directory() || res.ec != std::errc{} || res.ptr != name.data() + name.size()) continue;
            if (!fs::exists(seed.path() / kRunFile)) continue;
            found.push_back({{cond.path().filename().string(), value}, seed.path()});
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out_paths;
    for (auto& f : found) out_paths.push_back(std::move(f.second));
    return out_paths;
}

SummaryRow summarize_record(const RunRecord& record) {
    SummaryRow row;
    row.condition = record.condition;
    row.seed = record.seed;
    row.total_reward = record.total_reward();
    row.transfers = record.transfers.size();
    if (!record.checkpoints.empty()) row.final_metrics = record.checkpoints.back().report;
    return row;
}

void write_summary(const fs::path& out, std::vector<SummaryRow> rows, const ExperimentConfig& config) {
    std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        const std::string ia = a.condition.id(), ib = b.condition.id();
        return ia != ib ? ia < ib : a.seed < b.seed;
    });
    std::vector<std::string> header{"condition", "stm_length", "transfer_rate", "transfer_noise",
                                    "seed",      "total_reward", "transfers"};
    header.insert(header.end(), kMetricNames.begin(), kMetricNames.end());
    std::string csv = join_csv(header);
    json runs = json::array();
    std::map<std::string, std::pair<Condition, std::vector<const SummaryRow*>>> groups;
    for (const SummaryRow& r : rows) {
        std::vector<std::string> f{r.condition.id(), std::to_string(r.condition.stm_length),
                                   std::to_string(r.condition.transfer_rate), format_double(r.condition.transfer_noise),
                                   std::to_string(r.seed), format_double(r.total_reward), std::to_string(r.transfers)};
        for (double v : metric_values(r.final_metrics)) f.push_back(format_double(v));
        csv += join_csv(f);
        json m;
        for (std::size_t i = 0; i < kMetricNames.size(); ++i) m[kMetricNames[i]] = metric_values(r.final_metrics)[i];
        runs.push_back({{"condition", r.condition.id()},
                        {"seed", r.seed},
                        {"total_reward", r.total_reward},
                        {"transfers", r.transfers},
                        {"final_metrics", m}});
        auto& g = groups[r.condition.id()];
        g.first = r.condition;
        g.second.push_back(&r);
    }
    json conditions = json::array();
    for (const auto& [id, group] : groups) {
        json c = condition_json(group.first);
        c["runs"] = group.second.size();
        std::vector<double> totals;
        for (const SummaryRow* r : group.second) totals.push_back(r->total_reward);
        const Stats s = stats(totals);
        c["total_reward_mean"] = s.mean;
        c["total_reward_sd"] = s.sd;
        for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
            std::vector<double> xs;
            for (const SummaryRow* r : group.second) xs.push_back(metric_values(r->final_metrics)[i]);
            c[kMetricNames[i] + "_mean"] = stats(xs).mean;
        }
        conditions.push_back(std::move(c));
    }
    const json summary = {{"config_hash", config_hash(config)},
                          {"code_version", code_version()},
                          {"episodes", config.episodes},
                          {"conditions", conditions},
                          {"runs", runs}};
    write_file(out / "summary.csv", csv);
    write_file(out / "summary.json", summary.dump(2) + "\n");
}

std::vector<SummaryRow> run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
    config.validate();
    const fs::path out = config.output_dir;
    struct Job {
        Condition condition;
        std::uint64_t seed;
        fs::path dir;
    };
    std::vector<Job> jobs;
    for (const Condition& c : config.conditions())
        for (std::uint64_t seed : config.seeds) jobs.push_back({c, seed, run_directory(out, c, seed)});

    std::vector<fs::path> existing;
    for (const Job& j : jobs)
        if (fs::exists(j.dir)) existing.push_back(j.dir);
    for (const char* f : {"summary.csv", "summary.json"})
        if (fs::exists(out / f)) existing.push_back(out / f);
    if (!existing.empty()) {
        if (!options.force)
            throw ConfigError("output_dir: " + existing.front().string() + " already exists (use --force to replace)");
        for (const auto& p : existing) fs::remove_all(p);
    }
    fs::create_directories(out);

    std::vector<std::optional<SummaryRow>> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            {
                std::lock_guard lock(log_mutex);
                if (failure) return;
            }
            const Job& job = jobs[i];
            const fs::path tmp = job.dir.parent_path() / (".tmp-" + job.dir.filename().string());
            try {
                const RunRecord record = run_single(config, job.condition, job.seed);
                if (options.on_record) options.on_record(record);
                fs::create_directories(job.dir.parent_path());
                fs::remove_all(tmp);
                fs::create_directory(tmp);
                write_run(tmp, record, config);
                fs::rename(tmp, job.dir);
                rows[i] = summarize_record(record);
                if (options.log) {
                    std::lock_guard lock(log_mutex);
                    options.log(job.condition.id() + " seed " + std::to_string(job.seed) + ": total reward " +
                                format_double(rows[i]->total_reward));
                }
            } catch (...) {
                std::error_code ec;
                fs::remove_all(tmp, ec);
                std::lock_guard lock(log_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<SummaryRow> done;
    for (auto& r : rows) done.push_back(std::move(*r));
    write_summary(out, done, config);
    std::sort(done.begin(), done.end(), [](const SummaryRow& a, const SummaryRow& b) {
        const std::string ia = a.condition.id(), ib = b.condition.id();
        return ia != ib ? ia < ib : a.seed < b.seed;
    });
    return done;
}

std::size_t summarize(const fs::path& out, const fs::path& dest) {
    const auto dirs = find_runs(out);
    if (dirs.empty()) throw DataError(out.string() + ": no runs found");
    std::map<std::string, std::pair<Condition, std::vector<StoredRun>>> groups;
    for (const auto& d : dirs) {
        StoredRun run = read_run(d);
        auto& g = groups[run.condition.id()];
        g.first = run.condition;
        g.second.push_back(std::move(run));
    }
    fs::create_directories(dest);

    std::vector<std::string> header{"condition", "stm_length", "transfer_rate", "transfer_noise", "episode", "runs",
                                    "cumulative_reward_mean", "cumulative_reward_sd"};
    for (const auto& m : kMetricNames) {
        header.push_back(m + "_mean");
        header.push_back(m + "_sd");
    }
    std::string checkpoints = join_csv(header);
    std::string curves = join_csv({"condition", "stm_length", "transfer_rate", "transfer_noise", "episode", "runs",
                                   "reward_mean", "reward_sd"});
    std::size_t checkpoint_rows = 0;
    auto prefix = [](const Condition& c) {
        return std::vector<std::string>{c.id(), std::to_string(c.stm_length), std::to_string(c.transfer_rate),
                                        format_double(c.transfer_noise)};
    };

    for (const auto& [id, group] : groups) {
        const auto& runs = group.second;
        const std::size_t n_checkpoints = runs.front().checkpoints.size();
        const std::size_t n_episodes = runs.front().episode_results.size();
        for (const StoredRun& r : runs)
            if (r.checkpoints.size() != n_checkpoints || r.episode_results.size() != n_episodes)
                throw DataError(r.dir.string() + ": run length differs from other seeds of " + id);
        for (std::size_t k = 0; k < n_checkpoints; ++k) {
            std::vector<std::string> row = prefix(group.first);
            row.push_back(std::to_string(runs.front().checkpoints[k].episode));
            row.push_back(std::to_string(runs.size()));
            std::vector<double> totals;
            for (const StoredRun& r : runs) {
                double t = 0.0;
                for (double v : r.checkpoints[k].report.cumulative_reward) t += v;
                totals.push_back(t);
            }
            const Stats st = stats(totals);
            row.push_back(format_double(st.mean));
            row.push_back(format_double(st.sd));
            for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
                std::vector<double> xs;
                for (const StoredRun& r : runs) xs.push_back(metric_values(r.checkpoints[k].report)[m]);
                const Stats sm = stats(xs);
                row.push_back(format_double(sm.mean));
                row.push_back(format_double(sm.sd));
            }
            checkpoints += join_csv(row);
            ++checkpoint_rows;
        }
        for (std::size_t e = 0; e < n_episodes; ++e) {
            std::vector<double> xs;
            for (const StoredRun& r : runs) {
                double t = 0.0;
                for (double v : r.episode_results[e].rewards) t += v;
                xs.push_back(t);
            }
            const Stats st = stats(xs);
            std::vector<std::string> row = prefix(group.first);
            row.push_back(std::to_string(e));
            row.push_back(std::to_string(runs.size()));
            row.push_back(format_double(st.mean));
            row.push_back(format_double(st.sd));
            curves += join_csv(row);
        }
    }

    // Pooled per-run final points within each noise level.
    std::map<double, std::vector<const StoredRun*>> by_noise;
    for (const auto& [id, group] : groups)
        for (const StoredRun& r : group.second)
            if (!r.checkpoints.empty()) by_noise[r.condition.transfer_noise].push_back(&r);
    std::string correlations =
        join_csv({"transfer_noise", "points", "r_memory_distribution_reward_evenness",
                  "r_memory_distribution_group_alignment"});
    for (const auto& [noise, runs] : by_noise) {
        std::vector<double> md, ev, ag;
        for (const StoredRun* r : runs) {
            const MetricsReport& f = r->checkpoints.back().report;
            md.push_back(f.memory_distribution);
            ev.push_back(f.reward_evenness);
            ag.push_back(f.group_alignment);
        }
        correlations += join_csv({format_double(noise), std::to_string(runs.size()),
                                  format_optional(pearson_correlation(md, ev)),
                                  format_optional(pearson_correlation(md, ag))});
    }

    write_file(dest / "checkpoints.csv", checkpoints);
    write_file(dest / "curves.csv", curves);
    write_file(dest / "correlations.csv", correlations);
    return checkpoint_rows;
}

MetricsReport recompute_final_metrics(const StoredRun& run) {
    if (!run.snapshot) throw DataError(run.dir.string() + ": snapshot not loaded");
    std::vector<double> totals(run.agents, 0.0);
    for (const auto& e : run.episode_results)
        for (std::size_t a = 0; a < e.rewards.size() && a < totals.size(); ++a) totals[a] += e.rewards[a];
    return compute_metrics(run.snapshot->hashes(), totals, run.evenness);
}

std::vector<CheckResult> validate_run(const fs::path& dir) {
    const bool has_snapshot = fs::exists(dir / kSnapshotFile);
    const StoredRun run = read_run(dir, has_snapshot);
    std::vector<CheckResult> out;
    auto check = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };

    std::size_t bad_reward = 0, bad_steps = 0;
    for (const auto& e : run.episode_results) {
        double sum = 0.0;
        for (double r : e.rewards) {
            if (r < 0.0 || r > run.fruits) ++bad_reward;
            sum += r;
        }
        if (sum > run.fruits) ++bad_reward;
        if (e.steps < 1 || e.steps > run.max_steps) ++bad_steps;
    }
    check("episode_count", static_cast<int>(run.episode_results.size()) == run.episodes,
          std::to_string(run.episode_results.size()) + " episodes stored");
    check("reward_bounds", bad_reward == 0, std::to_string(bad_reward) + " episodes out of [0, " + std::to_string(run.fruits) + "]");
    check("episode_length", bad_steps == 0, std::to_string(bad_steps) + " episodes longer than max_steps");

    std::size_t mismatched = 0, inconsistent = 0;
    for (const auto& t : run.transfers) {
        if (run.condition.transfer_noise == 0.0 && (t.aborted || t.original_hash != t.received_hash)) ++mismatched;
        if (t.elements_dropped > t.original_length || t.aborted != (t.elements_dropped == t.original_length) ||
            t.sender == t.receiver)
            ++inconsistent;
    }
    check("transfer_fidelity", mismatched == 0, std::to_string(mismatched) + " noise-free transfers altered");
    check("transfer_log", inconsistent == 0, std::to_string(inconsistent) + " inconsistent transfer rows");
    if (run.condition.transfer_rate == 0) check("no_transfers", run.transfers.empty(), "transfer rate 0");

    if (run.snapshot) {
        const MetricsReport recomputed = recompute_final_metrics(run);
        const bool same = !run.checkpoints.empty() && run.checkpoints.back().report == recomputed;
        check("final_metrics", same, same ? "recomputed from snapshot" : "stored final row differs from snapshot");
        std::size_t over = 0;
        for (const auto& ltm : run.snapshot->agents) over += ltm.size() > run.ltm_capacity ? 1 : 0;
        check("ltm_capacity", over == 0, std::to_string(over) + " agents above capacity");
        // read_ltm_snapshot rejects any sequence whose hash differs from its couplets.
        check("snapshot_hashes", true, "every sequence hash matches its couplets");
    } else {
        check("final_metrics", true, "skipped: no snapshot");
    }
    return out;
}

}  // namespace secforage
