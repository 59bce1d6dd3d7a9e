#include "rorqual/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rorqual {

std::string to_string(Backend b) {
    return b == Backend::Rorqual ? "rorqual" : "pull";
}

std::string to_string(AdvBehavior b) {
    switch (b) {
        case AdvBehavior::None: return "none";
        case AdvBehavior::Crash: return "crash";
        case AdvBehavior::SelectiveOmission: return "omission";
        case AdvBehavior::Delayer: return "delayer";
        case AdvBehavior::Replayer: return "replayer";
    }
    return "none";
}

std::string to_string(ParentPolicy p) {
    return p == ParentPolicy::Category ? "category" : "quorum";
}

Backend backend_from_string(const std::string& s) {
    if (s == "rorqual") return Backend::Rorqual;
    if (s == "pull") return Backend::Pull;
    throw std::invalid_argument("unknown backend: " + s);
}

AdvBehavior behavior_from_string(const std::string& s) {
    if (s == "none") return AdvBehavior::None;
    if (s == "crash") return AdvBehavior::Crash;
    if (s == "omission") return AdvBehavior::SelectiveOmission;
    if (s == "delayer") return AdvBehavior::Delayer;
    if (s == "replayer") return AdvBehavior::Replayer;
    throw std::invalid_argument("unknown adversary behavior: " + s);
}

ParentPolicy policy_from_string(const std::string& s) {
    if (s == "category") return ParentPolicy::Category;
    if (s == "quorum") return ParentPolicy::Quorum;
    throw std::invalid_argument("unknown parent policy: " + s);
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (n == 0 || n < 3 * f + 1) fail("need n >= 3f + 1");
    if (delta_actual <= 0.0 || delta_bound <= 0.0) fail("delays must be positive");
    if (delta_actual > delta_bound) fail("actual delay bound exceeds known bound");
    if (gst < 0.0 || duration <= 0.0) fail("bad time parameters");
    if (pre_gst_cap <= 0.0) fail("pre-GST delay cap must be positive");
    if (rho < 1) fail("rho must be at least 1");
    if (wave_timeout_factor <= 0.0) fail("wave timeout factor must be positive");
    if (block_size == 0) fail("block size must be positive");
    for (auto b : adversary.byzantine)
        if (b >= n) fail("byzantine peer id out of range");
    if (adversary.byzantine.size() > f) fail("more than f byzantine peers");
    if (adversary.vertex_recipients >= 0 &&
        adversary.vertex_recipients > n - static_cast<int>(adversary.byzantine.size()))
        fail("vertex_recipients exceeds correct peer count");
}

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::string join(const std::vector<SimTime>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

std::string join_ids(const std::vector<PeerId>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

}  // namespace

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            auto last = s.find_last_not_of(ws);
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) continue;

        if (key == "n") cfg.n = static_cast<std::uint16_t>(std::stoul(val));
        else if (key == "f") cfg.f = static_cast<std::uint16_t>(std::stoul(val));
        else if (key == "delta_actual") cfg.delta_actual = std::stod(val);
        else if (key == "delta_bound") cfg.delta_bound = std::stod(val);
        else if (key == "gst") cfg.gst = std::stod(val);
        else if (key == "duration") cfg.duration = std::stod(val);
        else if (key == "deterministic_delays") cfg.deterministic_delays = val == "true" || val == "1";
        else if (key == "pre_gst_cap") cfg.pre_gst_cap = std::stod(val);
        else if (key == "backend") cfg.backend = backend_from_string(val);
        else if (key == "parent_policy") cfg.parent_policy = policy_from_string(val);
        else if (key == "rho") cfg.rho = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "leader_gating") cfg.leader_gating = val == "true" || val == "1";
        else if (key == "wave_timeout_factor") cfg.wave_timeout_factor = std::stod(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "block_size") cfg.block_size = static_cast<std::uint32_t>(std::stoul(val));
        else if (key == "scheme") cfg.scheme = val == "ed25519" ? SigScheme::Ed25519 : SigScheme::KeyedMac;
        else if (key == "start_time") cfg.start_time = std::stod(val);
        else if (key == "event_cap") cfg.event_cap = std::stoull(val);
        else if (key == "adversary") cfg.adversary.behavior = behavior_from_string(val);
        else if (key == "byzantine") {
            cfg.adversary.byzantine.clear();
            for (double d : parse_list(val))
                cfg.adversary.byzantine.push_back(static_cast<PeerId>(d));
        } else if (key == "crash_time") cfg.adversary.crash_time = std::stod(val);
        else if (key == "vertex_recipients") cfg.adversary.vertex_recipients = std::stoi(val);
        else if (key == "restart_times") {
            cfg.adversary.restart_times.clear();
            for (double d : parse_list(val)) cfg.adversary.restart_times.push_back(d);
        } else if (key == "stop_dispersing_at") cfg.adversary.stop_dispersing_at = std::stod(val);
        else throw std::invalid_argument("unknown scenario key: " + key);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

std::string ScenarioConfig::to_text() const {
    std::ostringstream os;
    os << "n = " << n << "\n"
       << "f = " << f << "\n"
       << "delta_actual = " << delta_actual << "\n"
       << "delta_bound = " << delta_bound << "\n"
       << "gst = " << gst << "\n"
       << "duration = " << duration << "\n"
       << "deterministic_delays = " << (deterministic_delays ? "true" : "false") << "\n"
       << "pre_gst_cap = " << pre_gst_cap << "\n"
       << "backend = " << to_string(backend) << "\n"
       << "parent_policy = " << to_string(parent_policy) << "\n"
       << "rho = " << rho << "\n"
       << "leader_gating = " << (leader_gating ? "true" : "false") << "\n"
       << "wave_timeout_factor = " << wave_timeout_factor << "\n"
       << "seed = " << seed << "\n"
       << "block_size = " << block_size << "\n"
       << "scheme = " << (scheme == SigScheme::Ed25519 ? "ed25519" : "keyed_mac") << "\n"
       << "start_time = " << start_time << "\n"
       << "adversary = " << to_string(adversary.behavior) << "\n";
    if (!adversary.byzantine.empty())
        os << "byzantine = " << join_ids(adversary.byzantine) << "\n";
    if (adversary.behavior == AdvBehavior::Crash)
        os << "crash_time = " << adversary.crash_time << "\n";
    if (adversary.behavior == AdvBehavior::SelectiveOmission)
        os << "vertex_recipients = " << adversary.vertex_recipients << "\n";
    if (!adversary.restart_times.empty())
        os << "restart_times = " << join(adversary.restart_times) << "\n";
    if (adversary.stop_dispersing_at != std::numeric_limits<double>::infinity())
        os << "stop_dispersing_at = " << adversary.stop_dispersing_at << "\n";
    return os.str();
}

}  // namespace rorqual
