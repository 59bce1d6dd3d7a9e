#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rorqual/codec.hpp"

namespace rorqual {

using SimTime = double;

enum class Backend : std::uint8_t { Rorqual = 0, Pull = 1 };
enum class ParentPolicy : std::uint8_t { Category = 0, Quorum = 1 };

enum class AdvBehavior : std::uint8_t {
    None = 0,
    Crash = 1,
    SelectiveOmission = 2,
    Delayer = 3,
    Replayer = 4,
};

// The adversary controls only Normal-World actions and message scheduling of
// its peers; their enclaves still execute the designated protocol.
struct AdversarySpec {
    std::vector<PeerId> byzantine;
    AdvBehavior behavior = AdvBehavior::None;

    // Crash: outbound and inbound cut, timers silenced, from this time on.
    SimTime crash_time = 0.0;

    // SelectiveOmission: vertex dispersals reach only the first
    // `vertex_recipients` correct peers (by id); every other NW message of
    // the Byzantine peer (shares, acks, votes, timeouts, relays, its own
    // loopback) is dropped. -1 selects n-2f, the worst-case construction.
    int vertex_recipients = -1;

    // Replayer: enclave restart times.
    std::vector<SimTime> restart_times;

    // Byzantine peers stop forming new vertices after this time (correct
    // peers keep going until `duration`).
    SimTime stop_dispersing_at = std::numeric_limits<double>::infinity();

    bool is_byzantine(PeerId p) const {
        for (auto b : byzantine)
            if (b == p) return true;
        return false;
    }
};

struct ScenarioConfig {
    std::uint16_t n = 4;
    std::uint16_t f = 1;

    double delta_actual = 1.0;  // real delivery bound after GST; hidden from peers
    double delta_bound = 1.0;   // known bound Delta
    SimTime gst = 0.0;
    SimTime duration = 50.0;
    // every post-GST delay is exactly delta_actual instead of a (0, delta] draw
    bool deterministic_delays = false;
    double pre_gst_cap = 5.0;  // model concession: finite adversarial delay

    Backend backend = Backend::Rorqual;
    ParentPolicy parent_policy = ParentPolicy::Category;
    std::uint32_t rho = 2;

    // gate round advancement on the ordering layer's wave conditions
    // (leader waits); off for mempool-only latency runs
    bool leader_gating = false;
    double wave_timeout_factor = 4.0;  // timer = factor * delta_bound

    AdversarySpec adversary;
    std::uint64_t seed = 1;
    std::uint32_t block_size = 64;
    SigScheme scheme = SigScheme::KeyedMac;

    // first dispersal time; setup (Key/Echo) runs from t=0
    SimTime start_time = 3.0;

    // run loop safety caps; exceeding either marks the run truncated
    std::uint64_t event_cap = 50'000'000;
    SimTime time_cap_slack = 200.0;

    std::uint16_t quorum() const { return static_cast<std::uint16_t>(n - f); }
    SimTime time_cap() const { return duration * 10.0 + time_cap_slack; }

    // throws std::invalid_argument on violation (n >= 3f+1, delta <= Delta, rho >= 1, ...)
    void validate() const;

    // "key = value" lines; '#' comments
    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse_text(const std::string& text);
    std::string to_text() const;
};

std::string to_string(Backend b);
std::string to_string(AdvBehavior b);
std::string to_string(ParentPolicy p);
Backend backend_from_string(const std::string& s);
AdvBehavior behavior_from_string(const std::string& s);
ParentPolicy policy_from_string(const std::string& s);

}  // namespace rorqual
