#pragma once

#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "rorqual/messages.hpp"
#include "rorqual/metrics.hpp"
#include "rorqual/scenario.hpp"

namespace rorqual {

class Simulation;

// What a peer exposes to the harness for post-run inspection.
struct StoredVertex {
    PublicKey sw_key;  // enclave instance the vertex was signed under
    VertexId id;
    Digest digest;
};

class DagStore;

class Peer {
  public:
    virtual ~Peer() = default;
    virtual void start() = 0;
    virtual void on_message(const Envelope& env, PeerId from) = 0;
    virtual void restart_enclave() {}

    virtual const DagStore* dag() const { return nullptr; }
    virtual std::vector<StoredVertex> stored_vertices() const { return {}; }
    virtual const std::vector<DeliveryRecord>* deliveries() const {
        return nullptr;
    }
    virtual std::uint64_t committed_leaders() const { return 0; }
    virtual Round last_round() const { return 0; }
    virtual std::vector<Round> ldr_snapshot() const { return {}; }
    virtual std::vector<std::string> alarms() const { return {}; }
};

// Deterministic discrete-event simulator: one clock, a (time, seq) ordered
// event heap, per-link delivery under partial synchrony, managed multicast
// with free transport receipts, and adversary hooks.
class Simulation {
  public:
    explicit Simulation(ScenarioConfig cfg);

    SimTime now() const { return now_; }
    std::mt19937_64& rng() { return rng_; }
    const ScenarioConfig& config() const { return cfg_; }
    MetricsCollector& metrics() { return metrics_; }

    void add_peer(std::unique_ptr<Peer> p);
    Peer& peer(PeerId id) { return *peers_[id]; }
    std::size_t peer_count() const { return peers_.size(); }
    bool is_crashed(PeerId id) const { return crashed_.count(id) > 0; }
    bool is_byzantine(PeerId id) const {
        return cfg_.adversary.is_byzantine(id);
    }

    // point-to-point send; adversary filter applies to Byzantine senders
    void send(PeerId from, PeerId to, Envelope env);

    // multicast with confirmation semantics: resend every Delta/2 inside a
    // Delta window, then keep resending to unconfirmed peers until n-f
    // transport receipts. Byzantine senders get a single filtered round.
    void multicast(PeerId from, Envelope env);

    // timer owned by a peer; silenced if the peer crashes
    void schedule_peer(PeerId owner, double delay, std::function<void()> fn);
    // harness-level event
    void schedule(double delay, std::function<void()> fn);

    void enable_trace(bool on) { trace_enabled_ = on; }
    const std::vector<TraceRecord>& trace() const { return trace_; }

    struct RunStats {
        std::uint64_t events = 0;
        bool truncated = false;
        SimTime end_time = 0.0;
    };

    // start all peers, install adversary schedule, drive to quiescence
    RunStats run();

  private:
    struct Event {
        SimTime time;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    struct McastState {
        PeerId from;
        Envelope env;
        std::set<PeerId> confirmed;
        SimTime window_end;
    };

    void push(SimTime t, std::function<void()> fn);
    // schedules delivery; returns false if the adversary dropped the message
    bool link_send(PeerId from, PeerId to, const Envelope& env,
                   std::shared_ptr<McastState> mcast);
    bool adversary_drops(PeerId from, PeerId to, const Envelope& env) const;
    SimTime delivery_time(PeerId from) const;
    void mcast_tick(std::shared_ptr<McastState> st);
    void install_adversary();

    ScenarioConfig cfg_;
    std::mt19937_64 rng_;
    SimTime now_ = 0.0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<std::unique_ptr<Peer>> peers_;
    std::set<PeerId> crashed_;
    MetricsCollector metrics_;
    bool trace_enabled_ = false;
    std::vector<TraceRecord> trace_;
};

}  // namespace rorqual
