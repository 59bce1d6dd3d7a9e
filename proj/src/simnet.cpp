#include "rorqual/simnet.hpp"

#include <algorithm>
#include <cassert>

namespace rorqual {

Simulation::Simulation(ScenarioConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
}

void Simulation::add_peer(std::unique_ptr<Peer> p) {
    peers_.push_back(std::move(p));
}

void Simulation::push(SimTime t, std::function<void()> fn) {
    assert(t >= now_);
    queue_.push(Event{t, seq_++, std::move(fn)});
}

SimTime Simulation::delivery_time(PeerId /*from*/) const {
    auto& rng = const_cast<std::mt19937_64&>(rng_);
    auto post_draw = [&]() {
        if (cfg_.deterministic_delays) return cfg_.delta_actual;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        return cfg_.delta_actual * (1.0 - u(rng));  // (0, delta]
    };
    if (now_ >= cfg_.gst) return now_ + post_draw();
    double base;
    if (cfg_.adversary.behavior == AdvBehavior::Delayer) {
        base = cfg_.pre_gst_cap;  // adversary stretches every pre-GST link
    } else {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        base = cfg_.pre_gst_cap * (1.0 - u(rng));
    }
    // reliable channels: no later than GST + delta
    return std::min(now_ + base, cfg_.gst + post_draw());
}

bool Simulation::adversary_drops(PeerId from, PeerId to,
                                 const Envelope& env) const {
    if (!is_byzantine(from)) return false;
    const auto& adv = cfg_.adversary;
    switch (adv.behavior) {
        case AdvBehavior::None:
        case AdvBehavior::Delayer:
        case AdvBehavior::Replayer:
            return false;
        case AdvBehavior::Crash:
            return now_ >= adv.crash_time;
        case AdvBehavior::SelectiveOmission: {
            // setup runs honestly (the key must be accepted for the attack
            // to matter at all)
            if (std::holds_alternative<KeyMsg>(env.payload) ||
                std::holds_alternative<EchoMsg>(env.payload) ||
                std::holds_alternative<KeyRequestMsg>(env.payload) ||
                std::holds_alternative<KeyReplyMsg>(env.payload))
                return false;
            // own pulls help only the adversary; let them through
            if (std::holds_alternative<RequestMsg>(env.payload) ||
                std::holds_alternative<PullRequestMsg>(env.payload))
                return false;
            // acks for correct vertices flow normally; the attack is about
            // withholding the adversary's own dissemination
            if (std::holds_alternative<AckMsg>(env.payload)) return false;

            int recipients = adv.vertex_recipients >= 0
                                 ? adv.vertex_recipients
                                 : cfg_.n - 2 * cfg_.f;
            // victim set: the first `recipients` correct peers; coalition
            // members also receive everything withheld
            auto in_victim_set = [&](PeerId p) {
                if (is_byzantine(p)) return true;
                int rank = 0;
                for (PeerId q = 0; q < p; ++q)
                    if (!is_byzantine(q)) ++rank;
                return rank < recipients;
            };
            if (std::holds_alternative<VertexMsg>(env.payload) ||
                std::holds_alternative<PullVertexMsg>(env.payload))
                return !in_victim_set(to);
            // colluder votes for adversary-owned vertices go only to the
            // chosen recipients; votes for others are withheld
            if (const auto* v = std::get_if<PullVoteMsg>(&env.payload)) {
                if (is_byzantine(v->owner)) return !in_victim_set(to);
                return true;
            }
            // everything else from the compromised NW is withheld
            return true;
        }
    }
    return true;
}

bool Simulation::link_send(PeerId from, PeerId to, const Envelope& env,
                           std::shared_ptr<McastState> mcast) {
    if (crashed_.count(from)) return false;
    if (adversary_drops(from, to, env)) return false;

    const std::size_t bytes = env.wire_size();
    metrics_.record_bytes(env.attribution(), bytes);
    if (trace_enabled_)
        trace_.push_back({now_, 's', from, to, env.type_name(), bytes});

    SimTime t = delivery_time(from);
    push(t, [this, from, to, env, mcast, bytes]() {
        if (mcast) mcast->confirmed.insert(to);  // transport receipt, free
        if (crashed_.count(to)) return;
        if (trace_enabled_)
            trace_.push_back({now_, 'd', from, to, env.type_name(), bytes});
        peers_[to]->on_message(env, from);
    });
    return true;
}

void Simulation::send(PeerId from, PeerId to, Envelope env) {
    env.sender = from;
    link_send(from, to, env, nullptr);
}

void Simulation::multicast(PeerId from, Envelope env) {
    env.sender = from;
    const auto n = static_cast<PeerId>(peers_.size());
    if (is_byzantine(from) || crashed_.count(from)) {
        // adversary NW does not run the confirmation loop
        for (PeerId to = 0; to < n; ++to) link_send(from, to, env, nullptr);
        return;
    }
    auto st = std::make_shared<McastState>();
    st->from = from;
    st->env = std::move(env);
    st->window_end = now_ + cfg_.delta_bound;
    for (PeerId to = 0; to < n; ++to) link_send(from, to, st->env, st);
    schedule_peer(from, cfg_.delta_bound / 2.0,
                  [this, st]() { mcast_tick(st); });
}

void Simulation::mcast_tick(std::shared_ptr<McastState> st) {
    const auto n = static_cast<PeerId>(peers_.size());
    if (st->confirmed.size() >= cfg_.quorum() && now_ >= st->window_end - 1e-9)
        return;
    for (PeerId to = 0; to < n; ++to)
        if (!st->confirmed.count(to)) link_send(st->from, to, st->env, st);
    schedule_peer(st->from, cfg_.delta_bound / 2.0,
                  [this, st]() { mcast_tick(st); });
}

void Simulation::schedule_peer(PeerId owner, double delay,
                               std::function<void()> fn) {
    if (crashed_.count(owner)) return;
    push(now_ + delay, [this, owner, fn = std::move(fn)]() {
        if (crashed_.count(owner)) return;
        fn();
    });
}

void Simulation::schedule(double delay, std::function<void()> fn) {
    push(now_ + delay, std::move(fn));
}

void Simulation::install_adversary() {
    const auto& adv = cfg_.adversary;
    if (adv.behavior == AdvBehavior::Crash) {
        if (adv.crash_time <= 0.0) {
            // down from the very beginning, before any peer starts
            for (auto b : adv.byzantine) crashed_.insert(b);
        } else {
            push(adv.crash_time, [this]() {
                for (auto b : cfg_.adversary.byzantine) crashed_.insert(b);
            });
        }
    }
    if (adv.behavior == AdvBehavior::Replayer) {
        for (auto t : adv.restart_times)
            push(t, [this]() {
                for (auto b : cfg_.adversary.byzantine)
                    peers_[b]->restart_enclave();
            });
    }
}

Simulation::RunStats Simulation::run() {
    install_adversary();
    for (auto& p : peers_) p->start();
    RunStats stats;
    while (!queue_.empty()) {
        if (stats.events >= cfg_.event_cap || now_ > cfg_.time_cap()) {
            stats.truncated = true;
            break;
        }
        auto ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        ev.fn();
        ++stats.events;
    }
    stats.end_time = now_;
    return stats;
}

}  // namespace rorqual
