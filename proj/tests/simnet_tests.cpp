#include "doctest.h"
#include "rorqual/simnet.hpp"

using namespace rorqual;

namespace {

// minimal peer that fires one multicast at start and records receipts
struct ProbePeer : Peer {
    Simulation& sim;
    PeerId id;
    bool announce;
    std::vector<std::pair<PeerId, SimTime>> received;

    ProbePeer(Simulation& s, PeerId i, bool a) : sim(s), id(i), announce(a) {}

    void start() override {
        if (announce)
            sim.multicast(id, Envelope{id, KeyRequestMsg{id}});
    }
    void on_message(const Envelope& env, PeerId from) override {
        (void)env;
        received.push_back({from, sim.now()});
    }
};

ScenarioConfig base_config() {
    ScenarioConfig cfg;
    cfg.n = 4;
    cfg.f = 1;
    cfg.delta_actual = 1.0;
    cfg.delta_bound = 1.0;
    cfg.duration = 5.0;
    cfg.seed = 11;
    return cfg;
}

std::vector<ProbePeer*> build(Simulation& sim, bool all_announce) {
    std::vector<ProbePeer*> out;
    for (PeerId p = 0; p < sim.config().n; ++p) {
        auto peer = std::make_unique<ProbePeer>(sim, p, all_announce || p == 0);
        out.push_back(peer.get());
        sim.add_peer(std::move(peer));
    }
    return out;
}

}  // namespace

TEST_CASE("post-GST deliveries respect the delay bound") {
    ScenarioConfig cfg = base_config();
    cfg.gst = 0.0;
    Simulation sim(cfg);
    auto peers = build(sim, true);
    sim.run();
    // the first transmission on each link leaves at t = 0, so the earliest
    // receipt per (receiver, sender) pair obeys the bound; confirmation
    // resends may land later
    std::size_t total = 0;
    for (auto* p : peers) {
        std::map<PeerId, SimTime> first;
        for (auto [from, t] : p->received) {
            CHECK(t > 0.0);
            auto [it, fresh] = first.emplace(from, t);
            if (!fresh) it->second = std::min(it->second, t);
        }
        CHECK(first.size() == 4);
        for (auto [from, t] : first) CHECK(t <= cfg.delta_actual + 1e-9);
        total += p->received.size();
    }
    CHECK(total >= 16);
}

TEST_CASE("deterministic delays are exactly delta") {
    ScenarioConfig cfg = base_config();
    cfg.deterministic_delays = true;
    cfg.delta_actual = 0.5;
    Simulation sim(cfg);
    auto peers = build(sim, true);
    sim.run();
    for (auto* p : peers)
        for (auto [from, t] : p->received)
            CHECK(t == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pre-GST deliveries can exceed delta but not gst + delta") {
    ScenarioConfig cfg = base_config();
    cfg.gst = 10.0;
    cfg.pre_gst_cap = 5.0;
    Simulation sim(cfg);
    auto peers = build(sim, true);
    sim.run();
    bool some_late = false;
    for (auto* p : peers)
        for (auto [from, t] : p->received) {
            CHECK(t <= cfg.gst + cfg.delta_actual + 1e-9);
            if (t > cfg.delta_actual) some_late = true;
        }
    CHECK(some_late);
}

TEST_CASE("identical seeds replay identical runs") {
    auto observe = [](std::uint64_t seed) {
        ScenarioConfig cfg = base_config();
        cfg.seed = seed;
        Simulation sim(cfg);
        auto peers = build(sim, true);
        sim.run();
        std::vector<std::tuple<PeerId, PeerId, SimTime>> log;
        for (auto* p : peers)
            for (auto [from, t] : p->received) log.push_back({p->id, from, t});
        return log;
    };
    CHECK(observe(3) == observe(3));
    CHECK(observe(3) != observe(4));
}

TEST_CASE("crashed peers stop sending, receiving, and ticking") {
    ScenarioConfig cfg = base_config();
    cfg.adversary.behavior = AdvBehavior::Crash;
    cfg.adversary.byzantine = {2};
    cfg.adversary.crash_time = 0.0;  // down before anything is sent
    Simulation sim(cfg);
    auto peers = build(sim, true);
    bool timer_fired = false;
    sim.schedule_peer(2, 1.0, [&]() { timer_fired = true; });
    sim.run();
    CHECK(sim.is_crashed(2));
    CHECK(peers[2]->received.empty());
    for (auto* p : peers)
        if (p->id != 2)
            for (auto [from, t] : p->received) CHECK(from != 2);
    CHECK_FALSE(timer_fired);
}

TEST_CASE("selective omission filters non-vertex traffic of byzantine peers") {
    ScenarioConfig cfg = base_config();
    cfg.adversary.behavior = AdvBehavior::SelectiveOmission;
    cfg.adversary.byzantine = {0};
    Simulation sim(cfg);
    auto peers = build(sim, false);  // only peer 0 announces
    sim.run();
    // KeyRequest is setup traffic and passes the filter
    std::size_t got = 0;
    for (auto* p : peers) got += p->received.size();
    CHECK(got == 4);

    // a Timeout from the byzantine sender is withheld from everyone
    Simulation sim2(cfg);
    auto peers2 = build(sim2, false);
    (void)peers2;
    Simulation* s2 = &sim2;
    sim2.schedule(0.1, [s2]() {
        s2->multicast(0, Envelope{0, TimeoutMsg{1, 1, {}}});
    });
    // suppress the start announcement receipts by counting only timeouts
    sim2.run();
    for (auto* p : peers2)
        for (auto [from, t] : p->received) (void)from;
    std::size_t timeouts = 0;
    for (auto* p : peers2) timeouts += p->received.size();
    CHECK(timeouts == 4);  // only the 4 KeyRequest receipts, no timeouts
}

TEST_CASE("managed multicast keeps resending to unconfirmed peers") {
    // with deterministic delays every first transmission lands, so the
    // confirmation loop stops after the initial window
    ScenarioConfig cfg = base_config();
    cfg.deterministic_delays = true;
    Simulation sim(cfg);
    auto peers = build(sim, false);
    sim.run();
    // each peer received the announcement at least once; duplicates from
    // the in-window resends are possible but bounded
    for (auto* p : peers) {
        std::size_t from0 = 0;
        for (auto [from, t] : p->received)
            if (from == 0) ++from0;
        CHECK(from0 >= 1);
        CHECK(from0 <= 4);
    }
}
