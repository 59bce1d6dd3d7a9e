#include "rorqual/runner.hpp"

#include <algorithm>
#include <tuple>

#include "rorqual/dag.hpp"
#include "rorqual/pull_peer.hpp"
#include "rorqual/rorqual_peer.hpp"

namespace rorqual {

Runner::Runner(ScenarioConfig cfg, bool enable_trace) {
    cfg.validate();
    sim_ = std::make_unique<Simulation>(std::move(cfg));
    sim_->enable_trace(enable_trace);

    const auto& c = sim_->config();
    Entropy ent(sim_->rng());
    std::vector<KeyPair> keys;
    std::map<PeerId, PublicKey> pub;
    for (PeerId p = 0; p < c.n; ++p) {
        keys.push_back(
            KeyPair::generate(ent, KeyDomain::NormalWorld, c.scheme));
        pub[p] = keys.back().public_key();
    }
    for (PeerId p = 0; p < c.n; ++p) {
        if (c.backend == Backend::Rorqual)
            sim_->add_peer(std::make_unique<RorqualPeer>(*sim_, p,
                                                         std::move(keys[p]),
                                                         pub));
        else
            sim_->add_peer(std::make_unique<PullPeer>(*sim_, p,
                                                      std::move(keys[p]),
                                                      pub));
    }
}

bool Runner::live_correct(PeerId p) const {
    return !sim_->is_byzantine(p) && !sim_->is_crashed(p);
}

RunResult Runner::run(bool check_dag_equality) {
    RunResult out;
    out.stats = sim_->run();
    out.metrics = compute_metrics(out.stats);
    out.invariants = check_invariants(check_dag_equality);
    return out;
}

RunMetrics Runner::compute_metrics(const Simulation::RunStats& stats) const {
    const auto& c = sim_->config();
    const auto& col = sim_->metrics();
    RunMetrics m;
    m.truncated = stats.truncated;
    m.quiescence_time = stats.end_time;
    m.events_processed = stats.events;
    m.total_bytes = col.total_bytes();

    std::size_t live = 0;
    for (PeerId p = 0; p < c.n; ++p)
        if (live_correct(p)) ++live;

    for (const auto& [id, st] : col.vertices()) {
        if (st.send_time < 0) continue;  // admitted but never dispersed here
        ++m.dispersed_vertices;
        VertexLatency lat;
        lat.id = id;
        lat.send_time = st.send_time;
        lat.byzantine_source = st.byzantine_source;
        std::vector<double> times;
        for (const auto& [p, t] : st.admissions)
            if (live_correct(p)) times.push_back(t - st.send_time);
        std::sort(times.begin(), times.end());
        lat.correct_admissions = times.size();
        if (times.size() >= static_cast<std::size_t>(c.f + 1))
            lat.latency_fplus1 = times[c.f];
        if (!times.empty() && times.size() >= live)
            lat.latency_all = times.back();
        if (st.first_cert) lat.cert_latency = *st.first_cert - st.send_time;
        m.latencies.push_back(std::move(lat));

        if (correct(id.source))
            m.dispersal_times[id.source].push_back(st.send_time);
    }
    for (auto& [p, ts] : m.dispersal_times) {
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 1; i < ts.size(); ++i)
            m.round_durations[p].push_back(ts[i] - ts[i - 1]);
    }
    for (PeerId p = 0; p < c.n; ++p)
        if (correct(p)) m.commit_counts[p] = sim_->peer(p).committed_leaders();
    if (m.dispersed_vertices > 0)
        m.bytes_per_vertex =
            static_cast<double>(m.total_bytes) /
            static_cast<double>(m.dispersed_vertices);
    return m;
}

InvariantReport Runner::check_invariants(bool check_dag_equality) const {
    const auto& c = sim_->config();
    InvariantReport rep;

    for (PeerId p = 0; p < c.n; ++p) {
        const Peer& peer = sim_->peer(p);
        if (const DagStore* d = peer.dag())
            rep.containment_violations += d->containment_violations();
        if (correct(p))
            for (const auto& a : peer.alarms())
                rep.alarms.push_back("peer " + std::to_string(p) + ": " + a);
    }

    if (check_dag_equality) {
        rep.dag_equal_checked = true;
        std::optional<std::vector<std::pair<VertexId, Digest>>> ref;
        for (PeerId p = 0; p < c.n; ++p) {
            if (!live_correct(p)) continue;
            auto contents = sim_->peer(p).dag()->contents();
            std::sort(contents.begin(), contents.end());
            if (!ref)
                ref = std::move(contents);
            else if (contents != *ref)
                rep.dag_equal = false;
        }
    }

    // no signing key may attest two different digests for one (source, round)
    std::map<std::tuple<PublicKey, VertexId>, Digest> seen;
    for (PeerId p = 0; p < c.n; ++p) {
        if (!correct(p)) continue;
        for (const auto& sv : sim_->peer(p).stored_vertices()) {
            auto key = std::make_tuple(sv.sw_key, sv.id);
            auto [it, fresh] = seen.emplace(key, sv.digest);
            if (!fresh && !(it->second == sv.digest))
                rep.stores_consistent = false;
        }
    }

    std::optional<std::vector<DeliveryRecord>> longest;
    auto same = [](const DeliveryRecord& a, const DeliveryRecord& b) {
        return a.round == b.round && a.source == b.source &&
               a.block_digest == b.block_digest;
    };
    for (PeerId p = 0; p < c.n; ++p) {
        if (!correct(p)) continue;
        const auto* del = sim_->peer(p).deliveries();
        if (!del) continue;
        if (!longest) {
            longest = *del;
            continue;
        }
        const auto& a = *longest;
        const auto& b = *del;
        std::size_t k = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < k; ++i)
            if (!same(a[i], b[i])) {
                rep.deliveries_prefix = false;
                break;
            }
        if (b.size() > a.size()) longest = b;
    }

    std::uint64_t vertex_bytes = 0;
    for (const auto& [id, st] : sim_->metrics().vertices())
        vertex_bytes += st.bytes;
    rep.bytes_reconciled =
        vertex_bytes + sim_->metrics().setup_bytes() ==
        sim_->metrics().total_bytes();
    return rep;
}

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace) {
    os << "time,kind,from,to,type,bytes\n";
    for (const auto& t : trace)
        os << t.time << ',' << t.kind << ',' << t.from << ',' << t.to << ','
           << t.msg_type << ',' << t.bytes << '\n';
}

void write_deliveries(std::ostream& os,
                      const std::vector<DeliveryRecord>& deliveries) {
    os << "seq,round,source,block\n";
    for (const auto& d : deliveries)
        os << d.seq << ',' << d.round << ',' << d.source << ','
           << d.block_digest.hex() << '\n';
}

}  // namespace rorqual
