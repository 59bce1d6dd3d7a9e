#include "rorqual/rorqual_peer.hpp"

#include <algorithm>

namespace rorqual {

RorqualPeer::RorqualPeer(Simulation& sim, PeerId id, KeyPair nw_key,
                         std::map<PeerId, PublicKey> nw_pub)
    : sim_(sim),
      id_(id),
      n_(sim.config().n),
      f_(sim.config().f),
      cfg_(sim.config()),
      nw_key_(std::move(nw_key)),
      nw_pub_(std::move(nw_pub)),
      enclave_(std::make_unique<Enclave>(id, Entropy(sim.rng()), cfg_.scheme)),
      dag_(n_),
      ordering_(dag_, n_, f_, cfg_.seed),
      max_record_round_(n_, 0),
      ldr_(n_, 0) {}

void RorqualPeer::start() {
    sim_.multicast(id_, Envelope{id_, enclave_->announcement()});
    sim_.schedule_peer(id_, cfg_.start_time, [this]() { try_form(); });
}

void RorqualPeer::restart_enclave() {
    enclave_ = std::make_unique<Enclave>(id_, Entropy(sim_.rng()), cfg_.scheme);
    sim_.multicast(id_, Envelope{id_, enclave_->announcement()});
}

void RorqualPeer::on_message(const Envelope& env, PeerId from) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeyMsg>) on_key(m, from);
            else if constexpr (std::is_same_v<T, EchoMsg>) on_echo(m);
            else if constexpr (std::is_same_v<T, KeyRequestMsg>)
                on_key_request(m, from);
            else if constexpr (std::is_same_v<T, KeyReplyMsg>) on_key_reply(m);
            else if constexpr (std::is_same_v<T, VertexMsg>) on_vertex(m, from);
            else if constexpr (std::is_same_v<T, ShareMsg>) on_share(m);
            else if constexpr (std::is_same_v<T, AckMsg>)
                enclave_->on_ack(from, m, n_, f_);
            else if constexpr (std::is_same_v<T, RequestMsg>)
                on_request(m, from);
            else if constexpr (std::is_same_v<T, RelayMsg>) on_relay(m);
            else if constexpr (std::is_same_v<T, TimeoutMsg>) on_timeout_msg(m);
            // pull-backend traffic is ignored by this state machine
        },
        env.payload);
}

// ---------------------------------------------------------------------------
// setup

void RorqualPeer::on_key(const KeyMsg& m, PeerId from) {
    if (from != m.owner || m.pub.domain != KeyDomain::SecureWorld) return;
    auto it = echoed_.find(m.owner);
    if (it != echoed_.end()) return;  // only the first key is ever echoed
    echoed_[m.owner] = m.pub;
    EchoMsg echo{m.owner, m.pub,
                 nw_key_.sign(key_announce_payload(m.owner, m.pub), id_)};
    sim_.multicast(id_, Envelope{id_, echo});
}

void RorqualPeer::on_echo(const EchoMsg& m) {
    auto key_it = nw_pub_.find(m.nw_sig.signer);
    if (key_it == nw_pub_.end()) return;
    if (!verify(key_announce_payload(m.subject, m.pub), m.nw_sig,
                key_it->second))
        return;
    auto ek = echo_key_.find(m.subject);
    if (ek == echo_key_.end()) {
        echo_key_[m.subject] = m.pub;
    } else if (!(ek->second == m.pub)) {
        // echoes for a second key: ignore them; a conflicting quorum among
        // correct peers is impossible (one-echo rule)
        return;
    }
    auto& sigs = echo_sigs_[m.subject];
    sigs.emplace(m.nw_sig.signer, m.nw_sig);
    if (sigs.size() < cfg_.quorum() || sw_keys_.count(m.subject)) return;

    std::vector<Signature> list;
    for (auto& [_, s] : sigs) list.push_back(s);
    try {
        QuorumCert cert =
            assemble_cert(list, key_announce_payload(m.subject, m.pub),
                          nw_pub_, cfg_.quorum());
        accept_key(m.subject, m.pub, std::move(cert));
    } catch (const CertError& e) {
        alarm(std::string("key cert assembly failed: ") + e.what());
    }
}

void RorqualPeer::accept_key(PeerId subject, const PublicKey& pub,
                             QuorumCert cert) {
    if (sw_keys_.count(subject)) {
        if (!(sw_keys_[subject] == pub))
            alarm("conflicting key quorum for peer " + std::to_string(subject));
        return;
    }
    sw_keys_[subject] = pub;
    key_certs_[subject] = std::move(cert);
    key_requested_.erase(subject);

    auto vmsgs = std::move(keywait_vertices_[subject]);
    keywait_vertices_.erase(subject);
    auto smsgs = std::move(keywait_shares_[subject]);
    keywait_shares_.erase(subject);
    auto rmsgs = std::move(keywait_relays_[subject]);
    keywait_relays_.erase(subject);
    for (auto& m : vmsgs) on_vertex(m, m.vertex.source);
    for (auto& m : smsgs) on_share(m);
    for (auto& m : rmsgs) on_relay(m);
}

void RorqualPeer::on_key_request(const KeyRequestMsg& m, PeerId from) {
    auto it = sw_keys_.find(m.subject);
    if (it == sw_keys_.end()) return;
    sim_.send(id_, from,
              Envelope{id_, KeyReplyMsg{m.subject, it->second,
                                        key_certs_[m.subject]}});
}

void RorqualPeer::on_key_reply(const KeyReplyMsg& m) {
    if (sw_keys_.count(m.subject)) return;
    if (!verify_cert(m.cert, key_announce_payload(m.subject, m.pub), nw_pub_,
                     cfg_.quorum()))
        return;
    accept_key(m.subject, m.pub, m.cert);
}

void RorqualPeer::request_key(PeerId subject) {
    if (sw_keys_.count(subject) || key_requested_.count(subject)) return;
    key_requested_.insert(subject);
    auto tick = [this, subject](auto&& self) -> void {
        if (sw_keys_.count(subject)) return;
        std::vector<PeerId> others;
        for (PeerId p = 0; p < n_; ++p)
            if (p != id_) others.push_back(p);
        std::shuffle(others.begin(), others.end(), sim_.rng());
        std::size_t k = std::min<std::size_t>(others.size(), 2 * f_ + 1);
        for (std::size_t i = 0; i < k; ++i)
            sim_.send(id_, others[i], Envelope{id_, KeyRequestMsg{subject}});
        sim_.schedule_peer(id_, cfg_.delta_bound,
                           [self]() mutable { self(self); });
    };
    tick(tick);
}

// ---------------------------------------------------------------------------
// dispersal handling

void RorqualPeer::on_vertex(const VertexMsg& m, PeerId) {
    const PeerId source = m.vertex.source;
    if (source >= n_ || m.vertex.round == 0) return;
    auto key_it = sw_keys_.find(source);
    if (key_it == sw_keys_.end()) {
        keywait_vertices_[source].push_back(m);
        request_key(source);
        return;
    }
    const PublicKey& key = key_it->second;
    Bytes vser = m.vertex.serialize();
    if (!verify(vser, m.sig_v, key)) return;
    if (m.share_index != id_ ||
        !verify(share_sign_payload(m.share_data, id_, source, m.vertex.round),
                m.sig_share, key))
        return;

    VertexId vid = m.vertex.id();
    ldr_bump(source, m.vertex.delay);
    store_record(m.vertex, m.sig_v, key);

    if (!acked_.count(vid)) {
        acked_.insert(vid);
        sim_.send(id_, source,
                  Envelope{id_, AckMsg{source, m.vertex.round, m.sig_share}});
    }

    Digest d = digest(vser);
    ShareSlot& slot = slots_[vid];
    if (!slot.have_digest) {
        slot.have_digest = true;
        slot.vertex_digest = d;
    }
    if (!slot.own_share_sent && slot.vertex_digest == d) {
        slot.own_share_sent = true;
        ShareMsg share{source,
                       m.vertex.round,
                       d,
                       id_,
                       m.share_data,
                       m.sig_share,
                       nw_key_.sign(share_attest_payload(d, source,
                                                         m.vertex.round),
                                    id_)};
        sim_.multicast(id_, Envelope{id_, share});
    }
    try_admit();
    try_form();
}

void RorqualPeer::on_share(const ShareMsg& m) {
    if (m.source >= n_ || m.index >= n_ || m.round == 0) return;
    auto key_it = sw_keys_.find(m.source);
    if (key_it == sw_keys_.end()) {
        keywait_shares_[m.source].push_back(m);
        request_key(m.source);
        return;
    }
    if (m.nw_sig.signer != m.index ||
        !verify(share_attest_payload(m.vertex_digest, m.source, m.round),
                m.nw_sig, nw_pub_.at(m.index)))
        return;
    if (!verify(share_sign_payload(m.data, m.index, m.source, m.round),
                m.sw_sig, key_it->second))
        return;

    VertexId vid{m.source, m.round};
    ShareSlot& slot = slots_[vid];
    if (slot.have_digest && !(slot.vertex_digest == m.vertex_digest)) {
        alarm("share digest conflict for (" + std::to_string(m.source) + "," +
              std::to_string(m.round) + ")");
        return;
    }
    slot.have_digest = true;
    slot.vertex_digest = m.vertex_digest;
    slot.shares.emplace(m.index, m.data);
    slot.sw_sigs.emplace(m.index, m.sw_sig);
    slot.attest.emplace(m.index, m.nw_sig);

    const std::size_t k = static_cast<std::size_t>(n_ - 2 * f_);
    if (!records_.count(vid) && slot.shares.size() >= k) {
        std::vector<RsShareData> shares;
        for (auto& [idx, data] : slot.shares) shares.push_back({idx, data});
        try {
            Bytes payload = rs_decode(shares, n_, k);
            ByteReader rd(payload);
            Bytes vser = rd.bytes();
            Signature sig_v = Signature::deserialize(rd);
            if (!(digest(vser) == slot.vertex_digest))
                throw RsIntegrityError("reconstruction digest mismatch");
            ByteReader vr(vser);
            Vertex v = Vertex::deserialize(vr);
            if (!(v.id() == vid) || !verify(vser, sig_v, key_it->second))
                throw RsIntegrityError("reconstruction failed verification");
            ldr_bump(v.source, v.delay);
            store_record(v, sig_v, key_it->second);
        } catch (const std::exception& e) {
            alarm(std::string("share reconstruction: ") + e.what());
        }
    }

    if (!slot.cert && slot.attest.size() >= cfg_.quorum()) {
        std::vector<Signature> list;
        for (auto& [_, s] : slot.attest) list.push_back(s);
        try {
            slot.cert = assemble_cert(
                list,
                share_attest_payload(slot.vertex_digest, m.source, m.round),
                nw_pub_, cfg_.quorum());
        } catch (const CertError& e) {
            alarm(std::string("share cert assembly: ") + e.what());
        }
    }
    try_admit();
    try_form();
}

void RorqualPeer::on_request(const RequestMsg& m, PeerId from) {
    auto it = records_.find({m.source, m.round});
    if (it == records_.end()) return;
    sim_.send(id_, from,
              Envelope{id_, RelayMsg{it->second.vertex, it->second.sw_sig}});
}

void RorqualPeer::on_relay(const RelayMsg& m) {
    const PeerId source = m.vertex.source;
    if (source >= n_ || m.vertex.round == 0) return;
    auto key_it = sw_keys_.find(source);
    if (key_it == sw_keys_.end()) {
        keywait_relays_[source].push_back(m);
        request_key(source);
        return;
    }
    Bytes vser = m.vertex.serialize();
    if (!verify(vser, m.sig_v, key_it->second)) return;
    ldr_bump(source, m.vertex.delay);
    store_record(m.vertex, m.sig_v, key_it->second);
    try_admit();
    try_form();
}

void RorqualPeer::on_timeout_msg(const TimeoutMsg& m) {
    if (m.target >= n_) return;
    auto key_it = nw_pub_.find(m.nw_sig.signer);
    if (key_it == nw_pub_.end() ||
        !verify(timeout_payload(m.target, m.round), m.nw_sig, key_it->second))
        return;
    auto& sigs = timeout_sigs_[{m.target, m.round}];
    sigs.emplace(m.nw_sig.signer, m.nw_sig);
    if (sigs.size() >= static_cast<std::size_t>(f_ + 1)) {
        ldr_bump(m.target, m.round);
        try_form();
    }
}

bool RorqualPeer::store_record(const Vertex& v, const Signature& sw_sig,
                               const PublicKey& key) {
    VertexId vid = v.id();
    auto it = records_.find(vid);
    if (it != records_.end()) {
        if (it->second.sw_key == key &&
            !(it->second.vertex.digest() == v.digest()))
            alarm("equivocation observed for (" + std::to_string(v.source) +
                  "," + std::to_string(v.round) + ")");
        return false;
    }
    records_.emplace(vid, VertexRecord{v, sw_sig, key});
    max_record_round_[v.source] = std::max(max_record_round_[v.source],
                                           v.round);
    if (!dag_.contains(vid)) unadmitted_.insert(vid);
    return true;
}

// ---------------------------------------------------------------------------
// admission and pull recovery

bool RorqualPeer::admissible(const VertexRecord& rec,
                             std::vector<VertexId>& missing) {
    const Vertex& v = rec.vertex;
    for (const auto& e : v.strong_edges) {
        const Vertex* p = dag_.get(e.id());
        if (!p) {
            missing.push_back(e.id());
            continue;
        }
        if (e.round >= 1 && !(p->digest() == e.digest)) {
            alarm("strong edge digest mismatch");
            rejected_.insert(v.id());
            return false;
        }
    }
    for (const auto& e : v.weak_edges)
        if (!dag_.contains(e.id())) missing.push_back(e.id());
    if (!missing.empty()) return false;

    if (!v.weak_certs.empty()) {
        // share certificates are assembled locally from the attestation
        // stream, so a vertex never needs to carry them; embedded ones
        // would bloat every share relay quadratically
        alarm("unexpected embedded weak edge certificates");
        rejected_.insert(v.id());
        return false;
    }
    for (const auto& e : v.weak_edges) {
        const Vertex* p = dag_.get(e.id());
        if (!(p->digest() == e.digest)) {
            alarm("weak edge digest mismatch");
            rejected_.insert(v.id());
            return false;
        }
        // wait for the local share certificate of the target; the
        // attestations reach everyone, so this resolves within a delay
        auto slot = slots_.find(e.id());
        if (slot == slots_.end() || !slot->second.cert) return false;
        if (!(slot->second.vertex_digest == e.digest)) {
            alarm("weak edge digest conflicts with share certificate");
            rejected_.insert(v.id());
            return false;
        }
    }
    return true;
}

void RorqualPeer::try_admit() {
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto it = unadmitted_.begin(); it != unadmitted_.end();) {
            VertexId vid = *it;
            if (rejected_.count(vid) || dag_.contains(vid)) {
                it = unadmitted_.erase(it);
                continue;
            }
            std::vector<VertexId> missing;
            if (admissible(records_.at(vid), missing)) {
                admit(records_.at(vid).vertex);
                it = unadmitted_.erase(it);
                progress = true;
            } else {
                for (VertexId m : missing) start_pull(m);
                ++it;
            }
        }
    }
}

void RorqualPeer::admit(const Vertex& v) {
    if (!dag_.insert(v)) {
        alarm("containment violation on admission");
        return;
    }
    sim_.metrics().record_admission(v.id(), id_, sim_.now());
    ldr_bump(v.source, v.delay);
    pulling_.erase(v.id());
    ordering_.on_admitted(*dag_.get(v.id()));
}

void RorqualPeer::start_pull(VertexId missing) {
    if (dag_.contains(missing) || records_.count(missing) ||
        pulling_.count(missing))
        return;
    pulling_.insert(missing);
    pull_tick(missing);
}

void RorqualPeer::pull_tick(VertexId missing) {
    if (!pulling_.count(missing) || records_.count(missing) ||
        dag_.contains(missing)) {
        pulling_.erase(missing);
        return;
    }
    RequestMsg req = enclave_->request_missing(missing.source, missing.round);
    std::vector<PeerId> others;
    for (PeerId p = 0; p < n_; ++p)
        if (p != id_) others.push_back(p);
    std::shuffle(others.begin(), others.end(), sim_.rng());
    std::size_t k = std::min<std::size_t>(others.size(), 2 * f_ + 1);
    for (std::size_t i = 0; i < k; ++i)
        sim_.send(id_, others[i], Envelope{id_, req});
    sim_.schedule_peer(id_, cfg_.delta_bound,
                       [this, missing]() { pull_tick(missing); });
}

void RorqualPeer::timeout_scan(Round r) {
    for (PeerId p = 0; p < n_; ++p) {
        if (p == id_ || max_record_round_[p] >= r) continue;
        if (timeout_sent_.count({p, r})) continue;
        timeout_sent_.insert({p, r});
        TimeoutMsg t{p, r, nw_key_.sign(timeout_payload(p, r), id_)};
        sim_.multicast(id_, Envelope{id_, t});
    }
}

void RorqualPeer::ldr_bump(PeerId p, Round r) {
    if (r > ldr_[p]) ldr_[p] = r;
}

// ---------------------------------------------------------------------------
// formation

std::size_t RorqualPeer::share_count(PeerId source, Round r) const {
    if (r == 0) return n_;  // genesis: mock full dissemination
    auto it = slots_.find({source, r});
    return it == slots_.end() ? 0 : it->second.shares.size();
}

bool RorqualPeer::parent_shares_complete(const Vertex& v) const {
    for (const auto& e : v.strong_edges)
        if (share_count(e.source, e.round) < cfg_.quorum()) return false;
    return true;
}

std::vector<VertexId> RorqualPeer::eligible_parents(Round r, bool fast) const {
    std::vector<VertexId> cats[4];
    for (VertexId id : dag_.round_vertices(r)) {
        const Vertex* v = dag_.get(id);
        bool ps = parent_shares_complete(*v);
        if (share_count(id.source, r) >= cfg_.quorum())
            cats[0].push_back(id);
        else if (r >= cfg_.rho && ldr_[id.source] <= r - cfg_.rho && ps)
            cats[1].push_back(id);
        else if (ps)
            cats[2].push_back(id);
        else
            cats[3].push_back(id);
    }
    std::vector<VertexId> out;
    const int upto = fast ? 2 : 4;
    for (int c = 0; c < upto; ++c)
        out.insert(out.end(), cats[c].begin(), cats[c].end());
    return out;
}

void RorqualPeer::try_form() {
    // defer to the end of the current instant so every delivery with the
    // same timestamp is absorbed before parents are ranked; otherwise a
    // partially processed batch of shares can demote fresh vertices and
    // push a stale candidate into the parent set
    if (form_pending_) return;
    form_pending_ = true;
    sim_.schedule_peer(id_, 0.0, [this]() {
        form_pending_ = false;
        form_now();
    });
}

void RorqualPeer::form_now() {
    const SimTime now = sim_.now();
    if (now + 1e-12 < cfg_.start_time || now > cfg_.duration) return;
    if (sim_.is_byzantine(id_) && now >= cfg_.adversary.stop_dispersing_at)
        return;

    Round r = last_round_;
    for (Round r2 = dag_.max_round(); r2 > r; --r2)
        if (dag_.round_size(r2) >= cfg_.quorum()) {
            r = r2;
            break;
        }
    if (dag_.round_size(r) < cfg_.quorum()) return;
    if (cfg_.leader_gating && r >= 1 && wait_ &&
        !ordering_.wave_condition(r, n_, f_))
        return;

    bool fast = now - last_sent_ < 2.0 * cfg_.delta_bound - 1e-9;
    auto order = eligible_parents(r, fast);
    if (order.size() < cfg_.quorum()) {
        if (fast && !slow_path_retry_armed_) {
            slow_path_retry_armed_ = true;
            // run just past the deadline so share deliveries landing at the
            // same instant are counted before parents are ranked
            double wait = last_sent_ + 2.0 * cfg_.delta_bound + 1e-6 - now;
            sim_.schedule_peer(id_, std::max(wait, 0.0), [this]() {
                slow_path_retry_armed_ = false;
                try_form();
            });
        }
        return;
    }

    std::vector<VertexId> parents(order.begin(),
                                  order.begin() + cfg_.quorum());
    // always reference the own previous vertex when eligible: ordering-layer
    // vote typing depends on a peer's chain being in its vertices' history
    VertexId own{id_, r};
    if (dag_.contains(own) &&
        std::find(parents.begin(), parents.end(), own) == parents.end() &&
        std::find(order.begin(), order.end(), own) != order.end())
        parents.back() = own;

    disperse(r + 1, parents);
}

void RorqualPeer::disperse(Round target,
                           const std::vector<VertexId>& parents) {
    Vertex v;
    v.round = target;
    v.source = id_;
    v.block.resize(cfg_.block_size);
    for (auto& b : v.block)
        b = static_cast<std::uint8_t>(sim_.rng()());
    for (VertexId p : parents)
        v.strong_edges.push_back({p.source, p.round, dag_.get(p)->digest()});

    // weak edges: every admitted, share-certified vertex not already covered
    if (target >= 3) {
        for (Round rr = target - 2; rr >= 1; --rr) {
            for (VertexId id : dag_.round_vertices(rr)) {
                auto slot = slots_.find(id);
                if (slot == slots_.end() || !slot->second.cert) continue;
                bool covered = false;
                for (VertexId p : parents)
                    if (dag_.path(p, id)) {
                        covered = true;
                        break;
                    }
                for (std::size_t i = 0;
                     !covered && i < v.weak_edges.size(); ++i)
                    if (dag_.path(v.weak_edges[i].id(), id)) covered = true;
                if (covered) continue;
                const Vertex* u = dag_.get(id);
                if (!(u->digest() == slot->second.vertex_digest)) continue;
                v.weak_edges.push_back({id.source, id.round, u->digest()});
            }
            if (rr == 1) break;
        }
    }
    v.latency_scores = ldr_;

    auto msgs =
        enclave_->disperse(std::move(v), target, n_, f_, sim_.now(),
                           cfg_.delta_bound);
    if (!msgs) {
        alarm("asynchronous exit on dispersal for round " +
              std::to_string(target));
        return;
    }

    const Vertex& stamped = (*msgs)[0].second.vertex;
    VertexId vid = stamped.id();
    sim_.metrics().record_dispersal(vid, sim_.now(), sim_.is_byzantine(id_));
    store_record(stamped, (*msgs)[0].second.sig_v, enclave_->public_key());
    unadmitted_.erase(vid);
    admit(stamped);

    for (auto& [to, m] : *msgs)
        sim_.send(id_, to, Envelope{id_, std::move(m)});

    last_round_ = target;
    last_sent_ = sim_.now();
    wait_ = true;

    // ack window: evaluate just past the 2*Delta deadline so same-instant
    // acks are counted first
    sim_.schedule_peer(id_, 2.0 * cfg_.delta_bound + 1e-6, [this, target]() {
        enclave_->timer_expire(target, sim_.now(), n_, f_);
    });
    sim_.schedule_peer(id_, 6.0 * cfg_.delta_bound,
                       [this, target]() { timeout_scan(target); });
    sim_.schedule_peer(id_, 2.0 * cfg_.delta_bound + 1e-6,
                       [this]() { try_form(); });
    if (cfg_.leader_gating)
        sim_.schedule_peer(id_, cfg_.wave_timeout_factor * cfg_.delta_bound,
                           [this, target]() {
                               if (last_round_ == target && wait_) {
                                   wait_ = false;
                                   try_form();
                               }
                           });
}

std::vector<StoredVertex> RorqualPeer::stored_vertices() const {
    std::vector<StoredVertex> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_)
        out.push_back({rec.sw_key, id, rec.vertex.digest()});
    return out;
}

}  // namespace rorqual
