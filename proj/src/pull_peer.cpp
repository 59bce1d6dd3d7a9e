#include "rorqual/pull_peer.hpp"

#include <algorithm>

namespace rorqual {

PullPeer::PullPeer(Simulation& sim, PeerId id, KeyPair nw_key,
                   std::map<PeerId, PublicKey> nw_pub)
    : sim_(sim),
      id_(id),
      n_(sim.config().n),
      f_(sim.config().f),
      cfg_(sim.config()),
      nw_key_(std::move(nw_key)),
      nw_pub_(std::move(nw_pub)),
      dag_(n_),
      ordering_(dag_, n_, f_, cfg_.seed) {}

void PullPeer::start() {
    sim_.schedule_peer(id_, cfg_.start_time, [this]() { try_form(); });
}

void PullPeer::on_message(const Envelope& env, PeerId from) {
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PullVertexMsg>) on_vertex(m, from);
            else if constexpr (std::is_same_v<T, PullVoteMsg>) on_vote(m);
            else if constexpr (std::is_same_v<T, PullRequestMsg>)
                on_pull_request(m, from);
            else if constexpr (std::is_same_v<T, PullRelayMsg>)
                on_pull_relay(m);
        },
        env.payload);
}

void PullPeer::on_vertex(const PullVertexMsg& m, PeerId from) {
    const PeerId source = m.vertex.source;
    if (source >= n_ || m.vertex.round == 0) return;
    Bytes vser = m.vertex.serialize();
    if (!verify(vser, m.sig, nw_pub_.at(source))) return;

    VertexId vid = m.vertex.id();
    Digest d = digest(vser);
    store_record(m.vertex, m.sig);

    // vote on first receipt directly from the owner; one digest per id ever
    if (from == source && !voted_.count(vid)) {
        voted_[vid] = d;
        PullVoteMsg vote{source, m.vertex.round, d,
                         nw_key_.sign(vote_payload(d, source, m.vertex.round),
                                      id_)};
        sim_.multicast(id_, Envelope{id_, vote});
    }

    // strong edges arrive with the certificates that justified them
    for (std::size_t i = 0;
         i < m.vertex.strong_edges.size() && i < m.vertex.strong_certs.size();
         ++i)
        absorb_cert(m.vertex.strong_edges[i], m.vertex.strong_certs[i]);
    for (std::size_t i = 0;
         i < m.vertex.weak_edges.size() && i < m.vertex.weak_certs.size(); ++i)
        absorb_cert(m.vertex.weak_edges[i], m.vertex.weak_certs[i]);

    maybe_cert(vid);
    try_admit();
    try_form();
}

void PullPeer::on_vote(const PullVoteMsg& m) {
    if (m.owner >= n_ || m.round == 0) return;
    auto key_it = nw_pub_.find(m.sig.signer);
    if (key_it == nw_pub_.end() ||
        !verify(vote_payload(m.vertex_digest, m.owner, m.round), m.sig,
                key_it->second))
        return;
    VertexId vid{m.owner, m.round};
    votes_[vid][m.vertex_digest].emplace(m.sig.signer, m.sig);
    maybe_cert(vid);
    try_form();
}

void PullPeer::absorb_cert(const EdgeRef& e, const QuorumCert& cert) {
    if (e.round == 0 || e.source >= n_ || certs_.count(e.id())) return;
    if (!verify_cert(cert, vote_payload(e.digest, e.source, e.round), nw_pub_,
                     cfg_.quorum()))
        return;
    certs_[e.id()] = cert;
    pull_certs_[e.id()] = {e.digest, cert};
    if (!records_.count(e.id())) start_pull(e.id());
}

void PullPeer::maybe_cert(VertexId vid) {
    if (certs_.count(vid)) return;
    auto rec = records_.find(vid);
    if (rec == records_.end()) return;
    Digest d = digest(rec->second.vertex.serialize());
    auto vs = votes_.find(vid);
    if (vs == votes_.end()) return;
    auto sigs = vs->second.find(d);
    if (sigs == vs->second.end() || sigs->second.size() < cfg_.quorum())
        return;
    std::vector<Signature> list;
    for (auto& [_, s] : sigs->second) list.push_back(s);
    try {
        QuorumCert cert =
            assemble_cert(list, vote_payload(d, vid.source, vid.round),
                          nw_pub_, cfg_.quorum());
        certs_[vid] = cert;
        pull_certs_[vid] = {d, std::move(cert)};
        sim_.metrics().record_cert(vid, sim_.now());
    } catch (const CertError& e) {
        alarm(std::string("vote cert assembly: ") + e.what());
    }
}

void PullPeer::on_pull_request(const PullRequestMsg& m, PeerId from) {
    if (!verify_cert(m.cert, vote_payload(m.vertex_digest, m.owner, m.round),
                     nw_pub_, cfg_.quorum()))
        return;
    auto it = records_.find({m.owner, m.round});
    if (it == records_.end()) return;
    sim_.send(id_, from,
              Envelope{id_, PullRelayMsg{it->second.vertex, it->second.sig}});
}

void PullPeer::on_pull_relay(const PullRelayMsg& m) {
    const PeerId source = m.vertex.source;
    if (source >= n_ || m.vertex.round == 0) return;
    Bytes vser = m.vertex.serialize();
    if (!verify(vser, m.sig, nw_pub_.at(source))) return;
    store_record(m.vertex, m.sig);
    for (std::size_t i = 0;
         i < m.vertex.strong_edges.size() && i < m.vertex.strong_certs.size();
         ++i)
        absorb_cert(m.vertex.strong_edges[i], m.vertex.strong_certs[i]);
    maybe_cert(m.vertex.id());
    try_admit();
    try_form();
}

bool PullPeer::store_record(const Vertex& v, const Signature& sig) {
    VertexId vid = v.id();
    auto it = records_.find(vid);
    if (it != records_.end()) {
        if (!(it->second.vertex.digest() == v.digest()))
            alarm("equivocation observed for (" + std::to_string(v.source) +
                  "," + std::to_string(v.round) + ")");
        return false;
    }
    records_.emplace(vid, RecordEntry{v, sig});
    if (!dag_.contains(vid)) unadmitted_.insert(vid);
    return true;
}

bool PullPeer::admissible(const RecordEntry& rec,
                          std::vector<VertexId>& missing) {
    const Vertex& v = rec.vertex;
    auto check_edges = [&](const std::vector<EdgeRef>& edges,
                           const std::vector<QuorumCert>& cs,
                           const char* kind) {
        if (edges.size() != cs.size()) {
            alarm(std::string(kind) + " edge certificates missing");
            rejected_.insert(v.id());
            return false;
        }
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& e = edges[i];
            const Vertex* p = dag_.get(e.id());
            if (!p) {
                missing.push_back(e.id());
                continue;
            }
            if (e.round >= 1) {
                if (!(p->digest() == e.digest)) {
                    alarm(std::string(kind) + " edge digest mismatch");
                    rejected_.insert(v.id());
                    return false;
                }
                if (!certs_.count(e.id()) &&
                    !verify_cert(cs[i],
                                 vote_payload(e.digest, e.source, e.round),
                                 nw_pub_, cfg_.quorum())) {
                    alarm(std::string(kind) + " edge certificate invalid");
                    rejected_.insert(v.id());
                    return false;
                }
            }
        }
        return true;
    };
    if (!check_edges(v.strong_edges, v.strong_certs, "strong")) return false;
    if (!check_edges(v.weak_edges, v.weak_certs, "weak")) return false;
    return missing.empty();
}

void PullPeer::try_admit() {
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
                for (VertexId m : missing)
                    if (pull_certs_.count(m)) start_pull(m);
                ++it;
            }
        }
    }
}

void PullPeer::admit(const Vertex& v) {
    if (!dag_.insert(v)) {
        alarm("containment violation on admission");
        return;
    }
    sim_.metrics().record_admission(v.id(), id_, sim_.now());
    pulling_.erase(v.id());
    ordering_.on_admitted(*dag_.get(v.id()));
}

void PullPeer::start_pull(VertexId missing) {
    if (dag_.contains(missing) || records_.count(missing) ||
        pulling_.count(missing))
        return;
    pulling_.insert(missing);
    pull_tick(missing);
}

void PullPeer::pull_tick(VertexId missing) {
    if (!pulling_.count(missing) || records_.count(missing) ||
        dag_.contains(missing)) {
        pulling_.erase(missing);
        return;
    }
    auto cert_it = pull_certs_.find(missing);
    if (cert_it == pull_certs_.end()) return;
    PullRequestMsg req{missing.source, missing.round, cert_it->second.first,
                       cert_it->second.second};
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

void PullPeer::try_form() {
    const SimTime now = sim_.now();
    if (now + 1e-12 < cfg_.start_time || now > cfg_.duration) return;
    if (sim_.is_byzantine(id_) && now >= cfg_.adversary.stop_dispersing_at)
        return;

    const Round r = last_round_;
    std::size_t certified = 0;
    for (VertexId id : dag_.round_vertices(r))
        if (r == 0 || certs_.count(id)) ++certified;
    if (certified < cfg_.quorum()) return;
    if (cfg_.leader_gating && r >= 1 && wait_ &&
        !ordering_.wave_condition(r, n_, f_))
        return;

    disperse(r + 1);
}

void PullPeer::disperse(Round target) {
    const Round r = target - 1;
    Vertex v;
    v.round = target;
    v.source = id_;
    v.block.resize(cfg_.block_size);
    for (auto& b : v.block)
        b = static_cast<std::uint8_t>(sim_.rng()());

    // strong edges to every certified round-r vertex, certificate attached
    for (VertexId id : dag_.round_vertices(r)) {
        if (r >= 1 && !certs_.count(id)) continue;
        v.strong_edges.push_back({id.source, id.round, dag_.get(id)->digest()});
        v.strong_certs.push_back(r >= 1 ? certs_.at(id) : QuorumCert{});
    }

    if (target >= 3) {
        for (Round rr = target - 2; rr >= 1; --rr) {
            for (VertexId id : dag_.round_vertices(rr)) {
                if (!certs_.count(id)) continue;
                bool covered = false;
                for (const auto& e : v.strong_edges)
                    if (dag_.path(e.id(), id)) {
                        covered = true;
                        break;
                    }
                for (std::size_t i = 0;
                     !covered && i < v.weak_edges.size(); ++i)
                    if (dag_.path(v.weak_edges[i].id(), id)) covered = true;
                if (covered) continue;
                v.weak_edges.push_back({id.source, id.round,
                                        dag_.get(id)->digest()});
                v.weak_certs.push_back(certs_.at(id));
            }
            if (rr == 1) break;
        }
    }

    Bytes vser = v.serialize();
    Signature sig = nw_key_.sign(vser, id_);

    VertexId vid = v.id();
    sim_.metrics().record_dispersal(vid, sim_.now(), sim_.is_byzantine(id_));
    store_record(v, sig);
    unadmitted_.erase(vid);
    admit(v);

    sim_.multicast(id_, Envelope{id_, PullVertexMsg{std::move(v), sig}});

    last_round_ = target;
    wait_ = true;
    if (cfg_.leader_gating)
        sim_.schedule_peer(id_, cfg_.wave_timeout_factor * cfg_.delta_bound,
                           [this, target]() {
                               if (last_round_ == target && wait_) {
                                   wait_ = false;
                                   try_form();
                               }
                           });
}

std::vector<StoredVertex> PullPeer::stored_vertices() const {
    std::vector<StoredVertex> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_)
        out.push_back({nw_pub_.at(id.source), id, rec.vertex.digest()});
    return out;
}

}  // namespace rorqual
