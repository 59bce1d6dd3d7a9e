#include "rorqual/bullshark.hpp"

#include <algorithm>

namespace rorqual {

namespace {
inline std::uint32_t wave_of(Round r) { return (r + 3) / 4; }
}  // namespace

Ordering::Ordering(const DagStore& dag, std::uint16_t n, std::uint16_t f,
                   std::uint64_t coin_seed)
    : dag_(dag), n_(n), f_(f), coin_seed_(coin_seed) {}

PeerId Ordering::first_steady_leader(std::uint32_t w) const {
    return static_cast<PeerId>((2 * (w - 1)) % n_);
}

PeerId Ordering::second_steady_leader(std::uint32_t w) const {
    return static_cast<PeerId>((2 * (w - 1) + 1) % n_);
}

PeerId Ordering::fallback_leader(std::uint32_t w) const {
    // perfect shared coin stand-in: all peers hash the same seed and wave
    ByteWriter wtr;
    wtr.str("fallback-coin");
    wtr.u64(coin_seed_);
    wtr.u32(w);
    Digest d = digest(wtr.data());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[i];
    return static_cast<PeerId>(v % n_);
}

bool Ordering::in_steady_voters(std::uint32_t w, PeerId p) const {
    if (w == 1) return true;  // steadyVoters[1] = everyone
    auto it = steady_voters_.find(w);
    return it != steady_voters_.end() && it->second.count(p) > 0;
}

const Vertex* Ordering::get_vertex(PeerId p, Round r) const {
    return dag_.get({p, r});
}

const Vertex* Ordering::first_steady_vertex(std::uint32_t w) const {
    return get_vertex(first_steady_leader(w), 4 * w - 3);
}

const Vertex* Ordering::second_steady_vertex(std::uint32_t w) const {
    return get_vertex(second_steady_leader(w), 4 * w - 1);
}

const Vertex* Ordering::fallback_vertex(std::uint32_t w) const {
    return get_vertex(fallback_leader(w), 4 * w - 3);
}

void Ordering::on_admitted(const Vertex& v) {
    if (v.round == 0) return;
    std::uint32_t w = wave_of(v.round);
    std::vector<const Vertex*> votes;
    votes.reserve(v.strong_edges.size());
    for (const auto& e : v.strong_edges)
        if (const Vertex* p = dag_.get(e.id())) votes.push_back(p);

    if (v.round % 4 == 1) {
        if (w >= 2) determine_peer_vote_type(v.source, votes, w);
    } else if (v.round % 4 == 3) {
        try_steady_commit(votes, first_steady_vertex(w), w);
    }
}

void Ordering::determine_peer_vote_type(
    PeerId p, const std::vector<const Vertex*>& votes, std::uint32_t w) {
    bool steady = try_steady_commit(votes, second_steady_vertex(w - 1), w - 1) ||
                  try_fallback_commit(votes, fallback_vertex(w - 1), w - 1);
    if (steady)
        steady_voters_[w].insert(p);
    else
        fallback_voters_[w].insert(p);
}

bool Ordering::try_steady_commit(const std::vector<const Vertex*>& votes,
                                 const Vertex* leader, std::uint32_t w) {
    if (!leader) return false;
    std::size_t count = 0;
    for (const Vertex* v : votes)
        if (in_steady_voters(w, v->source) &&
            dag_.strong_path(v->id(), leader->id()))
            ++count;
    if (count < static_cast<std::size_t>(2 * f_ + 1)) return false;
    if (leader->round > committed_round_) commit_leader(*leader);
    return true;
}

bool Ordering::try_fallback_commit(const std::vector<const Vertex*>& votes,
                                   const Vertex* leader, std::uint32_t w) {
    if (!leader) return false;
    const auto& fb = fallback_voters_[w];
    std::size_t count = 0;
    for (const Vertex* v : votes)
        if (fb.count(v->source) && dag_.strong_path(v->id(), leader->id()))
            ++count;
    if (count < static_cast<std::size_t>(2 * f_ + 1)) return false;
    if (leader->round > committed_round_) commit_leader(*leader);
    return true;
}

void Ordering::commit_leader(const Vertex& leader) {
    std::vector<const Vertex*> stack;
    stack.push_back(&leader);
    const Vertex* cur = &leader;

    for (long r = static_cast<long>(leader.round) - 2;
         r > static_cast<long>(committed_round_); r -= 2) {
        const auto rr = static_cast<Round>(r);
        std::uint32_t w = wave_of(rr);

        std::vector<const Vertex*> ss_potential;
        for (VertexId id : dag_.round_vertices(rr + 1))
            if (dag_.strong_path(cur->id(), id))
                ss_potential.push_back(dag_.get(id));

        const Vertex* vs = nullptr;
        const Vertex* vf = nullptr;
        std::size_t ss = 0, fb = 0;
        if (rr % 4 == 1) {  // two potential leaders in this round
            vs = first_steady_vertex(w);
            vf = fallback_vertex(w);
            for (const Vertex* v : ss_potential)
                if (vs && in_steady_voters(w, v->source) &&
                    dag_.strong_path(v->id(), vs->id()))
                    ++ss;
            if (cur->round != rr + 2) {
                const auto& fbset = fallback_voters_[w];
                for (VertexId id : dag_.round_vertices(rr + 3)) {
                    if (!dag_.strong_path(cur->id(), id)) continue;
                    const Vertex* v = dag_.get(id);
                    if (vf && fbset.count(v->source) &&
                        dag_.strong_path(v->id(), vf->id()))
                        ++fb;
                }
            }
        } else {  // rr % 4 == 3
            vs = second_steady_vertex(w);
            for (const Vertex* v : ss_potential)
                if (vs && in_steady_voters(w, v->source) &&
                    dag_.strong_path(v->id(), vs->id()))
                    ++ss;
        }

        if (ss >= static_cast<std::size_t>(f_ + 1) &&
            fb < static_cast<std::size_t>(f_ + 1)) {
            stack.push_back(vs);
            cur = vs;
        } else if (ss < static_cast<std::size_t>(f_ + 1) &&
                   fb >= static_cast<std::size_t>(f_ + 1)) {
            stack.push_back(vf);
            cur = vf;
        }
    }

    committed_round_ = cur->round;
    order_vertices(stack);
}

void Ordering::order_vertices(std::vector<const Vertex*>& stack) {
    while (!stack.empty()) {
        const Vertex* leader = stack.back();
        stack.pop_back();
        ++committed_leaders_;
        // deliver the leader's uncovered causal history, (round, source) order
        for (Round r = 1; r <= leader->round; ++r) {
            std::vector<VertexId> ids = dag_.round_vertices(r);
            std::sort(ids.begin(), ids.end());
            for (VertexId id : ids) {
                if (delivered_.count(id)) continue;
                if (!dag_.path(leader->id(), id)) continue;
                delivered_.insert(id);
                const Vertex* v = dag_.get(id);
                deliveries_.push_back({deliveries_.size(), v->round, v->source,
                                       digest(v->block)});
            }
        }
    }
}

bool Ordering::wave_condition(Round r, std::uint16_t n,
                              std::uint16_t f) const {
    auto quorum_behind = [&](const Vertex* leader, std::uint32_t w) {
        if (!leader) return false;
        std::size_t count = 0;
        for (VertexId id : dag_.round_vertices(r)) {
            const Vertex* u = dag_.get(id);
            if (in_steady_voters(w, u->source) &&
                dag_.strong_path(u->id(), leader->id()))
                ++count;
        }
        return count >= static_cast<std::size_t>(n - f);
    };
    switch (r % 4) {
        case 1:
            return first_steady_vertex(wave_of(r)) != nullptr;
        case 3:
            return second_steady_vertex(wave_of(r)) != nullptr;
        case 2: {
            std::uint32_t w = wave_of(r);
            return quorum_behind(first_steady_vertex(w), w);
        }
        default: {  // r % 4 == 0
            std::uint32_t w = r / 4;
            return quorum_behind(second_steady_vertex(w), w);
        }
    }
}

}  // namespace rorqual
