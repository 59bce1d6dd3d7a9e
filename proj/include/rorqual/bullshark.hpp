#pragma once

#include <map>
#include <set>
#include <vector>

#include "rorqual/dag.hpp"
#include "rorqual/metrics.hpp"

namespace rorqual {

// Bullshark ordering layer over a local DAG: wave bookkeeping,
// steady/fallback vote typing, the 2f+1 commit rules, leader-stack
// recursion, and a deterministic total order. Pure function of the DAG plus
// its own state; fed one vertex per admission.
class Ordering {
  public:
    Ordering(const DagStore& dag, std::uint16_t n, std::uint16_t f,
             std::uint64_t coin_seed);

    void on_admitted(const Vertex& v);

    const std::vector<DeliveryRecord>& deliveries() const {
        return deliveries_;
    }
    Round committed_round() const { return committed_round_; }
    std::uint64_t committed_leaders() const { return committed_leaders_; }

    // waves group 4 rounds; steady leaders are predefined and rotate, the
    // fallback leader is a shared-coin stand-in (seeded hash of the wave)
    PeerId first_steady_leader(std::uint32_t w) const;
    PeerId second_steady_leader(std::uint32_t w) const;
    PeerId fallback_leader(std::uint32_t w) const;

    bool in_steady_voters(std::uint32_t w, PeerId p) const;

    // round-advancement wave condition for leaving round r (leader gating)
    bool wave_condition(Round r, std::uint16_t n, std::uint16_t f) const;

  private:
    const Vertex* get_vertex(PeerId p, Round r) const;
    const Vertex* first_steady_vertex(std::uint32_t w) const;
    const Vertex* second_steady_vertex(std::uint32_t w) const;
    const Vertex* fallback_vertex(std::uint32_t w) const;

    void determine_peer_vote_type(PeerId p,
                                  const std::vector<const Vertex*>& votes,
                                  std::uint32_t w);
    bool try_steady_commit(const std::vector<const Vertex*>& votes,
                           const Vertex* leader, std::uint32_t w);
    bool try_fallback_commit(const std::vector<const Vertex*>& votes,
                             const Vertex* leader, std::uint32_t w);
    void commit_leader(const Vertex& leader);
    void order_vertices(std::vector<const Vertex*>& stack);

    const DagStore& dag_;
    std::uint16_t n_;
    std::uint16_t f_;
    std::uint64_t coin_seed_;

    std::map<std::uint32_t, std::set<PeerId>> steady_voters_;
    std::map<std::uint32_t, std::set<PeerId>> fallback_voters_;
    Round committed_round_ = 0;
    std::set<VertexId> delivered_;
    std::vector<DeliveryRecord> deliveries_;
    std::uint64_t committed_leaders_ = 0;
};

}  // namespace rorqual
