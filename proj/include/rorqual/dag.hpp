#pragma once

#include <map>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "rorqual/vertex.hpp"

namespace rorqual {

// Local DAG store shared by both broadcast backends. Containment is enforced
// on every insertion: a vertex is only admitted once every referenced parent
// is already stored. Path queries run on per-vertex ancestor bitsets.
class DagStore {
  public:
    explicit DagStore(std::uint16_t n);

    bool contains(VertexId id) const { return nodes_.count(key(id)) > 0; }
    const Vertex* get(VertexId id) const;

    // All parents must already be stored; returns false (and counts a
    // containment violation) otherwise. Idempotent for an already-stored id.
    bool insert(const Vertex& v);

    // reachability including the trivial one-vertex path
    bool path(VertexId from, VertexId to) const;
    bool strong_path(VertexId from, VertexId to) const;

    // strict causal history (everything happens-before v)
    std::vector<VertexId> read_causal(VertexId id) const;

    // admission order within the round
    const std::vector<VertexId>& round_vertices(Round r) const;
    std::size_t round_size(Round r) const { return round_vertices(r).size(); }

    Round max_round() const { return max_round_; }
    std::size_t size() const { return nodes_.size(); }

    // every stored vertex id with its digest, genesis excluded
    std::vector<std::pair<VertexId, Digest>> contents() const;

    std::uint64_t containment_violations() const { return violations_; }

    // one edge per line: child_source,child_round -> parent_source,parent_round,kind
    void export_edges(std::ostream& os) const;

  private:
    struct Node {
        Vertex v;
        std::vector<std::uint64_t> anc;         // all-edge ancestors
        std::vector<std::uint64_t> strong_anc;  // strong-edge ancestors
    };

    std::uint64_t key(VertexId id) const {
        return static_cast<std::uint64_t>(id.round) * n_ + id.source;
    }
    static bool bit(const std::vector<std::uint64_t>& set, std::uint64_t i) {
        return i / 64 < set.size() && (set[i / 64] >> (i % 64)) & 1;
    }
    static void set_bit(std::vector<std::uint64_t>& set, std::uint64_t i) {
        if (i / 64 >= set.size()) set.resize(i / 64 + 1, 0);
        (*(set.begin() + static_cast<std::ptrdiff_t>(i / 64))) |=
            std::uint64_t{1} << (i % 64);
    }
    static void merge(std::vector<std::uint64_t>& into,
                      const std::vector<std::uint64_t>& from);

    std::uint16_t n_;
    std::unordered_map<std::uint64_t, Node> nodes_;
    std::map<Round, std::vector<VertexId>> rounds_;
    Round max_round_ = 0;
    std::uint64_t violations_ = 0;
};

}  // namespace rorqual
