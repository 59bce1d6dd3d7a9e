#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "rorqual/codec.hpp"

namespace rorqual {

struct VertexId {
    PeerId source = 0;
    Round round = 0;

    auto operator<=>(const VertexId&) const = default;
};

struct EdgeRef {
    PeerId source = 0;
    Round round = 0;
    Digest digest;

    VertexId id() const { return {source, round}; }
    bool operator==(const EdgeRef&) const = default;
    void serialize(ByteWriter& w) const;
    static EdgeRef deserialize(ByteReader& r);
};

// A DAG node. Strong edges point one round back; weak edges reach further
// down to vertices not yet covered by the causal history. Each weak edge
// carries a share quorum certificate; in the pull baseline strong edges carry
// availability certificates instead (strong_certs).
struct Vertex {
    Round round = 0;
    PeerId source = 0;
    Bytes block;
    std::vector<EdgeRef> strong_edges;
    std::vector<QuorumCert> strong_certs;  // pull backend, parallel to strong_edges
    std::vector<EdgeRef> weak_edges;
    std::vector<QuorumCert> weak_certs;    // parallel to weak_edges
    Round delay = 0;                       // stamped by the source enclave
    std::vector<Round> latency_scores;     // carried, populated from LDR, unused by logic

    VertexId id() const { return {source, round}; }
    Bytes serialize() const;
    static Vertex deserialize(ByteReader& r);
    Digest digest() const;
};

// What a peer stores in V[source][round]: the vertex plus the original
// Secure-World signature so it can be relayed verifiably.
struct VertexRecord {
    Vertex vertex;
    Signature sw_sig;
    // SW public key the signature verified under; distinguishes enclave
    // instances after a restart.
    PublicKey sw_key;
};

// genesis placeholders for round 0
Vertex genesis_vertex(PeerId source);

}  // namespace rorqual
