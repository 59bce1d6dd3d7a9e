#pragma once

#include <variant>

#include "rorqual/vertex.hpp"

namespace rorqual {

// ---------------------------------------------------------------------------
// Canonical signing payloads. Every signature in the protocol is over one of
// these byte strings.

// sigma_v: the enclave vertex signature covers the full vertex serialization
// (round, source, delay included).
inline Bytes vertex_sign_payload(const Vertex& v) { return v.serialize(); }

// sigma_j: enclave share signature over (data, index owner, source, round)
Bytes share_sign_payload(const Bytes& data, PeerId owner, PeerId source,
                         Round round);

// NW attestation a share relayer adds; n-f of these form a share cert
Bytes share_attest_payload(const Digest& d, PeerId source, Round round);

// NW echo over a key announcement
Bytes key_announce_payload(PeerId subject, const PublicKey& pub);

// pull-baseline vote
Bytes vote_payload(const Digest& d, PeerId owner, Round round);

Bytes timeout_payload(PeerId target, Round round);

// ---------------------------------------------------------------------------
// Wire messages

struct KeyMsg {
    PeerId owner = 0;
    PublicKey pub;
};

struct EchoMsg {
    PeerId subject = 0;
    PublicKey pub;
    Signature nw_sig;
};

// invented plumbing: fetch a peer's accepted SW key together with its echo
// quorum ("Pull PUB_K[j] before continuing")
struct KeyRequestMsg {
    PeerId subject = 0;
};

struct KeyReplyMsg {
    PeerId subject = 0;
    PublicKey pub;
    QuorumCert cert;
};

struct VertexMsg {
    Vertex vertex;
    std::uint16_t share_index = 0;  // index of the share addressed to the receiver
    Bytes share_data;
    Signature sig_v;      // SW, over vertex_sign_payload
    Signature sig_share;  // SW, over share_sign_payload
};

struct ShareMsg {
    PeerId source = 0;
    Round round = 0;
    Digest vertex_digest;
    std::uint16_t index = 0;  // == relayer's peer id
    Bytes data;
    Signature sw_sig;  // enclave signature issued with the original dispersal
    Signature nw_sig;  // relayer attestation over share_attest_payload
};

struct AckMsg {
    PeerId source = 0;
    Round round = 0;
    Signature share_sig;  // echoes sigma_i, proves the ack matches this dispersal
};

struct RequestMsg {
    PeerId source = 0;
    Round round = 0;
};

struct RelayMsg {
    Vertex vertex;
    Signature sig_v;  // original SW signature
};

struct TimeoutMsg {
    PeerId target = 0;
    Round round = 0;
    Signature nw_sig;
};

// pull baseline
struct PullVertexMsg {
    Vertex vertex;  // carries strong_certs
    Signature sig;
};

struct PullVoteMsg {
    PeerId owner = 0;
    Round round = 0;
    Digest vertex_digest;
    Signature sig;
};

struct PullRequestMsg {
    PeerId owner = 0;
    Round round = 0;
    Digest vertex_digest;
    QuorumCert cert;
};

struct PullRelayMsg {
    Vertex vertex;
    Signature sig;
};

using Payload =
    std::variant<KeyMsg, EchoMsg, KeyRequestMsg, KeyReplyMsg, VertexMsg,
                 ShareMsg, AckMsg, RequestMsg, RelayMsg, TimeoutMsg,
                 PullVertexMsg, PullVoteMsg, PullRequestMsg, PullRelayMsg>;

struct Envelope {
    PeerId sender = 0;
    Payload payload;

    Bytes serialize() const;
    std::size_t wire_size() const { return serialize().size(); }
    const char* type_name() const;

    // (source, round) of the vertex this message belongs to, for byte
    // accounting; setup traffic has none
    std::optional<VertexId> attribution() const;
};

}  // namespace rorqual
