#include "rorqual/messages.hpp"

namespace rorqual {

Bytes share_sign_payload(const Bytes& data, PeerId owner, PeerId source,
                         Round round) {
    ByteWriter w;
    w.str("share");
    w.bytes(data);
    w.u16(owner);
    w.u16(source);
    w.u32(round);
    return w.take();
}

Bytes share_attest_payload(const Digest& d, PeerId source, Round round) {
    ByteWriter w;
    w.str("share-attest");
    w.fixed(d.bytes);
    w.u16(source);
    w.u32(round);
    return w.take();
}

Bytes key_announce_payload(PeerId subject, const PublicKey& pub) {
    ByteWriter w;
    w.str("key");
    w.u16(subject);
    pub.serialize(w);
    return w.take();
}

Bytes vote_payload(const Digest& d, PeerId owner, Round round) {
    ByteWriter w;
    w.str("vote");
    w.fixed(d.bytes);
    w.u16(owner);
    w.u32(round);
    return w.take();
}

Bytes timeout_payload(PeerId target, Round round) {
    ByteWriter w;
    w.str("timeout");
    w.u16(target);
    w.u32(round);
    return w.take();
}

namespace {

struct Serializer {
    ByteWriter& w;

    void operator()(const KeyMsg& m) {
        w.u16(m.owner);
        m.pub.serialize(w);
    }
    void operator()(const EchoMsg& m) {
        w.u16(m.subject);
        m.pub.serialize(w);
        m.nw_sig.serialize(w);
    }
    void operator()(const KeyRequestMsg& m) { w.u16(m.subject); }
    void operator()(const KeyReplyMsg& m) {
        w.u16(m.subject);
        m.pub.serialize(w);
        m.cert.serialize(w);
    }
    void operator()(const VertexMsg& m) {
        w.fixed(m.vertex.serialize());
        w.u16(m.share_index);
        w.bytes(m.share_data);
        m.sig_v.serialize(w);
        m.sig_share.serialize(w);
    }
    void operator()(const ShareMsg& m) {
        w.u16(m.source);
        w.u32(m.round);
        w.fixed(m.vertex_digest.bytes);
        w.u16(m.index);
        w.bytes(m.data);
        m.sw_sig.serialize(w);
        m.nw_sig.serialize(w);
    }
    void operator()(const AckMsg& m) {
        w.u16(m.source);
        w.u32(m.round);
        m.share_sig.serialize(w);
    }
    void operator()(const RequestMsg& m) {
        w.u16(m.source);
        w.u32(m.round);
    }
    void operator()(const RelayMsg& m) {
        w.fixed(m.vertex.serialize());
        m.sig_v.serialize(w);
    }
    void operator()(const TimeoutMsg& m) {
        w.u16(m.target);
        w.u32(m.round);
        m.nw_sig.serialize(w);
    }
    void operator()(const PullVertexMsg& m) {
        w.fixed(m.vertex.serialize());
        m.sig.serialize(w);
    }
    void operator()(const PullVoteMsg& m) {
        w.u16(m.owner);
        w.u32(m.round);
        w.fixed(m.vertex_digest.bytes);
        m.sig.serialize(w);
    }
    void operator()(const PullRequestMsg& m) {
        w.u16(m.owner);
        w.u32(m.round);
        w.fixed(m.vertex_digest.bytes);
        m.cert.serialize(w);
    }
    void operator()(const PullRelayMsg& m) {
        w.fixed(m.vertex.serialize());
        m.sig.serialize(w);
    }
};

}  // namespace

Bytes Envelope::serialize() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(payload.index()));
    w.u16(sender);
    std::visit(Serializer{w}, payload);
    return w.take();
}

const char* Envelope::type_name() const {
    static constexpr const char* names[] = {
        "Key",     "Echo",       "KeyRequest", "KeyReply",   "Vertex",
        "Share",   "Ack",        "Request",    "Relay",      "Timeout",
        "PullVertex", "PullVote", "PullRequest", "PullRelay"};
    return names[payload.index()];
}

std::optional<VertexId> Envelope::attribution() const {
    return std::visit(
        [](const auto& m) -> std::optional<VertexId> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, VertexMsg> ||
                          std::is_same_v<T, RelayMsg> ||
                          std::is_same_v<T, PullVertexMsg> ||
                          std::is_same_v<T, PullRelayMsg>)
                return m.vertex.id();
            else if constexpr (std::is_same_v<T, ShareMsg> ||
                               std::is_same_v<T, AckMsg> ||
                               std::is_same_v<T, RequestMsg>)
                return VertexId{m.source, m.round};
            else if constexpr (std::is_same_v<T, PullVoteMsg> ||
                               std::is_same_v<T, PullRequestMsg>)
                return VertexId{m.owner, m.round};
            else if constexpr (std::is_same_v<T, TimeoutMsg>)
                return VertexId{m.target, m.round};
            else
                return std::nullopt;
        },
        payload);
}

}  // namespace rorqual
