#include "rorqual/vertex.hpp"

namespace rorqual {

void EdgeRef::serialize(ByteWriter& w) const {
    w.u16(source);
    w.u32(round);
    w.fixed(digest.bytes);
}

EdgeRef EdgeRef::deserialize(ByteReader& r) {
    EdgeRef e;
    e.source = r.u16();
    e.round = r.u32();
    auto s = r.fixed(32);
    std::copy(s.begin(), s.end(), e.digest.bytes.begin());
    return e;
}

Bytes Vertex::serialize() const {
    ByteWriter w;
    w.u32(round);
    w.u16(source);
    w.bytes(block);
    w.u32(static_cast<std::uint32_t>(strong_edges.size()));
    for (const auto& e : strong_edges) e.serialize(w);
    w.u32(static_cast<std::uint32_t>(strong_certs.size()));
    for (const auto& c : strong_certs) c.serialize(w);
    w.u32(static_cast<std::uint32_t>(weak_edges.size()));
    for (const auto& e : weak_edges) e.serialize(w);
    w.u32(static_cast<std::uint32_t>(weak_certs.size()));
    for (const auto& c : weak_certs) c.serialize(w);
    w.u32(delay);
    w.u32(static_cast<std::uint32_t>(latency_scores.size()));
    for (auto s : latency_scores) w.u32(s);
    return w.take();
}

Vertex Vertex::deserialize(ByteReader& r) {
    Vertex v;
    v.round = r.u32();
    v.source = r.u16();
    v.block = r.bytes();
    auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i)
        v.strong_edges.push_back(EdgeRef::deserialize(r));
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i)
        v.strong_certs.push_back(QuorumCert::deserialize(r));
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i)
        v.weak_edges.push_back(EdgeRef::deserialize(r));
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i)
        v.weak_certs.push_back(QuorumCert::deserialize(r));
    v.delay = r.u32();
    n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) v.latency_scores.push_back(r.u32());
    return v;
}

Digest Vertex::digest() const { return rorqual::digest(serialize()); }

Vertex genesis_vertex(PeerId source) {
    Vertex v;
    v.round = 0;
    v.source = source;
    v.block = {'g', 'e', 'n', 'e', 's', 'i', 's'};
    return v;
}

}  // namespace rorqual
