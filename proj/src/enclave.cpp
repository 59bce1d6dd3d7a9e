#include "rorqual/enclave.hpp"

#include <algorithm>

namespace rorqual {

Enclave::Enclave(PeerId id, Entropy entropy, SigScheme scheme)
    : id_(id),
      scheme_(scheme),
      sk_(KeyPair::generate(entropy, KeyDomain::SecureWorld, scheme)) {}

KeyMsg Enclave::announcement() const { return {id_, sk_.public_key()}; }

bool Enclave::window_open(Round r) const { return windows_.count(r) > 0; }

std::uint16_t Enclave::ack_threshold(std::uint16_t n, std::uint16_t f) const {
    // self-acks are not counted (a compromised NW acking its own enclave
    // proves nothing); without the cap an f=0 system could never close
    return std::min<std::uint16_t>(n - f, n - 1);
}

std::optional<std::vector<std::pair<PeerId, VertexMsg>>> Enclave::disperse(
    Vertex v, Round r, std::uint16_t n, std::uint16_t f, SimTime now,
    double delta_cap) {
    if (round_ >= r) return std::nullopt;  // Asynchronous Exit
    // sweep windows whose deadline has already passed so the stamped delay
    // reflects every expiry due by dispersal time; the scheduled expiry
    // callback only fires shortly after the deadline, and a stale stamp
    // would let a withholding peer keep re-entering the parent selection
    round_ = r;
    for (auto it = windows_.begin(); it != windows_.end();) {
        Round due = (it++)->first;
        timer_expire(due, now, n, f);
    }
    v.delay = delay_;

    VertexMsg base;
    base.vertex = std::move(v);
    Bytes vser = base.vertex.serialize();
    base.sig_v = sk_.sign(vser, id_);
    signed_[r] = digest(vser);

    // encode (vertex, sigma_v) so a reconstruction is relayable
    ByteWriter enc;
    enc.bytes(vser);
    base.sig_v.serialize(enc);
    auto shares = rs_encode(enc.data(), n, static_cast<std::size_t>(n - 2 * f));

    AckWindow& win = windows_[r];
    win.deadline = now + 2.0 * delta_cap;

    std::vector<std::pair<PeerId, VertexMsg>> out;
    out.reserve(n);
    for (PeerId j = 0; j < n; ++j) {
        VertexMsg m = base;
        m.share_index = shares[j].index;
        m.share_data = shares[j].data;
        m.sig_share =
            sk_.sign(share_sign_payload(m.share_data, j, id_, r), id_);
        win.issued[j] = m.sig_share;
        out.emplace_back(j, std::move(m));
    }
    return out;
}

void Enclave::on_ack(PeerId from, const AckMsg& ack, std::uint16_t n,
                     std::uint16_t f) {
    auto it = windows_.find(ack.round);
    if (it == windows_.end() || from == id_) return;
    auto sig = it->second.issued.find(from);
    if (sig == it->second.issued.end() || !(sig->second == ack.share_sig))
        return;
    it->second.acks.insert(from);
    if (it->second.acks.size() >= ack_threshold(n, f))
        windows_.erase(it);  // quorum: window closes, no delay mark
}

bool Enclave::timer_expire(Round r, SimTime now, std::uint16_t n,
                           std::uint16_t f) {
    auto it = windows_.find(r);
    if (it == windows_.end() || now < it->second.deadline) return false;
    bool short_of_quorum = it->second.acks.size() < ack_threshold(n, f);
    windows_.erase(it);
    if (short_of_quorum) {
        delay_ = std::max(delay_, round_);  // "delay <- round": current round
        return true;
    }
    return false;
}

RequestMsg Enclave::request_missing(PeerId source, Round r) const {
    return {source, r};
}

void Enclave::restart(Entropy entropy) {
    sk_ = KeyPair::generate(entropy, KeyDomain::SecureWorld, scheme_);
    round_ = 0;
    delay_ = 0;
    ++instance_;
    windows_.clear();
    signed_.clear();
}

}  // namespace rorqual
