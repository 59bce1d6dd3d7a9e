#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "rorqual/messages.hpp"

namespace rorqual {

using SimTime = double;

// Simulated Secure World of one peer. Holds the enclave signing key and the
// monotonic round/delay counters, gates dispersal, and runs the 2*Delta ack
// timer. Rounds may outpace the ack window, so each dispersal keeps its own
// window open until the ack quorum arrives or the deadline passes. Volatile
// only: a restart discards everything and generates fresh keys (the
// replay-attack model).
class Enclave {
  public:
    Enclave(PeerId id, Entropy entropy, SigScheme scheme = SigScheme::KeyedMac);

    KeyMsg announcement() const;  // carries the public key only
    const PublicKey& public_key() const { return sk_.public_key(); }

    Round round() const { return round_; }
    Round delay() const { return delay_; }
    std::uint32_t instance() const { return instance_; }
    bool window_open(Round r) const;

    // Returns one VertexMsg per peer, or nullopt on the monotonic-round
    // guard (Asynchronous Exit). Stamps the vertex with the current delay,
    // arms a 2*Delta ack window, and remembers the issued share signatures
    // so acks can be matched.
    std::optional<std::vector<std::pair<PeerId, VertexMsg>>> disperse(
        Vertex v, Round r, std::uint16_t n, std::uint16_t f, SimTime now,
        double delta_cap);

    // Self-acks, acks for unknown windows, and acks whose echoed share
    // signature does not match the issued one are ignored. Idempotent.
    void on_ack(PeerId from, const AckMsg& ack, std::uint16_t n,
                std::uint16_t f);

    // Called at (or after) the deadline armed for round r; if fewer than
    // n-f acks arrived, marks the *current* round as delayed. Returns
    // whether delay changed.
    bool timer_expire(Round r, SimTime now, std::uint16_t n, std::uint16_t f);

    // The pull loop for missing vertices lives in the secure world even
    // though nothing secret is involved; the placement keeps the request
    // format under enclave control.
    RequestMsg request_missing(PeerId source, Round r) const;

    // Adversary-only: kills this instance, fresh keys and counters.
    void restart(Entropy entropy);

    // debug-build equivocation audit: digests signed per round this instance
    const std::map<Round, Digest>& signed_digests() const { return signed_; }

  private:
    struct AckWindow {
        SimTime deadline = 0.0;
        std::set<PeerId> acks;
        std::map<PeerId, Signature> issued;
    };

    PeerId id_;
    SigScheme scheme_;
    KeyPair sk_;
    Round round_ = 0;
    Round delay_ = 0;
    std::uint32_t instance_ = 0;
    std::map<Round, AckWindow> windows_;  // open ack windows by round
    std::map<Round, Digest> signed_;

    std::uint16_t ack_threshold(std::uint16_t n, std::uint16_t f) const;
};

}  // namespace rorqual
