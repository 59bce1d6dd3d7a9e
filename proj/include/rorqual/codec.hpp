#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rorqual/bytes.hpp"

namespace rorqual {

using PeerId = std::uint16_t;
using Round = std::uint32_t;

// ---------------------------------------------------------------------------
// Digests

struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;
    std::string hex() const;
};

Digest digest(std::span<const std::uint8_t> payload);
Digest digest(const Bytes& payload);

// ---------------------------------------------------------------------------
// Keys and signatures

enum class KeyDomain : std::uint8_t { SecureWorld = 0, NormalWorld = 1 };
enum class SigScheme : std::uint8_t { KeyedMac = 0, Ed25519 = 1 };

struct PublicKey {
    std::array<std::uint8_t, 32> bytes{};
    KeyDomain domain = KeyDomain::NormalWorld;
    SigScheme scheme = SigScheme::KeyedMac;

    auto operator<=>(const PublicKey&) const = default;
    void serialize(ByteWriter& w) const;
    static PublicKey deserialize(ByteReader& r);
};

struct Signature {
    Bytes bytes;
    PeerId signer = 0;

    bool operator==(const Signature&) const = default;
    void serialize(ByteWriter& w) const;
    static Signature deserialize(ByteReader& r);
};

// Deterministic byte source for key generation. In simulation this is seeded
// per scenario; nothing in the protocol depends on the distribution.
class Entropy {
  public:
    explicit Entropy(std::uint64_t seed) : rng_(seed) {}
    explicit Entropy(std::mt19937_64& rng) : rng_(rng()) {}
    void fill(std::span<std::uint8_t> out);

  private:
    std::mt19937_64 rng_;
};

// Signing keypair. The secret never leaves this object: there is no accessor
// and no serialization for secret material.
class KeyPair {
  public:
    static KeyPair generate(Entropy& entropy, KeyDomain domain,
                            SigScheme scheme = SigScheme::KeyedMac);

    const PublicKey& public_key() const { return pub_; }
    Signature sign(std::span<const std::uint8_t> msg, PeerId signer) const;
    Signature sign(const Bytes& msg, PeerId signer) const {
        return sign(std::span<const std::uint8_t>(msg), signer);
    }

  private:
    KeyPair() = default;
    std::array<std::uint8_t, 32> secret_{};
    PublicKey pub_;
};

// Verification never throws on malformed signature bytes; it returns false.
bool verify(std::span<const std::uint8_t> msg, const Signature& sig,
            const PublicKey& pub);
bool verify(const Bytes& msg, const Signature& sig, const PublicKey& pub);

// ---------------------------------------------------------------------------
// Reed-Solomon erasure coding over GF(256), systematic: the first k shares
// are the payload chunks, shares k..n-1 are parity. Payload length is
// prefixed before chunking so decode can strip padding.

struct RsShareData {
    std::uint16_t index = 0;  // share position in [0, n)
    Bytes data;

    bool operator==(const RsShareData&) const = default;
};

struct RsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RsParamError : RsError {
    using RsError::RsError;
};
struct RsInsufficientShares : RsError {
    using RsError::RsError;
};
// Provided shares are not all from one codeword. Detected by re-encoding the
// reconstruction and comparing against every share handed in.
struct RsIntegrityError : RsError {
    using RsError::RsError;
};

std::vector<RsShareData> rs_encode(std::span<const std::uint8_t> payload,
                                   std::size_t n, std::size_t k);
Bytes rs_decode(std::span<const RsShareData> shares, std::size_t n,
                std::size_t k);

// ---------------------------------------------------------------------------
// Quorum certificates: a set of distinct-signer signatures over one message.

struct QuorumCert {
    Digest subject;
    std::uint32_t threshold = 0;
    std::vector<Signature> signatures;  // distinct signers

    void serialize(ByteWriter& w) const;
    static QuorumCert deserialize(ByteReader& r);
};

struct CertError : std::runtime_error {
    PeerId offender;
    CertError(const std::string& what, PeerId who)
        : std::runtime_error(what), offender(who) {}
};

// Builds a certificate after checking every signature over `msg` against the
// signer's key from `keys`. Throws CertError naming the offending signer on
// a bad signature, or with offender == n on a missing key / short quorum.
QuorumCert assemble_cert(const std::vector<Signature>& sigs, const Bytes& msg,
                         const std::map<PeerId, PublicKey>& keys,
                         std::uint32_t threshold);

// Re-checks an already-assembled certificate (e.g. one received on the wire).
bool verify_cert(const QuorumCert& cert, const Bytes& msg,
                 const std::map<PeerId, PublicKey>& keys,
                 std::uint32_t threshold);

}  // namespace rorqual
