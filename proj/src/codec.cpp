#include "rorqual/codec.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>

namespace rorqual {

// ---------------------------------------------------------------------------
// Digest

Digest digest(std::span<const std::uint8_t> payload) {
    Digest d;
    SHA256(payload.data(), payload.size(), d.bytes.data());
    return d;
}

Digest digest(const Bytes& payload) {
    return digest(std::span<const std::uint8_t>(payload));
}

std::string Digest::hex() const {
    std::string s;
    s.reserve(64);
    for (auto b : bytes) {
        char buf[3];
        std::snprintf(buf, sizeof(buf), "%02x", b);
        s += buf;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Keys

void PublicKey::serialize(ByteWriter& w) const {
    w.fixed(bytes);
    w.u8(static_cast<std::uint8_t>(domain));
    w.u8(static_cast<std::uint8_t>(scheme));
}

PublicKey PublicKey::deserialize(ByteReader& r) {
    PublicKey pk;
    auto s = r.fixed(32);
    std::copy(s.begin(), s.end(), pk.bytes.begin());
    pk.domain = static_cast<KeyDomain>(r.u8());
    pk.scheme = static_cast<SigScheme>(r.u8());
    return pk;
}

void Signature::serialize(ByteWriter& w) const {
    w.bytes(bytes);
    w.u16(signer);
}

Signature Signature::deserialize(ByteReader& r) {
    Signature s;
    s.bytes = r.bytes();
    s.signer = r.u16();
    return s;
}

void Entropy::fill(std::span<std::uint8_t> out) {
    for (auto& b : out) b = static_cast<std::uint8_t>(rng_());
}

namespace {

struct ArrayHash {
    std::size_t operator()(const std::array<std::uint8_t, 32>& a) const {
        std::size_t h;
        std::memcpy(&h, a.data(), sizeof(h));
        return h;
    }
};

// KeyedMac verification needs the secret for the claimed public key. The
// simulation runs in one process, so keygen registers pub -> secret here;
// protocol code only ever sees public keys, the map just closes the loop
// for verify(). The Ed25519 scheme does not use it.
class MacRegistry {
  public:
    static MacRegistry& instance() {
        static MacRegistry reg;
        return reg;
    }
    void put(const std::array<std::uint8_t, 32>& pub,
             const std::array<std::uint8_t, 32>& secret) {
        std::lock_guard lock(mu_);
        map_[pub] = secret;
    }
    std::optional<std::array<std::uint8_t, 32>> get(
        const std::array<std::uint8_t, 32>& pub) const {
        std::lock_guard lock(mu_);
        auto it = map_.find(pub);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

  private:
    mutable std::mutex mu_;
    std::unordered_map<std::array<std::uint8_t, 32>,
                       std::array<std::uint8_t, 32>, ArrayHash>
        map_;
};

Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg) {
    Bytes out(32);
    unsigned int len = 32;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(),
         msg.size(), out.data(), &len);
    out.resize(len);
    return out;
}

using EvpKeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;

EvpKeyPtr ed25519_private(const std::array<std::uint8_t, 32>& seed) {
    return {EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                         seed.data(), seed.size()),
            &EVP_PKEY_free};
}

EvpKeyPtr ed25519_public(const std::array<std::uint8_t, 32>& pub) {
    return {EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(),
                                        pub.size()),
            &EVP_PKEY_free};
}

}  // namespace

KeyPair KeyPair::generate(Entropy& entropy, KeyDomain domain,
                          SigScheme scheme) {
    KeyPair kp;
    entropy.fill(kp.secret_);
    kp.pub_.domain = domain;
    kp.pub_.scheme = scheme;
    switch (scheme) {
        case SigScheme::KeyedMac: {
            // public key = H("pub" || secret); registry maps it back for
            // verification
            ByteWriter w;
            w.str("rorqual-mac-pub");
            w.fixed(kp.secret_);
            kp.pub_.bytes = digest(w.data()).bytes;
            MacRegistry::instance().put(kp.pub_.bytes, kp.secret_);
            break;
        }
        case SigScheme::Ed25519: {
            auto pkey = ed25519_private(kp.secret_);
            std::size_t len = 32;
            EVP_PKEY_get_raw_public_key(pkey.get(), kp.pub_.bytes.data(),
                                        &len);
            assert(len == 32);
            break;
        }
    }
    return kp;
}

Signature KeyPair::sign(std::span<const std::uint8_t> msg,
                        PeerId signer) const {
    Signature sig;
    sig.signer = signer;
    switch (pub_.scheme) {
        case SigScheme::KeyedMac:
            sig.bytes = hmac_sha256(secret_, msg);
            break;
        case SigScheme::Ed25519: {
            auto pkey = ed25519_private(secret_);
            std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
                EVP_MD_CTX_new(), &EVP_MD_CTX_free);
            EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr,
                               pkey.get());
            sig.bytes.resize(64);
            std::size_t len = 64;
            EVP_DigestSign(ctx.get(), sig.bytes.data(), &len, msg.data(),
                           msg.size());
            sig.bytes.resize(len);
            break;
        }
    }
    return sig;
}

bool verify(std::span<const std::uint8_t> msg, const Signature& sig,
            const PublicKey& pub) {
    switch (pub.scheme) {
        case SigScheme::KeyedMac: {
            auto secret = MacRegistry::instance().get(pub.bytes);
            if (!secret) return false;
            return hmac_sha256(*secret, msg) == sig.bytes;
        }
        case SigScheme::Ed25519: {
            if (sig.bytes.size() != 64) return false;
            auto pkey = ed25519_public(pub.bytes);
            if (!pkey) return false;
            std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
                EVP_MD_CTX_new(), &EVP_MD_CTX_free);
            EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr,
                                 pkey.get());
            return EVP_DigestVerify(ctx.get(), sig.bytes.data(),
                                    sig.bytes.size(), msg.data(),
                                    msg.size()) == 1;
        }
    }
    return false;
}

bool verify(const Bytes& msg, const Signature& sig, const PublicKey& pub) {
    return verify(std::span<const std::uint8_t>(msg), sig, pub);
}

// ---------------------------------------------------------------------------
// GF(256) arithmetic, generator polynomial 0x11d

namespace {

struct Gf256 {
    std::array<std::uint8_t, 256> log{};
    std::array<std::uint8_t, 512> exp{};

    Gf256() {
        std::uint32_t x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[i] = static_cast<std::uint8_t>(x);
            log[x] = static_cast<std::uint8_t>(i);
            x <<= 1;
            if (x & 0x100) x ^= 0x11d;
        }
        for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    }

    std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp[log[a] + log[b]];
    }
    std::uint8_t div(std::uint8_t a, std::uint8_t b) const {
        assert(b != 0);
        if (a == 0) return 0;
        return exp[log[a] + 255 - log[b]];
    }
};

const Gf256& gf() {
    static Gf256 tables;
    return tables;
}

// Lagrange coefficients for evaluating the degree-<k polynomial through
// points (xs[i], .) at target x. Share i lives at field point x = i.
std::vector<std::uint8_t> lagrange_row(const std::vector<std::uint8_t>& xs,
                                       std::uint8_t x) {
    const auto& g = gf();
    std::vector<std::uint8_t> row(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::uint8_t num = 1, den = 1;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j == i) continue;
            num = g.mul(num, static_cast<std::uint8_t>(x ^ xs[j]));
            den = g.mul(den, static_cast<std::uint8_t>(xs[i] ^ xs[j]));
        }
        row[i] = g.div(num, den);
    }
    return row;
}

}  // namespace

std::vector<RsShareData> rs_encode(std::span<const std::uint8_t> payload,
                                   std::size_t n, std::size_t k) {
    if (k == 0 || k > n || n > 255)
        throw RsParamError("rs_encode: need 1 <= k <= n <= 255");
    if (payload.empty()) throw RsParamError("rs_encode: empty payload");

    ByteWriter w;
    w.bytes(payload);
    Bytes padded = w.take();
    const std::size_t chunk = (padded.size() + k - 1) / k;
    padded.resize(chunk * k, 0);

    std::vector<RsShareData> shares(n);
    for (std::size_t i = 0; i < n; ++i) {
        shares[i].index = static_cast<std::uint16_t>(i);
        shares[i].data.resize(chunk);
    }
    // systematic part
    for (std::size_t i = 0; i < k; ++i)
        std::copy_n(padded.begin() + static_cast<std::ptrdiff_t>(i * chunk),
                    chunk, shares[i].data.begin());
    // parity part
    std::vector<std::uint8_t> xs(k);
    for (std::size_t i = 0; i < k; ++i) xs[i] = static_cast<std::uint8_t>(i);
    const auto& g = gf();
    for (std::size_t p = k; p < n; ++p) {
        auto row = lagrange_row(xs, static_cast<std::uint8_t>(p));
        for (std::size_t t = 0; t < chunk; ++t) {
            std::uint8_t acc = 0;
            for (std::size_t i = 0; i < k; ++i)
                acc ^= g.mul(row[i], shares[i].data[t]);
            shares[p].data[t] = acc;
        }
    }
    return shares;
}

Bytes rs_decode(std::span<const RsShareData> shares, std::size_t n,
                std::size_t k) {
    if (k == 0 || k > n || n > 255)
        throw RsParamError("rs_decode: need 1 <= k <= n <= 255");

    // pick k shares with distinct valid indices
    std::vector<const RsShareData*> picked;
    std::set<std::uint16_t> seen;
    std::size_t chunk = 0;
    for (const auto& s : shares) {
        if (s.index >= n || seen.count(s.index)) continue;
        if (chunk == 0)
            chunk = s.data.size();
        else if (s.data.size() != chunk)
            throw RsIntegrityError("rs_decode: share length mismatch");
        seen.insert(s.index);
        picked.push_back(&s);
        if (picked.size() == k) break;
    }
    if (picked.size() < k || chunk == 0)
        throw RsInsufficientShares("rs_decode: fewer than k distinct shares");

    std::vector<std::uint8_t> xs(k);
    for (std::size_t i = 0; i < k; ++i)
        xs[i] = static_cast<std::uint8_t>(picked[i]->index);

    Bytes padded(chunk * k);
    const auto& g = gf();
    for (std::size_t target = 0; target < k; ++target) {
        auto it = std::find(xs.begin(), xs.end(),
                            static_cast<std::uint8_t>(target));
        if (it != xs.end()) {
            const auto& d = picked[static_cast<std::size_t>(it - xs.begin())]
                                ->data;
            std::copy(d.begin(), d.end(),
                      padded.begin() +
                          static_cast<std::ptrdiff_t>(target * chunk));
            continue;
        }
        auto row = lagrange_row(xs, static_cast<std::uint8_t>(target));
        for (std::size_t t = 0; t < chunk; ++t) {
            std::uint8_t acc = 0;
            for (std::size_t i = 0; i < k; ++i)
                acc ^= g.mul(row[i], picked[i]->data[t]);
            padded[target * chunk + t] = acc;
        }
    }

    ByteReader r(padded);
    Bytes payload;
    try {
        payload = r.bytes();
    } catch (const std::out_of_range&) {
        throw RsIntegrityError("rs_decode: corrupt length prefix");
    }

    // cross-check every provided share against a re-encoding
    auto reencoded = rs_encode(payload, n, k);
    for (const auto& s : shares) {
        if (s.index >= n) continue;
        if (reencoded[s.index].data != s.data)
            throw RsIntegrityError("rs_decode: shares not from one codeword");
    }
    return payload;
}

// ---------------------------------------------------------------------------
// Quorum certificates

void QuorumCert::serialize(ByteWriter& w) const {
    w.fixed(subject.bytes);
    w.u32(threshold);
    w.u32(static_cast<std::uint32_t>(signatures.size()));
    for (const auto& s : signatures) s.serialize(w);
}

QuorumCert QuorumCert::deserialize(ByteReader& r) {
    QuorumCert c;
    auto s = r.fixed(32);
    std::copy(s.begin(), s.end(), c.subject.bytes.begin());
    c.threshold = r.u32();
    auto count = r.u32();
    c.signatures.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        c.signatures.push_back(Signature::deserialize(r));
    return c;
}

QuorumCert assemble_cert(const std::vector<Signature>& sigs, const Bytes& msg,
                         const std::map<PeerId, PublicKey>& keys,
                         std::uint32_t threshold) {
    QuorumCert cert;
    cert.subject = digest(msg);
    cert.threshold = threshold;
    std::set<PeerId> signers;
    for (const auto& s : sigs) {
        if (signers.count(s.signer)) continue;  // duplicates counted once
        auto it = keys.find(s.signer);
        if (it == keys.end())
            throw CertError("assemble_cert: no key for signer", s.signer);
        if (!verify(msg, s, it->second))
            throw CertError("assemble_cert: bad signature", s.signer);
        signers.insert(s.signer);
        cert.signatures.push_back(s);
    }
    if (cert.signatures.size() < threshold)
        throw CertError("assemble_cert: below threshold",
                        static_cast<PeerId>(keys.size()));
    return cert;
}

bool verify_cert(const QuorumCert& cert, const Bytes& msg,
                 const std::map<PeerId, PublicKey>& keys,
                 std::uint32_t threshold) {
    if (cert.subject != digest(msg)) return false;
    std::set<PeerId> signers;
    for (const auto& s : cert.signatures) {
        if (signers.count(s.signer)) return false;
        auto it = keys.find(s.signer);
        if (it == keys.end() || !verify(msg, s, it->second)) return false;
        signers.insert(s.signer);
    }
    return signers.size() >= threshold;
}

}  // namespace rorqual
