#include "hedgesim/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

#include "hedgesim/graph.hpp"

namespace hedgesim {

std::string Digest32::hex() const {
    static const char* d = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(d[b >> 4]);
        out.push_back(d[b & 0xf]);
    }
    return out;
}

const char* to_string(HashkeyError e) {
    switch (e) {
        case HashkeyError::none: return "none";
        case HashkeyError::path_repeat: return "path-repeat";
        case HashkeyError::hashlock_mismatch: return "hashlock-mismatch";
        case HashkeyError::bad_path: return "bad-path";
        case HashkeyError::bad_sigchain: return "bad-sigchain";
        case HashkeyError::expired: return "expired";
    }
    return "?";
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Digest32 mix_digest(std::uint64_t seed, const Bytes& data) {
    std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    Digest32 out;
    std::uint64_t state = h;
    for (int i = 0; i < 4; ++i) {
        std::uint64_t w = splitmix64(state);
        std::memcpy(out.bytes.data() + i * 8, &w, 8);
    }
    return out;
}

Bytes cat(const Bytes& a, const Bytes& b) {
    Bytes out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

// SHA-256 + Ed25519 via OpenSSL. Key pairs are derived deterministically
// from (suite seed, party id) so runs replay bit-identically.
class RealCrypto final : public CryptoSuite {
public:
    explicit RealCrypto(std::uint64_t seed) : seed_(seed) {}

    Digest32 hash(const Bytes& data) const override {
        Digest32 out;
        unsigned int len = 0;
        EVP_MD_CTX* ctx = EVP_MD_CTX_new();
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
            EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
            EVP_DigestFinal_ex(ctx, out.bytes.data(), &len) != 1 || len != 32) {
            EVP_MD_CTX_free(ctx);
            throw std::runtime_error("sha256 failed");
        }
        EVP_MD_CTX_free(ctx);
        return out;
    }

    Signature sign(const PartyId& party, const Bytes& msg) override {
        EVP_PKEY* key = key_for(party);
        EVP_MD_CTX* ctx = EVP_MD_CTX_new();
        size_t siglen = 64;
        Signature sig;
        sig.bytes.resize(siglen);
        if (!ctx || EVP_DigestSignInit(ctx, nullptr, nullptr, nullptr, key) != 1 ||
            EVP_DigestSign(ctx, sig.bytes.data(), &siglen, msg.data(), msg.size()) != 1) {
            EVP_MD_CTX_free(ctx);
            throw std::runtime_error("ed25519 sign failed");
        }
        sig.bytes.resize(siglen);
        EVP_MD_CTX_free(ctx);
        return sig;
    }

    bool verify(const PartyId& party, const Bytes& msg,
                const Signature& sig) const override {
        auto it = keys_.find(party);
        if (it == keys_.end()) return false;
        EVP_MD_CTX* ctx = EVP_MD_CTX_new();
        if (!ctx) return false;
        bool ok = EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, it->second) == 1 &&
                  EVP_DigestVerify(ctx, sig.bytes.data(), sig.bytes.size(),
                                   msg.data(), msg.size()) == 1;
        EVP_MD_CTX_free(ctx);
        return ok;
    }

    Secret derive_secret(const std::string& label) override {
        Bytes material = str_bytes("secret/" + label);
        for (int i = 0; i < 8; ++i)
            material.push_back(std::uint8_t(seed_ >> (8 * i)));
        Secret s;
        auto d = hash(material);
        s.bytes.assign(d.bytes.begin(), d.bytes.end());
        return s;
    }

    ~RealCrypto() override {
        for (auto& [_, k] : keys_) EVP_PKEY_free(k);
    }

private:
    EVP_PKEY* key_for(const PartyId& party) {
        auto it = keys_.find(party);
        if (it != keys_.end()) return it->second;
        Bytes material = str_bytes("key/" + party);
        for (int i = 0; i < 8; ++i)
            material.push_back(std::uint8_t(seed_ >> (8 * i)));
        Digest32 kd = hash(material);
        EVP_PKEY* key = EVP_PKEY_new_raw_private_key(
            EVP_PKEY_ED25519, nullptr, kd.bytes.data(), kd.bytes.size());
        if (!key) throw std::runtime_error("ed25519 keygen failed");
        keys_[party] = key;
        return key;
    }

    std::uint64_t seed_;
    std::map<PartyId, EVP_PKEY*> keys_;
};

// Deterministic test double: keyed mixes instead of real primitives. Same
// interface, microsecond-scale, collision resistance good enough to never
// trip in enumeration workloads.
class FastCrypto final : public CryptoSuite {
public:
    explicit FastCrypto(std::uint64_t seed) : seed_(seed) {}

    Digest32 hash(const Bytes& data) const override {
        return mix_digest(0x68617368ULL, data);
    }

    Signature sign(const PartyId& party, const Bytes& msg) override {
        Signature s;
        Digest32 d = mix_digest(party_key(party), msg);
        s.bytes.assign(d.bytes.begin(), d.bytes.end());
        return s;
    }

    bool verify(const PartyId& party, const Bytes& msg,
                const Signature& sig) const override {
        Digest32 d = mix_digest(party_key(party), msg);
        return sig.bytes == Bytes(d.bytes.begin(), d.bytes.end());
    }

    Secret derive_secret(const std::string& label) override {
        Digest32 d = mix_digest(seed_ ^ 0x736563ULL, str_bytes(label));
        Secret s;
        s.bytes.assign(d.bytes.begin(), d.bytes.end());
        return s;
    }

private:
    std::uint64_t party_key(const PartyId& party) const {
        std::uint64_t h = seed_ ^ 0x6b6579ULL;
        for (char c : party) h = (h ^ std::uint8_t(c)) * 0x100000001b3ULL;
        return h;
    }

    std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<CryptoSuite> make_real_crypto(std::uint64_t seed) {
    return std::make_unique<RealCrypto>(seed);
}

std::unique_ptr<CryptoSuite> make_fast_crypto(std::uint64_t seed) {
    return std::make_unique<FastCrypto>(seed);
}

Digest32 make_hashlock(const CryptoSuite& suite, const Secret& s) {
    return suite.hash(s.bytes);
}

bool verify_hashlock(const CryptoSuite& suite, const Digest32& h, const Secret& s) {
    return suite.hash(s.bytes) == h;
}

Hashkey initial_hashkey(CryptoSuite& suite, const Secret& s, const PartyId& leader) {
    Hashkey k;
    k.secret = s;
    k.path = {leader};
    k.sigchain = {suite.sign(leader, s.bytes)};
    return k;
}

namespace {

// Valid extension shapes: all-distinct, or extender equals the generator
// (closing the cycle) with distinct interior.
bool shape_ok(const std::vector<PartyId>& path, const PartyId& extender, bool& cycle) {
    cycle = (extender == path.back());
    for (size_t i = 0; i + (cycle ? 1 : 0) < path.size(); ++i)
        if (path[i] == extender && !(cycle && i + 1 == path.size())) return false;
    if (cycle) {
        // interior of extender||path must still be distinct
        for (size_t i = 0; i + 1 < path.size(); ++i)
            if (path[i] == extender) return false;
    }
    return true;
}

}  // namespace

ExtendResult extend_hashkey(CryptoSuite& suite, const Hashkey& k,
                            const PartyId& extender) {
    ExtendResult res;
    if (k.cycle) {
        res.error = HashkeyError::path_repeat;
        return res;
    }
    bool cycle = false;
    if (!shape_ok(k.path, extender, cycle)) {
        res.error = HashkeyError::path_repeat;
        return res;
    }
    Hashkey out = k;
    out.path.insert(out.path.begin(), extender);
    out.sigchain.insert(out.sigchain.begin(),
                        suite.sign(extender, k.sigchain.front().bytes));
    out.cycle = cycle;
    res.key = std::move(out);
    return res;
}

Tick hashkey_expiry(const Hashkey& k, ExpiryRule, Tick anchor, int ticks_per_delta) {
    return anchor + Tick(k.path.size()) * ticks_per_delta;
}

HashkeyVerdict validate_hashkey(const CryptoSuite& suite, const Hashkey& k,
                                const Digest32& hashlock, const SwapDigraph& g,
                                Tick now, ExpiryRule rule, Tick anchor,
                                int ticks_per_delta) {
    HashkeyVerdict v;
    if (!verify_hashlock(suite, hashlock, k.secret)) {
        v.reason = HashkeyError::hashlock_mismatch;
        return v;
    }
    if (k.cycle || k.path.empty() || k.sigchain.size() != k.path.size() ||
        classify_sequence(g, k.path) != PathShape::path ||
        !g.is_leader(k.path.back())) {
        v.reason = HashkeyError::bad_path;
        return v;
    }
    // innermost-out: generator signs the secret, each extender signs the
    // signature below it
    const Bytes* msg = &k.secret.bytes;
    for (size_t i = k.path.size(); i-- > 0;) {
        if (!suite.verify(k.path[i], *msg, k.sigchain[i])) {
            v.reason = HashkeyError::bad_sigchain;
            return v;
        }
        msg = &k.sigchain[i].bytes;
    }
    if (now >= hashkey_expiry(k, rule, anchor, ticks_per_delta)) {
        v.reason = HashkeyError::expired;
        return v;
    }
    v.valid = true;
    return v;
}

}  // namespace hedgesim
