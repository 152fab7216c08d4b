#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hedgesim/amount.hpp"

namespace hedgesim {

using PartyId = std::string;
using Bytes = std::vector<std::uint8_t>;

struct Digest32 {
    std::array<std::uint8_t, 32> bytes{};
    bool operator==(const Digest32&) const = default;
    auto operator<=>(const Digest32&) const = default;
    std::string hex() const;
};

struct Secret {
    Bytes bytes;  // 32 bytes, unique per (leader, purpose) within a scenario
    bool operator==(const Secret&) const = default;
};

struct Signature {
    Bytes bytes;
    bool operator==(const Signature&) const = default;
};

// Hash + signature primitives behind one interface. RealCrypto is
// SHA-256 / Ed25519; FastCrypto is a deterministic insecure double used by
// the checker, which replays thousands of runs and is not testing crypto
// strength.
class CryptoSuite {
public:
    virtual ~CryptoSuite() = default;
    virtual Digest32 hash(const Bytes& data) const = 0;
    virtual Signature sign(const PartyId& party, const Bytes& msg) = 0;
    virtual bool verify(const PartyId& party, const Bytes& msg,
                        const Signature& sig) const = 0;
    // Deterministic per (suite seed, label); labels are single-use nonces.
    virtual Secret derive_secret(const std::string& label) = 0;
};

std::unique_ptr<CryptoSuite> make_real_crypto(std::uint64_t seed = 0);
std::unique_ptr<CryptoSuite> make_fast_crypto(std::uint64_t seed = 0);

// ---------------------------------------------------------------------------

struct SwapDigraph;  // graph.hpp

// Hashkey (secret, path, signature chain). The path (u_0,...,u_k) runs from
// the redeeming vertex u_0 to the generating leader u_k, following arc
// direction: each (u_i, u_{i+1}) is an arc. sigchain[i] belongs to path[i];
// the innermost signature (by the generator) covers the secret, each outer
// one covers the signature below it.
struct Hashkey {
    Secret secret;
    std::vector<PartyId> path;
    std::vector<Signature> sigchain;
    bool cycle = false;  // closing extension, proof context only
};

enum class HashkeyError {
    none,
    path_repeat,       // extension neither a valid path shape nor a closing cycle
    hashlock_mismatch,
    bad_path,
    bad_sigchain,
    expired,
};

const char* to_string(HashkeyError e);

Digest32 make_hashlock(const CryptoSuite& suite, const Secret& s);
bool verify_hashlock(const CryptoSuite& suite, const Digest32& h, const Secret& s);

Hashkey initial_hashkey(CryptoSuite& suite, const Secret& s, const PartyId& leader);

struct ExtendResult {
    std::optional<Hashkey> key;
    HashkeyError error = HashkeyError::none;
};
ExtendResult extend_hashkey(CryptoSuite& suite, const Hashkey& k,
                            const PartyId& extender);

enum class ExpiryRule { swap, auction };

struct HashkeyVerdict {
    bool valid = false;
    HashkeyError reason = HashkeyError::none;
};

// Expiry: anchor + |q|*Delta ticks. For swaps the anchor is the hashkey
// release phase start (diam(G)*Delta reproduces the standalone-protocol
// bound); for the auction it is the declaration phase start.
Tick hashkey_expiry(const Hashkey& k, ExpiryRule rule, Tick anchor,
                    int ticks_per_delta);

HashkeyVerdict validate_hashkey(const CryptoSuite& suite, const Hashkey& k,
                                const Digest32& hashlock, const SwapDigraph& g,
                                Tick now, ExpiryRule rule, Tick anchor,
                                int ticks_per_delta);

}  // namespace hedgesim
