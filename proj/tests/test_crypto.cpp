#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hedgesim/crypto.hpp"
#include "hedgesim/graph.hpp"
#include "test_oracles.hpp"

using namespace hedgesim;
using hedgesim::testing::make_digraph;

namespace {

SwapDigraph two_cycle() {
    auto g = make_digraph(2, {{0, 1}, {1, 0}});
    g.leaders = {"a"};
    return g;
}

SwapDigraph three_cycle() {
    auto g = make_digraph(3, {{0, 1}, {1, 2}, {2, 0}});
    g.leaders = {"a"};
    return g;
}

SwapDigraph broker_digraph() {
    auto g = make_digraph(3, {{1, 0}, {2, 0}, {0, 2}, {0, 1}});
    g.leaders = {"a", "b", "c"};
    return g;
}

}  // namespace

TEST_CASE("hashlock round trip") {
    std::vector<std::unique_ptr<CryptoSuite>> suites;
    suites.push_back(make_fast_crypto(1));
    suites.push_back(make_real_crypto(1));
    for (auto& suite : suites) {
        Secret s = suite->derive_secret("s");
        Secret s2 = suite->derive_secret("s2");
        Digest32 h = make_hashlock(*suite, s);
        CHECK(verify_hashlock(*suite, h, s));
        CHECK_FALSE(verify_hashlock(*suite, h, s2));
        CHECK(make_hashlock(*suite, s) == h);  // deterministic
    }
}

TEST_CASE("signatures verify and reject tampering") {
    std::vector<std::unique_ptr<CryptoSuite>> suites;
    suites.push_back(make_fast_crypto(7));
    suites.push_back(make_real_crypto(7));
    for (auto& suite : suites) {
        Bytes msg{1, 2, 3, 4};
        Signature sig = suite->sign("alice", msg);
        CHECK(suite->verify("alice", msg, sig));
        Bytes other{1, 2, 3, 5};
        CHECK_FALSE(suite->verify("alice", other, sig));
        CHECK_FALSE(suite->verify("bob", msg, sig));
    }
}

TEST_CASE("extend wraps path and signature chain") {
    auto suite = make_fast_crypto(2);
    Secret s = suite->derive_secret("k");
    Hashkey k = initial_hashkey(*suite, s, "a");
    CHECK(k.path == std::vector<PartyId>{"a"});

    auto ext = extend_hashkey(*suite, k, "b");
    REQUIRE(ext.key);
    CHECK(ext.key->path == std::vector<PartyId>{"b", "a"});
    CHECK(ext.key->sigchain.size() == 2);
    CHECK_FALSE(ext.key->cycle);
}

TEST_CASE("extend rejects interior repeats, flags cycle closures") {
    auto suite = make_fast_crypto(3);
    Secret s = suite->derive_secret("k");

    // broker digraph: (s,(c,a,b)) extended by a repeats a in the interior
    Hashkey k = initial_hashkey(*suite, s, "b");
    auto k_ab = extend_hashkey(*suite, k, "a");
    REQUIRE(k_ab.key);
    auto k_cab = extend_hashkey(*suite, *k_ab.key, "c");
    REQUIRE(k_cab.key);
    auto bad = extend_hashkey(*suite, *k_cab.key, "a");
    CHECK_FALSE(bad.key);
    CHECK(bad.error == HashkeyError::path_repeat);

    // (s,(b,a)) extended by a closes the cycle (a,b,a)
    Hashkey ka = initial_hashkey(*suite, s, "a");
    auto k_ba = extend_hashkey(*suite, ka, "b");
    REQUIRE(k_ba.key);
    auto cyc = extend_hashkey(*suite, *k_ba.key, "a");
    REQUIRE(cyc.key);
    CHECK(cyc.key->cycle);
    CHECK(cyc.key->path == std::vector<PartyId>{"a", "b", "a"});
    // cycle closures are proof context, not presentable keys
    auto g = two_cycle();
    auto verdict = validate_hashkey(*suite, *cyc.key, make_hashlock(*suite, s), g, 0,
                                    ExpiryRule::swap, 0, 1);
    CHECK_FALSE(verdict.valid);
    CHECK(verdict.reason == HashkeyError::bad_path);
}

TEST_CASE("validate: boundary, expiry, tamper") {
    auto suite = make_fast_crypto(4);
    auto g = two_cycle();
    Secret s = suite->derive_secret("k");
    Digest32 h = make_hashlock(*suite, s);
    Hashkey k = initial_hashkey(*suite, s, "a");

    Tick anchor = diameter(g);  // standalone bound: (diam + |q|) * Delta
    Tick expiry = hashkey_expiry(k, ExpiryRule::swap, anchor, 1);
    CHECK(expiry == 2);
    CHECK(validate_hashkey(*suite, k, h, g, expiry - 1, ExpiryRule::swap, anchor, 1).valid);
    auto at_expiry = validate_hashkey(*suite, k, h, g, expiry, ExpiryRule::swap, anchor, 1);
    CHECK_FALSE(at_expiry.valid);
    CHECK(at_expiry.reason == HashkeyError::expired);

    Hashkey tampered = k;
    tampered.sigchain[0].bytes[0] ^= 0xff;
    auto verdict = validate_hashkey(*suite, tampered, h, g, 0, ExpiryRule::swap, anchor, 1);
    CHECK_FALSE(verdict.valid);
    CHECK(verdict.reason == HashkeyError::bad_sigchain);

    Secret wrong = suite->derive_secret("other");
    auto mismatch = validate_hashkey(*suite, k, make_hashlock(*suite, wrong), g, 0,
                                     ExpiryRule::swap, anchor, 1);
    CHECK(mismatch.reason == HashkeyError::hashlock_mismatch);
}

TEST_CASE("compliant propagation validates until expiry, never after") {
    auto suite = make_fast_crypto(5);
    auto g = three_cycle();
    Secret s = suite->derive_secret("k");
    Digest32 h = make_hashlock(*suite, s);
    Tick anchor = 0;

    Hashkey k = initial_hashkey(*suite, s, "a");
    std::vector<Hashkey> chain{k};
    auto e1 = extend_hashkey(*suite, k, "c");
    REQUIRE(e1.key);
    chain.push_back(*e1.key);
    auto e2 = extend_hashkey(*suite, *e1.key, "b");
    REQUIRE(e2.key);
    chain.push_back(*e2.key);

    for (const auto& key : chain) {
        Tick expiry = hashkey_expiry(key, ExpiryRule::swap, anchor, 1);
        for (Tick t = 0; t < expiry; ++t)
            CHECK(validate_hashkey(*suite, key, h, g, t, ExpiryRule::swap, anchor, 1).valid);
        CHECK_FALSE(validate_hashkey(*suite, key, h, g, expiry, ExpiryRule::swap, anchor, 1).valid);
    }
    // extension strictly shortens the remaining lifetime at fixed now
    CHECK(hashkey_expiry(chain[0], ExpiryRule::swap, anchor, 1) <
          hashkey_expiry(chain[1], ExpiryRule::swap, anchor, 1));
    // relative to each key's own presentation tick, slack stays one Delta
}

TEST_CASE("path not in digraph is rejected") {
    auto suite = make_fast_crypto(6);
    auto g = broker_digraph();
    Secret s = suite->derive_secret("k");
    Digest32 h = make_hashlock(*suite, s);
    // (b,c) is not an arc, so the path (b,c) cannot validate
    Hashkey k = initial_hashkey(*suite, s, "c");
    auto ext = extend_hashkey(*suite, k, "b");
    REQUIRE(ext.key);  // shape is fine, arcs are not
    auto verdict = validate_hashkey(*suite, *ext.key, h, g, 0, ExpiryRule::swap, 10, 1);
    CHECK_FALSE(verdict.valid);
    CHECK(verdict.reason == HashkeyError::bad_path);
}

TEST_CASE("real and fast suites implement the same interface semantics") {
    auto real = make_real_crypto(11);
    auto g = two_cycle();
    Secret s = real->derive_secret("swap");
    Digest32 h = make_hashlock(*real, s);
    Hashkey k = initial_hashkey(*real, s, "a");
    auto ext = extend_hashkey(*real, k, "b");
    REQUIRE(ext.key);
    CHECK(validate_hashkey(*real, *ext.key, h, g, 2, ExpiryRule::swap, 1, 1).valid);
}
