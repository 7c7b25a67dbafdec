#include "ler/error.hpp"
#include "ler/identity.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace ler;
using namespace ler::identity;

namespace {

KeyPair keys_from(std::string_view seed) {
  DeterministicRandom rng(seed);
  return KeyPair::from_seed(rng.bytes(32));
}

} // namespace

TEST(Identity, SignVerifyRoundTrip) {
  const auto k = keys_from("a");
  const auto sig = k.sign("hello");
  EXPECT_TRUE(verify_signature(k.public_key, to_bytes("hello"), sig));
  EXPECT_FALSE(verify_signature(keys_from("b").public_key, to_bytes("hello"), sig));
  EXPECT_EQ(k.algorithm_id, "Ed25519");
}

TEST(Identity, EverySingleBitFlipOfMessageRejects) {
  const auto k = keys_from("bits");
  const Bytes msg = to_bytes("short message under test");
  const auto sig = k.sign(msg);
  for (std::size_t i = 0; i < msg.size() * 8; ++i) {
    Bytes m = msg;
    m[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    EXPECT_FALSE(verify_signature(k.public_key, m, sig)) << "bit " << i;
  }
}

TEST(Identity, RandomMessagesRoundTrip) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 200; ++i) {
    const auto k = keys_from("rt" + std::to_string(i));
    Bytes m(gen() % 300);
    for (auto& b : m) b = static_cast<std::uint8_t>(gen());
    EXPECT_TRUE(verify_signature(k.public_key, m, k.sign(m)));
  }
}

TEST(Identity, GenDidIsDeterministicAndDigestEncoded) {
  const auto k = keys_from("did");
  const auto a = gen_did(k.public_key, "ler", {});
  const auto b = gen_did(k.public_key, "ler", {});
  EXPECT_EQ(a.did, b.did);
  EXPECT_EQ(a.document, b.document);
  EXPECT_EQ(a.did.identifier, base64url_encode(sha256(k.public_key)));
  EXPECT_EQ(a.did.str(), "did:ler:" + a.did.identifier);
  EXPECT_EQ(Did::parse(a.did.str()), a.did);
}

TEST(Identity, GenDidDependsOnMethodAndMetadata) {
  const auto k = keys_from("meta");
  EXPECT_NE(gen_did(k.public_key, "ler", {}).document, gen_did(k.public_key, "ler", {{"role", "x"}}).document);
  EXPECT_NE(gen_did(k.public_key, "ler", {}).did, gen_did(k.public_key, "web", {}).did);
}

TEST(Identity, ThousandRandomKeysHaveDistinctIdentifiers) {
  std::set<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.insert(gen_did(KeyPair::generate().public_key).did.identifier);
  EXPECT_EQ(ids.size(), 1000u);
}

TEST(Identity, MalformedKeyIsInvalidKey) {
  try {
    gen_did(Bytes(31, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidKey);
  }
  EXPECT_THROW(gen_did(Bytes(32, 0)), Error);  // small-order point
}

TEST(Identity, DidParseRejectsGarbage) {
  for (const char* bad : {"", "did:", "did:ler:", "did:LER:abc", "dad:ler:xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx",
                          "did:ler:short", "did:ler:xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx*"}) {
    EXPECT_THROW(Did::parse(bad), Error) << bad;
  }
}

TEST(Identity, DocumentValidationAndJsonRoundTrip) {
  const auto doc = gen_did(keys_from("doc").public_key, "ler", {{"k", "v"}}).document;
  EXPECT_NO_THROW(doc.validate());
  EXPECT_EQ(DidDocument::from_json(doc.to_json()), doc);
  auto dup = doc;
  dup.verification_methods.push_back(dup.verification_methods.front());
  EXPECT_THROW(dup.validate(), Error);
  auto none = doc;
  none.verification_methods.clear();
  EXPECT_THROW(none.validate(), Error);
}

TEST(Identity, ProveControl) {
  const auto a = keys_from("ctl-a");
  const auto b = keys_from("ctl-b");
  const auto doc_a = gen_did(a.public_key).document;
  const auto doc_b = gen_did(b.public_key).document;
  const Bytes n = to_bytes("challenge-1");
  const auto sig = prove_control(a, n);
  EXPECT_TRUE(verify_control(doc_a, n, sig));
  EXPECT_FALSE(verify_control(doc_b, n, sig));
  EXPECT_FALSE(verify_control(doc_a, to_bytes("challenge-2"), sig));
  EXPECT_THROW(prove_control(a, Bytes{}), Error);
}

TEST(Identity, RegistryResolveAndNotFound) {
  DidRegistry reg;
  const auto g = gen_did(keys_from("reg").public_key);
  reg.register_document(g.document);
  EXPECT_EQ(reg.resolve(g.did), g.document);
  try {
    reg.resolve(gen_did(keys_from("other").public_key).did);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
  EXPECT_THROW(reg.register_document(g.document), Error);
}

TEST(Identity, RotationResolvesLatestVersion) {
  DidRegistry reg;
  const auto g = gen_did(keys_from("rot").public_key);
  reg.register_document(g.document);
  const auto next = rotate_key(g.document, keys_from("rot2").public_key);
  EXPECT_EQ(next.version, g.document.version + 1);
  reg.update_document(next);
  EXPECT_EQ(reg.resolve(g.did).version, next.version);
  EXPECT_EQ(reg.resolve(g.did).verification_methods.front().public_key, keys_from("rot2").public_key);
  try {
    reg.update_document(g.document);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StaleVersion);
  }
}

TEST(Identity, FileRegistryPersistsCanonically) {
  const auto dir = std::filesystem::temp_directory_path() / ("ler-reg-" + system_random()->hex_id(6));
  std::filesystem::remove_all(dir);
  const auto g = gen_did(keys_from("file").public_key);
  {
    DidRegistry reg(dir);
    reg.register_document(g.document);
  }
  DidRegistry again(dir);
  EXPECT_EQ(again.resolve(g.did), g.document);
  const auto path = dir / "ler" / (g.did.identifier + ".json");
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(read_text_file(path), canonical_serialize(g.document.to_json()));
  std::filesystem::remove_all(dir);
}
