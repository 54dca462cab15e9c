#include "doctest.h"
#include "evaba/promotion.hpp"
#include "evaba/sha256.hpp"

using namespace evaba;

namespace {

struct Fixture {
  KeyMaterial km = deal(CryptoParams{4, 3, 1, 47});
  std::uint64_t instance = 3;
  Bytes value = to_bytes("v:1");

  ThresholdSignature cert_for(const PbId& id, const Bytes& v) {
    Bytes payload = ack_payload(id, sha256(v));
    std::vector<SignShare> shares;
    for (PartyId p = 1; p <= 3; ++p) shares.push_back(sign_share(km.keys_for(p), payload));
    return combine(km.public_set, shares, payload);
  }
};

}  // namespace

TEST_CASE("deliverable mapping: step 2 -> prepare, 3 -> lock, 4 -> commit") {
  Fixture fx;
  PromotionStore store;
  PbId base{fx.instance, 1, 2, 1};

  CHECK_FALSE(store.get_prepare(2).has_value());
  CHECK_FALSE(store.get_lock(2).has_value());
  CHECK_FALSE(store.get_commit(2).has_value());

  ThresholdSignature c1 = fx.cert_for(base.with_step(1), fx.value);
  CHECK(store.on_delivery(base.with_step(2), fx.value, c1) == 2);
  auto prepare = store.get_prepare(2);
  REQUIRE(prepare.has_value());
  CHECK(prepare->value == fx.value);
  CHECK(prepare->cert == c1);

  // step 1 stores nothing
  CHECK(store.on_delivery(base.with_step(1), fx.value, c1) == 0);

  ThresholdSignature c2 = fx.cert_for(base.with_step(2), fx.value);
  CHECK(store.on_delivery(base.with_step(3), fx.value, c2) == 3);
  auto lock = store.get_lock(2);
  REQUIRE(lock.has_value());
  CHECK(lock->cert == c2);

  ThresholdSignature c3 = fx.cert_for(base.with_step(3), fx.value);
  CHECK(store.on_delivery(base.with_step(4), fx.value, c3) == 4);
  REQUIRE(store.get_commit(2).has_value());

  // at most once per promotion
  CHECK(store.on_delivery(base.with_step(2), to_bytes("v:x"), c1) == 0);
  CHECK(store.get_prepare(2)->value == fx.value);

  // hierarchy holds when recorded in order
  CHECK(store.get_commit(2)->value == store.get_lock(2)->value);
  CHECK(store.get_lock(2)->value == store.get_prepare(2)->value);
}

TEST_CASE("two proposers keep independent slots") {
  Fixture fx;
  PromotionStore store;
  ThresholdSignature c1 = fx.cert_for(PbId{fx.instance, 1, 2, 1}, fx.value);
  store.on_delivery(PbId{fx.instance, 1, 2, 2}, fx.value, c1);
  CHECK(store.get_prepare(2).has_value());
  CHECK_FALSE(store.get_prepare(3).has_value());
}

TEST_CASE("promoter runs four chained steps") {
  Fixture fx;
  Promoter promoter(fx.km.public_set, fx.instance, 1, 2, fx.value, SendProof{0, std::nullopt});
  CHECK(promoter.step() == 1);
  CHECK_FALSE(promoter.complete());

  int rounds = 0;
  while (!promoter.complete()) {
    SendMsg send = promoter.current_send();
    CHECK(send.pb_id.proposer == 2);
    CHECK(send.pb_id.step == promoter.step());
    if (send.pb_id.step == 1) {
      CHECK(send.proof.key_view == 0);
      CHECK_FALSE(send.proof.cert.has_value());
    } else {
      REQUIRE(send.proof.cert.has_value());
      CHECK(threshold_validate(fx.km.public_set, *send.proof.cert,
                               ack_payload(send.pb_id.with_step(send.pb_id.step - 1),
                                           sha256(send.value))));
    }
    ++rounds;  // SEND round
    Bytes payload = ack_payload(send.pb_id, sha256(send.value));
    std::optional<ThresholdSignature> cert;
    for (PartyId p = 1; p <= 3; ++p) {
      AckMsg ack;
      ack.pb_id = send.pb_id;
      ack.signer = p;
      ack.share = sign_share(fx.km.keys_for(p), payload);
      cert = promoter.on_ack(ack);
    }
    REQUIRE(cert.has_value());
    ++rounds;  // ACK round
  }
  CHECK(rounds == 8);  // 4 completed P-PBs, two rounds each

  const PromotionResult& res = *promoter.result();
  CHECK(res.value == fx.value);
  CHECK(threshold_validate(fx.km.public_set, res.final_cert,
                           ack_payload(PbId{fx.instance, 1, 2, 4}, sha256(fx.value))));
}

TEST_CASE("promoter ignores stale and mismatched acks") {
  Fixture fx;
  Promoter promoter(fx.km.public_set, fx.instance, 1, 2, fx.value, SendProof{0, std::nullopt});
  PbId current = promoter.current_send().pb_id;

  AckMsg wrong_step;
  wrong_step.pb_id = current.with_step(2);
  wrong_step.signer = 1;
  wrong_step.share =
      sign_share(fx.km.keys_for(1), ack_payload(current.with_step(2), sha256(fx.value)));
  CHECK_FALSE(promoter.on_ack(wrong_step).has_value());
  CHECK(promoter.step() == 1);
}

TEST_CASE("abandon mid-promotion stops progress, deliverables persist") {
  Fixture fx;
  Promoter promoter(fx.km.public_set, fx.instance, 1, 2, fx.value, SendProof{0, std::nullopt});
  PromotionStore receiver_store;

  // run steps 1 and 2 to completion
  for (int s = 0; s < 2; ++s) {
    SendMsg send = promoter.current_send();
    if (send.pb_id.step >= 2) {
      receiver_store.on_delivery(send.pb_id, send.value, *send.proof.cert);
    }
    Bytes payload = ack_payload(send.pb_id, sha256(send.value));
    for (PartyId p = 1; p <= 3; ++p) {
      AckMsg ack;
      ack.pb_id = send.pb_id;
      ack.signer = p;
      ack.share = sign_share(fx.km.keys_for(p), payload);
      promoter.on_ack(ack);
    }
  }
  CHECK(promoter.step() == 3);
  promoter.abandon();
  CHECK(promoter.abandoned());

  SendMsg s3 = promoter.current_send();
  Bytes payload = ack_payload(s3.pb_id, sha256(s3.value));
  for (PartyId p = 1; p <= 3; ++p) {
    AckMsg ack;
    ack.pb_id = s3.pb_id;
    ack.signer = p;
    ack.share = sign_share(fx.km.keys_for(p), payload);
    CHECK_FALSE(promoter.on_ack(ack).has_value());
  }
  CHECK_FALSE(promoter.complete());
  // the receiver keeps what it already recorded
  CHECK(receiver_store.get_prepare(2).has_value());
}
