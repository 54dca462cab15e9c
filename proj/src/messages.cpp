#include "evaba/messages.hpp"

#include "evaba/codec.hpp"

namespace evaba {

namespace {

void put_sign_share(ByteWriter& w, const SignShare& s) {
  w.u32(s.signer);
  w.digest(s.message_digest);
  w.bytes(s.share_bytes);
}

SignShare get_sign_share(ByteReader& r) {
  SignShare s;
  s.signer = r.u32();
  s.message_digest = r.digest();
  s.share_bytes = r.bytes();
  return s;
}

void put_coin_share(ByteWriter& w, const CoinShare& s) {
  w.u32(s.signer);
  w.digest(s.tag_digest);
  w.bytes(s.share_bytes);
}

CoinShare get_coin_share(ByteReader& r) {
  CoinShare s;
  s.signer = r.u32();
  s.tag_digest = r.digest();
  s.share_bytes = r.bytes();
  return s;
}

void put_tsig(ByteWriter& w, const ThresholdSignature& t) {
  w.digest(t.message_digest);
  w.bytes(t.sig_bytes);
}

ThresholdSignature get_tsig(ByteReader& r) {
  ThresholdSignature t;
  t.message_digest = r.digest();
  t.sig_bytes = r.bytes();
  return t;
}

void put_pb_id(ByteWriter& w, const PbId& id) {
  w.u64(id.instance);
  w.u64(id.view);
  w.u32(id.proposer);
  w.u8(std::uint8_t(id.step));
}

PbId get_pb_id(ByteReader& r) {
  PbId id;
  id.instance = r.u64();
  id.view = r.u64();
  id.proposer = r.u32();
  id.step = r.u8();
  return id;
}

void put_deliverable_opt(ByteWriter& w, const std::optional<Deliverable>& d) {
  w.u8(d.has_value() ? 1 : 0);
  if (d.has_value()) {
    w.bytes(d->value);
    put_tsig(w, d->cert);
  }
}

std::optional<Deliverable> get_deliverable_opt(ByteReader& r) {
  if (r.u8() == 0) return std::nullopt;
  Deliverable d;
  d.value = r.bytes();
  d.cert = get_tsig(r);
  return d;
}

}  // namespace

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::CommitteeShare: return "CS_SHARE";
    case MsgKind::Send: return "SEND";
    case MsgKind::Ack: return "ACK";
    case MsgKind::Propose: return "PROPOSE";
    case MsgKind::Suggest: return "SUGGEST";
    case MsgKind::ElectShare: return "ELECT";
    case MsgKind::ViewChange: return "VIEWCHANGE";
    case MsgKind::Decide: return "DECIDE";
  }
  return "?";
}

Bytes encode(const Message& msg) {
  ByteWriter w;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommitteeShareMsg>) {
          w.u8(std::uint8_t(MsgKind::CommitteeShare));
          w.u64(m.view);
          w.u32(m.sender);
          put_coin_share(w, m.share);
        } else if constexpr (std::is_same_v<T, SendMsg>) {
          w.u8(std::uint8_t(MsgKind::Send));
          put_pb_id(w, m.pb_id);
          w.bytes(m.value);
          w.u64(m.proof.key_view);
          w.u8(m.proof.cert.has_value() ? 1 : 0);
          if (m.proof.cert.has_value()) put_tsig(w, *m.proof.cert);
        } else if constexpr (std::is_same_v<T, AckMsg>) {
          w.u8(std::uint8_t(MsgKind::Ack));
          put_pb_id(w, m.pb_id);
          w.u32(m.signer);
          put_sign_share(w, m.share);
        } else if constexpr (std::is_same_v<T, ProposeMsg>) {
          w.u8(std::uint8_t(MsgKind::Propose));
          w.u64(m.view);
          w.u32(m.proposer);
          w.bytes(m.value);
          put_tsig(w, m.commit_proof);
        } else if constexpr (std::is_same_v<T, SuggestMsg>) {
          w.u8(std::uint8_t(MsgKind::Suggest));
          w.u64(m.view);
          w.u32(m.sender);
          w.u32(m.proposer);
          w.bytes(m.value);
          put_tsig(w, m.commit_proof);
        } else if constexpr (std::is_same_v<T, ElectShareMsg>) {
          w.u8(std::uint8_t(MsgKind::ElectShare));
          w.u64(m.view);
          w.u32(m.sender);
          put_coin_share(w, m.share);
        } else if constexpr (std::is_same_v<T, ViewChangeMsg>) {
          w.u8(std::uint8_t(MsgKind::ViewChange));
          w.u64(m.view);
          w.u32(m.sender);
          w.u32(m.leader);
          put_deliverable_opt(w, m.commit);
          put_deliverable_opt(w, m.lock);
          put_deliverable_opt(w, m.key);
        } else if constexpr (std::is_same_v<T, DecideMsg>) {
          w.u8(std::uint8_t(MsgKind::Decide));
          w.u64(m.view);
          w.u32(m.sender);
          w.u32(m.proposer);
          w.bytes(m.value);
          put_tsig(w, m.commit_cert);
          w.u32(std::uint32_t(m.committee_shares.size()));
          for (const auto& s : m.committee_shares) put_coin_share(w, s);
          w.u32(std::uint32_t(m.elect_shares.size()));
          for (const auto& s : m.elect_shares) put_coin_share(w, s);
        }
      },
      msg);
  return w.take();
}

Message decode(const Bytes& payload) {
  ByteReader r(payload);
  MsgKind kind = MsgKind(r.u8());
  Message out;
  switch (kind) {
    case MsgKind::CommitteeShare: {
      CommitteeShareMsg m;
      m.view = r.u64();
      m.sender = r.u32();
      m.share = get_coin_share(r);
      out = m;
      break;
    }
    case MsgKind::Send: {
      SendMsg m;
      m.pb_id = get_pb_id(r);
      m.value = r.bytes();
      m.proof.key_view = r.u64();
      if (r.u8() == 1) m.proof.cert = get_tsig(r);
      out = m;
      break;
    }
    case MsgKind::Ack: {
      AckMsg m;
      m.pb_id = get_pb_id(r);
      m.signer = r.u32();
      m.share = get_sign_share(r);
      out = m;
      break;
    }
    case MsgKind::Propose: {
      ProposeMsg m;
      m.view = r.u64();
      m.proposer = r.u32();
      m.value = r.bytes();
      m.commit_proof = get_tsig(r);
      out = m;
      break;
    }
    case MsgKind::Suggest: {
      SuggestMsg m;
      m.view = r.u64();
      m.sender = r.u32();
      m.proposer = r.u32();
      m.value = r.bytes();
      m.commit_proof = get_tsig(r);
      out = m;
      break;
    }
    case MsgKind::ElectShare: {
      ElectShareMsg m;
      m.view = r.u64();
      m.sender = r.u32();
      m.share = get_coin_share(r);
      out = m;
      break;
    }
    case MsgKind::ViewChange: {
      ViewChangeMsg m;
      m.view = r.u64();
      m.sender = r.u32();
      m.leader = r.u32();
      m.commit = get_deliverable_opt(r);
      m.lock = get_deliverable_opt(r);
      m.key = get_deliverable_opt(r);
      out = m;
      break;
    }
    case MsgKind::Decide: {
      DecideMsg m;
      m.view = r.u64();
      m.sender = r.u32();
      m.proposer = r.u32();
      m.value = r.bytes();
      m.commit_cert = get_tsig(r);
      std::uint32_t nc = r.u32();
      if (nc > 4096) throw CodecError("share vector too large");
      for (std::uint32_t i = 0; i < nc; ++i) m.committee_shares.push_back(get_coin_share(r));
      std::uint32_t ne = r.u32();
      if (ne > 4096) throw CodecError("share vector too large");
      for (std::uint32_t i = 0; i < ne; ++i) m.elect_shares.push_back(get_coin_share(r));
      out = m;
      break;
    }
    default:
      throw CodecError("unknown message kind");
  }
  r.expect_done();
  return out;
}

MsgKind kind_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> MsgKind {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommitteeShareMsg>) return MsgKind::CommitteeShare;
        else if constexpr (std::is_same_v<T, SendMsg>) return MsgKind::Send;
        else if constexpr (std::is_same_v<T, AckMsg>) return MsgKind::Ack;
        else if constexpr (std::is_same_v<T, ProposeMsg>) return MsgKind::Propose;
        else if constexpr (std::is_same_v<T, SuggestMsg>) return MsgKind::Suggest;
        else if constexpr (std::is_same_v<T, ElectShareMsg>) return MsgKind::ElectShare;
        else if constexpr (std::is_same_v<T, ViewChangeMsg>) return MsgKind::ViewChange;
        else return MsgKind::Decide;
      },
      msg);
}

ViewId view_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> ViewId {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SendMsg>) return m.pb_id.view;
        else if constexpr (std::is_same_v<T, AckMsg>) return m.pb_id.view;
        else return m.view;
      },
      msg);
}

std::optional<MsgKind> peek_kind(const Bytes& payload) {
  if (payload.empty()) return std::nullopt;
  std::uint8_t k = payload[0];
  if (k < 1 || k > 8) return std::nullopt;
  return MsgKind(k);
}

WireCost measure(const Message& msg) {
  WireCost c;
  auto sig = [&](const ThresholdSignature& t) { c.k_bytes += t.sig_bytes.size(); };
  auto del = [&](const std::optional<Deliverable>& d) {
    if (d.has_value()) {
      c.l_bytes += d->value.size();
      sig(d->cert);
    }
  };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CommitteeShareMsg>) {
          c.k_bytes += m.share.share_bytes.size();
        } else if constexpr (std::is_same_v<T, SendMsg>) {
          c.l_bytes += m.value.size();
          if (m.proof.cert.has_value()) sig(*m.proof.cert);
        } else if constexpr (std::is_same_v<T, AckMsg>) {
          c.k_bytes += m.share.share_bytes.size();
        } else if constexpr (std::is_same_v<T, ProposeMsg>) {
          c.l_bytes += m.value.size();
          sig(m.commit_proof);
        } else if constexpr (std::is_same_v<T, SuggestMsg>) {
          c.l_bytes += m.value.size();
          sig(m.commit_proof);
        } else if constexpr (std::is_same_v<T, ElectShareMsg>) {
          c.k_bytes += m.share.share_bytes.size();
        } else if constexpr (std::is_same_v<T, ViewChangeMsg>) {
          del(m.commit);
          del(m.lock);
          del(m.key);
        } else if constexpr (std::is_same_v<T, DecideMsg>) {
          c.l_bytes += m.value.size();
          sig(m.commit_cert);
          for (const auto& s : m.committee_shares) c.k_bytes += s.share_bytes.size();
          for (const auto& s : m.elect_shares) c.k_bytes += s.share_bytes.size();
        }
      },
      msg);
  return c;
}

}  // namespace evaba
