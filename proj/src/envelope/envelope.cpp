#include "martsia/envelope/envelope.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "martsia/crypto/hash.hpp"
#include "martsia/ledger/ledger.hpp"
#include "martsia/policy/ast.hpp"

namespace martsia::envelope {

namespace {

constexpr std::string_view kMagic = "martsia-envelope/1";

bool is_decimal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

crypto::SymmetricKey subkey(std::string_view label, const crypto::SymmetricKey& key) {
  return crypto::hash256({as_bytes(label), key}).bytes;
}

Bytes associated_data(const MessageMetadata& m, const std::string& slice_id,
                      const std::string& policy_text) {
  ByteWriter w;
  w.str("martsia-slice/1").str(m.message_id).str(slice_id).str(m.sender_address).str(m.case_id).str(
      policy_text);
  return std::move(w).take();
}

Bytes encode_fields(const FieldMap& fields) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& [k, v] : fields) w.str(k).str(v);
  return std::move(w).take();
}

Bytes encode_index(const FieldMap& fields) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& [k, _] : fields) w.str(k);
  return std::move(w).take();
}

FieldMap decode_fields(ByteView bytes) {
  ByteReader r(bytes);
  auto n = r.u32();
  if (n > r.remaining()) fail(Errc::Malformed, "field count exceeds payload");
  FieldMap out;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = r.str();
    out.emplace_back(std::move(k), r.str());
  }
  r.expect_end();
  return out;
}

std::vector<std::string> decode_index(ByteView bytes) {
  ByteReader r(bytes);
  auto n = r.u32();
  if (n > r.remaining()) fail(Errc::Malformed, "index count exceeds payload");
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(r.str());
  r.expect_end();
  return out;
}

Bytes aead_open(const crypto::SymmetricKey& key, const crypto::Nonce& nonce, ByteView ct,
                ByteView ad, const std::string& slice_id) {
  try {
    return crypto::aead_decrypt(key, nonce, ct, ad);
  } catch (const Error&) {
    fail(Errc::IntegrityFailure, "slice " + slice_id + " failed authentication", slice_id);
  }
}

}  // namespace

void MessageMetadata::validate() const {
  if (!ledger::is_address(sender_address)) {
    fail(Errc::BadAddress, "malformed sender address '" + sender_address + "'", sender_address);
  }
  if (!is_decimal(case_id)) fail(Errc::InvalidArgument, "case id must be decimal", case_id);
  if (!ledger::is_message_id(message_id)) {
    fail(Errc::BadMessageId, "message id must be 8 decimal digits", message_id);
  }
}

std::string random_id8(Rng& rng) {
  // Rejection sampling keeps the 8 digits uniform.
  while (true) {
    auto b = rng.draw<4>();
    std::uint32_t v = b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
    if (v >= 4200000000u) continue;
    auto s = std::to_string(v % 100000000u);
    return std::string(8 - s.size(), '0') + s;
  }
}

Slice seal_slice(const FieldMap& fields, const std::string& policy_text,
                 const crypto::PublicParameters& params, const crypto::AuthorityKeyMap& authority_pks,
                 const MessageMetadata& metadata, const std::string& slice_id, Rng& rng) {
  metadata.validate();
  if (!ledger::is_message_id(slice_id)) fail(Errc::BadMessageId, "slice id must be 8 digits", slice_id);
  if (fields.empty()) fail(Errc::EmptyFields, "slice has no fields");
  std::set<std::string> names;
  for (const auto& [k, _] : fields) {
    if (k.empty()) fail(Errc::InvalidArgument, "empty field name");
    if (!names.insert(k).second) fail(Errc::InvalidArgument, "duplicate field name", k);
  }

  policy::Node ast;
  try {
    ast = policy::parse_policy(policy_text);
  } catch (const Error& e) {
    fail(Errc::PolicyError, std::string("invalid slice policy: ") + e.what(), policy_text);
  }

  auto key = rng.draw<32>();
  Slice s;
  s.slice_id = slice_id;
  s.policy_text = policy::to_string(ast);
  try {
    s.wrapped_key = crypto::abe_encrypt(params, authority_pks, ast, key, rng);
  } catch (const Error& e) {
    if (e.code() == Errc::ThresholdExceedsAuthorities) {
      fail(Errc::PolicyError, std::string("invalid slice policy: ") + e.what(), policy_text);
    }
    throw;
  }
  s.nonce = rng.draw<12>();
  auto ad = associated_data(metadata, slice_id, s.policy_text);
  s.encrypted_fields =
      crypto::aead_encrypt(subkey("martsia/slice/fields", key), s.nonce, encode_fields(fields), ad);
  s.encrypted_field_index =
      crypto::aead_encrypt(subkey("martsia/slice/index", key), s.nonce, encode_index(fields), ad);
  return s;
}

FieldMap open_slice(const Slice& slice, const crypto::PublicParameters& params,
                    const crypto::FullDecryptionKey& fdk, const MessageMetadata& metadata) {
  if (slice.wrapped_key.policy_text != slice.policy_text) {
    fail(Errc::IntegrityFailure, "slice policy differs from its wrapped key", slice.slice_id);
  }
  auto key = crypto::abe_decrypt(params, slice.wrapped_key, fdk);
  auto ad = associated_data(metadata, slice.slice_id, slice.policy_text);
  auto fields = aead_open(subkey("martsia/slice/fields", key), slice.nonce, slice.encrypted_fields,
                          ad, slice.slice_id);
  auto index = aead_open(subkey("martsia/slice/index", key), slice.nonce,
                         slice.encrypted_field_index, ad, slice.slice_id);
  FieldMap out;
  std::vector<std::string> names;
  try {
    out = decode_fields(fields);
    names = decode_index(index);
  } catch (const Error&) {
    fail(Errc::IntegrityFailure, "slice " + slice.slice_id + " has a malformed body", slice.slice_id);
  }
  if (names.size() != out.size()) {
    fail(Errc::IntegrityFailure, "field index disagrees with body", slice.slice_id);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] != out[i].first) fail(Errc::IntegrityFailure, "field index disagrees with body", slice.slice_id);
  }
  return out;
}

MessageEnvelope seal_message(const MessageMetadata& metadata, const std::vector<SliceSpec>& specs,
                             const crypto::PublicParameters& params,
                             const crypto::AuthorityKeyMap& authority_pks, Rng& rng) {
  if (specs.empty()) fail(Errc::EmptyFields, "message has no slices");
  MessageEnvelope env;
  env.metadata = metadata;
  std::set<std::string> used;
  for (const auto& spec : specs) {
    std::string id;
    do {
      id = random_id8(rng);
    } while (!used.insert(id).second);
    env.slices.push_back(seal_slice(spec.fields, spec.policy_text, params, authority_pks, metadata, id, rng));
  }
  return env;
}

std::vector<SliceResult> open_message(const MessageEnvelope& envelope,
                                      const crypto::PublicParameters& params,
                                      const crypto::FullDecryptionKey& fdk) {
  std::vector<SliceResult> out;
  for (const auto& slice : envelope.slices) {
    SliceResult r;
    r.slice_id = slice.slice_id;
    try {
      r.fields = open_slice(slice, params, fdk, envelope.metadata);
    } catch (const Error& e) {
      if (e.code() != Errc::PolicyNotSatisfied && e.code() != Errc::DecryptionFailed) throw;
      r.reason = e.code();
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- text format ----------------------------------------------------------

std::string MessageEnvelope::serialize() const {
  std::map<std::string, std::string> kv;
  kv["metadata.case_id"] = metadata.case_id;
  kv["metadata.message_id"] = metadata.message_id;
  kv["metadata.sender"] = metadata.sender_address;
  kv["slices"] = std::to_string(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    auto p = "slice." + std::to_string(i) + ".";
    kv[p + "field_index"] = base64_encode(s.encrypted_field_index);
    kv[p + "fields"] = base64_encode(s.encrypted_fields);
    kv[p + "id"] = s.slice_id;
    kv[p + "nonce"] = base64_encode(s.nonce);
    kv[p + "policy"] = s.policy_text;
    kv[p + "wrapped_key"] = base64_encode(s.wrapped_key.serialize());
  }
  std::string out(kMagic);
  out += '\n';
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

MessageEnvelope MessageEnvelope::parse(std::string_view text) {
  try {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
      fail(Errc::MalformedEnvelope, "missing martsia-envelope/1 header");
    }
    std::map<std::string, std::string> kv;
    while (std::getline(in, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail(Errc::MalformedEnvelope, "line without '='");
      if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
        fail(Errc::MalformedEnvelope, "duplicate key " + line.substr(0, eq));
      }
    }
    auto take = [&](const std::string& k) {
      auto it = kv.find(k);
      if (it == kv.end()) fail(Errc::MalformedEnvelope, "missing key " + k);
      auto v = std::move(it->second);
      kv.erase(it);
      return v;
    };
    MessageEnvelope env;
    env.metadata.case_id = take("metadata.case_id");
    env.metadata.message_id = take("metadata.message_id");
    env.metadata.sender_address = take("metadata.sender");
    auto count_text = take("slices");
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count == 0 ||
        count > 4096) {
      fail(Errc::MalformedEnvelope, "bad slice count");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) {
      auto p = "slice." + std::to_string(i) + ".";
      Slice s;
      s.encrypted_field_index = base64_decode(take(p + "field_index"));
      s.encrypted_fields = base64_decode(take(p + "fields"));
      s.slice_id = take(p + "id");
      auto nonce = base64_decode(take(p + "nonce"));
      if (nonce.size() != s.nonce.size()) fail(Errc::MalformedEnvelope, "bad nonce length");
      std::copy(nonce.begin(), nonce.end(), s.nonce.begin());
      s.policy_text = take(p + "policy");
      s.wrapped_key = crypto::AbeCiphertext::deserialize(base64_decode(take(p + "wrapped_key")));
      if (!ledger::is_message_id(s.slice_id) || !ids.insert(s.slice_id).second) {
        fail(Errc::MalformedEnvelope, "bad or duplicate slice id");
      }
      env.slices.push_back(std::move(s));
    }
    if (!kv.empty()) fail(Errc::MalformedEnvelope, "unexpected key " + kv.begin()->first);
    env.metadata.validate();
    if (env.serialize() != text) fail(Errc::MalformedEnvelope, "envelope is not canonical");
    return env;
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedEnvelope) throw;
    fail(Errc::MalformedEnvelope, e.what());
  }
}

}  // namespace martsia::envelope
