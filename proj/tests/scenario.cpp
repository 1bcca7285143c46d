#include "scenario.hpp"

#include <fstream>
#include <sstream>

#include "support.hpp"

namespace martsia::testing {

const std::vector<std::pair<std::string, std::string>>& corpus_messages() {
  static const std::vector<std::pair<std::string, std::string>> m = {
      {"purchase_order", "Manufacturer"},
      {"export_document", "International supplier"},
      {"customs_clearance", "National customs"},
  };
  return m;
}

const std::vector<ExpectedSlice>& expected_matrix() {
  static const std::vector<ExpectedSlice> m = {
      {"purchase_order", 0, {"Manufacturer", "International supplier"}},
      {"export_document", 0,
       {"International supplier", "Manufacturer", "National customs", "International customs",
        "International carrier"}},
      {"export_document", 1, {"International supplier", "National customs", "International customs"}},
      {"export_document", 2, {"International supplier", "Manufacturer"}},
      {"export_document", 3,
       {"International supplier", "Manufacturer", "National customs", "International customs"}},
      {"customs_clearance", 0, {"National customs", "Manufacturer", "International customs"}},
  };
  return m;
}

std::vector<envelope::SliceSpec> load_corpus(const std::string& stem) {
  std::ifstream in(std::filesystem::path(MARTSIA_CORPUS_DIR) / (stem + ".slices"));
  std::ostringstream ss;
  ss << in.rdbuf();
  return client::parse_slice_specs(ss.str());
}

std::vector<std::string> corpus_strings() {
  std::vector<std::string> out;
  for (const auto& [stem, _] : corpus_messages()) {
    for (const auto& spec : load_corpus(stem)) {
      for (const auto& [k, v] : spec.fields) {
        out.push_back(k);
        out.push_back(v);
      }
    }
  }
  return out;
}

Scenario::Scenario(const std::filesystem::path& root)
    : ledger_path_(root / "ledger.log"), store_root_(root / "store") {
  ledger_ = ledger::Ledger::open(ledger_path_);
  store_ = std::make_unique<store::DirectoryStore>(store_root_);
  ledger_->set_resolver([this](const store::Rloc& r) { return store_->contains(r); });

  constexpr std::size_t kAuthorities = 4;
  ceremony::MetadataDocument metadata;
  for (std::size_t i = 0; i < kAuthorities; ++i) {
    authority_ids_.push_back("Auth" + std::to_string(i + 1));
    metadata.authorities.push_back({authority_ids_.back(),
                                    "127.0.0.1:" + std::to_string(free_port()),
                                    rsa_key(i).verify_key()});
  }
  std::vector<ceremony::Participant> parts;
  for (std::size_t i = 0; i < kAuthorities; ++i) {
    parts.emplace_back(authority_ids_[i], address(100 + i), *ledger_, *store_);
  }
  SystemRng rng;
  for (auto& p : parts) p.publish_metadata(metadata);
  for (auto& p : parts) p.commit_round(rng);
  for (auto& p : parts) p.open_round();
  crypto::PublicParameters params;
  for (auto& p : parts) params = p.finalize();
  for (std::size_t i = 0; i < kAuthorities; ++i) {
    auto keys = parts[i].publish_keys(params, rng);
    const auto& id = authority_ids_[i];
    issuers_[id] = std::make_unique<authority::KeyIssuer>(id, *ledger_, *store_);
    issuers_[id]->ready(params, std::move(keys.keypair));
    servers_[id] = std::make_unique<authority::AuthorityServer>(*issuers_[id],
                                                                metadata.authorities[i].endpoint);
    servers_[id]->start();
  }

  certifier_ = std::make_unique<client::ActorProfile>(client::ActorProfile::create(
      client::Role::Certifier, address(300), root / "keys" / "certifier", rsa_key(19)));
  const std::vector<std::pair<std::string, std::vector<std::string>>> roster = {
      {"Manufacturer", {"Manufacturer", kCaseId}},
      {"National supplier", {"Supplier", "National", kCaseId}},
      {"International supplier", {"Supplier", "International", kCaseId}},
      {"National customs", {"Customs", "National"}},
      {"International customs", {"Customs", "International"}},
      {"International carrier", {"Carrier", "International", kCaseId}},
      {"Customer", {"Customer", kCaseId}},
  };
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const auto& [name, attributes] = roster[i];
    auto dir = root / "keys" / ("actor" + std::to_string(i));
    auto profile = client::ActorProfile::create(client::Role::Reader, address(200 + i), dir, rsa_key(20 + i));
    client::certify_reader(*certifier_, deployment(), profile.address, profile.address, attributes,
                           profile.verify_key());
    actors_.push_back({name, attributes, std::move(profile)});
  }
}

Scenario::~Scenario() {
  for (auto& [_, s] : servers_) s->stop();
}

const Actor& Scenario::actor(const std::string& name) const {
  for (const auto& a : actors_) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("no actor " + name);
}

void Scenario::stop_authority(const std::string& id) { servers_.at(id)->stop(); }

const crypto::FullDecryptionKey& Scenario::fdk(const std::string& actor_name) {
  auto it = fdks_.find(actor_name);
  if (it == fdks_.end()) {
    auto result = client::request_keys(actor(actor_name).profile, deployment());
    it = fdks_.emplace(actor_name, std::move(result.fdk)).first;
  }
  return it->second;
}

client::SendReceipt Scenario::send(const std::string& stem, Rng& rng) {
  for (const auto& [s, sender] : corpus_messages()) {
    if (s == stem) return client::send_message(actor(sender).profile, deployment(), kCaseId, load_corpus(stem), rng);
  }
  throw std::out_of_range("no corpus message " + stem);
}

}  // namespace martsia::testing
