// Command-line front end. Exit status: 0 success, 1 domain error, 2 usage.

#include <signal.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "martsia/authority/issuer.hpp"
#include "martsia/authority/server.hpp"
#include "martsia/ceremony/ceremony.hpp"
#include "martsia/client/client.hpp"
#include "martsia/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace martsia;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- configuration ----------------------------------------------------------

struct Settings {
  std::string config_file;
  std::string ledger, store, keystore, passphrase_file;
  std::string format = "text";

  void load_config() {
    if (config_file.empty()) return;
    std::ifstream in(config_file);
    if (!in) fail(Errc::NotFound, "cannot read config file " + config_file, config_file);
    auto base = fs::absolute(config_file).parent_path();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto eq = line.find('=');
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      if (trim(line).empty()) continue;
      if (eq == std::string::npos) {
        fail(Errc::Malformed, config_file + ":" + std::to_string(lineno) + ": expected key = value");
      }
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      auto path = [&] { return fs::path(value).is_absolute() ? value : (base / value).string(); };
      // Flags given on the command line win over the file.
      if (key == "ledger") {
        if (ledger.empty()) ledger = path();
      } else if (key == "store") {
        if (store.empty()) store = path();
      } else if (key == "keystore") {
        if (keystore.empty()) keystore = path();
      } else if (key == "passphrase_file") {
        if (passphrase_file.empty()) passphrase_file = path();
      } else {
        fail(Errc::Malformed, config_file + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
    }
  }

  const std::string& need(const std::string& value, const char* what) const {
    if (value.empty()) throw UsageError(std::string("no ") + what + " configured (use --" + what + " or the config file)");
    return value;
  }
};

class Context {
 public:
  explicit Context(Settings& s) : s_(s) {}

  ledger::Ledger& ledger() {
    if (!ledger_) {
      ledger_ = ledger::Ledger::open(s_.need(s_.ledger, "ledger"));
      store();
      ledger_->set_resolver([this](const store::Rloc& r) { return store_->contains(r); });
    }
    return *ledger_;
  }
  store::DirectoryStore& store() {
    if (!store_) store_ = std::make_unique<store::DirectoryStore>(s_.need(s_.store, "store"));
    return *store_;
  }
  client::Deployment dep() { return {ledger(), store()}; }
  fs::path keystore() const { return s_.need(s_.keystore, "keystore"); }
  client::ActorProfile profile() { return client::ActorProfile::load(keystore()); }
  std::string passphrase() const {
    std::ifstream in(s_.need(s_.passphrase_file, "passphrase-file"));
    if (!in) fail(Errc::NotFound, "cannot read passphrase file", s_.passphrase_file);
    std::string p;
    std::getline(in, p);
    if (p.empty()) fail(Errc::InvalidArgument, "passphrase file is empty", s_.passphrase_file);
    return p;
  }

 private:
  Settings& s_;
  std::unique_ptr<ledger::Ledger> ledger_;
  std::unique_ptr<store::DirectoryStore> store_;
};

// ---- output -------------------------------------------------------------------

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_string()) {
    out << prefix << "=" << j.get<std::string>() << "\n";
  } else {
    out << prefix << "=" << j.dump() << "\n";
  }
}

void emit(const Settings& s, const json& j, std::ostream& out = std::cout) {
  if (s.format == "json") {
    out << j.dump(2) << "\n";
  } else {
    flatten(j, "", out);
  }
  out.flush();
}

// ---- helpers ------------------------------------------------------------------

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::NotFound, "cannot read " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_private(const fs::path& path, ByteView bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
  }
  fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
  fs::rename(tmp, path);
}

Bytes read_bytes(const fs::path& path) { return to_bytes(read_text(path.string())); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Hands out bytes fixed in advance, so a seed can be persisted before the
/// commitment to it is posted.
class FixedRng final : public Rng {
 public:
  explicit FixedRng(Bytes bytes) : bytes_(std::move(bytes)) {}
  void fill(std::span<std::uint8_t> out) override {
    if (out.size() > bytes_.size() - pos_) fail(Errc::InvalidArgument, "fixed randomness exhausted");
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(), out.begin());
    pos_ += out.size();
  }

 private:
  Bytes bytes_;
  std::size_t pos_ = 0;
};

// Files an authority keeps next to its profile.
struct AuthorityFiles {
  fs::path root;
  fs::path id() const { return root / "authority_id"; }
  fs::path seed() const { return root / "ceremony_seed"; }
  fs::path keypair() const { return root / "authority_keypair"; }
};

std::string authority_id(const AuthorityFiles& f) {
  auto id = read_text(f.id().string());
  while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
  return id;
}

ceremony::Participant participant(Context& ctx, const client::ActorProfile& p, const AuthorityFiles& f) {
  ceremony::Participant part(authority_id(f), p.address, ctx.ledger(), ctx.store());
  if (fs::exists(f.seed())) {
    auto bytes = read_bytes(f.seed());
    if (bytes.size() != 32) fail(Errc::Malformed, "stored ceremony seed is damaged");
    crypto::Seed seed{};
    std::copy(bytes.begin(), bytes.end(), seed.begin());
    part.restore_seed(seed);
  }
  return part;
}

json slice_json(const envelope::SliceResult& r) {
  json j;
  j["slice_id"] = r.slice_id;
  j["readable"] = r.readable();
  if (r.readable()) {
    json fields = json::object();
    for (const auto& [k, v] : *r.fields) fields[k] = v;
    j["fields"] = fields;
  } else {
    j["reason"] = std::string(errc_name(r.reason));
  }
  return j;
}

crypto::FullDecryptionKey obtain_fdk(Context& ctx, const client::ActorProfile& reader,
                                     const std::map<std::string, std::string>& endpoints,
                                     int timeout_ms, json& out, bool refresh) {
  auto cache = ctx.keystore() / "fdk.cache";
  auto pass = ctx.passphrase();
  if (!refresh) {
    if (auto cached = client::fdk_cache::load(cache, pass)) {
      out["key_source"] = "cache";
      return *cached;
    }
  }
  auto result = client::request_keys(reader, ctx.dep(), endpoints, timeout_ms);
  SystemRng rng;
  client::fdk_cache::save(cache, result.fdk, pass, rng);
  out["key_source"] = "authorities";
  for (const auto& [id, n] : result.shares_per_authority) out["shares"][id] = n;
  out["warnings"] = result.warnings;
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  return result.fdk;
}

std::map<std::string, std::string> parse_endpoints(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--endpoint expects ID=HOST:PORT, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Settings settings;
  CLI::App app{"martsia: multi-authority access control for shared documents"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  app.add_option("--config", settings.config_file, "Config file (key = value lines)");
  app.add_option("--ledger", settings.ledger, "Ledger log file");
  app.add_option("--store", settings.store, "Datastore root directory");
  app.add_option("--keystore", settings.keystore, "Actor key-store directory");
  app.add_option("--passphrase-file", settings.passphrase_file, "File holding the key-cache passphrase");
  app.add_option("--format", settings.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  Context ctx(settings);
  std::function<void()> action;

  // keys
  auto* keys = app.add_subcommand("keys", "Actor identities")->require_subcommand(1);
  std::string role_text, address;
  int bits = crypto::kDefaultRsaBits;
  auto* keys_init = keys->add_subcommand("init", "Create a key store with a fresh RSA key");
  keys_init->add_option("--role", role_text, "owner, reader, certifier or authority")->required();
  keys_init->add_option("--address", address, "Ledger account (0x + 40 hex digits)")->required();
  keys_init->add_option("--bits", bits, "RSA modulus size")->check(CLI::Range(2048, 8192));
  keys_init->callback([&] {
    action = [&] {
      auto p = client::ActorProfile::create(client::parse_role(role_text), address, ctx.keystore(),
                                            crypto::SigningKey::generate(bits));
      emit(settings, {{"address", p.address}, {"role", std::string(client::role_name(p.role))},
                      {"verify_key", (p.key_store_path / "verify_key.pem").string()}});
    };
  });
  keys->add_subcommand("show", "Print the key store's identity")->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      emit(settings, {{"address", p.address}, {"role", std::string(client::role_name(p.role))},
                      {"verify_key", (p.key_store_path / "verify_key.pem").string()}});
    };
  });

  // authority
  auto* auth = app.add_subcommand("authority", "Parameter ceremony and key issuance")->require_subcommand(1);
  std::string auth_id, network_file, serve_endpoint;
  int duration_ms = 0, io_timeout_ms = 10000;
  auto* auth_init = auth->add_subcommand("init", "Publish the shared network metadata");
  auth_init->add_option("--id", auth_id, "This authority's id")->required();
  auth_init->add_option("--network", network_file,
                        "Network file: one 'ID HOST:PORT VERIFY_KEY.pem' line per authority, in agreed order")
      ->required();
  auth_init->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      ceremony::MetadataDocument doc;
      std::istringstream in(read_text(network_file));
      auto base = fs::absolute(network_file).parent_path();
      std::string line;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string id, endpoint, key;
        if (!(ls >> id) || id[0] == '#') continue;
        if (!(ls >> endpoint >> key)) fail(Errc::Malformed, "network line needs ID HOST:PORT KEY: " + line);
        auto key_path = fs::path(key).is_absolute() ? fs::path(key) : base / key;
        doc.authorities.push_back({id, endpoint, crypto::VerifyKey::from_pem(read_text(key_path.string()))});
      }
      const auto* self = doc.find(auth_id);
      if (!self) fail(Errc::InvalidArgument, "network file does not list " + auth_id, auth_id);
      if (!(self->verify_key == p.verify_key())) {
        fail(Errc::InvalidArgument, "network file lists another key for " + auth_id, auth_id);
      }
      AuthorityFiles f{ctx.keystore()};
      write_private(f.id(), as_bytes(auth_id + "\n"));
      ceremony::Participant part(auth_id, p.address, ctx.ledger(), ctx.store());
      auto rloc = part.publish_metadata(doc);
      emit(settings, {{"authority", auth_id}, {"metadata", rloc.text()}});
    };
  });
  auth->add_subcommand("commit", "Commit to a fresh random seed")->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      AuthorityFiles f{ctx.keystore()};
      if (fs::exists(f.seed())) fail(Errc::DuplicateCommitment, "a seed is already committed", authority_id(f));
      SystemRng sys;
      auto seed = sys.draw(32);
      write_private(f.seed(), seed);  // persisted before the commitment goes public
      auto part = participant(ctx, p, f);
      FixedRng fixed(seed);
      auto c = part.commit_round(fixed);
      emit(settings, {{"authority", part.authority_id()}, {"commitment", c.digest.text()}});
    };
  });
  auth->add_subcommand("open", "Reveal the committed seed")->callback([&] {
    action = [&] {
      AuthorityFiles f{ctx.keystore()};
      auto part = participant(ctx, ctx.profile(), f);
      auto rloc = part.open_round();
      emit(settings, {{"authority", part.authority_id()}, {"opening", rloc.text()}});
    };
  });
  auth->add_subcommand("finalize", "Derive and post the public parameters")->callback([&] {
    action = [&] {
      AuthorityFiles f{ctx.keystore()};
      auto part = participant(ctx, ctx.profile(), f);
      auto params = part.finalize();
      emit(settings, {{"authority", part.authority_id()}, {"params_digest", params.params_digest.text()},
                      {"params", store::Rloc::of(params.serialize()).text()}});
    };
  });
  auth->add_subcommand("publish-keys", "Generate and publish this authority's key pair")->callback([&] {
    action = [&] {
      AuthorityFiles f{ctx.keystore()};
      if (fs::exists(f.keypair())) fail(Errc::DuplicateEntry, "key pair already generated", authority_id(f));
      auto part = participant(ctx, ctx.profile(), f);
      auto state = ceremony::observe(ctx.ledger(), ctx.store());
      if (!state.result) {
        fail(Errc::WrongPhase, std::string("ceremony is ") + std::string(ceremony::phase_name(state.phase)));
      }
      SystemRng rng;
      auto keys = part.publish_keys(*state.result, rng);
      write_private(f.keypair(), keys.keypair.serialize());
      emit(settings, {{"authority", part.authority_id()}, {"public_key", keys.rloc.text()}});
    };
  });
  auth->add_subcommand("status", "Show the ceremony as seen on the ledger")->callback([&] {
    action = [&] {
      auto state = ceremony::observe(ctx.ledger(), ctx.store());
      json j{{"authorities", state.authorities}, {"phase", std::string(ceremony::phase_name(state.phase))}};
      std::vector<std::string> committed, opened;
      for (const auto& [id, _] : state.commitments) committed.push_back(id);
      for (const auto& [id, _] : state.openings) opened.push_back(id);
      j["committed"] = committed;
      j["opened"] = opened;
      if (state.offender) j["offender"] = *state.offender;
      if (state.result) j["params_digest"] = state.result->params_digest.text();
      emit(settings, j);
    };
  });
  auto* serve = auth->add_subcommand("serve", "Answer key requests until interrupted");
  serve->add_option("--endpoint", serve_endpoint, "Listen address (default: from the network metadata)");
  serve->add_option("--duration-ms", duration_ms, "Stop after this long (0 = until SIGINT/SIGTERM)");
  serve->add_option("--io-timeout-ms", io_timeout_ms, "Per-connection I/O timeout");
  serve->callback([&] {
    action = [&] {
      AuthorityFiles f{ctx.keystore()};
      auto id = authority_id(f);
      auto state = ceremony::observe(ctx.ledger(), ctx.store());
      if (!state.result) fail(Errc::ServerNotReady, "ceremony is not finalized");
      auto keypair = crypto::AuthorityKeypair::deserialize(read_bytes(f.keypair()));
      if (serve_endpoint.empty()) {
        auto m = ctx.ledger().authority_get(id);
        if (!m || !m->metadata_rloc) fail(Errc::MissingArtifacts, "no metadata posted by " + id);
        auto doc = ceremony::MetadataDocument::decode(to_string(ctx.store().get(*m->metadata_rloc)));
        serve_endpoint = doc.find(id)->endpoint;
      }
      // Block the stop signals before any thread starts so sigtimedwait
      // below is their only consumer.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

      authority::KeyIssuer issuer(id, ctx.ledger(), ctx.store());
      issuer.ready(*state.result, std::move(keypair));
      authority::AuthorityServer server(issuer, serve_endpoint, io_timeout_ms);
      server.start();
      emit(settings, {{"authority", id}, {"endpoint", server.endpoint()}, {"status", "listening"}});
      auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(duration_ms);
      while (true) {
        timespec tick{0, 200 * 1000 * 1000};
        if (sigtimedwait(&stop_signals, nullptr, &tick) > 0) break;
        if (duration_ms > 0 && std::chrono::steady_clock::now() >= deadline) break;
      }
      server.stop();
      std::cerr << "served " << server.connections_handled() << " connections\n";
    };
  });

  // certifier
  auto* cert = app.add_subcommand("certifier", "Attribute certification")->require_subcommand(1);
  std::string reader_addr, attributes_text, reader_key;
  auto* attest = cert->add_subcommand("attest", "Attest a reader's attributes on the ledger");
  attest->add_option("--reader", reader_addr, "Reader address")->required();
  attest->add_option("--attributes", attributes_text, "Comma-separated attributes")->required();
  attest->add_option("--reader-key", reader_key, "Reader's verify key (PEM)")->required();
  attest->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      auto attributes = split_list(attributes_text);
      auto tx = client::certify_reader(p, ctx.dep(), reader_addr, reader_addr, attributes,
                                       crypto::VerifyKey::from_pem(read_text(reader_key)));
      emit(settings, {{"attributes", attributes}, {"reader", reader_addr}, {"tx", tx}});
    };
  });

  // owner
  auto* owner = app.add_subcommand("owner", "Data owner workflows")->require_subcommand(1);
  std::string case_id, slices_file;
  auto* send = owner->add_subcommand("send", "Seal, store and announce a message");
  send->add_option("--case-id", case_id, "Process instance id")->required();
  send->add_option("--slices", slices_file, "Slice-spec file (martsia-slices/1)")->required();
  send->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      SystemRng rng;
      auto r = client::send_message(p, ctx.dep(), case_id, client::parse_slice_specs(read_text(slices_file)), rng);
      emit(settings, {{"message_id", r.message_id}, {"rloc", r.rloc.text()}, {"tx", r.tx_index}});
    };
  });
  owner->add_subcommand("check", "Verify that the authorities agree on their artifacts")->callback([&] {
    action = [&] {
      auto report = client::verify_authority_consistency(ctx.dep());
      std::cout << report.to_text();
      if (!report.consistent()) fail(Errc::ConsistencyCheckFailed, "authority artifacts disagree");
    };
  });

  // reader
  auto* reader = app.add_subcommand("reader", "Reader workflows")->require_subcommand(1);
  std::vector<std::string> endpoint_specs;
  int timeout_ms = 10000;
  std::string message_id, rloc_text;
  auto* req = reader->add_subcommand("request-keys", "Collect key shares from the authorities");
  req->add_option("--endpoint", endpoint_specs, "Override an endpoint: ID=HOST:PORT (repeatable)");
  req->add_option("--timeout-ms", timeout_ms, "Per-authority timeout");
  req->callback([&] {
    action = [&] {
      json j;
      auto fdk = obtain_fdk(ctx, ctx.profile(), parse_endpoints(endpoint_specs), timeout_ms, j, true);
      j["attributes"] = fdk.attributes();
      j["gid"] = fdk.gid;
      emit(settings, j);
    };
  });
  auto* read = reader->add_subcommand("read", "Open a message");
  auto* by_id = read->add_option("--message-id", message_id, "8-digit message id");
  auto* by_rloc = read->add_option("--rloc", rloc_text, "Envelope locator (h256:...)");
  by_id->excludes(by_rloc);
  read->add_option("--endpoint", endpoint_specs, "Endpoint override used on a key-cache miss");
  read->add_option("--timeout-ms", timeout_ms, "Per-authority timeout on a key-cache miss");
  read->callback([&] {
    if (message_id.empty() && rloc_text.empty()) throw CLI::RequiredError("--message-id or --rloc");
    action = [&] {
      auto p = ctx.profile();
      json j;
      if (message_id.empty()) {
        message_id = client::find_message_by_rloc(ctx.dep(), store::Rloc::parse(rloc_text)).message_id;
      }
      ctx.ledger().message_get(message_id);  // NotFound before any key traffic
      auto fdk = obtain_fdk(ctx, p, parse_endpoints(endpoint_specs), timeout_ms, j, false);
      auto results = client::read_message(p, ctx.dep(), message_id, fdk);
      j["message_id"] = message_id;
      j["slices"] = json::array();
      for (const auto& r : results) j["slices"].push_back(slice_json(r));
      emit(settings, j);
    };
  });

  // audit
  auto* aud = app.add_subcommand("audit", "Independent verification from public state")->require_subcommand(1);
  aud->add_subcommand("verify", "Re-verify every locator and the ceremony")->callback([&] {
    action = [&] {
      auto report = client::audit(ctx.dep());
      json j{{"objects_checked", report.objects_checked}, {"ok", report.ok()}, {"problems", report.problems},
             {"records", report.records}, {"references_checked", report.references_checked}};
      emit(settings, j);
      if (!report.ok()) fail(Errc::IntegrityFailure, std::to_string(report.problems.size()) + " problem(s) found");
    };
  });
  aud->add_subcommand("dump-log", "Print the ledger log")->callback([&] {
    action = [&] {
      auto records = ctx.ledger().records();
      if (settings.format == "json") {
        json j = json::array();
        for (const auto& r : records) {
          j.push_back({{"action", r.action}, {"contract", std::string(ledger::contract_name(r.contract))},
                       {"payload", hex_encode(r.payload)}, {"sender", r.sender},
                       {"timestamp", r.timestamp}, {"tx", r.tx_index}});
        }
        std::cout << j.dump(2) << "\n";
      } else {
        for (const auto& r : records) std::cout << r.encode() << "\n";
      }
    };
  });

  // intercept
  auto* icpt = app.add_subcommand("intercept", "Secure @MARTSIA:-marked arguments of a process-engine call");
  std::string policy_text;
  std::vector<std::string> engine_args;
  icpt->add_option("--case-id", case_id, "Process instance id")->required();
  icpt->add_option("--policy", policy_text, "Policy for the sealed arguments")->required();
  icpt->add_option("args", engine_args, "Engine call arguments (after --)");
  icpt->callback([&] {
    action = [&] {
      auto p = ctx.profile();
      SystemRng rng;
      auto r = client::intercept(engine_args, p, ctx.dep(), case_id, policy_text, rng);
      json j;
      j["arguments"] = r.arguments;
      j["messages"] = json::array();
      for (const auto& rc : r.receipts) j["messages"].push_back({{"message_id", rc.message_id}, {"rloc", rc.rloc.text()}});
      emit(settings, j);
    };
  });

  try {
    app.parse(argc, argv);
    settings.load_config();
    action();
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    json j{{"error", std::string(errc_name(e.code()))}, {"message", e.what()}};
    if (!e.detail().empty()) j["detail"] = e.detail();
    emit(settings, j, std::cerr);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error=" << e.what() << "\n";
    return 1;
  }
}
