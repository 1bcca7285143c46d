// Serial reference vs OpenMP kernels for ABE encryption and decryption.
// The policy is a conjunction of N attributes, so every row takes part in
// decryption and the per-row pairing work scales linearly with N.

#include <benchmark/benchmark.h>

#include "martsia/crypto/abe.hpp"
#include "martsia/policy/ast.hpp"

namespace {

using namespace martsia;

struct Fixture {
  crypto::PublicParameters params;
  crypto::AuthorityKeyMap public_keys;
  crypto::AuthorityKeypair keypair;

  Fixture() : params(crypto::global_setup(crypto::Seed{})) {
    SeededRng rng(1);
    keypair = crypto::auth_setup(params, "Auth1", rng);
    public_keys.emplace("Auth1", keypair.public_key);
  }

  static const Fixture& get() {
    static const Fixture f;
    return f;
  }
};

policy::Node conjunction(int n) {
  std::string text;
  for (int i = 0; i < n; ++i) text += (i ? " and " : "") + std::string("attr") + std::to_string(i) + "@Auth1";
  return policy::parse_policy(text);
}

void BM_Encrypt(benchmark::State& state, Exec exec) {
  const auto& f = Fixture::get();
  auto policy = conjunction(static_cast<int>(state.range(0)));
  SeededRng rng(2);
  auto value = rng.draw<32>();
  for (auto _ : state) {
    benchmark::DoNotOptimize(crypto::abe_encrypt(f.params, f.public_keys, policy, value, rng, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Decrypt(benchmark::State& state, Exec exec) {
  const auto& f = Fixture::get();
  int n = static_cast<int>(state.range(0));
  SeededRng rng(3);
  auto value = rng.draw<32>();
  auto ct = crypto::abe_encrypt(f.params, f.public_keys, conjunction(n), value, rng, Exec::Parallel);
  std::vector<crypto::KeyShare> shares;
  for (int i = 0; i < n; ++i) {
    shares.push_back(crypto::keygen(f.params, f.keypair, "0xbench", "attr" + std::to_string(i) + "@Auth1", rng));
  }
  auto fdk = crypto::merge_shares(shares);
  for (auto _ : state) {
    auto out = crypto::abe_decrypt(f.params, ct, fdk, exec);
    if (out != value) state.SkipWithError("decryption mismatch");
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Encrypt, serial, Exec::Serial)->RangeMultiplier(4)->Range(4, 64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Encrypt, parallel, Exec::Parallel)->RangeMultiplier(4)->Range(4, 64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Decrypt, serial, Exec::Serial)->RangeMultiplier(4)->Range(4, 64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Decrypt, parallel, Exec::Parallel)->RangeMultiplier(4)->Range(4, 64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
