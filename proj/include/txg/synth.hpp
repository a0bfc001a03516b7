#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "txg/analytics.hpp"
#include "txg/ingest.hpp"

namespace txg {

struct ExchangeSpec {
  std::string label;
  std::size_t deposits = 100;
  /// Wallets beyond the first sweep their deposits' funds into the first.
  std::size_t main_wallets = 1;
  /// Distinct users paid directly by the first main wallet.
  std::size_t withdrawals = 0;
  std::size_t sweeps_per_wallet = 3;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::vector<ExchangeSpec> exchanges;

  std::size_t users = 1000;
  /// Share of users that only ever transact with exchanges.
  double trader_fraction = 0.4;
  /// Share of the remaining (organic) users joining the preferential-
  /// attachment mesh; the rest form small isolated groups.
  double mesh_fraction = 0.7;
  /// Attachment edges per new mesh member; 0 disables user-to-user traffic.
  std::size_t mesh_edges = 2;
  std::size_t mesh_transfers_min = 1;
  std::size_t mesh_transfers_max = 3;
  /// Group sizes s in [2, max_group_size] drawn with weight s^-exponent.
  double group_size_exponent = 2.0;
  std::size_t max_group_size = 20;

  /// Deposit events per deposit address (user -> deposit -> main).
  std::size_t deposit_events_min = 1;
  std::size_t deposit_events_max = 3;
  /// Total main -> main transfers between distinct exchanges.
  std::size_t inter_exchange_transfers = 0;

  /// Probability that a deposit address leaks half of each deposit to a
  /// random user, breaking the forwarding pattern.
  double pattern_noise = 0.0;
  /// Expected non-transfer extrinsics emitted per transfer.
  double non_transfer_rate = 0.0;
  /// Expected failed transfer extrinsics emitted per transfer.
  double failed_transfer_rate = 0.0;

  /// Amounts: decade d uniform in [min, max), mantissa uniform in [10^d, 10^(d+1)).
  int amount_min_decade = 9;
  int amount_max_decade = 13;

  std::uint64_t start_block = 1;
  std::size_t transfers_per_block = 4;
  std::int64_t genesis_ms = 1'590'507'378'000;
  std::int64_t block_time_ms = 6'000;

  /// Throws Error(kConfig).
  void validate() const;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

enum class Role { kMain, kDeposit, kTrader, kOrganic };
const char* to_string(Role role);

struct AccountTruth {
  Role role = Role::kOrganic;
  int exchange = -1;  // index into GroundTruth::exchanges
};

struct ExchangeTruth {
  std::string label;
  std::vector<AccountId> mains;      // first is the primary wallet
  std::vector<AccountId> deposits;
  std::vector<AccountId> noisy_deposits;  // subset of deposits
  std::vector<AccountId> deposit_owner;   // main wallet per deposit
};

struct GroundTruth {
  std::map<AccountId, AccountTruth> accounts;
  std::vector<ExchangeTruth> exchanges;
  FluxPartition categories;
  /// [from][to] main->main traffic between exchanges.
  std::vector<std::vector<CategoryTotals>> inter_exchange;
  std::uint64_t records = 0;  // lines emitted, noise included
  std::uint64_t transfers = 0;
  std::uint64_t transacting_accounts = 0;
  /// Sizes of connected user groups in the transfer graph, descending.
  std::vector<std::uint64_t> user_cluster_sizes;
};

using RecordSink = std::function<void(const ExtrinsicRecord&)>;

/// Emits the scenario's records in non-decreasing block order. Output is a
/// pure function of the config.
GroundTruth generate(const ScenarioConfig& config, const RecordSink& sink);

/// truth.json, roles.csv (address,role,exchange) and labels.csv
/// (address,label for every main wallet).
void save_truth(const GroundTruth& truth, const std::filesystem::path& dir);

/// Five-exchange scenario with one two-wallet exchange, used by tests and
/// as the CLI's example config. `scale` multiplies all population sizes.
ScenarioConfig reference_scenario(std::uint64_t seed, double scale = 1.0);

}  // namespace txg
