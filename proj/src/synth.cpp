#include "txg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "txg/csv.hpp"
#include "txg/error.hpp"
#include "txg/rng.hpp"

namespace txg {

using nlohmann::ordered_json;

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kConfig, "invalid scenario: " + what);
  };
  auto fraction_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!fraction_ok(trader_fraction) || !fraction_ok(mesh_fraction) ||
      !fraction_ok(pattern_noise)) {
    fail("fractions must lie in [0, 1]");
  }
  if (non_transfer_rate < 0.0 || failed_transfer_rate < 0.0) fail("negative noise rate");
  if (mesh_transfers_min == 0 || mesh_transfers_min > mesh_transfers_max) {
    fail("mesh transfer range must satisfy 1 <= min <= max");
  }
  if (deposit_events_min == 0 || deposit_events_min > deposit_events_max) {
    fail("deposit event range must satisfy 1 <= min <= max");
  }
  if (max_group_size < 2) fail("max_group_size must be >= 2");
  if (amount_min_decade < 1 || amount_min_decade >= amount_max_decade ||
      amount_max_decade > 18) {
    fail("amount decades must satisfy 1 <= min < max <= 18");
  }
  if (transfers_per_block == 0) fail("transfers_per_block must be >= 1");
  if (inter_exchange_transfers > 0 && exchanges.size() < 2) {
    fail("inter-exchange traffic needs at least two exchanges");
  }
  for (const auto& e : exchanges) {
    if (e.main_wallets == 0) fail("exchange '" + e.label + "' has no main wallet");
    if (e.deposits > users) fail("exchange '" + e.label + "' has more deposits than users");
    if (e.withdrawals > users) fail("exchange '" + e.label + "' withdraws to more users than exist");
    if (e.main_wallets > 1 && e.sweeps_per_wallet == 0) {
      fail("exchange '" + e.label + "' secondary wallets need sweeps_per_wallet >= 1");
    }
  }
}

namespace {

void get_if(const ordered_json& j, const char* key, auto& target) {
  if (j.contains(key)) j.at(key).get_to(target);
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  ScenarioConfig c;
  try {
    const auto j = ordered_json::parse(text);
    get_if(j, "seed", c.seed);
    get_if(j, "users", c.users);
    get_if(j, "trader_fraction", c.trader_fraction);
    get_if(j, "mesh_fraction", c.mesh_fraction);
    get_if(j, "mesh_edges", c.mesh_edges);
    get_if(j, "mesh_transfers_min", c.mesh_transfers_min);
    get_if(j, "mesh_transfers_max", c.mesh_transfers_max);
    get_if(j, "group_size_exponent", c.group_size_exponent);
    get_if(j, "max_group_size", c.max_group_size);
    get_if(j, "deposit_events_min", c.deposit_events_min);
    get_if(j, "deposit_events_max", c.deposit_events_max);
    get_if(j, "inter_exchange_transfers", c.inter_exchange_transfers);
    get_if(j, "pattern_noise", c.pattern_noise);
    get_if(j, "non_transfer_rate", c.non_transfer_rate);
    get_if(j, "failed_transfer_rate", c.failed_transfer_rate);
    get_if(j, "amount_min_decade", c.amount_min_decade);
    get_if(j, "amount_max_decade", c.amount_max_decade);
    get_if(j, "start_block", c.start_block);
    get_if(j, "transfers_per_block", c.transfers_per_block);
    get_if(j, "genesis_ms", c.genesis_ms);
    get_if(j, "block_time_ms", c.block_time_ms);
    if (j.contains("exchanges")) {
      for (const auto& e : j.at("exchanges")) {
        ExchangeSpec spec;
        get_if(e, "label", spec.label);
        get_if(e, "deposits", spec.deposits);
        get_if(e, "main_wallets", spec.main_wallets);
        get_if(e, "withdrawals", spec.withdrawals);
        get_if(e, "sweeps_per_wallet", spec.sweeps_per_wallet);
        c.exchanges.push_back(spec);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scenario_from_json(text);
}

std::string scenario_to_json(const ScenarioConfig& c) {
  ordered_json exchanges = ordered_json::array();
  for (const auto& e : c.exchanges) {
    exchanges.push_back({{"label", e.label},
                         {"deposits", e.deposits},
                         {"main_wallets", e.main_wallets},
                         {"withdrawals", e.withdrawals},
                         {"sweeps_per_wallet", e.sweeps_per_wallet}});
  }
  const ordered_json j = {
      {"seed", c.seed},
      {"exchanges", exchanges},
      {"users", c.users},
      {"trader_fraction", c.trader_fraction},
      {"mesh_fraction", c.mesh_fraction},
      {"mesh_edges", c.mesh_edges},
      {"mesh_transfers_min", c.mesh_transfers_min},
      {"mesh_transfers_max", c.mesh_transfers_max},
      {"group_size_exponent", c.group_size_exponent},
      {"max_group_size", c.max_group_size},
      {"deposit_events_min", c.deposit_events_min},
      {"deposit_events_max", c.deposit_events_max},
      {"inter_exchange_transfers", c.inter_exchange_transfers},
      {"pattern_noise", c.pattern_noise},
      {"non_transfer_rate", c.non_transfer_rate},
      {"failed_transfer_rate", c.failed_transfer_rate},
      {"amount_min_decade", c.amount_min_decade},
      {"amount_max_decade", c.amount_max_decade},
      {"start_block", c.start_block},
      {"transfers_per_block", c.transfers_per_block},
      {"genesis_ms", c.genesis_ms},
      {"block_time_ms", c.block_time_ms},
  };
  return j.dump(2) + "\n";
}

const char* to_string(Role role) {
  switch (role) {
    case Role::kMain: return "main";
    case Role::kDeposit: return "deposit";
    case Role::kTrader: return "trader";
    case Role::kOrganic: return "organic";
  }
  return "unknown";
}

namespace {

enum class Kind : std::uint8_t { kDeposit, kSweep, kWithdrawal, kInter, kUserPair };

// One scheduled interaction; fields are account indices except for kDeposit
// where `b` is the deposit's position within exchange `a`.
struct Activity {
  Kind kind;
  std::uint32_t a;
  std::uint32_t b;
};

class Generator {
 public:
  Generator(const ScenarioConfig& config, const RecordSink& sink)
      : config_(config), sink_(sink), rng_(config.seed) {}

  GroundTruth run();

 private:
  std::uint32_t add_account(Role role, int exchange);
  std::string fresh_address();
  Planck amount();
  void plan_exchanges();
  void plan_users();
  void emit_activity(const Activity& act);
  void emit_transfer(std::uint32_t from, std::uint32_t to, Planck value);
  void emit_noise();
  void emit(ExtrinsicRecord rec);
  std::uint64_t current_block() const {
    return config_.start_block + transfers_ / config_.transfers_per_block;
  }
  std::uint32_t user_find(std::uint32_t u);

  const ScenarioConfig& config_;
  const RecordSink& sink_;
  Rng rng_;
  GroundTruth truth_;

  std::vector<AccountId> names_;
  std::vector<int> exchange_of_;  // -1 for users
  std::vector<bool> transacts_;
  std::unordered_set<std::string> used_;
  std::uint32_t users_ = 0;
  std::vector<std::uint32_t> user_parent_;

  // Per exchange: main account indices, deposit indices, depositor, owner, noisy flag.
  struct Planned {
    std::vector<std::uint32_t> mains;
    std::vector<std::uint32_t> deposits;
    std::vector<std::uint32_t> depositor;
    std::vector<std::uint32_t> owner;
    std::vector<bool> noisy;
  };
  std::vector<Planned> planned_;
  std::vector<Activity> activities_;
  std::uint64_t transfers_ = 0;
};

std::string Generator::fresh_address() {
  static constexpr char kBase58[] =
      "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
  for (;;) {
    std::string s = "1";
    for (int i = 0; i < 47; ++i) s.push_back(kBase58[rng_.below(58)]);
    if (used_.insert(s).second) return s;
  }
}

std::uint32_t Generator::add_account(Role role, int exchange) {
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(fresh_address());
  exchange_of_.push_back(exchange);
  transacts_.push_back(false);
  truth_.accounts[names_.back()] = AccountTruth{role, exchange};
  return id;
}

Planck Generator::amount() {
  const auto decade = static_cast<int>(rng_.between(
      static_cast<std::uint64_t>(config_.amount_min_decade),
      static_cast<std::uint64_t>(config_.amount_max_decade - 1)));
  std::uint64_t lo = 1;
  for (int i = 0; i < decade; ++i) lo *= 10;
  return rng_.between(lo, lo * 10 - 1);
}

std::uint32_t Generator::user_find(std::uint32_t u) {
  while (user_parent_[u] != u) {
    user_parent_[u] = user_parent_[user_parent_[u]];
    u = user_parent_[u];
  }
  return u;
}

void Generator::plan_exchanges() {
  std::vector<std::uint32_t> pool(users_);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t e = 0; e < config_.exchanges.size(); ++e) {
    const ExchangeSpec& spec = config_.exchanges[e];
    const int ex = static_cast<int>(e);
    Planned p;
    ExchangeTruth t;
    t.label = spec.label.empty() ? "exchange-" + std::to_string(e + 1) : spec.label;
    for (std::size_t k = 0; k < spec.main_wallets; ++k) {
      p.mains.push_back(add_account(Role::kMain, ex));
      t.mains.push_back(names_.back());
    }
    // Distinct depositors: partial Fisher-Yates over the user pool.
    for (std::size_t i = 0; i < spec.deposits; ++i) {
      std::swap(pool[i], pool[i + rng_.below(users_ - i)]);
    }
    for (std::size_t i = 0; i < spec.deposits; ++i) {
      p.deposits.push_back(add_account(Role::kDeposit, ex));
      p.depositor.push_back(pool[i]);
      p.owner.push_back(p.mains[i % p.mains.size()]);
      p.noisy.push_back(rng_.chance(config_.pattern_noise));
      t.deposits.push_back(names_.back());
      t.deposit_owner.push_back(names_[p.owner.back()]);
      if (p.noisy.back()) t.noisy_deposits.push_back(names_.back());
      const std::size_t events =
          rng_.between(config_.deposit_events_min, config_.deposit_events_max);
      for (std::size_t k = 0; k < events; ++k) {
        activities_.push_back({Kind::kDeposit, static_cast<std::uint32_t>(e),
                               static_cast<std::uint32_t>(i)});
      }
    }
    for (std::size_t k = 1; k < p.mains.size(); ++k) {
      for (std::size_t s = 0; s < spec.sweeps_per_wallet; ++s) {
        activities_.push_back({Kind::kSweep, p.mains[k], p.mains[0]});
      }
    }
    for (std::size_t i = 0; i < spec.withdrawals; ++i) {
      std::swap(pool[i], pool[i + rng_.below(users_ - i)]);
    }
    for (std::size_t i = 0; i < spec.withdrawals; ++i) {
      activities_.push_back({Kind::kWithdrawal, p.mains[0], pool[i]});
    }
    std::sort(t.noisy_deposits.begin(), t.noisy_deposits.end());
    planned_.push_back(std::move(p));
    truth_.exchanges.push_back(std::move(t));
  }
  const std::size_t k = planned_.size();
  for (std::size_t i = 0; i < config_.inter_exchange_transfers; ++i) {
    const auto from = rng_.below(k);
    auto to = rng_.below(k - 1);
    if (to >= from) ++to;
    activities_.push_back({Kind::kInter, planned_[from].mains[0], planned_[to].mains[0]});
  }
}

void Generator::plan_users() {
  if (config_.mesh_edges == 0) return;
  const auto traders = static_cast<std::uint32_t>(
      std::llround(static_cast<double>(users_) * config_.trader_fraction));
  const std::uint32_t organic = users_ - traders;
  const auto mesh = static_cast<std::uint32_t>(
      std::llround(static_cast<double>(organic) * config_.mesh_fraction));

  auto pair_transfers = [&](std::uint32_t u, std::uint32_t v) {
    const std::size_t count =
        rng_.between(config_.mesh_transfers_min, config_.mesh_transfers_max);
    for (std::size_t i = 0; i < count; ++i) activities_.push_back({Kind::kUserPair, u, v});
  };

  // Preferential attachment over users [traders, traders + mesh).
  const std::uint32_t first = traders;
  const std::size_t m = config_.mesh_edges;
  std::vector<std::uint32_t> endpoints;
  const std::uint32_t seed_size = static_cast<std::uint32_t>(std::min<std::size_t>(m + 1, mesh));
  for (std::uint32_t i = 0; i < seed_size; ++i) {
    for (std::uint32_t j = i + 1; j < seed_size; ++j) {
      pair_transfers(first + i, first + j);
      endpoints.push_back(first + i);
      endpoints.push_back(first + j);
    }
  }
  for (std::uint32_t i = seed_size; i < mesh; ++i) {
    std::vector<std::uint32_t> targets;
    while (targets.size() < m) {
      const std::uint32_t t = endpoints[rng_.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (std::uint32_t t : targets) {
      pair_transfers(first + i, t);
      endpoints.push_back(first + i);
      endpoints.push_back(t);
    }
  }

  // Small groups over the remaining organic users, each a random tree.
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t s = 2; s <= config_.max_group_size; ++s) {
    total += std::pow(static_cast<double>(s), -config_.group_size_exponent);
    cumulative.push_back(total);
  }
  std::uint32_t next = first + mesh;
  while (next + 1 < users_) {
    const double r = rng_.unit() * total;
    const auto pick = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    const std::uint32_t size = static_cast<std::uint32_t>(
        std::min<std::size_t>(2 + std::min(pick, cumulative.size() - 1), users_ - next));
    for (std::uint32_t j = 1; j < size; ++j) {
      pair_transfers(next + j, next + static_cast<std::uint32_t>(rng_.below(j)));
    }
    next += size;
  }
}

void Generator::emit(ExtrinsicRecord rec) {
  rec.block_number = current_block();
  rec.timestamp = config_.genesis_ms +
                  static_cast<std::int64_t>(rec.block_number) * config_.block_time_ms;
  ++truth_.records;
  sink_(rec);
}

void Generator::emit_transfer(std::uint32_t from, std::uint32_t to, Planck value) {
  ExtrinsicRecord rec;
  rec.module_id = "Balances";
  static constexpr const char* kCalls[] = {"transfer", "transfer_keep_alive", "transfer_all",
                                           "Transfer"};
  rec.call_id = kCalls[rng_.below(4)];
  rec.is_signed = true;
  rec.success = true;
  rec.sender = names_[from];
  rec.recipient = names_[to];
  rec.amount_planck = value;
  emit(std::move(rec));
  ++transfers_;

  transacts_[from] = true;
  transacts_[to] = true;
  const int ef = exchange_of_[from];
  const int et = exchange_of_[to];
  const EdgeAggregate agg{value, 1};
  FluxPartition& c = truth_.categories;
  if (ef >= 0 && et >= 0) {
    if (ef == et) {
      c.intra_exchange += agg;
    } else {
      c.inter_exchange += agg;
      truth_.inter_exchange[static_cast<std::size_t>(ef)][static_cast<std::size_t>(et)] += agg;
    }
  } else if (ef >= 0 || et >= 0) {
    c.user_exchange += agg;
    (ef >= 0 ? c.exchange_to_user : c.user_to_exchange) += agg;
  } else {
    c.intra_user += agg;
    const std::uint32_t a = user_find(from);
    const std::uint32_t b = user_find(to);
    if (a != b) user_parent_[std::max(a, b)] = std::min(a, b);
  }
  c.total_tx += 1;
  c.total_flux += value;

  const auto noise = [this](double rate, auto&& fn) {
    auto whole = static_cast<std::size_t>(rate);
    if (rng_.chance(rate - static_cast<double>(whole))) ++whole;
    for (std::size_t i = 0; i < whole; ++i) fn();
  };
  noise(config_.non_transfer_rate, [this] { emit_noise(); });
  noise(config_.failed_transfer_rate, [this] {
    ExtrinsicRecord rec;
    rec.module_id = "Balances";
    rec.call_id = "transfer";
    rec.is_signed = true;
    rec.success = false;
    rec.sender = names_[rng_.below(names_.size())];
    rec.recipient = names_[rng_.below(names_.size())];
    rec.amount_planck = amount();
    emit(std::move(rec));
  });
}

void Generator::emit_noise() {
  struct Call {
    const char* module;
    const char* call;
    bool is_signed;
  };
  static constexpr Call kCalls[] = {
      {"Staking", "bond", true},       {"Staking", "nominate", true},
      {"Democracy", "vote", true},     {"Council", "vote", true},
      {"Balances", "set_balance", true}, {"Balances", "transfer", false},
      {"Timestamp", "set", false},     {"Utility", "batch", true},
  };
  const Call& call = kCalls[rng_.below(std::size(kCalls))];
  ExtrinsicRecord rec;
  rec.module_id = call.module;
  rec.call_id = call.call;
  rec.is_signed = call.is_signed;
  rec.success = true;
  if (call.is_signed || std::string_view(call.module) == "Balances") {
    rec.sender = names_[rng_.below(names_.size())];
  }
  if (std::string_view(call.module) == "Balances") {
    rec.recipient = names_[rng_.below(names_.size())];
    rec.amount_planck = amount();
  }
  emit(std::move(rec));
}

void Generator::emit_activity(const Activity& act) {
  switch (act.kind) {
    case Kind::kDeposit: {
      const Planned& p = planned_[act.a];
      const std::uint32_t deposit = p.deposits[act.b];
      const Planck value = amount();
      emit_transfer(p.depositor[act.b], deposit, value);
      if (p.noisy[act.b]) {
        const Planck leak = value / 2;
        emit_transfer(deposit, p.owner[act.b], value - leak);
        emit_transfer(deposit, static_cast<std::uint32_t>(rng_.below(users_)), leak);
      } else {
        emit_transfer(deposit, p.owner[act.b], value);
      }
      break;
    }
    case Kind::kUserPair:
      if (rng_.below(2) == 0) {
        emit_transfer(act.a, act.b, amount());
      } else {
        emit_transfer(act.b, act.a, amount());
      }
      break;
    case Kind::kSweep:
    case Kind::kWithdrawal:
    case Kind::kInter:
      emit_transfer(act.a, act.b, amount());
      break;
  }
}

GroundTruth Generator::run() {
  config_.validate();
  users_ = static_cast<std::uint32_t>(config_.users);
  const auto traders = static_cast<std::uint32_t>(
      std::llround(static_cast<double>(users_) * config_.trader_fraction));
  for (std::uint32_t i = 0; i < users_; ++i) {
    add_account(i < traders ? Role::kTrader : Role::kOrganic, -1);
  }
  user_parent_.resize(users_);
  std::iota(user_parent_.begin(), user_parent_.end(), 0u);
  truth_.inter_exchange.assign(config_.exchanges.size(),
                               std::vector<CategoryTotals>(config_.exchanges.size()));

  plan_exchanges();
  plan_users();
  rng_.shuffle(activities_);
  for (const auto& act : activities_) emit_activity(act);

  truth_.transfers = transfers_;
  truth_.transacting_accounts =
      static_cast<std::uint64_t>(std::count(transacts_.begin(), transacts_.end(), true));
  std::vector<std::uint64_t> sizes(users_, 0);
  for (std::uint32_t u = 0; u < users_; ++u) {
    if (transacts_[u]) ++sizes[user_find(u)];
  }
  for (std::uint64_t s : sizes) {
    if (s > 0) truth_.user_cluster_sizes.push_back(s);
  }
  std::sort(truth_.user_cluster_sizes.rbegin(), truth_.user_cluster_sizes.rend());
  return std::move(truth_);
}

}  // namespace

GroundTruth generate(const ScenarioConfig& config, const RecordSink& sink) {
  return Generator(config, sink).run();
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& dir) {
  {
    auto out = csv::open_output(dir / "roles.csv");
    out << "address,role,exchange\n";
    for (const auto& [address, t] : truth.accounts) {
      out << address << ',' << to_string(t.role) << ','
          << (t.exchange >= 0 ? csv::escape(truth.exchanges[static_cast<std::size_t>(t.exchange)].label)
                              : "")
          << '\n';
    }
  }
  {
    auto out = csv::open_output(dir / "labels.csv");
    out << "address,label\n";
    for (const auto& e : truth.exchanges) {
      for (const auto& m : e.mains) out << m << ',' << csv::escape(e.label) << '\n';
    }
  }
  auto totals = [](const CategoryTotals& c) {
    return ordered_json{{"tx_count", c.tx_count}, {"flux_planck", to_string(c.flux)}};
  };
  ordered_json exchanges = ordered_json::array();
  for (std::size_t i = 0; i < truth.exchanges.size(); ++i) {
    const auto& e = truth.exchanges[i];
    ordered_json inter = ordered_json::array();
    for (std::size_t j = 0; j < truth.exchanges.size(); ++j) {
      inter.push_back(totals(truth.inter_exchange[i][j]));
    }
    exchanges.push_back({{"label", e.label},
                         {"main_addresses", e.mains},
                         {"deposit_count", e.deposits.size()},
                         {"noisy_deposits", e.noisy_deposits},
                         {"inter_exchange_to", inter}});
  }
  const auto& c = truth.categories;
  const ordered_json j = {
      {"records", truth.records},
      {"transfers", truth.transfers},
      {"transacting_accounts", truth.transacting_accounts},
      {"total_flux_planck", to_string(c.total_flux)},
      {"categories",
       {{"intra_exchange", totals(c.intra_exchange)},
        {"inter_exchange", totals(c.inter_exchange)},
        {"user_exchange", totals(c.user_exchange)},
        {"intra_user", totals(c.intra_user)},
        {"user_to_exchange", totals(c.user_to_exchange)},
        {"exchange_to_user", totals(c.exchange_to_user)}}},
      {"exchanges", exchanges},
      {"user_cluster_sizes", truth.user_cluster_sizes},
  };
  csv::open_output(dir / "truth.json") << j.dump(2) << '\n';
}

ScenarioConfig reference_scenario(std::uint64_t seed, double scale) {
  auto scaled = [scale](std::size_t v) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(v) * scale));
  };
  ScenarioConfig c;
  c.seed = seed;
  c.users = scaled(10'000);
  c.exchanges = {
      {"Atlas", scaled(2'000), 2, 3, 4},
      {"Borealis", scaled(1'500), 1, 3, 3},
      {"Cobalt", scaled(1'000), 1, 2, 3},
      {"Dune", scaled(600), 1, 2, 3},
      {"Ember", scaled(400), 1, 1, 3},
  };
  c.inter_exchange_transfers = scaled(200);
  return c;
}

}  // namespace txg
