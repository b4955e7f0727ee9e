#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lrgame/configuration.hpp"
#include "lrgame/graph.hpp"
#include "lrgame/lattice.hpp"

namespace lrgame {

/// Spins on the L1 ball of radius `radius` around an agent, in x-centred
/// offset order (dx ascending, then dy ascending). Cells are '+' / '-', and
/// '.' for ball cells that fall outside the grid under free/pinned modes.
/// The cell count fixes the radius, so `cells` alone is a unique key.
struct Pattern {
  int radius = 0;
  std::string cells;

  bool operator==(const Pattern&) const = default;
};

/// Pattern around `center`. When `center_spin` is set it replaces the
/// configuration's value at `center` (pre-decision view of the agent).
Pattern extract_pattern(const Window& window, const Configuration& config, SiteIndex center,
                        int radius, std::optional<Spin> center_spin = std::nullopt);

/// Everything a strategy may look at for one decision.
struct DecisionContext {
  const Window& window;
  const Graph& graph;
  const FeelingMap& feelings;
  const Configuration& config;
  SiteIndex site;
  double time;
  std::uint32_t arrival;  // 1-based arrival index of the site's clock
  Spin coin;              // fair coin drawn for this arrival
  Spin current;           // the agent's spin just before the decision

  Pattern pattern(int radius) const { return extract_pattern(window, config, site, radius, current); }
};

struct Feedback {
  bool new_pattern = false;
  bool memory_grew = false;
  int radius = 0;
};

struct MemoryRecord {
  Pattern pattern;
  Spin decision = 1;
  int reward = 0;
};

/// The record set of the loss-eliminating strategy.
class AgentMemory {
 public:
  const MemoryRecord* find(const Pattern& pattern) const;
  /// Throws InvariantViolation on a duplicate key or a radius decrease.
  void add(MemoryRecord record);

  const std::vector<MemoryRecord>& records() const noexcept { return records_; }
  int radius() const noexcept { return radius_; }

  bool started = false;
  Spin last_decision = 0;
  int losses = 0;
  int new_patterns = 0;
  /// Last time the agent saw a new configuration or lost (0 if never).
  double last_new_or_loss = 0.0;

  void check_invariants() const;

 private:
  std::vector<MemoryRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  int radius_ = 0;
};

/// Diagnostic dump, one "radius | pattern | u | h" line per record.
void write_memory(std::ostream& out, const AgentMemory& memory);

class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual Spin decide(const DecisionContext& ctx) = 0;
  /// Called once after each decide() with the reward on the post-update configuration.
  virtual Feedback observe(const DecisionContext& ctx, Spin decision, int reward) = 0;
  virtual std::unique_ptr<Strategy> clone() const = 0;

  /// Non-null only for strategies that keep a record set.
  virtual const AgentMemory* memory() const noexcept { return nullptr; }
  virtual void check_invariants() const {}
};

struct MemoryOptions {
  /// Play a fresh coin on an unseen pattern instead of repeating u_n.
  bool coin_on_miss = false;
};

class MemoryStrategy final : public Strategy {
 public:
  explicit MemoryStrategy(MemoryOptions options = {}) : options_(options) {}

  Spin decide(const DecisionContext& ctx) override;
  Feedback observe(const DecisionContext& ctx, Spin decision, int reward) override;
  std::unique_ptr<Strategy> clone() const override { return std::make_unique<MemoryStrategy>(*this); }
  const AgentMemory* memory() const noexcept override { return &memory_; }
  void check_invariants() const override { memory_.check_invariants(); }

 private:
  enum class Branch { first, hit, miss };

  MemoryOptions options_;
  AgentMemory memory_;
  Branch pending_ = Branch::first;
  std::optional<Pattern> pending_pattern_;
};

enum class BaselineKind { constant_plus, constant_minus, coin, myopic };

std::unique_ptr<Strategy> baseline_strategy(BaselineKind kind);

/// Within-horizon estimate of T_x. Only defined for memory strategies.
double empirical_T(const Strategy& strategy);
double empirical_T(const AgentMemory& memory);

}  // namespace lrgame
