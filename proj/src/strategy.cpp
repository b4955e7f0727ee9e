#include "lrgame/strategy.hpp"

#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "lrgame/errors.hpp"

namespace lrgame {

Pattern extract_pattern(const Window& window, const Configuration& config, SiteIndex center,
                        int radius, std::optional<Spin> center_spin) {
  if (radius < 1) throw std::invalid_argument("pattern radius must be >= 1");
  Pattern p;
  p.radius = radius;
  p.cells.reserve(static_cast<std::size_t>(2 * radius * radius + 2 * radius + 1));
  for (int dx = -radius; dx <= radius; ++dx) {
    const int span = radius - std::abs(dx);
    for (int dy = -span; dy <= span; ++dy) {
      const auto cell = window.shifted(center, dx, dy);
      if (!cell) {
        p.cells.push_back('.');
        continue;
      }
      const Spin s = (center_spin && *cell == center) ? *center_spin : config[*cell];
      p.cells.push_back(s > 0 ? '+' : '-');
    }
  }
  return p;
}

const MemoryRecord* AgentMemory::find(const Pattern& pattern) const {
  auto it = index_.find(pattern.cells);
  return it == index_.end() ? nullptr : &records_[it->second];
}

void AgentMemory::add(MemoryRecord record) {
  if (record.pattern.radius < radius_) {
    throw InvariantViolation("radius-monotonicity", "record radius " + std::to_string(record.pattern.radius) +
                                                        " after radius " + std::to_string(radius_));
  }
  auto [it, inserted] = index_.emplace(record.pattern.cells, records_.size());
  if (!inserted) throw InvariantViolation("key-uniqueness", "pattern " + record.pattern.cells + " already recorded");
  radius_ = record.pattern.radius;
  records_.push_back(std::move(record));
}

void AgentMemory::check_invariants() const {
  if (index_.size() != records_.size()) {
    throw InvariantViolation("key-uniqueness", "index and record counts disagree");
  }
  int previous = 0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    auto it = index_.find(r.pattern.cells);
    if (it == index_.end() || it->second != i) {
      throw InvariantViolation("key-uniqueness", "record " + std::to_string(i) + " is not uniquely indexed");
    }
    if (r.pattern.radius < previous) {
      throw InvariantViolation("radius-monotonicity", "record " + std::to_string(i) + " shrinks the radius");
    }
    previous = r.pattern.radius;
  }
  if (!records_.empty() && records_.back().pattern.radius != radius_) {
    throw InvariantViolation("radius-monotonicity", "current radius is not the last record's");
  }
}

void write_memory(std::ostream& out, const AgentMemory& memory) {
  for (const auto& r : memory.records()) {
    out << r.pattern.radius << " | " << r.pattern.cells << " | " << static_cast<int>(r.decision) << " | "
        << r.reward << '\n';
  }
}

Spin MemoryStrategy::decide(const DecisionContext& ctx) {
  pending_pattern_.reset();
  if (!memory_.started) {
    pending_ = Branch::first;
    return ctx.coin;
  }
  Pattern seen = ctx.pattern(memory_.radius());
  if (const MemoryRecord* rec = memory_.find(seen)) {
    pending_ = Branch::hit;
    // u' * h' / |h'| with 0 / |0| := 1
    return rec->reward < 0 ? static_cast<Spin>(-rec->decision) : rec->decision;
  }
  pending_ = Branch::miss;
  pending_pattern_ = std::move(seen);
  return options_.coin_on_miss ? ctx.coin : memory_.last_decision;
}

Feedback MemoryStrategy::observe(const DecisionContext& ctx, Spin decision, int reward) {
  Feedback fb;
  switch (pending_) {
    case Branch::first:
      memory_.add({ctx.pattern(1), decision, reward});
      memory_.started = true;
      fb.new_pattern = true;
      fb.memory_grew = true;
      break;
    case Branch::hit:
      if (reward < 0) {
        memory_.add({ctx.pattern(memory_.radius() + 1), decision, reward});
        fb.memory_grew = true;
      }
      break;
    case Branch::miss:
      memory_.add({std::move(*pending_pattern_), decision, reward});
      pending_pattern_.reset();
      fb.new_pattern = true;
      fb.memory_grew = true;
      break;
  }
  memory_.last_decision = decision;
  if (reward < 0) ++memory_.losses;
  if (fb.new_pattern) ++memory_.new_patterns;
  if (fb.memory_grew || reward < 0) memory_.last_new_or_loss = ctx.time;
  fb.radius = memory_.radius();
  return fb;
}

namespace {

class ConstantStrategy final : public Strategy {
 public:
  explicit ConstantStrategy(Spin value) : value_(value) {}
  Spin decide(const DecisionContext&) override { return value_; }
  Feedback observe(const DecisionContext&, Spin, int) override { return {}; }
  std::unique_ptr<Strategy> clone() const override { return std::make_unique<ConstantStrategy>(*this); }

 private:
  Spin value_;
};

class CoinStrategy final : public Strategy {
 public:
  Spin decide(const DecisionContext& ctx) override { return ctx.coin; }
  Feedback observe(const DecisionContext&, Spin, int) override { return {}; }
  std::unique_ptr<Strategy> clone() const override { return std::make_unique<CoinStrategy>(*this); }
};

// Sign of the immediate alignment field; keeps the current spin on a tie.
class MyopicStrategy final : public Strategy {
 public:
  Spin decide(const DecisionContext& ctx) override {
    const auto adj = ctx.graph.neighbors(ctx.site);
    int field = 0;
    for (std::size_t k = 0; k < adj.size(); ++k) {
      field += ctx.feelings.at(ctx.site, static_cast<int>(k)) * ctx.config[adj[k]];
    }
    if (field == 0) return ctx.current;
    return field > 0 ? Spin{1} : Spin{-1};
  }
  Feedback observe(const DecisionContext&, Spin, int) override { return {}; }
  std::unique_ptr<Strategy> clone() const override { return std::make_unique<MyopicStrategy>(*this); }
};

}  // namespace

std::unique_ptr<Strategy> baseline_strategy(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::constant_plus:
      return std::make_unique<ConstantStrategy>(Spin{1});
    case BaselineKind::constant_minus:
      return std::make_unique<ConstantStrategy>(Spin{-1});
    case BaselineKind::coin:
      return std::make_unique<CoinStrategy>();
    case BaselineKind::myopic:
      return std::make_unique<MyopicStrategy>();
  }
  throw std::invalid_argument("unknown baseline kind");
}

double empirical_T(const AgentMemory& memory) { return memory.last_new_or_loss; }

double empirical_T(const Strategy& strategy) {
  const AgentMemory* memory = strategy.memory();
  if (memory == nullptr) throw std::logic_error("empirical_T is only defined for the memory strategy");
  return empirical_T(*memory);
}

}  // namespace lrgame
