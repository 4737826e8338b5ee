#pragma once

#include "tamp/envs/environment.hpp"

namespace tamp::envs {

/// Geometric constants for Cover. None of these come from a published table;
/// they are chosen so the scripted demonstrator succeeds and grasp offsets
/// constrain later placements.
struct CoverConfig {
  double max_step = 0.1;        // per-axis gripper translation bound
  double max_grip_delta = 2.0;  // bound on |dgrip|
  double grip_threshold = 0.5;  // |grip| beyond this closes / opens
  double grasp_y_tolerance = 0.02;
  double block_width_lo = 0.10, block_width_hi = 0.16;
  double block_height_lo = 0.05, block_height_hi = 0.12;
  double target_width_lo = 0.04, target_width_hi = 0.08;
  double gap = 0.02;  // minimum spacing between initial spans
  double gripper_y_lo = 0.2, gripper_y_hi = 0.6;
  // Allowed region around a block covers this fraction of its span. Pick
  // skills do not see regions, so the default leaves the whole block graspable.
  double block_region_frac_lo = 1.0, block_region_frac_hi = 1.0;
  // Allowed region around a target is this multiple of the target width.
  double target_region_frac_lo = 0.5, target_region_frac_hi = 1.2;
  // Off-table x coordinate where injected irrelevant blocks are parked.
  double off_table_x = 5.0;
};

class CoverEnv final : public Environment {
 public:
  // Feature indices.
  enum Block { kHeight, kWidth, kBX, kBY, kGrasp };
  enum Target { kTWidth, kTX };
  enum Gripper { kGX, kGY, kGrip, kHolding };
  enum Region { kLower, kUpper };

  explicit CoverEnv(CoverConfig config = {});

  const std::string& name() const override { return name_; }
  const std::vector<ObjectType>& types() const override { return types_; }
  std::size_t action_dim() const override { return 3; }
  const std::vector<Predicate>& predicates() const override { return preds_; }
  State step(const State& x, std::span<const double> action) const override;
  Task sample_task(std::uint64_t seed, Profile profile) const override;
  std::optional<Demonstration> scripted_demo(const Task& task) const override;

  const CoverConfig& config() const { return config_; }
  ObjectType block_type() const { return types_[0]; }
  ObjectType target_type() const { return types_[1]; }
  ObjectType gripper_type() const { return types_[2]; }
  ObjectType region_type() const { return types_[3]; }

  /// Feature vector for a block parked off the table (never graspable).
  std::vector<double> parked_block(double x, double width, double height) const;

 private:
  bool in_allowed_region(const State& x, double gx) const;

  std::string name_ = "cover";
  CoverConfig config_;
  std::vector<ObjectType> types_;
  std::vector<Predicate> preds_;
};

}  // namespace tamp::envs
