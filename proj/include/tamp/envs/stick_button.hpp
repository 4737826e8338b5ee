#pragma once

#include "tamp/envs/environment.hpp"

namespace tamp::envs {

/// Geometry for Stick Button. The robot moves in the lower band of the arena
/// (y <= reach_y); buttons above it can only be pressed with the stick head.
struct StickButtonConfig {
  double max_step = 0.1;
  double force_threshold = 0.5;
  double robot_radius = 0.03;
  double press_radius = 0.04;  // robot center or stick head to button center
  double grasp_x_tolerance = 0.03;
  double reach_y = 0.5;
  double stick_length = 0.7, stick_width = 0.02;
  double holder_width = 0.06, holder_height = 0.15;
  double stick_base_lo = 0.02, stick_base_hi = 0.1;
  double button_y_lo = 0.05, button_y_hi = 0.8;
  double button_separation = 0.12;
  int train_buttons_lo = 1, train_buttons_hi = 2;
  int eval_buttons_lo = 3, eval_buttons_hi = 4;
  // The demonstrator grasps at least this far above the stick base so the
  // robot clears the holder.
  double demo_grasp_lo = 0.19;
  // Interactive variant: the snapshot draws the reachable zone. Dynamics are
  // identical.
  bool gui_variant = false;
};

class StickButtonEnv final : public Environment {
 public:
  enum Robot { kRX, kRY };
  enum Button { kBX, kBY, kPressed };
  enum Stick { kSX, kSY, kHeld };
  enum Holder { kHX, kHY };

  explicit StickButtonEnv(StickButtonConfig config = {});

  const std::string& name() const override { return name_; }
  const std::vector<ObjectType>& types() const override { return types_; }
  std::size_t action_dim() const override { return 3; }
  const std::vector<Predicate>& predicates() const override { return preds_; }
  State step(const State& x, std::span<const double> action) const override;
  Task sample_task(std::uint64_t seed, Profile profile) const override;
  std::optional<Demonstration> scripted_demo(const Task& task) const override;

  const StickButtonConfig& config() const { return config_; }
  ObjectType robot_type() const { return types_[0]; }
  ObjectType button_type() const { return types_[1]; }
  ObjectType stick_type() const { return types_[2]; }
  ObjectType holder_type() const { return types_[3]; }

  /// A button the robot center can get within press radius of.
  bool reachable(double button_y) const;
  /// Stick head position (top end of the stick).
  std::pair<double, double> stick_head(std::span<const double> stick) const;
  bool robot_hits_holder(double rx, double ry, std::span<const double> holder) const;
  bool stick_hits_holder(std::span<const double> stick,
                         std::span<const double> holder) const;

 private:
  std::string name_ = "stick_button";
  StickButtonConfig config_;
  std::vector<ObjectType> types_;
  std::vector<Predicate> preds_;
};

}  // namespace tamp::envs
