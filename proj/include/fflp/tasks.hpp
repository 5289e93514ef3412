#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fflp/coding.hpp"
#include "fflp/dataset.hpp"

namespace fflp {

/// Mid-episode actuator change: from `at_step` on, action channel `channel`
/// is multiplied by `gain` (0 freezes it).
struct Perturbation {
  std::size_t at_step = 0;
  std::size_t channel = 0;
  double gain = 1.0;

  /// "none", "joint-freeze", "joint-gain:<factor>", optionally suffixed with
  /// "@<step>" and "#<channel>". Without "@", the perturbation lands at half
  /// the episode length.
  static std::optional<Perturbation> parse(const std::string& text, std::size_t episode_length);
};

/// Static description of a task: observation/action layout, episode length
/// and the variant space with its train/evaluation split.
struct TaskSpec {
  std::string name;
  std::vector<FeatureSpec> features;
  std::vector<ActionSpec> actions;
  std::size_t episode_length = 0;
  std::size_t variant_count = 1;
  std::vector<std::size_t> train_variants;
  std::vector<std::size_t> eval_variants;
  /// Lowest achievable return; assigned to candidates whose state diverges.
  double fitness_floor = 0.0;
  /// Network dimensions implied by the coding.
  std::uint32_t n_inputs() const { return static_cast<std::uint32_t>(encoded_width(features)); }
  std::uint32_t n_outputs() const { return static_cast<std::uint32_t>(decoded_width(actions)); }
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment. Deterministic given (seed, variant) and the action
/// sequence.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const TaskSpec& spec() const = 0;
  /// Throws std::out_of_range if `variant` is outside the variant space.
  virtual std::vector<double> reset(std::uint64_t seed, std::size_t variant) = 0;
  /// Throws std::logic_error after the episode is done.
  virtual StepResult step(std::span<const double> action) = 0;

  void set_perturbation(std::optional<Perturbation> p) { perturbation_ = p; }
  const std::optional<Perturbation>& perturbation() const { return perturbation_; }

 protected:
  /// Applies the perturbation schedule for the given step index.
  std::vector<double> perturbed(std::span<const double> action, std::size_t step) const;

 private:
  std::optional<Perturbation> perturbation_;
};

/// 2-D point mass driven toward a target heading. Variants are 80 headings in
/// 4.5 degree steps; every tenth (the 8 compass directions) is a training
/// variant, the other 72 are held out. Reward is the velocity component along
/// the heading. The action is clipped to the unit disk.
class PointMassDirectionTask final : public Environment {
 public:
  PointMassDirectionTask();
  const TaskSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed, std::size_t variant) override;
  StepResult step(std::span<const double> action) override;

  static double heading(std::size_t variant);

  static constexpr double kDt = 0.1;
  static constexpr double kDrag = 1.0;

 private:
  std::vector<double> observe() const;

  TaskSpec spec_;
  double dir_x_ = 1.0, dir_y_ = 0.0;
  double vx_ = 0.0, vy_ = 0.0;
  double px_ = 0.0, py_ = 0.0;
  std::size_t t_ = 0;
  bool done_ = true;
};

/// 1-D mass holding a target speed. Variants are 80 speeds; every tenth is a
/// training variant. Reward is -|v - target|.
class VelocityTrackingTask final : public Environment {
 public:
  VelocityTrackingTask();
  const TaskSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed, std::size_t variant) override;
  StepResult step(std::span<const double> action) override;

  static double target_speed(std::size_t variant);

  static constexpr double kDt = 0.1;
  static constexpr double kDrag = 0.5;
  static constexpr double kForce = 1.0;

 private:
  std::vector<double> observe() const;

  TaskSpec spec_;
  double target_ = 0.0;
  double v_ = 0.0;
  std::size_t t_ = 0;
  bool done_ = true;
};

/// Planar two-link arm with joint-velocity control and analytic kinematics.
/// Goals are resampled every `kSegmentLength` steps inside a reachable patch.
/// Reward is -distance(end effector, goal). The seed selects the goals; there
/// is a single variant.
class ReachingTask final : public Environment {
 public:
  ReachingTask();
  const TaskSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed, std::size_t variant) override;
  StepResult step(std::span<const double> action) override;

  struct Point {
    double x = 0.0, y = 0.0;
  };
  static Point forward_kinematics(double q0, double q1);
  Point end_effector() const { return forward_kinematics(q0_, q1_); }
  Point goal() const { return goal_; }
  /// Distance to the goal when the current goal segment began.
  double segment_start_distance() const { return segment_start_distance_; }

  static constexpr double kLink0 = 0.5;
  static constexpr double kLink1 = 0.5;
  static constexpr double kDt = 0.1;
  static constexpr double kJointSpeed = 1.0;
  static constexpr std::size_t kSegmentLength = 50;
  static constexpr double kInitialQ0 = 0.0;
  static constexpr double kInitialQ1 = 1.5707963267948966;

  /// Start the arm with the goal placed exactly at the end effector.
  void set_goal_at_end_effector();

 private:
  void sample_goal();
  std::vector<double> observe() const;

  TaskSpec spec_;
  std::mt19937_64 rng_;
  double q0_ = kInitialQ0, q1_ = kInitialQ1;
  Point goal_;
  double segment_start_distance_ = 0.0;
  std::size_t t_ = 0;
  bool done_ = true;
};

/// Digit classification on 8x8 images. Each environment step presents one
/// image; the "action" is the per-class output rate, the prediction its
/// argmax (ties to the lowest class) and the reward the margin of the true
/// class over the best other class. Variant 0 draws from the training split,
/// variant 1 from the held-out split.
class MiniClassifyTask final : public Environment {
 public:
  MiniClassifyTask(Dataset data, std::size_t train_count, std::size_t images_per_episode = 100);
  const TaskSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed, std::size_t variant) override;
  StepResult step(std::span<const double> action) override;

  std::size_t correct() const { return correct_; }
  std::size_t presented() const { return presented_; }
  double accuracy() const { return presented_ == 0 ? 0.0 : static_cast<double>(correct_) / presented_; }

  static std::size_t predict(std::span<const double> class_rates);

 private:
  std::vector<double> observe() const;

  TaskSpec spec_;
  Dataset data_;
  std::size_t train_count_;
  std::vector<std::size_t> order_;
  std::size_t t_ = 0;
  std::size_t correct_ = 0;
  std::size_t presented_ = 0;
  bool done_ = true;
};

std::vector<std::string> task_names();
/// Throws std::invalid_argument for an unknown name. The classification task
/// loads its dataset from `dataset_path` (or the bundled default).
std::unique_ptr<Environment> make_task(const std::string& name, const std::string& dataset_path = "");

}  // namespace fflp
