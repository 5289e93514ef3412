#include "fflp/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fflp {

namespace {

constexpr std::size_t kVariantCount = 80;

void split_every_tenth(TaskSpec& s) {
  s.variant_count = kVariantCount;
  for (std::size_t k = 0; k < kVariantCount; ++k) (k % 10 == 0 ? s.train_variants : s.eval_variants).push_back(k);
}

void check_variant(const TaskSpec& s, std::size_t variant) {
  if (variant >= s.variant_count) {
    throw std::out_of_range(s.name + ": variant " + std::to_string(variant) + " outside [0, " +
                            std::to_string(s.variant_count) + ")");
  }
}

void check_action(const TaskSpec& s, std::span<const double> action, bool done) {
  if (done) throw std::logic_error(s.name + ": step after episode end");
  if (action.size() != s.actions.size()) throw std::invalid_argument(s.name + ": action size mismatch");
}

}  // namespace

std::optional<Perturbation> Perturbation::parse(const std::string& text, std::size_t episode_length) {
  std::string body = text;
  Perturbation p;
  p.at_step = episode_length / 2;
  if (auto hash = body.find('#'); hash != std::string::npos) {
    p.channel = std::stoul(body.substr(hash + 1));
    body.erase(hash);
  }
  if (auto at = body.find('@'); at != std::string::npos) {
    p.at_step = std::stoul(body.substr(at + 1));
    body.erase(at);
  }
  if (body == "none" || body.empty()) return std::nullopt;
  if (body == "joint-freeze") {
    p.gain = 0.0;
    return p;
  }
  const std::string prefix = "joint-gain:";
  if (body.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    const std::string num = body.substr(prefix.size());
    p.gain = std::stod(num, &used);
    if (used != num.size() || !std::isfinite(p.gain)) throw std::invalid_argument("bad perturbation gain: " + text);
    return p;
  }
  throw std::invalid_argument("unknown perturbation '" + text + "' (none, joint-freeze, joint-gain:<f>)");
}

std::vector<double> Environment::perturbed(std::span<const double> action, std::size_t step) const {
  std::vector<double> a(action.begin(), action.end());
  if (perturbation_ && step >= perturbation_->at_step && perturbation_->channel < a.size()) {
    a[perturbation_->channel] *= perturbation_->gain;
  }
  return a;
}

// ---------------------------------------------------------------- point mass

PointMassDirectionTask::PointMassDirectionTask() {
  spec_.name = "point_mass_direction";
  spec_.features = {{"dir_cos", 1.0, true}, {"dir_sin", 1.0, true}, {"vx", 1.0, true}, {"vy", 1.0, true}};
  spec_.actions = {{"ax", 1.0, true}, {"ay", 1.0, true}};
  spec_.episode_length = 100;
  spec_.fitness_floor = -static_cast<double>(spec_.episode_length);
  split_every_tenth(spec_);
}

double PointMassDirectionTask::heading(std::size_t variant) {
  return 2.0 * std::numbers::pi * static_cast<double>(variant) / static_cast<double>(kVariantCount);
}

std::vector<double> PointMassDirectionTask::reset(std::uint64_t, std::size_t variant) {
  check_variant(spec_, variant);
  const double th = heading(variant);
  dir_x_ = std::cos(th);
  dir_y_ = std::sin(th);
  vx_ = vy_ = px_ = py_ = 0.0;
  t_ = 0;
  done_ = false;
  return observe();
}

std::vector<double> PointMassDirectionTask::observe() const { return {dir_x_, dir_y_, vx_, vy_}; }

StepResult PointMassDirectionTask::step(std::span<const double> action) {
  check_action(spec_, action, done_);
  std::vector<double> a = perturbed(action, t_);
  for (double& x : a)
    if (!std::isfinite(x)) x = 0.0;
  const double norm = std::hypot(a[0], a[1]);
  if (norm > 1.0) {
    a[0] /= norm;
    a[1] /= norm;
  }
  vx_ += kDt * (a[0] - kDrag * vx_);
  vy_ += kDt * (a[1] - kDrag * vy_);
  px_ += kDt * vx_;
  py_ += kDt * vy_;
  ++t_;
  done_ = t_ >= spec_.episode_length;
  return {observe(), vx_ * dir_x_ + vy_ * dir_y_, done_};
}

// ------------------------------------------------------------ velocity track

VelocityTrackingTask::VelocityTrackingTask() {
  spec_.name = "velocity_tracking";
  spec_.features = {{"target", 1.0, false}, {"v", 2.0, true}, {"error", 2.0, true}};
  spec_.actions = {{"force", kForce, true}};
  spec_.episode_length = 100;
  spec_.fitness_floor = -3.0 * static_cast<double>(spec_.episode_length);
  split_every_tenth(spec_);
}

double VelocityTrackingTask::target_speed(std::size_t variant) {
  return 0.1 + 0.9 * static_cast<double>(variant) / static_cast<double>(kVariantCount - 1);
}

std::vector<double> VelocityTrackingTask::reset(std::uint64_t, std::size_t variant) {
  check_variant(spec_, variant);
  target_ = target_speed(variant);
  v_ = 0.0;
  t_ = 0;
  done_ = false;
  return observe();
}

std::vector<double> VelocityTrackingTask::observe() const { return {target_, v_, target_ - v_}; }

StepResult VelocityTrackingTask::step(std::span<const double> action) {
  check_action(spec_, action, done_);
  const std::vector<double> a = perturbed(action, t_);
  const double f = std::isfinite(a[0]) ? std::clamp(a[0], -kForce, kForce) : 0.0;
  v_ += kDt * (f - kDrag * v_);
  ++t_;
  done_ = t_ >= spec_.episode_length;
  return {observe(), -std::abs(v_ - target_), done_};
}

// ------------------------------------------------------------------ reaching

ReachingTask::ReachingTask() {
  spec_.name = "reaching";
  spec_.features = {{"err_x", 1.0, true}, {"err_y", 1.0, true}};
  spec_.actions = {{"dq0", 1.0, true}, {"dq1", 1.0, true}};
  spec_.episode_length = 400;
  spec_.fitness_floor = -2.0 * (kLink0 + kLink1) * static_cast<double>(spec_.episode_length);
  spec_.variant_count = 1;
  spec_.train_variants = {0};
  spec_.eval_variants = {0};
}

ReachingTask::Point ReachingTask::forward_kinematics(double q0, double q1) {
  return {kLink0 * std::cos(q0) + kLink1 * std::cos(q0 + q1), kLink0 * std::sin(q0) + kLink1 * std::sin(q0 + q1)};
}

void ReachingTask::sample_goal() {
  std::uniform_real_distribution<double> radius(0.35, 0.9);
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 6.0, 2.0 * std::numbers::pi / 3.0);
  const Point ee = end_effector();
  for (;;) {
    const double r = radius(rng_), a = angle(rng_);
    const Point g{r * std::cos(a), r * std::sin(a)};
    if (std::hypot(g.x - ee.x, g.y - ee.y) >= 0.2) {
      goal_ = g;
      break;
    }
  }
  segment_start_distance_ = std::hypot(goal_.x - ee.x, goal_.y - ee.y);
}

void ReachingTask::set_goal_at_end_effector() {
  goal_ = end_effector();
  segment_start_distance_ = 0.0;
}

std::vector<double> ReachingTask::reset(std::uint64_t seed, std::size_t variant) {
  check_variant(spec_, variant);
  rng_.seed(seed);
  q0_ = kInitialQ0;
  q1_ = kInitialQ1;
  t_ = 0;
  done_ = false;
  sample_goal();
  return observe();
}

std::vector<double> ReachingTask::observe() const {
  const Point ee = end_effector();
  return {goal_.x - ee.x, goal_.y - ee.y};
}

StepResult ReachingTask::step(std::span<const double> action) {
  check_action(spec_, action, done_);
  const std::vector<double> a = perturbed(action, t_);
  const auto rate = [](double x) { return std::isfinite(x) ? std::clamp(x, -1.0, 1.0) : 0.0; };
  q0_ += kDt * kJointSpeed * rate(a[0]);
  q1_ += kDt * kJointSpeed * rate(a[1]);
  ++t_;
  const Point ee = end_effector();
  const double reward = -std::hypot(goal_.x - ee.x, goal_.y - ee.y);
  done_ = t_ >= spec_.episode_length;
  if (!done_ && t_ % kSegmentLength == 0) sample_goal();
  return {observe(), reward, done_};
}

// ----------------------------------------------------------- mini classify

MiniClassifyTask::MiniClassifyTask(Dataset data, std::size_t train_count, std::size_t images_per_episode)
    : data_(std::move(data)), train_count_(train_count) {
  if (data_.size() == 0) throw std::invalid_argument("empty dataset");
  if (train_count_ == 0 || train_count_ > data_.size()) throw std::invalid_argument("bad train split");
  spec_.name = "mini_classify";
  for (std::size_t p = 0; p < data_.pixels(); ++p) spec_.features.push_back({"px" + std::to_string(p), 255.0, false});
  for (int c = 0; c <= kMaxLabel; ++c) spec_.actions.push_back({"class" + std::to_string(c), 1.0, false});
  spec_.episode_length = images_per_episode;
  spec_.fitness_floor = -static_cast<double>(images_per_episode);
  spec_.variant_count = train_count_ < data_.size() ? 2 : 1;
  spec_.train_variants = {0};
  spec_.eval_variants = {spec_.variant_count - 1};
}

std::size_t MiniClassifyTask::predict(std::span<const double> class_rates) {
  return static_cast<std::size_t>(std::max_element(class_rates.begin(), class_rates.end()) - class_rates.begin());
}

std::vector<double> MiniClassifyTask::reset(std::uint64_t seed, std::size_t variant) {
  check_variant(spec_, variant);
  const std::size_t lo = variant == 0 ? 0 : train_count_;
  const std::size_t hi = variant == 0 ? train_count_ : data_.size();
  std::vector<std::size_t> pool(hi - lo);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = lo + i;
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  order_.clear();
  for (std::size_t i = 0; i < spec_.episode_length; ++i) order_.push_back(pool[i % pool.size()]);
  t_ = correct_ = presented_ = 0;
  done_ = false;
  return observe();
}

std::vector<double> MiniClassifyTask::observe() const {
  const auto& img = data_.images[order_[std::min(t_, order_.size() - 1)]];
  return std::vector<double>(img.begin(), img.end());
}

StepResult MiniClassifyTask::step(std::span<const double> action) {
  check_action(spec_, action, done_);
  const std::vector<double> rates = perturbed(action, t_);
  const std::size_t label = data_.labels[order_[t_]];
  const std::size_t pred = predict(rates);
  double best_other = -1.0;
  for (std::size_t c = 0; c < rates.size(); ++c)
    if (c != label) best_other = std::max(best_other, rates[c]);
  const double margin = rates[label] - best_other;
  ++presented_;
  if (pred == label) ++correct_;
  ++t_;
  done_ = t_ >= spec_.episode_length;
  return {observe(), std::isfinite(margin) ? margin : -1.0, done_};
}

// ---------------------------------------------------------------- registry

std::vector<std::string> task_names() { return {"point_mass_direction", "velocity_tracking", "reaching", "mini_classify"}; }

std::unique_ptr<Environment> make_task(const std::string& name, const std::string& dataset_path) {
  if (name == "point_mass_direction") return std::make_unique<PointMassDirectionTask>();
  if (name == "velocity_tracking") return std::make_unique<VelocityTrackingTask>();
  if (name == "reaching") return std::make_unique<ReachingTask>();
  if (name == "mini_classify") {
    Dataset d = load_dataset(dataset_path.empty() ? default_digits_path() : std::filesystem::path(dataset_path));
    const std::size_t train = std::max<std::size_t>(1, d.size() * 4 / 5);
    return std::make_unique<MiniClassifyTask>(std::move(d), train);
  }
  std::string valid;
  for (const auto& n : task_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown task '" + name + "'; valid tasks: " + valid);
}

}  // namespace fflp
