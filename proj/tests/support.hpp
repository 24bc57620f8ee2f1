#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scopemetrics/eval.hpp"
#include "scopemetrics/geometry.hpp"
#include "scopemetrics/rpn.hpp"

namespace test_support {

using namespace scopemetrics;

inline BBox random_box(std::mt19937_64& rng, double width, double height, double min_size = 2.0) {
  std::uniform_real_distribution<double> ux(0.0, width - min_size);
  std::uniform_real_distribution<double> uy(0.0, height - min_size);
  const double x0 = ux(rng);
  const double y0 = uy(rng);
  std::uniform_real_distribution<double> sw(min_size, width - x0);
  std::uniform_real_distribution<double> sh(min_size, height - y0);
  return BBox(x0, y0, x0 + sw(rng), y0 + sh(rng));
}

// Labeled batch with probabilities away from the clamp bounds and delta
// errors away from both zero and the smooth-L1 kink, so central differences
// stay well-conditioned.
inline RpnBatch random_batch(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> up(0.05, 0.95);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  std::uniform_int_distribution<int> ulabel(0, 2);

  std::vector<BBox> anchors;
  std::vector<AnchorLabel> labels;
  Eigen::ArrayXd objectness(n);
  DeltaMatrix predicted(n, 4);
  DeltaMatrix target(n, 4);
  for (int i = 0; i < n; ++i) {
    anchors.push_back(random_box(rng, 200.0, 200.0));
    AnchorLabel label;
    const int kind = i == 0 ? 0 : ulabel(rng);  // anchor 0 positive, so the batch is never all-ignore
    if (kind == 0) {
      label = {AnchorLabelValue::kPositive, 0};
    } else if (kind == 1) {
      label.value = AnchorLabelValue::kNegative;
    }
    labels.push_back(label);
    objectness[i] = up(rng);
    for (int c = 0; c < 4; ++c) {
      double t = ud(rng);
      double p;
      do {
        p = ud(rng);
      } while (std::abs(p - t) < 1e-3 || std::abs(std::abs(p - t) - 1.0) < 1e-2);
      predicted(i, c) = p;
      target(i, c) = t;
    }
  }
  return make_batch(std::move(anchors), std::move(labels), std::move(objectness),
                    std::move(predicted), std::move(target));
}

struct FiniteDifferenceGradient {
  Eigen::ArrayXd d_objectness;
  DeltaMatrix d_deltas;
};

inline FiniteDifferenceGradient finite_difference_gradient(const RpnBatch& batch,
                                                           double h = 1e-5) {
  FiniteDifferenceGradient grad;
  grad.d_objectness = Eigen::ArrayXd::Zero(batch.objectness.size());
  grad.d_deltas = DeltaMatrix::Zero(batch.predicted.rows(), 4);

  RpnBatch probe = batch;
  for (Eigen::Index i = 0; i < batch.objectness.size(); ++i) {
    probe.objectness[i] = batch.objectness[i] + h;
    const double up = rpn_loss(probe).total;
    probe.objectness[i] = batch.objectness[i] - h;
    const double down = rpn_loss(probe).total;
    probe.objectness[i] = batch.objectness[i];
    grad.d_objectness[i] = (up - down) / (2.0 * h);
  }
  for (Eigen::Index i = 0; i < batch.predicted.rows(); ++i) {
    for (int c = 0; c < 4; ++c) {
      probe.predicted(i, c) = batch.predicted(i, c) + h;
      const double up = rpn_loss(probe).total;
      probe.predicted(i, c) = batch.predicted(i, c) - h;
      const double down = rpn_loss(probe).total;
      probe.predicted(i, c) = batch.predicted(i, c);
      grad.d_deltas(i, c) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

inline bool close_rel(double a, double b, double rel, double floor = 1e-9) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), floor});
}

// Small spatial-AP scenario over a few classes and frames, with a mix of
// jittered copies of ground truth and unrelated boxes.
struct ApScenario {
  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts;
};

inline ApScenario random_ap_scenario(std::mt19937_64& rng, int max_dets_per_class = 12) {
  static const ToolClass pool[] = {ToolClass::kGrasper, ToolClass::kHook, ToolClass::kClipper};
  std::uniform_int_distribution<int> u_classes(1, 3);
  std::uniform_int_distribution<long> u_frames(1, 4);
  std::uniform_real_distribution<double> u_conf(0.0, 1.0);
  std::uniform_real_distribution<double> u_jitter(-12.0, 12.0);

  ApScenario scenario;
  const int n_classes = u_classes(rng);
  const long n_frames = u_frames(rng);
  bool any_gt = false;
  for (int ci = 0; ci < n_classes; ++ci) {
    const ToolClass tool = pool[ci];
    std::uniform_int_distribution<int> u_gt(ci == 0 ? 1 : 0, 6);
    const int n_gt = u_gt(rng);
    any_gt = any_gt || n_gt > 0;
    std::vector<BBox> boxes;
    for (int g = 0; g < n_gt; ++g) {
      std::uniform_int_distribution<long> u_frame(0, n_frames - 1);
      const BBox box = random_box(rng, 180.0, 180.0, 8.0);
      scenario.gts.push_back(GroundTruthBox{"v", u_frame(rng), tool, box});
    }
    std::uniform_int_distribution<int> u_det(0, max_dets_per_class);
    const int n_det = u_det(rng);
    for (int d = 0; d < n_det; ++d) {
      std::uniform_int_distribution<long> u_frame(0, n_frames - 1);
      if (n_gt > 0 && u_conf(rng) < 0.6) {
        std::uniform_int_distribution<std::size_t> u_pick(0, scenario.gts.size() - 1);
        const GroundTruthBox& gt = scenario.gts[u_pick(rng)];
        const double w = gt.box.width();
        const double h = gt.box.height();
        const Point2 c = centroid(gt.box);
        const double cx = std::clamp(c.x() + u_jitter(rng), w / 2.0, 200.0 - w / 2.0);
        const double cy = std::clamp(c.y() + u_jitter(rng), h / 2.0, 200.0 - h / 2.0);
        const BBox box(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
        scenario.dets.push_back(Detection{"v", gt.frame_index, tool, box, u_conf(rng)});
      } else {
        scenario.dets.push_back(
            Detection{"v", u_frame(rng), tool, random_box(rng, 180.0, 180.0, 8.0), u_conf(rng)});
      }
    }
  }
  (void)any_gt;  // class 0 always carries at least one ground truth
  return scenario;
}

class TempDir {
 public:
  explicit TempDir(const std::string& prefix) {
    const auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    path_ = base / (prefix + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace test_support
