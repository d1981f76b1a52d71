#pragma once

#include <map>
#include <string>
#include <vector>

#include "pastegen/annotations.hpp"
#include "pastegen/box.hpp"

namespace pastegen {

struct Detection {
    std::string label;
    BoundingBox box;
    double score = 0.0;
};

struct EvalConfig {
    enum class Interp { AllPoint, Voc11 };

    double iou_threshold = 0.5;
    double min_box_width = 50.0; // ground-truth boxes below this size are excluded
    double min_box_height = 30.0;
    Interp interpolation = Interp::AllPoint;
};

/// TP/FP flags aligned with the input detections. Detections are processed
/// in descending score order (ties by input order); each one matches the
/// unmatched same-label ground truth with the highest IoU when that IoU
/// reaches the threshold. Ground truths must be pre-filtered by min_box.
std::vector<bool> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<Annotation>& ground_truths,
                                   const EvalConfig& cfg);

struct ScoredFlag {
    double score = 0.0;
    bool is_tp = false;
};

/// AP over one class. All-point: area under the precision envelope.
/// Voc11: mean of the envelope at recalls {0, 0.1, ..., 1.0}.
/// Throws NoGroundTruth when num_gt < 1.
double average_precision(std::vector<ScoredFlag> flags, int num_gt,
                         EvalConfig::Interp interpolation);

struct ApResult {
    std::map<std::string, double> per_class;
    double map = 0.0;
    std::vector<std::string> skipped; // classes with detections but no ground truth
};

/// Full evaluation over aligned per-image detection and ground-truth lists.
/// mAP averages the classes with at least one (size-filtered) ground truth.
ApResult evaluate_detections(const std::vector<std::vector<Detection>>& detections,
                             const std::vector<std::vector<Annotation>>& ground_truths,
                             const EvalConfig& cfg);

/// COCO-style results file: a JSON array of
/// {image_id, category_id (or category), bbox [x,y,w,h], score}.
std::vector<std::pair<int, Detection>> parse_detections_file(
    const std::string& path, const CocoDataset& ground_truth);

/// Evaluate a detections file against a generated dataset's COCO annotations.
ApResult evaluate_files(const std::string& coco_gt_path,
                        const std::string& detections_path, const EvalConfig& cfg);

/// Per-class AP table plus the mAP row, as aligned text.
std::string format_ap_table(const ApResult& result);

} // namespace pastegen
