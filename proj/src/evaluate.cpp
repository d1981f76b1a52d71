#include "pastegen/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

using json = nlohmann::json;

bool passes_size_filter(const BoundingBox& box, const EvalConfig& cfg) {
    return box.width() >= cfg.min_box_width && box.height() >= cfg.min_box_height;
}

} // namespace

std::vector<bool> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<Annotation>& ground_truths,
                                   const EvalConfig& cfg) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    std::vector<bool> gt_used(ground_truths.size(), false);
    std::vector<bool> flags(detections.size(), false);
    for (const std::size_t di : order) {
        const Detection& det = detections[di];
        double best_iou = 0.0;
        int best_gt = -1;
        for (std::size_t gi = 0; gi < ground_truths.size(); ++gi) {
            if (gt_used[gi] || ground_truths[gi].label != det.label)
                continue;
            const double overlap = iou(det.box, ground_truths[gi].box);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0 && best_iou >= cfg.iou_threshold) {
            gt_used[best_gt] = true;
            flags[di] = true;
        }
    }
    return flags;
}

double average_precision(std::vector<ScoredFlag> flags, int num_gt,
                         EvalConfig::Interp interpolation) {
    if (num_gt < 1)
        throw NoGroundTruth("average_precision requires at least one ground truth");
    if (flags.empty())
        return 0.0;

    std::stable_sort(flags.begin(), flags.end(),
                     [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });

    const std::size_t n = flags.size();
    std::vector<double> precision(n), recall(n);
    int tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += flags[i].is_tp ? 1 : 0;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / num_gt;
    }

    // Precision envelope: max precision at recall >= r.
    std::vector<double> envelope = precision;
    for (std::size_t i = n - 1; i-- > 0;)
        envelope[i] = std::max(envelope[i], envelope[i + 1]);

    if (interpolation == EvalConfig::Interp::Voc11) {
        double total = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double r = k / 10.0;
            double best = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (recall[i] >= r) {
                    best = envelope[i];
                    break;
                }
            }
            total += best;
        }
        return total / 11.0;
    }

    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        area += (recall[i] - prev_recall) * envelope[i];
        prev_recall = recall[i];
    }
    return area;
}

ApResult evaluate_detections(const std::vector<std::vector<Detection>>& detections,
                             const std::vector<std::vector<Annotation>>& ground_truths,
                             const EvalConfig& cfg) {
    if (detections.size() != ground_truths.size())
        throw Error("evaluate_detections: per-image lists have different lengths");

    std::map<std::string, int> gt_counts;
    std::map<std::string, std::vector<ScoredFlag>> per_class_flags;
    std::set<std::string> detected_labels;

    for (std::size_t image = 0; image < detections.size(); ++image) {
        std::vector<Annotation> filtered;
        for (const auto& gt : ground_truths[image])
            if (passes_size_filter(gt.box, cfg))
                filtered.push_back(gt);
        for (const auto& gt : filtered)
            gt_counts[gt.label] += 1;

        const std::vector<bool> flags = match_detections(detections[image], filtered, cfg);
        for (std::size_t d = 0; d < detections[image].size(); ++d) {
            const Detection& det = detections[image][d];
            detected_labels.insert(det.label);
            per_class_flags[det.label].push_back(ScoredFlag{det.score, flags[d]});
        }
    }

    ApResult result;
    for (const auto& label : detected_labels)
        if (!gt_counts.count(label))
            result.skipped.push_back(label); // warning-level: no ground truth for class

    double sum = 0.0;
    for (const auto& [label, num_gt] : gt_counts) {
        const auto it = per_class_flags.find(label);
        const double ap = average_precision(
            it == per_class_flags.end() ? std::vector<ScoredFlag>{} : it->second, num_gt,
            cfg.interpolation);
        result.per_class[label] = ap;
        sum += ap;
    }
    result.map = gt_counts.empty() ? 0.0 : sum / static_cast<double>(gt_counts.size());
    return result;
}

std::vector<std::pair<int, Detection>> parse_detections_file(
    const std::string& path, const CocoDataset& ground_truth) {
    std::ifstream in(path);
    if (!in)
        throw CorruptDataset("cannot open detections file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw CorruptDataset(std::string("detections parse error: ") + e.what());
    }
    if (!root.is_array())
        throw CorruptDataset("detections file must be a JSON array");

    std::set<int> image_ids;
    for (const auto& img : ground_truth.images)
        image_ids.insert(img.id);
    std::map<std::string, int> name_to_category;
    for (const auto& [id, name] : ground_truth.categories)
        name_to_category[name] = id;

    std::vector<std::pair<int, Detection>> out;
    for (const auto& entry : root) {
        try {
            const int image_id = entry.at("image_id").get<int>();
            if (!image_ids.count(image_id))
                throw CorruptDataset("detection references unknown image_id " +
                                     std::to_string(image_id));
            Detection det;
            if (entry.contains("category_id"))
                det.label = ground_truth.category_name(entry.at("category_id").get<int>());
            else if (entry.contains("category")) {
                det.label = entry.at("category").get<std::string>();
                if (!name_to_category.count(det.label))
                    throw CorruptDataset("detection references unknown category '" +
                                         det.label + "'");
            } else {
                throw CorruptDataset("detection entry lacks category_id/category");
            }
            const auto& bbox = entry.at("bbox");
            const double x = bbox.at(0).get<double>();
            const double y = bbox.at(1).get<double>();
            const double w = bbox.at(2).get<double>();
            const double h = bbox.at(3).get<double>();
            det.box = BoundingBox{x, y, x + w, y + h};
            det.score = entry.at("score").get<double>();
            if (!std::isfinite(det.score))
                throw CorruptDataset("detection score is not finite");
            out.emplace_back(image_id, std::move(det));
        } catch (const json::exception& e) {
            throw CorruptDataset(std::string("bad detection entry: ") + e.what());
        }
    }
    return out;
}

ApResult evaluate_files(const std::string& coco_gt_path,
                        const std::string& detections_path, const EvalConfig& cfg) {
    const CocoDataset gt = parse_coco_file(coco_gt_path);
    const auto detections = parse_detections_file(detections_path, gt);

    std::map<int, std::size_t> image_slot;
    std::vector<std::vector<Annotation>> gts(gt.images.size());
    std::vector<std::vector<Detection>> dets(gt.images.size());
    for (std::size_t i = 0; i < gt.images.size(); ++i)
        image_slot[gt.images[i].id] = i;
    for (const auto& ann : gt.annotations) {
        const auto it = image_slot.find(ann.image_id);
        if (it == image_slot.end())
            throw CorruptDataset("annotation references unknown image_id " +
                                 std::to_string(ann.image_id));
        gts[it->second].push_back(Annotation{gt.category_name(ann.category_id), ann.box});
    }
    for (const auto& [image_id, det] : detections)
        dets[image_slot.at(image_id)].push_back(det);

    return evaluate_detections(dets, gts, cfg);
}

std::string format_ap_table(const ApResult& result) {
    std::size_t width = 5;
    for (const auto& [label, ap] : result.per_class) {
        (void)ap;
        width = std::max(width, label.size());
    }
    std::ostringstream out;
    char line[128];
    for (const auto& [label, ap] : result.per_class) {
        std::snprintf(line, sizeof(line), "%-*s %7.4f\n", static_cast<int>(width),
                      label.c_str(), ap);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-*s %7.4f\n", static_cast<int>(width), "mAP",
                  result.map);
    out << line;
    for (const auto& label : result.skipped)
        out << "warning: class '" << label << "' has detections but no ground truth; skipped\n";
    return out.str();
}

} // namespace pastegen
