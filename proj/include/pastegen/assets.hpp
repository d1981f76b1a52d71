#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "pastegen/cutout.hpp"
#include "pastegen/mask_extract.hpp"

namespace pastegen {

struct AssetView {
    std::string view_id;
    std::string color_path;
    std::string mask_path; // empty when no mask file exists (maskgen runs)
};

/// Deterministic view of the asset tree: views and backgrounds are sorted
/// lexicographically so the index never depends on filesystem enumeration
/// order.
struct AssetIndex {
    std::map<std::string, std::vector<AssetView>> objects; // label -> views
    std::set<std::string> distractor_labels;
    std::vector<std::string> backgrounds;

    std::vector<std::string> target_labels() const;
    std::vector<std::string> distractor_label_list() const;
    const AssetView& find_view(const std::string& label, const std::string& view_id) const;
};

/// Scan `objects_dir/<instance>/<view>.<ext>` plus optional
/// `masks_dir/<instance>/<view>.png` and a backgrounds directory.
/// `masks_dir` defaults to the sibling directory of `objects_dir` named
/// "masks". Labels and view ids must not contain whitespace.
AssetIndex scan_assets(const std::string& objects_dir,
                       const std::string& backgrounds_dir,
                       const std::vector<std::string>& distractor_labels,
                       const std::string& masks_dir = "");

/// Load one cutout: color image plus its mask file when present, otherwise
/// classical mask extraction. The result is tight-cropped.
Cutout load_cutout(const AssetView& view, const std::string& label,
                   const MaskParams& mask_params);

/// Shared, thread-safe memo of loaded cutouts. Values are immutable.
class CutoutCache {
public:
    CutoutCache(const AssetIndex& index, MaskParams mask_params)
        : index_(index), mask_params_(mask_params) {}

    std::shared_ptr<const Cutout> get(const std::string& label,
                                      const std::string& view_id) const;

private:
    const AssetIndex& index_;
    MaskParams mask_params_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<std::string, std::string>,
                     std::shared_ptr<const Cutout>> cache_;
};

} // namespace pastegen
