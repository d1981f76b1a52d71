#include "pastegen/assets.hpp"

#include <algorithm>
#include <filesystem>

#include "pastegen/errors.hpp"
#include "pastegen/image_io.hpp"

namespace fs = std::filesystem;

namespace pastegen {

namespace {

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool contains_whitespace(const std::string& s) {
    return s.find_first_of(" \t\n\r") != std::string::npos;
}

void check_token(const std::string& kind, const std::string& value) {
    if (value.empty() || contains_whitespace(value))
        throw Error(kind + " must be non-empty and free of whitespace: '" + value + "'");
}

} // namespace

std::vector<std::string> AssetIndex::target_labels() const {
    std::vector<std::string> out;
    for (const auto& [label, views] : objects)
        if (!distractor_labels.count(label))
            out.push_back(label);
    return out;
}

std::vector<std::string> AssetIndex::distractor_label_list() const {
    return {distractor_labels.begin(), distractor_labels.end()};
}

const AssetView& AssetIndex::find_view(const std::string& label,
                                       const std::string& view_id) const {
    const auto it = objects.find(label);
    if (it == objects.end())
        throw Error("asset index has no instance '" + label + "'");
    for (const auto& view : it->second)
        if (view.view_id == view_id)
            return view;
    throw Error("instance '" + label + "' has no view '" + view_id + "'");
}

AssetIndex scan_assets(const std::string& objects_dir,
                       const std::string& backgrounds_dir,
                       const std::vector<std::string>& distractor_labels,
                       const std::string& masks_dir) {
    if (!fs::is_directory(objects_dir))
        throw EmptyAssets("objects directory does not exist: " + objects_dir);
    if (!fs::is_directory(backgrounds_dir))
        throw EmptyAssets("backgrounds directory does not exist: " + backgrounds_dir);

    fs::path masks_root = masks_dir.empty()
                              ? fs::path(objects_dir).parent_path() / "masks"
                              : fs::path(masks_dir);

    AssetIndex index;
    for (const auto& entry : fs::directory_iterator(objects_dir)) {
        if (!entry.is_directory())
            continue;
        const std::string label = entry.path().filename().string();
        check_token("instance label", label);

        std::vector<AssetView> views;
        for (const auto& file : fs::directory_iterator(entry.path())) {
            if (!file.is_regular_file() || !has_image_extension(file.path()))
                continue;
            AssetView view;
            view.view_id = file.path().stem().string();
            check_token("view id", view.view_id);
            view.color_path = file.path().string();
            const fs::path mask_path = masks_root / label / (view.view_id + ".png");
            if (fs::is_regular_file(mask_path))
                view.mask_path = mask_path.string();
            views.push_back(std::move(view));
        }
        if (views.empty())
            continue;
        std::sort(views.begin(), views.end(),
                  [](const AssetView& a, const AssetView& b) { return a.view_id < b.view_id; });
        index.objects.emplace(label, std::move(views));
    }
    if (index.objects.empty())
        throw EmptyAssets("no object instances found under " + objects_dir);

    for (const auto& entry : fs::directory_iterator(backgrounds_dir)) {
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            index.backgrounds.push_back(entry.path().string());
    }
    if (index.backgrounds.empty())
        throw EmptyAssets("no background images found under " + backgrounds_dir);
    std::sort(index.backgrounds.begin(), index.backgrounds.end());

    for (const auto& label : distractor_labels) {
        if (!index.objects.count(label))
            throw Error("distractor label '" + label + "' is not an indexed instance");
        index.distractor_labels.insert(label);
    }
    if (index.target_labels().empty())
        throw EmptyAssets("every indexed instance is marked as a distractor");

    return index;
}

Cutout load_cutout(const AssetView& view, const std::string& label,
                   const MaskParams& mask_params) {
    const Raster color = load_image(view.color_path, 3);
    Raster alpha = view.mask_path.empty()
                       ? extract_mask(color, mask_params)
                       : load_image(view.mask_path, 1);
    if (alpha.width() != color.width() || alpha.height() != color.height())
        throw UnreadableImage("mask dimensions differ from image: " + view.mask_path);
    return make_cutout(color, alpha, label, view.view_id);
}

std::shared_ptr<const Cutout> CutoutCache::get(const std::string& label,
                                               const std::string& view_id) const {
    const auto key = std::make_pair(label, view_id);
    {
        std::lock_guard lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
    }
    const AssetView& view = index_.find_view(label, view_id);
    auto cutout = std::make_shared<const Cutout>(load_cutout(view, label, mask_params_));
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(cutout)).first->second;
}

} // namespace pastegen
