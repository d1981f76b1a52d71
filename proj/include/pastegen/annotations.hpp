#pragma once

#include <map>
#include <string>
#include <vector>

#include "pastegen/blending.hpp"
#include "pastegen/box.hpp"

namespace pastegen {

/// Annotation payload for one image. `image_name` is the scene stem shared
/// by every blend variant of the scene, which keeps the written files
/// independent of the blending mode.
struct ImageAnnotations {
    std::string image_name;
    int width = 0;
    int height = 0;
    std::vector<Annotation> objects;
};

/// Integer corners of a VOC bndbox: 1-based, inclusive.
struct VocBox {
    std::string name;
    int xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    friend bool operator==(const VocBox&, const VocBox&) = default;
};

struct VocAnnotation {
    std::string filename;
    int width = 0, height = 0, depth = 0;
    std::vector<VocBox> objects;
};

/// Half-open float box -> VOC integer corners:
/// xmin+1 after floor, ymin+1 after floor, ceil(xmax), ceil(ymax).
VocBox voc_box_from(const Annotation& annotation);

std::string voc_xml(const ImageAnnotations& annotations);

/// Write `<out_dir>/<basename>.xml`; returns the path.
std::string write_voc(const ImageAnnotations& annotations, const std::string& out_dir,
                      const std::string& basename);

/// Write `<out_dir>/<blueprint_id>_<mode>.xml` for one render. The XML body
/// only depends on the blueprint, so blend variants produce identical bytes.
std::string write_voc(const RenderedScene& scene, const std::string& out_dir);

VocAnnotation parse_voc(const std::string& xml_text);
VocAnnotation parse_voc_file(const std::string& path);

struct CocoImageRecord {
    std::string file_name;
    int width = 0;
    int height = 0;
    std::vector<Annotation> objects;
};

struct CocoDataset {
    struct Image {
        int id = 0;
        std::string file_name;
        int width = 0, height = 0;
    };
    struct Ann {
        int id = 0;
        int image_id = 0;
        int category_id = 0;
        BoundingBox box;
    };
    std::vector<Image> images;
    std::vector<Ann> annotations;
    std::map<int, std::string> categories;

    const std::string& category_name(int id) const;
};

/// Serialize a COCO-style dataset: image and annotation ids follow record
/// order (1-based); categories are the sorted set of labels. bbox entries
/// are [x, y, w, h] floats in the half-open convention.
std::string coco_json(const std::vector<CocoImageRecord>& records);

std::string write_coco(const std::vector<CocoImageRecord>& records,
                       const std::string& out_path);

CocoDataset parse_coco(const std::string& json_text);
CocoDataset parse_coco_file(const std::string& path);

} // namespace pastegen
