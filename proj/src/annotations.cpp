#include "pastegen/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

using json = nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open file for writing: " + path);
    out << text;
    if (!out)
        throw IoError("write failed: " + path);
}

// Targeted extraction for the fixed VOC structure this project writes.
struct XmlCursor {
    const std::string& text;
    std::size_t pos = 0;

    // Next occurrence of <tag>...</tag> at or after pos, not past `limit`.
    bool next(const std::string& tag, std::size_t limit, std::string& inner,
              std::size_t& inner_begin, std::size_t& inner_end) {
        const std::string open = "<" + tag + ">";
        const std::string close = "</" + tag + ">";
        const std::size_t start = text.find(open, pos);
        if (start == std::string::npos || start >= limit)
            return false;
        const std::size_t body = start + open.size();
        const std::size_t end = text.find(close, body);
        if (end == std::string::npos || end > limit)
            throw Error("voc parse error: unterminated <" + tag + ">");
        inner = text.substr(body, end - body);
        inner_begin = body;
        inner_end = end;
        pos = end + close.size();
        return true;
    }

    std::string require(const std::string& tag, std::size_t limit) {
        std::string inner;
        std::size_t b, e;
        if (!next(tag, limit, inner, b, e))
            throw Error("voc parse error: missing <" + tag + ">");
        return inner;
    }
};

int parse_int_strict(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("voc parse error: bad integer for " + what + ": '" + s + "'");
    }
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string xml_unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, 5, "&amp;") == 0) { out += '&'; i += 5; }
        else if (s.compare(i, 4, "&lt;") == 0) { out += '<'; i += 4; }
        else if (s.compare(i, 4, "&gt;") == 0) { out += '>'; i += 4; }
        else { out += s[i]; ++i; }
    }
    return out;
}

} // namespace

VocBox voc_box_from(const Annotation& annotation) {
    VocBox box;
    box.name = annotation.label;
    box.xmin = static_cast<int>(std::floor(annotation.box.xmin)) + 1;
    box.ymin = static_cast<int>(std::floor(annotation.box.ymin)) + 1;
    box.xmax = static_cast<int>(std::ceil(annotation.box.xmax));
    box.ymax = static_cast<int>(std::ceil(annotation.box.ymax));
    return box;
}

std::string voc_xml(const ImageAnnotations& annotations) {
    std::ostringstream out;
    out << "<annotation>\n";
    out << "  <filename>" << xml_escape(annotations.image_name) << "</filename>\n";
    out << "  <size>\n";
    out << "    <width>" << annotations.width << "</width>\n";
    out << "    <height>" << annotations.height << "</height>\n";
    out << "    <depth>3</depth>\n";
    out << "  </size>\n";
    for (const auto& obj : annotations.objects) {
        const VocBox box = voc_box_from(obj);
        out << "  <object>\n";
        out << "    <name>" << xml_escape(box.name) << "</name>\n";
        out << "    <bndbox>\n";
        out << "      <xmin>" << box.xmin << "</xmin>\n";
        out << "      <ymin>" << box.ymin << "</ymin>\n";
        out << "      <xmax>" << box.xmax << "</xmax>\n";
        out << "      <ymax>" << box.ymax << "</ymax>\n";
        out << "    </bndbox>\n";
        out << "  </object>\n";
    }
    out << "</annotation>\n";
    return out.str();
}

std::string write_voc(const ImageAnnotations& annotations, const std::string& out_dir,
                      const std::string& basename) {
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / (basename + ".xml")).string();
    write_text_file(path, voc_xml(annotations));
    return path;
}

std::string write_voc(const RenderedScene& scene, const std::string& out_dir) {
    ImageAnnotations annotations;
    annotations.image_name = scene.blueprint_id;
    annotations.width = scene.image.width();
    annotations.height = scene.image.height();
    annotations.objects = scene.annotations;
    return write_voc(annotations, out_dir, scene.blueprint_id + "_" + scene.blend_mode_tag);
}

VocAnnotation parse_voc(const std::string& xml_text) {
    XmlCursor cursor{xml_text};
    const std::size_t end = xml_text.size();

    VocAnnotation ann;
    ann.filename = xml_unescape(cursor.require("filename", end));
    ann.width = parse_int_strict(cursor.require("width", end), "size.width");
    ann.height = parse_int_strict(cursor.require("height", end), "size.height");
    ann.depth = parse_int_strict(cursor.require("depth", end), "size.depth");

    std::string body;
    std::size_t body_begin = 0, body_end = 0;
    while (cursor.next("object", end, body, body_begin, body_end)) {
        XmlCursor obj{xml_text, body_begin};
        VocBox box;
        box.name = xml_unescape(obj.require("name", body_end));
        box.xmin = parse_int_strict(obj.require("xmin", body_end), "bndbox.xmin");
        box.ymin = parse_int_strict(obj.require("ymin", body_end), "bndbox.ymin");
        box.xmax = parse_int_strict(obj.require("xmax", body_end), "bndbox.xmax");
        box.ymax = parse_int_strict(obj.require("ymax", body_end), "bndbox.ymax");
        ann.objects.push_back(std::move(box));
    }
    return ann;
}

VocAnnotation parse_voc_file(const std::string& path) {
    try {
        return parse_voc(read_text_file(path));
    } catch (const Error& e) {
        throw CorruptDataset(std::string(e.what()) + " (" + path + ")");
    }
}

const std::string& CocoDataset::category_name(int id) const {
    const auto it = categories.find(id);
    if (it == categories.end())
        throw CorruptDataset("unknown category id " + std::to_string(id));
    return it->second;
}

std::string coco_json(const std::vector<CocoImageRecord>& records) {
    std::set<std::string> labels;
    for (const auto& record : records)
        for (const auto& obj : record.objects)
            labels.insert(obj.label);
    std::map<std::string, int> category_ids;
    json categories = json::array();
    int next_category = 1;
    for (const auto& label : labels) {
        category_ids[label] = next_category;
        categories.push_back({{"id", next_category}, {"name", label}});
        ++next_category;
    }

    json images = json::array();
    json annotations = json::array();
    int next_annotation = 1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& record = records[i];
        const int image_id = static_cast<int>(i) + 1;
        images.push_back({{"id", image_id},
                          {"file_name", record.file_name},
                          {"width", record.width},
                          {"height", record.height}});
        for (const auto& obj : record.objects) {
            const BoundingBox& b = obj.box;
            annotations.push_back({{"id", next_annotation++},
                                   {"image_id", image_id},
                                   {"category_id", category_ids.at(obj.label)},
                                   {"bbox", {b.xmin, b.ymin, b.width(), b.height()}},
                                   {"area", b.area()},
                                   {"iscrowd", 0}});
        }
    }

    json root;
    root["images"] = std::move(images);
    root["annotations"] = std::move(annotations);
    root["categories"] = std::move(categories);
    return root.dump(2) + "\n";
}

std::string write_coco(const std::vector<CocoImageRecord>& records,
                       const std::string& out_path) {
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
    write_text_file(out_path, coco_json(records));
    return out_path;
}

CocoDataset parse_coco(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw CorruptDataset(std::string("coco parse error: ") + e.what());
    }
    try {
        CocoDataset out;
        for (const auto& c : root.at("categories"))
            out.categories[c.at("id").get<int>()] = c.at("name").get<std::string>();
        for (const auto& i : root.at("images")) {
            CocoDataset::Image img;
            img.id = i.at("id").get<int>();
            img.file_name = i.at("file_name").get<std::string>();
            img.width = i.at("width").get<int>();
            img.height = i.at("height").get<int>();
            out.images.push_back(std::move(img));
        }
        for (const auto& a : root.at("annotations")) {
            CocoDataset::Ann ann;
            ann.id = a.at("id").get<int>();
            ann.image_id = a.at("image_id").get<int>();
            ann.category_id = a.at("category_id").get<int>();
            const auto& bbox = a.at("bbox");
            const double x = bbox.at(0).get<double>();
            const double y = bbox.at(1).get<double>();
            const double w = bbox.at(2).get<double>();
            const double h = bbox.at(3).get<double>();
            ann.box = BoundingBox{x, y, x + w, y + h};
            out.annotations.push_back(std::move(ann));
        }
        return out;
    } catch (const json::exception& e) {
        throw CorruptDataset(std::string("coco structure error: ") + e.what());
    }
}

CocoDataset parse_coco_file(const std::string& path) {
    try {
        return parse_coco(read_text_file(path));
    } catch (const IoError& e) {
        throw CorruptDataset(e.what());
    }
}

} // namespace pastegen
