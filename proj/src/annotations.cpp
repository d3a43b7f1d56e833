#include "asmcrop/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "asmcrop/io_util.hpp"

namespace asmcrop {

using nlohmann::json;

std::vector<AnnotatedImage> load_annotations(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    std::string text(bytes.begin(), bytes.end());
    std::istringstream in(text);

    std::vector<AnnotatedImage> images;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": invalid JSON: " + e.what());
        }
        auto fail = [&](const std::string& msg) -> std::runtime_error {
            return std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (!obj.is_object() || !obj.contains("image") || !obj.contains("crops"))
            throw fail("expected an object with \"image\" and \"crops\"");

        AnnotatedImage rec;
        if (!obj["image"].is_string()) throw fail("\"image\" must be a string");
        rec.image_path = obj["image"].get<std::string>();
        if (obj.contains("saliency") && !obj["saliency"].is_null()) {
            if (!obj["saliency"].is_string()) throw fail("\"saliency\" must be a string or null");
            rec.saliency_path = obj["saliency"].get<std::string>();
        }
        if (!obj["crops"].is_array() || obj["crops"].empty())
            throw fail("\"crops\" must be a nonempty array");
        for (const auto& c : obj["crops"]) {
            if (!c.is_object() || !c.contains("x") || !c.contains("y") || !c.contains("w") ||
                !c.contains("h") || !c.contains("score"))
                throw fail("each crop needs x, y, w, h, score");
            AnnotatedCrop crop;
            crop.rect = CropRect{c["x"].get<int>(), c["y"].get<int>(), c["w"].get<int>(),
                                 c["h"].get<int>()};
            crop.score = c["score"].get<double>();
            if (!crop.rect.well_formed()) throw fail("malformed crop rectangle");
            if (!std::isfinite(crop.score)) throw fail("non-finite crop score");
            rec.crops.push_back(crop);
        }
        images.push_back(std::move(rec));
    }
    if (images.empty()) throw std::runtime_error(path.string() + ": no annotation records");
    return images;
}

void save_annotations(const std::vector<AnnotatedImage>& images, const std::filesystem::path& path) {
    std::string out;
    for (const auto& rec : images) {
        json obj;
        obj["image"] = rec.image_path;
        obj["saliency"] = rec.saliency_path ? json(*rec.saliency_path) : json(nullptr);
        json crops = json::array();
        for (const auto& c : rec.crops) {
            crops.push_back({{"x", c.rect.x},
                             {"y", c.rect.y},
                             {"w", c.rect.w},
                             {"h", c.rect.h},
                             {"score", c.score}});
        }
        obj["crops"] = std::move(crops);
        out += obj.dump();
        out += '\n';
    }
    atomic_write_file(path, out);
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
    ImageBuffer img = load_image(path);
    if (img.channels != 1)
        throw std::runtime_error("saliency map must be grayscale PGM: " + path.string());
    SaliencyMap sal;
    sal.width = img.width;
    sal.height = img.height;
    sal.values.resize(img.data.size());
    for (std::size_t k = 0; k < img.data.size(); ++k)
        sal.values[k] = std::clamp(img.data[k] / 255.0, 0.0, 1.0);
    return sal;
}

std::filesystem::path resolve_relative(const std::filesystem::path& annotations_path,
                                       const std::string& entry_path) {
    std::filesystem::path p(entry_path);
    if (p.is_absolute()) return p;
    return annotations_path.parent_path() / p;
}

}  // namespace asmcrop
