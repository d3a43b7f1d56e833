#include "asmcrop/image.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

#include "asmcrop/io_util.hpp"

namespace asmcrop {

namespace {

// Reads one whitespace-delimited token, skipping '#' comments to end of line.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (std::isspace(bytes[pos])) {
            ++pos;
        } else if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        tok.push_back(static_cast<char>(bytes[pos++]));
    }
    if (tok.empty()) throw std::runtime_error("malformed PNM header: missing field");
    return tok;
}

int parse_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const char* what) {
    std::string tok = next_token(bytes, pos);
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("malformed PNM header: bad ") + what + " '" + tok + "'");
    }
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    if (bytes.size() < 2) throw std::runtime_error("not a PNM file: " + path.string());
    std::size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    int channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw std::runtime_error("unsupported PNM magic '" + magic + "' in " + path.string());
    }
    int w = parse_header_int(bytes, pos, "width");
    int h = parse_header_int(bytes, pos, "height");
    int maxval = parse_header_int(bytes, pos, "maxval");
    if (w < 1 || h < 1) throw std::runtime_error("bad image dimensions in " + path.string());
    if (maxval != 255) throw std::runtime_error("only maxval 255 is supported: " + path.string());
    // Single whitespace byte separates the header from the raster.
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw std::runtime_error("malformed PNM header in " + path.string());
    ++pos;

    std::size_t need = static_cast<std::size_t>(w) * h * channels;
    if (bytes.size() - pos < need) throw std::runtime_error("truncated raster in " + path.string());

    ImageBuffer img(h, w, channels);
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + need), img.data.begin());
    return img;
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("image must have 1 or 3 channels");
    if (img.width < 1 || img.height < 1) throw std::invalid_argument("empty image");
    if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
        throw std::invalid_argument("image data size mismatch");

    std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                         std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out;
    out.reserve(header.size() + img.data.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    atomic_write_file(path, out);
}

void write_pgm_bytes(const std::vector<std::uint8_t>& bytes, int width, int height,
                     const std::filesystem::path& path) {
    if (width < 1 || height < 1) throw std::invalid_argument("empty field");
    if (bytes.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("field size mismatch");
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out;
    out.reserve(header.size() + bytes.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), bytes.begin(), bytes.end());
    atomic_write_file(path, out);
}

}  // namespace asmcrop
