#include "teslasim/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include "teslasim/errors.hpp"
#include "teslasim/trace_io.hpp"

namespace teslasim {

GrayImage GrayImage::filled(int width, int height, std::uint16_t value) {
    if (width <= 0 || height <= 0) throw ConfigError("image: dimensions must be positive");
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return img;
}

Roi Roi::rect(int x, int y, int w, int h) {
    if (w <= 0 || h <= 0) throw ConfigError("roi: rectangle must have positive size");
    Roi roi;
    roi.is_mask_ = false;
    roi.x_ = x;
    roi.y_ = y;
    roi.w_ = w;
    roi.h_ = h;
    return roi;
}

Roi Roi::mask(int width, int height, std::vector<std::uint8_t> bits) {
    if (width <= 0 || height <= 0) throw ConfigError("roi: mask must have positive size");
    if (bits.size() != static_cast<std::size_t>(width) * height)
        throw ConfigError("roi: mask bit count does not match its dimensions");
    Roi roi;
    roi.is_mask_ = true;
    roi.mask_width_ = width;
    roi.mask_height_ = height;
    roi.bits_ = std::move(bits);
    return roi;
}

void Roi::validate(const GrayImage& img) const {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw ConfigError("roi: image has inconsistent dimensions");
    if (is_mask_) {
        if (mask_width_ != img.width || mask_height_ != img.height)
            throw ConfigError("roi: mask dimensions " + std::to_string(mask_width_) + "x" +
                              std::to_string(mask_height_) + " do not match the image");
        if (std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b == 0; }))
            throw ConfigError("roi: mask selects no pixels");
        return;
    }
    if (x_ < 0 || y_ < 0 || x_ + w_ > img.width || y_ + h_ > img.height)
        throw ConfigError("roi: " + describe() + " falls outside the " +
                          std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
}

bool Roi::contains(int x, int y) const {
    if (is_mask_) {
        if (x < 0 || y < 0 || x >= mask_width_ || y >= mask_height_) return false;
        return mask_bit(x, y);
    }
    return x >= x_ && x < x_ + w_ && y >= y_ && y < y_ + h_;
}

bool Roi::overlaps(const Roi& other, const GrayImage& img) const {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (contains(x, y) && other.contains(x, y)) return true;
    return false;
}

std::string Roi::describe() const {
    std::ostringstream out;
    if (is_mask_)
        out << "mask(" << mask_width_ << "x" << mask_height_ << ")";
    else
        out << "rect(" << x_ << "," << y_ << "," << w_ << "," << h_ << ")";
    return out.str();
}

std::string encode_pgm(const GrayImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw ConfigError("encode_pgm: image has inconsistent dimensions");
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
    out.reserve(out.size() + img.pixels.size() * 2);
    for (std::uint16_t px : img.pixels) {
        out += static_cast<char>(px >> 8);
        out += static_cast<char>(px & 0xff);
    }
    return out;
}

namespace {

// Reads the next whitespace-delimited PGM header token, skipping '#' comments.
std::string_view next_token(std::string_view data, std::size_t& pos) {
    while (pos < data.size()) {
        const char c = data[pos];
        if (c == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw ConfigError("pgm: truncated header");
    return data.substr(start, pos - start);
}

int header_int(std::string_view token) {
    int v = 0;
    for (char c : token) {
        if (c < '0' || c > '9') throw ConfigError("pgm: bad header number '" + std::string(token) + "'");
        v = v * 10 + (c - '0');
        if (v > 1 << 20) throw ConfigError("pgm: header number out of range");
    }
    return v;
}

}  // namespace

GrayImage decode_pgm(std::string_view data) {
    std::size_t pos = 0;
    if (next_token(data, pos) != "P5") throw ConfigError("pgm: not a binary PGM (magic != P5)");
    const int width = header_int(next_token(data, pos));
    const int height = header_int(next_token(data, pos));
    const int maxval = header_int(next_token(data, pos));
    if (width <= 0 || height <= 0) throw ConfigError("pgm: non-positive dimensions");
    if (maxval != 65535)
        throw ConfigError("pgm: expected 16-bit samples (maxval 65535), got " +
                          std::to_string(maxval));
    if (pos >= data.size()) throw ConfigError("pgm: missing raster");
    ++pos;  // single whitespace byte after maxval

    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (data.size() - pos != count * 2) {
        std::ostringstream msg;
        msg << "pgm: raster holds " << (data.size() - pos) << " bytes, expected " << count * 2;
        throw ConfigError(msg.str());
    }
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto hi = static_cast<unsigned char>(data[pos + 2 * i]);
        const auto lo = static_cast<unsigned char>(data[pos + 2 * i + 1]);
        img.pixels[i] = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_file_atomic(path, encode_pgm(img));
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

namespace {

struct DiskSpec {
    double cx, cy, radius;
};

DiskSpec disk_spec(int width, int height, const std::optional<PhantomArtifact>& artifact) {
    DiskSpec d;
    d.cx = (width - 1) / 2.0;
    d.cy = (height - 1) / 2.0;
    d.radius = 0.4 * std::min(width, height);
    if (artifact) {
        d.cx += artifact->shift_x;
        d.cy += artifact->shift_y;
        d.radius *= artifact->radius_scale;
    }
    return d;
}

}  // namespace

GrayImage synth_phantom(std::uint64_t seed, int width, int height, double signal_level,
                        double noise_std, double background_level,
                        const std::optional<PhantomArtifact>& artifact) {
    if (width <= 0 || height <= 0) throw ConfigError("phantom: dimensions must be positive");
    if (signal_level < 0.0 || noise_std < 0.0 || background_level < 0.0)
        throw ConfigError("phantom: levels must be >= 0");

    const DiskSpec disk = disk_spec(width, height, artifact);
    const double gradient = artifact ? artifact->intensity_gradient : 0.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = x - disk.cx;
            const double dy = y - disk.cy;
            const bool inside = dx * dx + dy * dy <= disk.radius * disk.radius;
            double v = background_level;
            if (inside) {
                const double tilt = width > 1 ? gradient * (static_cast<double>(x) / (width - 1) - 0.5)
                                              : 0.0;
                v += signal_level * (1.0 + tilt);
            }
            if (noise_std > 0.0) v += noise_std * noise(rng);
            v = std::round(v);
            img.at(x, y) = static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
        }
    }
    return img;
}

std::vector<std::uint8_t> phantom_disk_mask(int width, int height,
                                            const std::optional<PhantomArtifact>& artifact) {
    if (width <= 0 || height <= 0) throw ConfigError("phantom: dimensions must be positive");
    const DiskSpec disk = disk_spec(width, height, artifact);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = x - disk.cx;
            const double dy = y - disk.cy;
            if (dx * dx + dy * dy <= disk.radius * disk.radius)
                bits[static_cast<std::size_t>(y) * width + x] = 1;
        }
    }
    return bits;
}

}  // namespace teslasim
