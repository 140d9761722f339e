#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teslasim {

// Row-major 16-bit grayscale image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;

    static GrayImage filled(int width, int height, std::uint16_t value);

    std::uint16_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool same_size(const GrayImage& other) const {
        return width == other.width && height == other.height;
    }

    bool operator==(const GrayImage&) const = default;
};

// Region of interest: a rectangle or an explicit pixel mask. Must be
// non-empty and lie fully inside the image it is applied to.
class Roi {
public:
    static Roi rect(int x, int y, int w, int h);
    static Roi mask(int width, int height, std::vector<std::uint8_t> bits);

    // Throws ConfigError if empty or out of bounds for the image.
    void validate(const GrayImage& img) const;
    bool contains(int x, int y) const;
    bool overlaps(const Roi& other, const GrayImage& img) const;
    std::string describe() const;

    template <typename Fn>
    void for_each(const GrayImage& img, Fn&& fn) const {
        const int x1 = is_mask_ ? 0 : x_;
        const int y1 = is_mask_ ? 0 : y_;
        const int x2 = is_mask_ ? img.width : x_ + w_;
        const int y2 = is_mask_ ? img.height : y_ + h_;
        for (int y = y1; y < y2; ++y)
            for (int x = x1; x < x2; ++x)
                if (!is_mask_ || mask_bit(x, y)) fn(x, y);
    }

private:
    Roi() = default;
    bool mask_bit(int x, int y) const {
        return bits_[static_cast<std::size_t>(y) * mask_width_ + x] != 0;
    }

    bool is_mask_ = false;
    int x_ = 0, y_ = 0, w_ = 0, h_ = 0;       // rectangle
    int mask_width_ = 0, mask_height_ = 0;     // mask
    std::vector<std::uint8_t> bits_;
};

// Binary PGM (magic P5), maxval 65535, big-endian 16-bit samples.
std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::string_view data);  // ConfigError on malformed input
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

// Geometric/intensity perturbations for synthetic phantoms.
struct PhantomArtifact {
    double shift_x = 0.0;       // disk centre offset, px
    double shift_y = 0.0;
    double radius_scale = 1.0;
    double intensity_gradient = 0.0;  // fractional signal tilt across the width
};

// Disk phantom on a dark background with seeded Gaussian noise. Deterministic
// per seed. background_level keeps the noise floor clear of the uint16 clamp.
GrayImage synth_phantom(std::uint64_t seed, int width, int height, double signal_level,
                        double noise_std, double background_level = 500.0,
                        const std::optional<PhantomArtifact>& artifact = std::nullopt);

// Support of the phantom disk for the same arguments (1 inside, 0 outside),
// without noise. Useful for building mask ROIs over synthetic images.
std::vector<std::uint8_t> phantom_disk_mask(int width, int height,
                                            const std::optional<PhantomArtifact>& artifact = std::nullopt);

}  // namespace teslasim
