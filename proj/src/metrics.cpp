#include "teslasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "teslasim/errors.hpp"
#include "teslasim/trace_io.hpp"

namespace teslasim {

namespace {

struct RoiStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    long long count = 0;
};

RoiStats roi_stats(const GrayImage& img, const Roi& roi) {
    double sum = 0.0, sum_sq = 0.0;
    long long n = 0;
    roi.for_each(img, [&](int x, int y) {
        const double v = img.at(x, y);
        sum += v;
        sum_sq += v * v;
        ++n;
    });
    RoiStats st;
    st.count = n;
    st.mean = sum / n;
    const double var = std::max(sum_sq / n - st.mean * st.mean, 0.0);
    st.stddev = std::sqrt(var);
    return st;
}

// 3x3 mean pre-filter over the ROI; windows shrink at the image border.
void filtered_extrema(const GrayImage& img, const Roi& roi, double& s_min, double& s_max,
                      double& s_mean) {
    s_min = std::numeric_limits<double>::infinity();
    s_max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    long long n = 0;
    roi.for_each(img, [&](int x, int y) {
        double acc = 0.0;
        int cnt = 0;
        for (int yy = std::max(y - 1, 0); yy <= std::min(y + 1, img.height - 1); ++yy)
            for (int xx = std::max(x - 1, 0); xx <= std::min(x + 1, img.width - 1); ++xx) {
                acc += img.at(xx, yy);
                ++cnt;
            }
        const double v = acc / cnt;
        s_min = std::min(s_min, v);
        s_max = std::max(s_max, v);
        sum += v;
        ++n;
    });
    s_mean = sum / n;
}

}  // namespace

double snr(const GrayImage& img, const Roi& signal_roi, const Roi& noise_roi) {
    signal_roi.validate(img);
    noise_roi.validate(img);
    if (signal_roi.overlaps(noise_roi, img))
        throw ConfigError("snr: signal and noise regions overlap");

    const RoiStats sig = roi_stats(img, signal_roi);
    const RoiStats noise = roi_stats(img, noise_roi);
    if (noise.stddev == 0.0) return std::numeric_limits<double>::infinity();
    return sig.mean / noise.stddev;
}

double piu(const GrayImage& img, const Roi& roi) {
    roi.validate(img);
    double s_min, s_max, s_mean;
    filtered_extrema(img, roi, s_min, s_max, s_mean);
    if (s_max + s_min == 0.0) return 100.0;  // all-zero region: nothing varies
    return 100.0 * (1.0 - (s_max - s_min) / (s_max + s_min));
}

std::string to_string(HomogeneityDef def) {
    switch (def) {
        case HomogeneityDef::peak_to_peak_ppm: return "peak_to_peak_ppm";
        case HomogeneityDef::fractional_range: return "fractional_range";
    }
    throw ConfigError("homogeneity: unknown definition tag");
}

HomogeneityDef homogeneity_def_from_string(std::string_view name) {
    if (name == "peak_to_peak_ppm") return HomogeneityDef::peak_to_peak_ppm;
    if (name == "fractional_range") return HomogeneityDef::fractional_range;
    throw ConfigError("homogeneity: unknown definition '" + std::string(name) +
                      "' (peak_to_peak_ppm | fractional_range)");
}

double homogeneity(const GrayImage& img, const Roi& roi, HomogeneityDef def) {
    roi.validate(img);
    double s_min, s_max, s_mean;
    filtered_extrema(img, roi, s_min, s_max, s_mean);
    if (s_mean == 0.0) throw NumericalError("homogeneity: region mean is zero");
    switch (def) {
        case HomogeneityDef::peak_to_peak_ppm: return 1e6 * (s_max - s_min) / s_mean;
        case HomogeneityDef::fractional_range: return 100.0 * (s_max - s_min) / (2.0 * s_mean);
    }
    throw ConfigError("homogeneity: unknown definition tag");
}

GrayImage subtract(const GrayImage& a, const GrayImage& b) {
    if (!a.same_size(b))
        throw ConfigError("subtract: image sizes differ (" + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height) + ")");
    GrayImage out = a;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = static_cast<std::uint16_t>(std::abs(int(a.pixels[i]) - int(b.pixels[i])));
    return out;
}

std::string MetricsReport::format() const {
    std::ostringstream out;
    out << "image: " << image_label << '\n';
    if (ref_label) out << "reference: " << *ref_label << '\n';
    out << "signal_roi: " << signal_roi << '\n';
    if (noise_roi) out << "noise_roi: " << *noise_roi << '\n';
    if (snr) out << "snr: " << format_double(*snr) << '\n';
    out << "piu_percent: " << format_double(piu) << '\n';
    out << "homogeneity_def: " << to_string(homogeneity_def) << '\n';
    out << "homogeneity: " << format_double(homogeneity) << '\n';
    if (subtract_nonzero) out << "subtract_nonzero_px: " << *subtract_nonzero << '\n';
    if (subtract_max) out << "subtract_max: " << *subtract_max << '\n';
    return out.str();
}

}  // namespace teslasim
