#pragma once

#include <optional>
#include <string>

#include "teslasim/image.hpp"

namespace teslasim {

// mean(signal ROI) / population-stddev(noise ROI). Returns +inf when the
// noise region is perfectly flat. ROIs must be valid and disjoint.
double snr(const GrayImage& img, const Roi& signal_roi, const Roi& noise_roi);

// Percent integral uniformity over a water-only region, after a 3x3 mean
// pre-filter: 100 * (1 - (S_max - S_min)/(S_max + S_min)). An all-zero
// region is perfectly uniform (100).
double piu(const GrayImage& img, const Roi& roi);

enum class HomogeneityDef { peak_to_peak_ppm, fractional_range };

std::string to_string(HomogeneityDef def);
HomogeneityDef homogeneity_def_from_string(std::string_view name);

// Field-uniformity figure over the filtered ROI. peak_to_peak_ppm:
// 1e6*(S_max-S_min)/S_mean; fractional_range: 100*(S_max-S_min)/(2*S_mean).
// The definition is always carried alongside the value, never implied.
double homogeneity(const GrayImage& img, const Roi& roi, HomogeneityDef def);

// Per-pixel absolute difference, used to reveal geometric changes between
// scans. Images must share dimensions.
GrayImage subtract(const GrayImage& a, const GrayImage& b);

struct MetricsReport {
    std::string image_label;
    std::optional<std::string> ref_label;
    std::string signal_roi;
    std::optional<std::string> noise_roi;
    std::optional<double> snr;
    double piu = 0.0;
    double homogeneity = 0.0;
    HomogeneityDef homogeneity_def = HomogeneityDef::peak_to_peak_ppm;
    std::optional<long long> subtract_nonzero;  // vs. ref
    std::optional<int> subtract_max;

    std::string format() const;  // structured-text report, one key per line
};

}  // namespace teslasim
