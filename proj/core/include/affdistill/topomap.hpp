#pragma once

#include <array>
#include <string>
#include <vector>

namespace affd {

enum class Band { Delta, Theta, Alpha, Beta, Gamma };

inline constexpr std::array<Band, 5> kAllBands = {Band::Delta, Band::Theta, Band::Alpha,
                                                  Band::Beta, Band::Gamma};

const char* band_name(Band b);

/// Frequency range in Hz. Defaults follow standard EEG conventions:
/// delta 1-4, theta 4-8, alpha 8-13, beta 13-30, gamma 30-45.
struct BandRange {
    double lo_hz = 0;
    double hi_hz = 0;
};

BandRange band_range(Band b);

/// Scalp electrode positions projected onto the unit disk.
struct ElectrodeLayout {
    std::vector<std::string> names;
    std::vector<std::array<double, 2>> positions;

    /// Validates: matching sizes, unique names, positions inside the closed
    /// unit disk, no duplicate positions.
    static ElectrodeLayout make(std::vector<std::string> names,
                                std::vector<std::array<double, 2>> positions);

    std::size_t size() const { return names.size(); }
};

/// Evenly spaced ring layout used by the synthetic pipeline: C electrodes on
/// a circle of radius 0.8.
ElectrodeLayout ring_layout(int channels);

struct EEGSegment {
    std::vector<double> samples;  // channels x samples, row-major, microvolts
    std::size_t channels = 0;
    std::size_t samples_per_channel = 0;
    double sample_rate = 0;  // Hz
    std::string subject_id;

    double at(std::size_t c, std::size_t s) const {
        return samples[c * samples_per_channel + s];
    }
};

/// Welch spectral estimate options (Hann window, 2 s segments, 50% overlap).
struct WelchOptions {
    double segment_seconds = 2.0;
    double overlap = 0.5;
};

/// Per-channel mean spectral power over [lo, hi] Hz.
/// Requires >= 2 s of signal and band edges below Nyquist.
std::vector<double> band_power(const EEGSegment& seg, const BandRange& range,
                               const WelchOptions& opts = {});

/// Pools every value across the given vectors, z-scores (population moments),
/// then affinely maps pooled min -> 0 and max -> 1. Throws NumericError when
/// the pooled variance is zero.
std::vector<std::vector<double>> normalize_subject_band(
    const std::vector<std::vector<double>>& values);

inline constexpr double kTopomapMask = -1.0;  // out-of-disk sentinel

struct TopomapImage {
    int resolution = 0;          // H = W
    std::vector<double> pixels;  // row-major, kTopomapMask outside the disk

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * resolution + col]; }
};

/// Inverse-distance-weighted interpolation (power 2, distance floor 1e-9) of
/// normalized channel values over the unit disk; output clamped to [0,1].
TopomapImage render_topomap(const std::vector<double>& values, const ElectrodeLayout& layout,
                            int resolution = 64);

/// Pixel-center coordinate of (row, col) in [-1,1]^2 for a given resolution.
std::array<double, 2> pixel_center(int row, int col, int resolution);

}  // namespace affd
