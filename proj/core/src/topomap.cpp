#include "affdistill/topomap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "affdistill/errors.hpp"

namespace affd {

const char* band_name(Band b) {
    switch (b) {
        case Band::Delta: return "delta";
        case Band::Theta: return "theta";
        case Band::Alpha: return "alpha";
        case Band::Beta: return "beta";
        case Band::Gamma: return "gamma";
    }
    return "?";
}

BandRange band_range(Band b) {
    switch (b) {
        case Band::Delta: return {1.0, 4.0};
        case Band::Theta: return {4.0, 8.0};
        case Band::Alpha: return {8.0, 13.0};
        case Band::Beta: return {13.0, 30.0};
        case Band::Gamma: return {30.0, 45.0};
    }
    return {};
}

ElectrodeLayout ElectrodeLayout::make(std::vector<std::string> names,
                                      std::vector<std::array<double, 2>> positions) {
    if (names.size() != positions.size())
        throw InvalidArgument("layout: names/positions size mismatch");
    if (names.empty()) throw InvalidArgument("layout: empty");
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second) throw InvalidArgument("layout: duplicate name " + n);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto& p = positions[i];
        if (p[0] * p[0] + p[1] * p[1] > 1.0 + 1e-12)
            throw InvalidArgument("layout: position outside unit disk");
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            double dx = p[0] - positions[j][0], dy = p[1] - positions[j][1];
            if (dx * dx + dy * dy < 1e-18)
                throw InvalidArgument("layout: duplicate electrode position");
        }
    }
    ElectrodeLayout layout;
    layout.names = std::move(names);
    layout.positions = std::move(positions);
    return layout;
}

ElectrodeLayout ring_layout(int channels) {
    if (channels < 1) throw InvalidArgument("ring_layout: channels must be >= 1");
    std::vector<std::string> names;
    std::vector<std::array<double, 2>> pos;
    for (int i = 0; i < channels; ++i) {
        double a = 2.0 * std::numbers::pi * i / channels;
        names.push_back("E" + std::to_string(i));
        pos.push_back({0.8 * std::cos(a), 0.8 * std::sin(a)});
    }
    return ElectrodeLayout::make(std::move(names), std::move(pos));
}

namespace {

void check_segment(const EEGSegment& seg, const BandRange& range) {
    if (seg.channels < 1 || seg.samples_per_channel < 2)
        throw InvalidArgument("band_power: empty segment");
    if (seg.samples.size() != seg.channels * seg.samples_per_channel)
        throw ShapeError("band_power: sample buffer size mismatch");
    if (seg.sample_rate <= 0) throw InvalidArgument("band_power: bad sample rate");
    if (static_cast<double>(seg.samples_per_channel) < 2.0 * seg.sample_rate)
        throw InvalidArgument("band_power: segment shorter than 2 s");
    if (range.hi_hz <= range.lo_hz || range.lo_hz < 0)
        throw InvalidArgument("band_power: bad band range");
    if (range.hi_hz > seg.sample_rate / 2.0)
        throw InvalidArgument("band_power: band exceeds Nyquist");
}

}  // namespace

std::vector<double> band_power(const EEGSegment& seg, const BandRange& range,
                               const WelchOptions& opts) {
    check_segment(seg, range);
    const auto nperseg =
        static_cast<std::size_t>(std::lround(opts.segment_seconds * seg.sample_rate));
    if (nperseg < 2 || nperseg > seg.samples_per_channel)
        throw InvalidArgument("band_power: bad Welch segment length");
    const auto step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(nperseg * (1.0 - opts.overlap))));

    // Hann window and its power normalization
    std::vector<double> window(nperseg);
    double win_pow = 0.0;
    for (std::size_t n = 0; n < nperseg; ++n) {
        window[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / (nperseg - 1)));
        win_pow += window[n] * window[n];
    }

    const double df = seg.sample_rate / static_cast<double>(nperseg);
    const std::size_t n_bins = nperseg / 2 + 1;
    std::vector<std::size_t> band_bins;
    for (std::size_t k = 0; k < n_bins; ++k) {
        double f = k * df;
        if (f >= range.lo_hz && f < range.hi_hz) band_bins.push_back(k);
    }
    if (band_bins.empty()) throw InvalidArgument("band_power: band narrower than resolution");

    std::vector<double> powers(seg.channels, 0.0);
    std::vector<double> psd(n_bins);
    std::vector<double> buf(nperseg);
    for (std::size_t c = 0; c < seg.channels; ++c) {
        std::fill(psd.begin(), psd.end(), 0.0);
        std::size_t n_windows = 0;
        for (std::size_t start = 0; start + nperseg <= seg.samples_per_channel; start += step) {
            for (std::size_t n = 0; n < nperseg; ++n)
                buf[n] = seg.at(c, start + n) * window[n];
            // direct DFT; window lengths are small at desk scale
            for (std::size_t k = 0; k < n_bins; ++k) {
                double re = 0.0, im = 0.0;
                for (std::size_t n = 0; n < nperseg; ++n) {
                    double phase = -2.0 * std::numbers::pi * static_cast<double>(k * n) /
                                   static_cast<double>(nperseg);
                    re += buf[n] * std::cos(phase);
                    im += buf[n] * std::sin(phase);
                }
                double scale = (k == 0 || 2 * k == nperseg) ? 1.0 : 2.0;  // one-sided
                psd[k] += scale * (re * re + im * im) / (seg.sample_rate * win_pow);
            }
            ++n_windows;
        }
        double sum = 0.0;
        for (auto k : band_bins) sum += psd[k] / static_cast<double>(n_windows);
        powers[c] = sum / static_cast<double>(band_bins.size());
    }
    return powers;
}

std::vector<std::vector<double>> normalize_subject_band(
    const std::vector<std::vector<double>>& values) {
    std::size_t total = 0;
    for (const auto& v : values) total += v.size();
    if (total < 2) throw NumericError("normalize: need at least 2 pooled values");

    double mean = 0.0;
    for (const auto& v : values)
        for (double x : v) mean += x;
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (const auto& v : values)
        for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(total);
    if (var <= 0.0) throw NumericError("normalize: zero pooled variance");
    double sd = std::sqrt(var);

    auto z = values;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto& v : z)
        for (double& x : v) {
            x = (x - mean) / sd;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    for (auto& v : z)
        for (double& x : v) x = (x - lo) / (hi - lo);
    return z;
}

std::array<double, 2> pixel_center(int row, int col, int resolution) {
    return {-1.0 + 2.0 * (col + 0.5) / resolution, -1.0 + 2.0 * (row + 0.5) / resolution};
}

TopomapImage render_topomap(const std::vector<double>& values, const ElectrodeLayout& layout,
                            int resolution) {
    if (values.size() != layout.size())
        throw ShapeError("render_topomap: values/layout size mismatch");
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError("render_topomap: non-finite value");
    if (resolution < 1) throw InvalidArgument("render_topomap: bad resolution");

    constexpr double kDistFloor = 1e-9;
    TopomapImage img;
    img.resolution = resolution;
    img.pixels.assign(static_cast<std::size_t>(resolution) * resolution, kTopomapMask);
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            auto [x, y] = pixel_center(r, c, resolution);
            if (x * x + y * y > 1.0) continue;
            double wsum = 0.0, vsum = 0.0;
            for (std::size_t e = 0; e < layout.size(); ++e) {
                double dx = x - layout.positions[e][0], dy = y - layout.positions[e][1];
                double d = std::max(std::sqrt(dx * dx + dy * dy), kDistFloor);
                double w = 1.0 / (d * d);
                wsum += w;
                vsum += w * values[e];
            }
            img.pixels[static_cast<std::size_t>(r) * resolution + c] =
                std::clamp(vsum / wsum, 0.0, 1.0);
        }
    }
    return img;
}

}  // namespace affd
