#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "affdistill/classes.hpp"
#include "affdistill/topomap.hpp"
#include "affdistill/vagrid.hpp"

namespace affd {

/// Circumplex V/A anchor of each emotion class.
std::array<double, 2> class_anchor(int cls);

/// Generator spec for the synthetic categorical dataset that stands in for a
/// face-expression corpus at desk scale.
struct SyntheticSpec {
    int n_samples = 1000;
    int n_classes = kNumClasses;
    int input_dim = 16;
    double noise = 0.25;        // isotropic feature noise
    double va_jitter = 0.08;    // per-sample jitter around the class anchor
    double label_noise = 0.0;   // probability of flipping a label
    double shift_rotation = 0.0;  // radians; rotates anchors on the V/A plane
    std::vector<double> prevalence;  // empty = uniform; else one weight per class
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    std::vector<VAPoint> va;

    std::size_t size() const { return labels.size(); }
};

/// Class-conditional samples around fixed circumplex anchors embedded into
/// input_dim dimensions. The embedding map is shared by all spec seeds so a
/// rotated variant shifts the same geometry.
Dataset synth_dataset(const SyntheticSpec& spec);

/// NPZ with arrays features (N x D), labels (N), va (N x 2). Returns digest.
std::string save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Synthetic EEG whose per-band amplitudes vary with the segment's V/A, used
/// to exercise the topomap/teacher pipeline.
struct EEGSynthSpec {
    int n_segments = 200;
    int channels = 8;
    double sample_rate = 128.0;
    double duration_seconds = 4.0;
    int n_subjects = 4;
    double noise = 0.05;
    std::uint64_t seed = 0;
};

struct EEGSample {
    EEGSegment segment;
    VAPoint va{0.0, 0.0};
};

std::vector<EEGSample> synth_eeg(const EEGSynthSpec& spec);

}  // namespace affd
