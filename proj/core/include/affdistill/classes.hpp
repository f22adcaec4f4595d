#pragma once

#include <array>
#include <string_view>

namespace affd {

// Fixed 8-way emotion taxonomy, index order shared by datasets, losses, and
// reports.
inline constexpr int kNumClasses = 8;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "neutral", "happiness", "surprise", "sadness",
    "anger",   "disgust",   "fear",     "contempt",
};

inline constexpr int kHappiness = 1;
inline constexpr int kSurprise = 2;

}  // namespace affd
