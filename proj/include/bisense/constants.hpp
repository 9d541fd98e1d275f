#pragma once

namespace bisense {

// Exact propagation speed, used wherever geometry turns meters into seconds
// (path delays, Doppler shifts, path-loss wavelengths).
inline constexpr double kSpeedOfLight = 299792458.0;

// Rounded propagation speed used by the waveform-numerology bookkeeping
// (range/velocity resolution, ambiguity limits).  Radar link budgets quote
// resolutions against c = 3e8 and the published figures this suite
// reproduces do the same; keeping the two constants separate means neither
// side contaminates the other.
inline constexpr double kNominalSpeedOfLight = 3.0e8;

}  // namespace bisense
