#pragma once
// Single table of default numbers. Everything else refers here.

#include <array>
#include <numbers>

namespace sfwm::defaults {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// --- atomic medium ---------------------------------------------------------
inline constexpr double kGammaNat = kTwoPi * 5.9e6;       // natural decay rate Gamma, rad/s
inline constexpr double kGammaDoppler = 55.0;             // Doppler width, units of Gamma
inline constexpr double kDeltaP = -kTwoPi * 2.0e9;        // pump detuning, rad/s
inline constexpr double kOmegaC = 5.4;                    // coupling Rabi frequency, Gamma
inline constexpr double kOmegaP = 1.0;                    // pump Rabi frequency, Gamma
inline constexpr double kAlpha = 370.0;                   // entire-atom OD, high-OD figure set
inline constexpr double kGammaDec = 0.030;                // ground coherence decay, Gamma

// Low-OD figure set.
inline constexpr double kAlphaLow = 93.0;
inline constexpr double kGammaDecLow = 0.020;

// --- spectral grid -----------------------------------------------------------
inline constexpr double kDeltaHalfSpan = 40.0;            // Gamma
inline constexpr int kGridPoints = 1 << 16;

// --- beam geometry (Rb D2 pump/anti-Stokes, D1 coupling/Stokes) -------------
inline constexpr double kLength = 0.075;                  // m
inline constexpr double kLambdaD2 = 780.241209686e-9;     // m, vacuum
inline constexpr double kLambdaD1 = 794.978851156e-9;     // m, vacuum
inline constexpr double kHyperfineSplitting = 6.834682610904e9;  // Hz, ground-state splitting
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kAngleJitter = 0.1 * std::numbers::pi / 180.0;  // rad, half-range
inline constexpr int kJitterDraws = 200000;

// --- detection chain ---------------------------------------------------------
inline constexpr double kEffAs = 0.084;
inline constexpr double kEffS = 0.13;
inline constexpr double kDarkAs = 140.0;                  // counts/s
inline constexpr double kDarkS = 220.0;                   // counts/s
inline constexpr double kLeakAsPerMw = 18.0;              // counts/s per mW pump
inline constexpr double kLeakSPerMw = 1.4;                // counts/s per mW coupling
inline constexpr double kPumpMw = 16.0;
inline constexpr double kCouplingMw = 4.0;

inline constexpr double kBinWidth = 0.8e-9;               // s
inline constexpr double kWindow = 1.6e-6;                 // s
inline constexpr double kWindowStart = -0.2e-6;           // s, window opens before the trigger
inline constexpr double kDuration = 120.0;                // s
inline constexpr double kAutoBin = 12.8e-9;               // s

// --- trigger-rate law and singles table --------------------------------------
inline constexpr double kTriggerPerOdPerMw = 1.25e3;      // counts/s/mW per unit alpha'
inline constexpr std::array<double, 5> kTemperatures = {38.0, 44.0, 53.0, 60.0, 65.0};
inline constexpr std::array<double, 5> kKt = {1.8e3, 2.6e3, 4.1e3, 6.2e3, 7.6e3};
inline constexpr std::array<double, 5> kKs = {1.9e3, 2.9e3, 4.6e3, 7.2e3, 9.2e3};
inline constexpr std::array<double, 5> kOdMeasured = {
    kKt[0] / kTriggerPerOdPerMw, kKt[1] / kTriggerPerOdPerMw, kKt[2] / kTriggerPerOdPerMw,
    kKt[3] / kTriggerPerOdPerMw, kKt[4] / kTriggerPerOdPerMw};
inline constexpr double kSinglesReferenceMw = 16.0;

// --- calibration anchors -----------------------------------------------------
inline constexpr double kAnchorRate = 3.7e5;              // pairs/s at the anchor point
inline constexpr double kAnchorPumpMw = 16.0;
inline constexpr double kAnchorOd = 6.08;                 // 65 C
inline constexpr double kOmegaPPerSqrtMw = 0.25;          // Gamma/sqrt(mW): 16 mW -> 1 Gamma
inline constexpr double kGammaAtLowT = kGammaDecLow;      // 38 C
inline constexpr double kGammaAtHighT = kGammaDec;        // 65 C
inline constexpr double kLowT = 38.0;
inline constexpr double kHighT = 65.0;
inline constexpr double kGammaSlope = 5.0e-4;             // Gamma per mW, relative to anchor power
inline constexpr double kLowOdPoint = 1.50;               // alpha' of the low-OD figure set

// Background anchors at the low-OD point (counts/bin accumulated over kDuration).
inline constexpr double kBaselineLowOd = 36.0;
inline constexpr double kFluorescenceLowOd = 1.4;
inline constexpr double kLowOdTriggerRate = kTriggerPerOdPerMw * kLowOdPoint * kPumpMw;
// Coupling-induced fluorescence rate on the Stokes detector, counts/s.
inline constexpr double kFluorescenceS =
    kFluorescenceLowOd / (kLowOdTriggerRate * kBinWidth * kDuration);

// --- brightness limit ----------------------------------------------------------
inline constexpr double kLimitRatio = 0.25;

// --- figures of merit comparison values ----------------------------------------
inline constexpr double kCrossPeak = 2.7;
inline constexpr double kAutoAs = 1.95;
inline constexpr double kAutoS = 1.97;

}  // namespace sfwm::defaults
