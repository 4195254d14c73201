#pragma once

// Literature reference values for the unit-coefficient r^-6 kernel with cutoff 0.1.
namespace mfof::reference {

struct MomentValues {
  double G1_100, G2_110, G2_200, G3_111, G3_210, G3_300;
};
inline constexpr MomentValues kMomentValues{41.32, 8.264, 24.79, 1.181, 3.542, 17.71};

// K/(s*)^2 per unit coefficient (c1, c2, c3).
struct FrankValues {
  double K1[3];
  double K2[3];
  double ratio;
};
inline constexpr FrankValues kFrankValues{{83, 33, 14}, {83, 17, 4.7}, 0.2};

// k0 per unit coefficient.
inline constexpr double kK0Components[3] = {4058, 1353, 811};

}  // namespace mfof::reference
