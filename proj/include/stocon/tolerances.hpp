#pragma once

// Central numeric policy. Modules and tests read these constants from here
// so a tolerance is never duplicated with drifting values.

namespace stocon::tol {

// linear algebra
inline constexpr double kSymmetryAbs = 1e-10;       // max |A - A^T| entry accepted as symmetric
inline constexpr double kJacobiOffRel = 1e-12;      // off-diagonal Frobenius / ||A||_F at convergence
inline constexpr int kJacobiMaxSweeps = 64;
inline constexpr double kOrthonormality = 1e-9;     // ||V^T V - I|| budget for eigenvectors
inline constexpr double kConditionLimit = 1e12;     // solves refuse above this 1-norm condition estimate

// finite differences
inline constexpr double kFdScale = 1e-5;            // h = kFdScale * (1 + ||a||)

// geodesic solver
inline constexpr int kGeoSegments = 64;             // default curve segments
inline constexpr int kGeoMaxSweeps = 5000;
inline constexpr double kGeoRelDecrease = 1e-10;    // converged when a sweep improves less than this
inline constexpr double kGeoStraightLineSlack = 1e-12;

// certification
inline constexpr int kCertSamples = 4096;           // default sample budget (grid + quasi-random)
inline constexpr double kEvalFailFraction = 1e-3;   // >0.1% failed sample evaluations fails a report
inline constexpr double kRateMargin = 1.0;          // default safety margin factor

// simulation
inline constexpr double kSafetyBoxFactor = 10.0;    // divergence box: domain half-widths scaled by this
inline constexpr int kDmSubsamplePaths = 32;        // metric-distance statistics subsample
inline constexpr int kDmSubsampleTimes = 64;

}  // namespace stocon::tol
