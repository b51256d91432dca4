#pragma once

#include <map>
#include <string>
#include <string_view>

#include "momentid/estimators.hpp"

namespace momentid {

enum class ChangeSource { Gamma, Alpha, NoiseTorU, EpsYSuspected };

std::string_view source_name(ChangeSource source);
ChangeSource parse_source(std::string_view name);

struct ChangeVerdict {
  ChangeSource source = ChangeSource::NoiseTorU;
  std::map<std::string, double> evidence;
};

struct DetectorConfig {
  EstimatorConfig estimator;
  // Level of the marginal two-sample KS tests.
  double ks_alpha = 0.01;
};

/// Classifies which single mechanism changed. Step 1 compares the marginals of
/// T and Y with two-sample KS tests; step 2 compares
///   q1 = E[T1 Y1 - T2 Y2] / E[T1^2 - T2^2] and q2 = E[Y1^2 - Y2^2] / E[T1 Y1 - T2 Y2].
ChangeVerdict detect_source(const EnvPairDataset& data, const DetectorConfig& cfg = {});

/// Same decision on moment tables alone; step 1 compares marginal moments up
/// to the table degree instead of running KS tests. With an exact source this
/// is the population-level classifier.
ChangeVerdict detect_source(const MomentSource& source, const DetectorConfig& cfg = {});

/// Detects the change and runs the matching estimator: Gamma and Alpha give a
/// unique estimate, a noise change gives the candidate pair (treatment-noise
/// route, confounder-noise route). Throws NonIdentifiable on EpsYSuspected.
EstimateReport estimate_auto(const EnvPairDataset& data, const DetectorConfig& cfg = {});
EstimateReport estimate_auto(const MomentSource& source, const DetectorConfig& cfg = {});

}  // namespace momentid
