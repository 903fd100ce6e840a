#include "fpg/uc/decision.hpp"

#include <string>

namespace fpg::uc {

using grid::CaseError;

UcDecision UcDecision::zeros(const grid::GridCase& grid, std::size_t horizon) {
  const auto t = static_cast<Eigen::Index>(horizon);
  UcDecision d;
  d.commitment = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.generators.size()), t);
  d.dispatch = d.commitment;
  d.renewable = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.renewables.size()), t);
  d.angle = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.bus_count()), t);
  return d;
}

void UcDecision::validate(const grid::GridCase& grid, std::size_t horizon) const {
  const auto t = static_cast<Eigen::Index>(horizon);
  const auto g = static_cast<Eigen::Index>(grid.generators.size());
  if (commitment.rows() != g || commitment.cols() != t || dispatch.rows() != g ||
      dispatch.cols() != t) {
    throw CaseError("decision: commitment/dispatch must be " + std::to_string(g) + "x" +
                    std::to_string(t));
  }
  if (renewable.rows() != static_cast<Eigen::Index>(grid.renewables.size()) ||
      renewable.cols() != t) {
    throw CaseError("decision: renewable dispatch shape mismatch");
  }
  if (angle.rows() != static_cast<Eigen::Index>(grid.bus_count()) || angle.cols() != t) {
    throw CaseError("decision: angle shape mismatch");
  }
  if (((commitment.array() != 0.0) && (commitment.array() != 1.0)).any()) {
    throw CaseError("decision: commitment must be 0/1");
  }
  if ((angle.row(static_cast<Eigen::Index>(grid.slack_index())).array() != 0.0).any()) {
    throw CaseError("decision: slack angle must be zero");
  }
}

UcParams UcParams::defaults(const grid::GridCase& grid) {
  UcParams p;
  for (const auto& g : grid.generators) p.initial.push_back({0.0, 0.0, 0, g.min_down});
  return p;
}

void UcParams::validate(const grid::GridCase& grid) const {
  if (!(curtailment_price >= 0.0)) throw CaseError("curtailment price must be >= 0");
  if (initial.size() != grid.generators.size()) {
    throw CaseError("initial state needs one entry per generator");
  }
  for (std::size_t g = 0; g < initial.size(); ++g) {
    const auto& s = initial[g];
    const std::string tag = "initial state of generator " + std::to_string(g);
    if (s.on_periods < 0 || s.off_periods < 0) throw CaseError(tag + ": negative counter");
    if (s.commitment == 1.0 && (s.on_periods < 1 || s.off_periods != 0)) {
      throw CaseError(tag + ": committed unit needs on counter >= 1 and off counter 0");
    }
    if (s.commitment == 0.0 && (s.off_periods < 1 || s.on_periods != 0)) {
      throw CaseError(tag + ": offline unit needs off counter >= 1 and on counter 0");
    }
    if (s.commitment != 0.0 && s.commitment != 1.0) throw CaseError(tag + ": commitment must be 0/1");
    if (s.commitment == 0.0 && s.dispatch != 0.0) throw CaseError(tag + ": offline unit with output");
  }
}

}  // namespace fpg::uc
