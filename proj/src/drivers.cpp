#include "hocp/drivers.hpp"

namespace hocp {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::EpsThreshold: return "EpsThreshold";
    case Termination::TrustRegionActive: return "TrustRegionActive";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::SubproblemDegraded: return "SubproblemDegraded";
    case Termination::Converged: return "Converged";
    case Termination::NotConverged: return "NotConverged";
  }
  return "NotConverged";
}

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Singleton: return "singleton";
    case InitStrategy::MemoryReuse: return "memory";
    case InitStrategy::RandomSample: return "random";
  }
  return "singleton";
}

InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "singleton") return InitStrategy::Singleton;
  if (s == "memory") return InitStrategy::MemoryReuse;
  if (s == "random") return InitStrategy::RandomSample;
  throw config_error("unknown init strategy '" + s + "' (expected singleton, memory or random)");
}

}  // namespace hocp
