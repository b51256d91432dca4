#include "momentid/errors.hpp"

namespace momentid {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OrderOverflow: return "OrderOverflow";
    case ErrorCode::NoMomentDifference: return "NoMomentDifference";
    case ErrorCode::SharedComponentNotFound: return "SharedComponentNotFound";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NoOrderFound: return "NoOrderFound";
    case ErrorCode::RootsNotReal: return "RootsNotReal";
    case ErrorCode::AlphaUnchanged: return "AlphaUnchanged";
    case ErrorCode::NonIdentifiable: return "NonIdentifiable";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace momentid
