#include "verdict/types.hpp"

namespace verdict {

std::string to_string(PresentationOrder order) {
  return order == PresentationOrder::AB ? "AB" : "BA";
}

std::string to_string(Choice choice) {
  switch (choice) {
    case Choice::First:
      return "first";
    case Choice::Second:
      return "second";
    case Choice::Tie:
      return "tie";
  }
  throw ValidationError("unreachable choice value");
}

PresentationOrder order_from_string(const std::string& s) {
  if (s == "AB") return PresentationOrder::AB;
  if (s == "BA") return PresentationOrder::BA;
  throw ParseError("unknown presentation order: " + s);
}

Choice choice_from_string(const std::string& s) {
  if (s == "first") return Choice::First;
  if (s == "second") return Choice::Second;
  if (s == "tie") return Choice::Tie;
  throw ParseError("unknown choice: " + s);
}

}  // namespace verdict
