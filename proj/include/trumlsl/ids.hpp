#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace trumlsl {

/// Opaque string identifier, tagged so segment, car and object ids never mix.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const StrongId& id) { return os << id.value_; }

 private:
  std::string value_;
};

struct SegmentTag {};
struct CarTag {};
struct ObjectTag {};

using SegmentId = StrongId<SegmentTag>;
using CarId = StrongId<CarTag>;
using ObjectKind = StrongId<ObjectTag>;

}  // namespace trumlsl

template <typename Tag>
struct std::hash<trumlsl::StrongId<Tag>> {
  std::size_t operator()(const trumlsl::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
