#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace giff {

// Integer id that does not convert implicitly to other id kinds.
template <typename Tag>
class StrongId {
 public:
  using value_type = std::int32_t;

  constexpr StrongId() = default;
  constexpr explicit StrongId(value_type v) : value_(v) {}

  constexpr value_type value() const { return value_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(value_); }

  friend constexpr auto operator<=>(StrongId, StrongId) = default;

  friend std::ostream& operator<<(std::ostream& os, StrongId id) {
    return os << id.value_;
  }

 private:
  value_type value_ = 0;
};

using AgentId = StrongId<struct AgentIdTag>;
using ActionId = StrongId<struct ActionIdTag>;

}  // namespace giff

template <typename Tag>
struct std::hash<giff::StrongId<Tag>> {
  std::size_t operator()(giff::StrongId<Tag> id) const noexcept {
    return std::hash<std::int32_t>{}(id.value());
  }
};
