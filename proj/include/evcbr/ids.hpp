#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>

namespace evcbr {

/// Dense integer handle assigned at ingestion. The tag keeps entity and
/// relation handles from being mixed up.
template <class Tag>
struct Id {
  std::uint32_t value = std::numeric_limits<std::uint32_t>::max();

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }
  constexpr bool valid() const { return value != std::numeric_limits<std::uint32_t>::max(); }

  friend constexpr auto operator<=>(Id, Id) = default;
};

struct EntityTag {};
struct RelationTag {};

using EntityId = Id<EntityTag>;
using RelationId = Id<RelationTag>;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

}  // namespace evcbr

template <class Tag>
struct std::hash<evcbr::Id<Tag>> {
  std::size_t operator()(evcbr::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
