#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retk/corpus.hpp"

namespace retk {

enum class MarkerScheme {
  kTypedPunct,    // @ *subj-type* SUBJ @ ... # ^obj-type^ OBJ #
  kEntityMarker,  // [E1] SUBJ [/E1] ... [E2] OBJ [/E2]
  kEntityMask,    // [SUBJ-TYPE] ... [OBJ-TYPE]
  kNone,
};

std::string_view to_string(MarkerScheme scheme);
std::optional<MarkerScheme> marker_scheme_from_string(std::string_view name);

// Token sequence after a marker scheme was applied. The spans select the
// original entity surface tokens inside the marked sequence (for the mask
// scheme, the single mask token).
struct MarkedInstance {
  std::string id;
  std::vector<std::string> tokens;
  EntitySpan subj;
  EntitySpan obj;
  MarkerScheme scheme = MarkerScheme::kNone;

  bool operator==(const MarkedInstance&) const = default;
};

// One token-insertion event, position given in pre-insertion coordinates.
struct Insertion {
  std::size_t position = 0;
  std::size_t width = 0;
};

// Shifts a span across a list of insertions so it selects the same surface
// tokens afterwards. An insertion strictly inside the span is an error.
EntitySpan remap_span(const EntitySpan& original,
                      const std::vector<Insertion>& insertions);

// Applies a marker scheme. Throws DataError("marker collision: ...") on
// overlapping spans or when the scheme's marker tokens already occur inside
// an entity span (re-marking guard).
MarkedInstance insert_markers(const TokenizedInstance& inst,
                              MarkerScheme scheme);

}  // namespace retk
