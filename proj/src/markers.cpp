#include "retk/markers.hpp"

#include <algorithm>

namespace retk {

std::string_view to_string(MarkerScheme scheme) {
  switch (scheme) {
    case MarkerScheme::kTypedPunct: return "typed-punct";
    case MarkerScheme::kEntityMarker: return "entity-marker";
    case MarkerScheme::kEntityMask: return "entity-mask";
    case MarkerScheme::kNone: return "none";
  }
  return "none";
}

std::optional<MarkerScheme> marker_scheme_from_string(std::string_view name) {
  if (name == "typed-punct") return MarkerScheme::kTypedPunct;
  if (name == "entity-marker") return MarkerScheme::kEntityMarker;
  if (name == "entity-mask") return MarkerScheme::kEntityMask;
  if (name == "none") return MarkerScheme::kNone;
  return std::nullopt;
}

EntitySpan remap_span(const EntitySpan& original,
                      const std::vector<Insertion>& insertions) {
  EntitySpan out = original;
  for (const Insertion& ins : insertions) {
    if (ins.position > original.start && ins.position < original.end)
      throw DataError("insertion at position " +
                      std::to_string(ins.position) +
                      " falls strictly inside span [" +
                      std::to_string(original.start) + ", " +
                      std::to_string(original.end) + ")");
    if (ins.position <= original.start) {
      out.start += ins.width;
      out.end += ins.width;
    }
  }
  return out;
}

namespace {

struct SchemeTokens {
  std::vector<std::string> subj_open;
  std::vector<std::string> subj_close;
  std::vector<std::string> obj_open;
  std::vector<std::string> obj_close;
};

SchemeTokens scheme_tokens(MarkerScheme scheme,
                           const TokenizedInstance& inst) {
  switch (scheme) {
    case MarkerScheme::kTypedPunct:
      // Type labels ride along as standalone lowercase tokens.
      return {{"@", "*", lower_ascii(inst.subj.etype.name), "*"},
              {"@"},
              {"#", "^", lower_ascii(inst.obj.etype.name), "^"},
              {"#"}};
    case MarkerScheme::kEntityMarker:
      return {{"[E1]"}, {"[/E1]"}, {"[E2]"}, {"[/E2]"}};
    default:
      return {};
  }
}

void check_collision(const TokenizedInstance& inst,
                     const std::vector<std::string>& marker_tokens) {
  auto span_contains = [&](const EntitySpan& s) {
    for (std::size_t i = s.start; i < s.end && i < inst.tokens.size(); i++)
      if (std::find(marker_tokens.begin(), marker_tokens.end(),
                    inst.tokens[i]) != marker_tokens.end())
        return true;
    return false;
  };
  if (span_contains(inst.subj) || span_contains(inst.obj))
    throw DataError("marker collision: instance '" + inst.id +
                    "' already carries marker tokens inside an entity span");
}

}  // namespace

MarkedInstance insert_markers(const TokenizedInstance& inst,
                              MarkerScheme scheme) {
  std::vector<Violation> violations = validate_instance(inst);
  for (const Violation& v : violations) {
    if (v.message == "overlapping spans")
      throw DataError("marker collision: instance '" + inst.id +
                      "' has overlapping entity spans");
  }
  if (!violations.empty())
    throw DataError("instance '" + inst.id + "': " + violations.front().field +
                    " " + violations.front().message);

  MarkedInstance out;
  out.id = inst.id;
  out.scheme = scheme;

  if (scheme == MarkerScheme::kNone) {
    out.tokens = inst.tokens;
    out.subj = inst.subj;
    out.obj = inst.obj;
    return out;
  }

  if (scheme == MarkerScheme::kEntityMask) {
    std::string subj_mask = "[SUBJ-" + inst.subj.etype.name + "]";
    std::string obj_mask = "[OBJ-" + inst.obj.etype.name + "]";
    check_collision(inst, {subj_mask, obj_mask});

    // Replace the later span first so earlier indices stay valid.
    std::vector<std::string> tokens = inst.tokens;
    const bool subj_first = inst.subj.start < inst.obj.start;
    const EntitySpan& first = subj_first ? inst.subj : inst.obj;
    const EntitySpan& second = subj_first ? inst.obj : inst.subj;
    const std::string& first_mask = subj_first ? subj_mask : obj_mask;
    const std::string& second_mask = subj_first ? obj_mask : subj_mask;

    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(second.start),
                 tokens.begin() + static_cast<std::ptrdiff_t>(second.end));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(second.start),
                  second_mask);
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(first.start),
                 tokens.begin() + static_cast<std::ptrdiff_t>(first.end));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(first.start),
                  first_mask);

    EntitySpan first_marked{first.start, first.start + 1, first.etype};
    EntitySpan second_marked{second.start - (first.size() - 1),
                             second.start - (first.size() - 1) + 1,
                             second.etype};
    out.tokens = std::move(tokens);
    out.subj = subj_first ? first_marked : second_marked;
    out.obj = subj_first ? second_marked : first_marked;
    return out;
  }

  SchemeTokens st = scheme_tokens(scheme, inst);
  if (scheme == MarkerScheme::kTypedPunct)
    check_collision(inst, {"@", "#", "*", "^"});
  else
    check_collision(inst, {"[E1]", "[/E1]", "[E2]", "[/E2]"});

  // All four insertions in pre-insertion coordinates.
  std::vector<Insertion> insertions = {
      {inst.subj.start, st.subj_open.size()},
      {inst.subj.end, st.subj_close.size()},
      {inst.obj.start, st.obj_open.size()},
      {inst.obj.end, st.obj_close.size()},
  };
  out.subj = remap_span(inst.subj, insertions);
  out.obj = remap_span(inst.obj, insertions);

  // Splice the later-starting span first so the earlier span's original
  // indices remain valid.
  std::vector<std::string> tokens = inst.tokens;
  auto splice = [&tokens](const EntitySpan& span,
                          const std::vector<std::string>& open,
                          const std::vector<std::string>& close) {
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(span.end),
                  close.begin(), close.end());
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                  open.begin(), open.end());
  };
  if (inst.subj.start < inst.obj.start) {
    splice(inst.obj, st.obj_open, st.obj_close);
    splice(inst.subj, st.subj_open, st.subj_close);
  } else {
    splice(inst.subj, st.subj_open, st.subj_close);
    splice(inst.obj, st.obj_open, st.obj_close);
  }
  out.tokens = std::move(tokens);
  return out;
}

}  // namespace retk
