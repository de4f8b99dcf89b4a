#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irk/corpus.hpp"

namespace irk {

// A deduplicated edge of the execution model. LAUNCH interactions have no
// source screen and are never part of the adjacency; BACK and LAUNCH have no
// target component.
struct Interaction {
  std::string id;
  Action action = Action::Click;
  std::optional<std::string> source_screen;
  std::optional<std::string> target_component;
  std::optional<std::string> input_value;
  std::string dest_screen;

  bool operator==(const Interaction&) const = default;
};

// Text of a component, kept on the model so step matching and report
// rendering do not need the app's screen list.
struct ComponentText {
  std::string screen_id;
  std::string label;
  std::string description;

  bool operator==(const ComponentText&) const = default;
};

// Directed multigraph of screens connected by interactions. Immutable once
// built; all queries are const and deterministic.
class ExecutionModel {
 public:
  // Validates and indexes an explicit interaction list. Throws UNKNOWN_SCREEN,
  // UNKNOWN_COMPONENT, DUPLICATE_ID (interaction ids) or NO_LAUNCH when
  // launch_screen is not a model screen.
  ExecutionModel(std::vector<std::string> screens, std::string launch_screen, std::vector<Interaction> interactions,
                 std::map<std::string, ComponentText> components = {});

  const std::vector<std::string>& screens() const noexcept { return screens_; }
  const std::string& launch_screen() const noexcept { return launch_screen_; }
  // Ordered by id.
  const std::vector<Interaction>& interactions() const noexcept { return interactions_; }
  const std::map<std::string, ComponentText>& components() const noexcept { return components_; }

  bool has_screen(std::string_view screen_id) const;
  const Interaction* find(std::string_view interaction_id) const;
  // Throws UNKNOWN_SCREEN.
  std::span<const Interaction> outgoing(std::string_view screen_id) const;
  const ComponentText* component(std::string_view component_id) const;

  bool operator==(const ExecutionModel&) const = default;

 private:
  std::vector<std::string> screens_;  // sorted
  std::string launch_screen_;
  std::vector<Interaction> interactions_;
  std::map<std::string, ComponentText> components_;
  // screen id -> interactions with that source, ordered by id.
  std::map<std::string, std::vector<Interaction>, std::less<>> adjacency_;
};

// One Interaction per distinct (action, source, component, dest, input)
// tuple, ids assigned in first-observation order ("i001", "i002", ...). The
// launch screen is the dest of the first LAUNCH record.
// Throws UNKNOWN_SCREEN, UNKNOWN_COMPONENT, NO_LAUNCH.
ExecutionModel build_model(std::span<const TraceRecord> records, std::span<const Screen> screens);
ExecutionModel build_model(const App& app);

// Minimum-length interaction sequence by breadth-first search; ties go to the
// lexicographically smallest id sequence. Empty when from == to.
// Throws UNKNOWN_SCREEN, UNREACHABLE.
std::vector<Interaction> shortest_interaction_path(const ExecutionModel& model, std::string_view from,
                                                   std::string_view to);

std::vector<Interaction> outgoing(const ExecutionModel& model, std::string_view screen_id);

}  // namespace irk
