#include "irk/execmodel.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "irk/error.hpp"

namespace irk {

ExecutionModel::ExecutionModel(std::vector<std::string> screens, std::string launch_screen,
                               std::vector<Interaction> interactions, std::map<std::string, ComponentText> components)
    : screens_(std::move(screens)),
      launch_screen_(std::move(launch_screen)),
      interactions_(std::move(interactions)),
      components_(std::move(components)) {
  std::sort(screens_.begin(), screens_.end());
  screens_.erase(std::unique(screens_.begin(), screens_.end()), screens_.end());
  if (!has_screen(launch_screen_)) {
    throw Error(ErrorCode::NoLaunch, "launch screen '" + launch_screen_ + "' is not a model screen");
  }
  std::sort(interactions_.begin(), interactions_.end(),
            [](const Interaction& a, const Interaction& b) { return a.id < b.id; });

  for (const auto& s : screens_) adjacency_[s];
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const Interaction& it = interactions_[i];
    if (i > 0 && interactions_[i - 1].id == it.id) {
      throw Error(ErrorCode::DuplicateId, "interaction id '" + it.id + "' repeated");
    }
    if (!has_screen(it.dest_screen)) {
      throw Error(ErrorCode::UnknownScreen, "interaction " + it.id + ": unknown dest '" + it.dest_screen + "'");
    }
    if (it.source_screen && !has_screen(*it.source_screen)) {
      throw Error(ErrorCode::UnknownScreen, "interaction " + it.id + ": unknown source '" + *it.source_screen + "'");
    }
    if (!it.source_screen && it.action != Action::Launch) {
      throw Error(ErrorCode::UnknownScreen, "interaction " + it.id + ": only LAUNCH may omit its source");
    }
    if (it.target_component && !components_.empty()) {
      auto c = components_.find(*it.target_component);
      if (c == components_.end() || !it.source_screen || c->second.screen_id != *it.source_screen) {
        throw Error(ErrorCode::UnknownComponent,
                    "interaction " + it.id + ": component '" + *it.target_component + "' not on source screen");
      }
    }
    if (it.source_screen) adjacency_[*it.source_screen].push_back(it);
  }
}

bool ExecutionModel::has_screen(std::string_view screen_id) const {
  return std::binary_search(screens_.begin(), screens_.end(), screen_id);
}

const Interaction* ExecutionModel::find(std::string_view interaction_id) const {
  auto it = std::lower_bound(interactions_.begin(), interactions_.end(), interaction_id,
                             [](const Interaction& a, std::string_view id) { return a.id < id; });
  if (it == interactions_.end() || it->id != interaction_id) return nullptr;
  return &*it;
}

std::span<const Interaction> ExecutionModel::outgoing(std::string_view screen_id) const {
  auto it = adjacency_.find(screen_id);
  if (it == adjacency_.end()) throw Error(ErrorCode::UnknownScreen, "unknown screen '" + std::string(screen_id) + "'");
  return it->second;
}

const ComponentText* ExecutionModel::component(std::string_view component_id) const {
  auto it = components_.find(std::string(component_id));
  return it == components_.end() ? nullptr : &it->second;
}

ExecutionModel build_model(std::span<const TraceRecord> records, std::span<const Screen> screens) {
  std::vector<std::string> screen_ids;
  std::map<std::string, ComponentText> components;
  for (const auto& s : screens) {
    screen_ids.push_back(s.id);
    for (const auto& c : s.components) components.emplace(c.id, ComponentText{s.id, c.label, c.description});
  }
  const std::set<std::string> known(screen_ids.begin(), screen_ids.end());

  using Key = std::tuple<Action, std::optional<std::string>, std::optional<std::string>, std::string,
                         std::optional<std::string>>;
  std::set<Key> seen;
  std::vector<Interaction> distinct;
  std::optional<std::string> launch;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const TraceRecord& r = records[i];
    const std::string where = "trace record " + std::to_string(i + 1);
    if (!known.count(r.dest)) throw Error(ErrorCode::UnknownScreen, where + ": unknown dest '" + r.dest + "'");

    Interaction it;
    it.action = r.action;
    it.dest_screen = r.dest;
    if (r.action == Action::Launch) {
      if (!launch) launch = r.dest;
    } else {
      if (!r.source || !known.count(*r.source)) {
        throw Error(ErrorCode::UnknownScreen, where + ": unknown source '" + r.source.value_or("") + "'");
      }
      it.source_screen = r.source;
      if (!is_targetless(r.action)) {
        auto c = r.component ? components.find(*r.component) : components.end();
        if (c == components.end() || c->second.screen_id != *r.source) {
          throw Error(ErrorCode::UnknownComponent,
                      where + ": component '" + r.component.value_or("") + "' not on screen '" + *r.source + "'");
        }
        it.target_component = r.component;
      }
    }
    if (r.action == Action::Type) it.input_value = r.input;

    if (seen.emplace(it.action, it.source_screen, it.target_component, it.dest_screen, it.input_value).second) {
      distinct.push_back(std::move(it));
    }
  }
  if (!launch) throw Error(ErrorCode::NoLaunch, "trace has no LAUNCH record");

  const std::size_t width = std::max<std::size_t>(3, std::to_string(distinct.size()).size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    std::string n = std::to_string(i + 1);
    distinct[i].id = "i" + std::string(width - n.size(), '0') + n;
  }
  return ExecutionModel(std::move(screen_ids), *launch, std::move(distinct), std::move(components));
}

ExecutionModel build_model(const App& app) { return build_model(app.traces, app.screens); }

std::vector<Interaction> shortest_interaction_path(const ExecutionModel& model, std::string_view from,
                                                   std::string_view to) {
  if (!model.has_screen(from)) throw Error(ErrorCode::UnknownScreen, "unknown screen '" + std::string(from) + "'");
  if (!model.has_screen(to)) throw Error(ErrorCode::UnknownScreen, "unknown screen '" + std::string(to) + "'");
  if (from == to) return {};

  // Backward BFS from the target gives the distance-to-target of every
  // screen; walking forward along distance-decreasing edges, always taking
  // the smallest id, yields the lexicographically smallest shortest path.
  std::map<std::string_view, std::vector<const Interaction*>> reverse;
  for (const auto& it : model.interactions()) {
    if (it.source_screen) reverse[it.dest_screen].push_back(&it);
  }
  std::map<std::string_view, std::size_t> dist;
  dist[to] = 0;
  std::deque<std::string_view> queue{to};
  while (!queue.empty() && !dist.count(from)) {
    const std::string_view cur = queue.front();
    queue.pop_front();
    auto r = reverse.find(cur);
    if (r == reverse.end()) continue;
    for (const Interaction* it : r->second) {
      const std::string_view src = *it->source_screen;
      if (dist.emplace(src, dist[cur] + 1).second) queue.push_back(src);
    }
  }
  auto d = dist.find(from);
  if (d == dist.end()) {
    throw Error(ErrorCode::Unreachable, "no path from '" + std::string(from) + "' to '" + std::string(to) + "'");
  }

  std::vector<Interaction> path;
  std::string cur(from);
  std::size_t remaining = d->second;
  while (remaining > 0) {
    // outgoing() is ordered by id, so the first qualifying edge is the smallest.
    for (const auto& it : model.outgoing(cur)) {
      auto nd = dist.find(it.dest_screen);
      if (nd != dist.end() && nd->second == remaining - 1) {
        path.push_back(it);
        break;
      }
    }
    cur = path.back().dest_screen;
    --remaining;
  }
  return path;
}

std::vector<Interaction> outgoing(const ExecutionModel& model, std::string_view screen_id) {
  auto span = model.outgoing(screen_id);
  return {span.begin(), span.end()};
}

}  // namespace irk
