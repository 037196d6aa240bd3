#include "coagent/gcm.hpp"

#include <algorithm>

namespace coagent::gcm {

using util::Json;

MemoryStore register_entity(MemoryStore store,
                            const storyboard::CharacterDecl& decl,
                            ArtifactRef portrait,
                            std::string_view portrait_content,
                            FeatureExtractor& extractor) {
  if (store.records.count(decl.id)) {
    throw DuplicateEntity("entity already registered: " + decl.id);
  }
  EntityRecord record;
  record.entity_id = decl.id;
  record.appearance_vec = extractor.embed(portrait_content);
  if (static_cast<int>(record.appearance_vec.size()) != extractor.dim()) {
    throw EmbeddingError("extractor returned vector of length " +
                         std::to_string(record.appearance_vec.size()) +
                         ", expected " + std::to_string(extractor.dim()));
  }
  record.attributes["static_features"] = decl.static_features;
  record.last_update_step = 0;
  record.portrait_ref = std::move(portrait);
  store.records.emplace(decl.id, std::move(record));
  return store;
}

std::optional<EntityRecord> retrieve(const MemoryStore& store,
                                     const std::string& entity_id,
                                     LookupMeter* meter) {
  if (meter) ++meter->lookups;
  auto it = store.records.find(entity_id);
  if (it == store.records.end()) return std::nullopt;
  return it->second;
}

MemoryStore update_from_shot(
    MemoryStore store, int shot_index,
    const std::map<std::string, std::string>& entity_content,
    FeatureExtractor& extractor, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw PreconditionError("blend alpha must lie in [0,1]");
  }
  for (const auto& [id, content] : entity_content) {
    auto it = store.records.find(id);
    if (it == store.records.end()) continue;  // unregistered extras are skipped
    EntityRecord& rec = it->second;
    std::vector<double> fresh = extractor.embed(content);
    if (fresh.size() != rec.appearance_vec.size()) {
      throw EmbeddingError("embedding length mismatch for entity " + id);
    }
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      rec.appearance_vec[i] =
          (1.0 - alpha) * rec.appearance_vec[i] + alpha * fresh[i];
    }
    rec.last_update_step = std::max(rec.last_update_step, shot_index);
  }
  store.step_counter = std::max(store.step_counter, shot_index);
  return store;
}

double entity_overlap(const std::set<std::string>& prev,
                      const std::set<std::string>& cur) {
  if (prev.empty() && cur.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& id : prev) {
    if (cur.count(id)) ++inter;
  }
  const std::size_t uni = prev.size() + cur.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Json record_to_json(const EntityRecord& r) {
  Json j;
  j["appearance_vec"] = r.appearance_vec;
  j["attributes"] = r.attributes;
  j["entity_id"] = r.entity_id;
  j["last_update_step"] = r.last_update_step;
  if (r.portrait_ref) {
    j["portrait_ref"] =
        Json{{"digest", r.portrait_ref->digest}, {"uri", r.portrait_ref->uri}};
  }
  return j;
}

std::string snapshot(const MemoryStore& store) {
  Json j;
  Json records = Json::object();
  for (const auto& [id, rec] : store.records) {
    records[id] = record_to_json(rec);
  }
  j["records"] = records;
  j["step_counter"] = store.step_counter;
  return util::canonical(j);
}

MemoryStore restore(std::string_view bytes) {
  Json j = Json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw SnapshotParseError("memory snapshot is not a JSON object");
  }
  if (!util::unknown_keys(j, {"records", "step_counter"}).empty() ||
      !j.contains("records") || !j.contains("step_counter")) {
    throw SnapshotParseError("memory snapshot has unexpected shape");
  }
  MemoryStore store;
  try {
    store.step_counter = j.at("step_counter").get<int>();
    for (const auto& item : j.at("records").items()) {
      const Json& rj = item.value();
      if (!util::unknown_keys(rj, {"appearance_vec", "attributes", "entity_id",
                                   "last_update_step", "portrait_ref"})
               .empty()) {
        throw SnapshotParseError("entity record has unexpected fields");
      }
      EntityRecord rec;
      rec.entity_id = rj.at("entity_id").get<std::string>();
      rec.appearance_vec = rj.at("appearance_vec").get<std::vector<double>>();
      rec.attributes =
          rj.at("attributes").get<std::map<std::string, std::string>>();
      rec.last_update_step = rj.at("last_update_step").get<int>();
      if (rj.contains("portrait_ref")) {
        rec.portrait_ref =
            ArtifactRef{rj.at("portrait_ref").at("uri").get<std::string>(),
                        rj.at("portrait_ref").at("digest").get<std::string>()};
      }
      if (rec.last_update_step > store.step_counter) {
        throw SnapshotParseError("record update step exceeds step_counter");
      }
      store.records.emplace(item.key(), std::move(rec));
    }
  } catch (const SnapshotParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw SnapshotParseError(std::string("memory snapshot malformed: ") +
                             e.what());
  }
  return store;
}

}  // namespace coagent::gcm
