#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coagent/storyboard.hpp"
#include "coagent/util/json.hpp"

namespace coagent::gcm {

// Reference to a stored artifact. URIs inside persisted state are always
// relative to the run directory (or scheme-prefixed), never absolute paths,
// so run directories compare byte-for-byte.
struct ArtifactRef {
  std::string uri;
  std::string digest;

  bool operator==(const ArtifactRef&) const = default;
};

// Pluggable appearance embedder. Production binds an image-embedding
// service; tests bind the deterministic content-hash extractor.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<double> embed(std::string_view content) = 0;
  virtual int dim() const = 0;
};

struct EntityRecord {
  std::string entity_id;
  std::vector<double> appearance_vec;
  std::map<std::string, std::string> attributes;
  int last_update_step = 0;
  std::optional<ArtifactRef> portrait_ref;

  bool operator==(const EntityRecord&) const = default;
};

// The per-run entity memory. Single-writer; treated as a value.
struct MemoryStore {
  std::map<std::string, EntityRecord> records;
  int step_counter = 0;

  bool operator==(const MemoryStore&) const = default;
};

// Counts record lookups so tests can assert O(N)-in-shots retrieval.
struct LookupMeter {
  std::uint64_t lookups = 0;
};

// Registers a new entity: vector from the portrait content, attributes
// seeded from static_features, update step 0.
MemoryStore register_entity(MemoryStore store,
                            const storyboard::CharacterDecl& decl,
                            ArtifactRef portrait,
                            std::string_view portrait_content,
                            FeatureExtractor& extractor);

std::optional<EntityRecord> retrieve(const MemoryStore& store,
                                     const std::string& entity_id,
                                     LookupMeter* meter = nullptr);

// Blends fresh per-entity appearance content into the store:
// v <- (1-alpha)*v + alpha*embed(content), last_update_step <- shot_index.
// Callers must only pass artifacts that passed verification.
MemoryStore update_from_shot(
    MemoryStore store, int shot_index,
    const std::map<std::string, std::string>& entity_content,
    FeatureExtractor& extractor, double alpha);

// Jaccard index over entity-id sets; both-empty is defined as 1.0 so
// entity-free consecutive shots prefer continuity modes.
double entity_overlap(const std::set<std::string>& prev,
                      const std::set<std::string>& cur);

std::string snapshot(const MemoryStore& store);
MemoryStore restore(std::string_view bytes);

util::Json record_to_json(const EntityRecord& r);

}  // namespace coagent::gcm
