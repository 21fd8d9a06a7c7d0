#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wfc/errors.hpp"

namespace wfc {

using json = nlohmann::json;

struct QoSVector {
  double rt = 0.0;  // response time, seconds
  double tp = 0.0;  // successful responses per period
  double av = 1.0;  // availability probability
  double re = 0.0;  // mean time between failures, seconds

  bool operator==(const QoSVector&) const = default;
};

struct Port {
  std::string name;
  std::string resource_class;

  bool operator==(const Port&) const = default;
};

struct ResourceClass {
  std::string name;
  std::optional<std::string> parent;

  bool operator==(const ResourceClass&) const = default;
};

struct ServiceClass {
  std::string name;
  std::optional<std::string> parent;
  std::vector<Port> inputs;
  std::vector<Port> outputs;
  std::string description;

  bool operator==(const ServiceClass&) const = default;
};

struct ConcreteService {
  std::string name;
  std::string service_class;
  std::map<std::string, std::string> input_formats;   // port -> format
  std::map<std::string, std::string> output_formats;  // port -> format
  QoSVector qos;
  std::string description;

  bool operator==(const ConcreteService&) const = default;
};

// A forest of named classes linked by parent edges. Both the resource and
// the service taxonomy use this.
class Taxonomy {
 public:
  Taxonomy() = default;

  // Throws IntegrityError on duplicates, dangling parents, cycles, or when
  // no root exists.
  Taxonomy(std::string_view label,
           const std::vector<std::pair<std::string, std::optional<std::string>>>& entries);

  bool contains(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<std::string> roots() const;
  std::optional<std::string> parent(std::string_view name) const;
  int depth(std::string_view name) const;

  // Reflexive-transitive descent: a == b or a lies below b.
  bool is_subclass(std::string_view a, std::string_view b) const;

  // Deepest common ancestor-or-self; none across trees of the forest.
  std::optional<std::string> lca(std::string_view a, std::string_view b) const;

  // Parent edges from `from` up to `ancestor`. Throws std::invalid_argument
  // when `ancestor` is not an ancestor-or-self of `from`.
  int path_len(std::string_view from, std::string_view ancestor) const;

  // path_len(lca, a) + path_len(lca, b); none when no common ancestor.
  std::optional<int> distance(std::string_view a, std::string_view b) const;

 private:
  std::size_t index_of(std::string_view name) const;

  std::string label_;
  std::vector<std::string> names_;
  std::vector<std::ptrdiff_t> parent_;
  std::vector<int> depth_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);
  Registry& operator=(const Registry& other);
  Registry(Registry&&) noexcept = default;
  Registry& operator=(Registry&&) noexcept = default;

  static Registry load(std::istream& source);
  static Registry load_file(const std::string& path);
  static Registry from_json(const json& doc);
  json to_json() const;

  const std::vector<std::string>& formats() const { return formats_; }
  const std::vector<ResourceClass>& resource_classes() const { return resource_classes_; }
  const std::vector<ServiceClass>& service_classes() const { return service_classes_; }
  const std::vector<ConcreteService>& services() const { return services_; }

  const Taxonomy& resource_taxonomy() const { return resource_tax_; }
  const Taxonomy& service_taxonomy() const { return service_tax_; }

  bool has_format(std::string_view name) const;
  const ServiceClass* find_service_class(std::string_view name) const;
  const ConcreteService* find_service(std::string_view name) const;
  const ServiceClass& service_class(std::string_view name) const;
  const ConcreteService& service(std::string_view name) const;
  // Class of a concrete service.
  const ServiceClass& class_of(const ConcreteService& s) const { return service_class(s.service_class); }

  // Concrete services declared with exactly this class, sorted by name.
  const std::vector<const ConcreteService*>& services_of(std::string_view service_class) const;
  // Direct children in the service taxonomy, sorted by name.
  std::vector<std::string> children_of(std::string_view service_class) const;

  // A converter class has one input and one output of the same resource
  // class; its concrete services only change data formats.
  bool is_converter_class(const ServiceClass& c) const;

  bool operator==(const Registry& other) const;

 private:
  void build_indexes();

  std::vector<std::string> formats_;
  std::vector<ResourceClass> resource_classes_;
  std::vector<ServiceClass> service_classes_;
  std::vector<ConcreteService> services_;

  Taxonomy resource_tax_;
  Taxonomy service_tax_;
  std::map<std::string, std::size_t, std::less<>> format_index_;
  std::map<std::string, std::size_t, std::less<>> class_index_;
  std::map<std::string, std::size_t, std::less<>> service_index_;
  std::map<std::string, std::vector<const ConcreteService*>, std::less<>> by_class_;
  std::map<std::string, std::vector<std::string>, std::less<>> children_;
};

json qos_to_json(const QoSVector& q);
QoSVector qos_from_json(const json& j);

}  // namespace wfc
