#include "wfc/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wfc {

namespace {

const json& require(const json& obj, const char* key, json::value_t type, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  bool ok = it->type() == type ||
            (type == json::value_t::number_float && it->is_number());
  if (!ok) throw ParseError(where + ": field '" + key + "' has the wrong type");
  return *it;
}

std::string require_name(const json& obj, const char* key, const std::string& where) {
  auto s = require(obj, key, json::value_t::string, where).get<std::string>();
  if (s.empty()) throw ParseError(where + ": field '" + key + "' is empty");
  return s;
}

std::optional<std::string> optional_parent(const json& obj, const std::string& where) {
  auto it = obj.find("parent");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string() || it->get<std::string>().empty())
    throw ParseError(where + ": field 'parent' must be a non-empty string or null");
  return it->get<std::string>();
}

std::vector<Port> parse_ports(const json& arr, const std::string& where) {
  std::vector<Port> ports;
  for (const auto& p : arr) {
    ports.push_back({require_name(p, "port", where), require_name(p, "class", where)});
  }
  return ports;
}

std::map<std::string, std::string> parse_format_map(const json& obj, const std::string& where) {
  std::map<std::string, std::string> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_string()) throw ParseError(where + ": format of port '" + it.key() + "' must be a string");
    out.emplace(it.key(), it.value().get<std::string>());
  }
  return out;
}

json ports_to_json(const std::vector<Port>& ports) {
  json arr = json::array();
  for (const auto& p : ports) arr.push_back({{"port", p.name}, {"class", p.resource_class}});
  return arr;
}

}  // namespace

// Taxonomy ------------------------------------------------------------------

Taxonomy::Taxonomy(std::string_view label,
                   const std::vector<std::pair<std::string, std::optional<std::string>>>& entries)
    : label_(label) {
  for (const auto& [name, parent] : entries) {
    if (!index_.emplace(name, names_.size()).second)
      throw IntegrityError(name, "duplicate " + label_ + " class '" + name + "'");
    names_.push_back(name);
  }
  parent_.assign(names_.size(), -1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& parent = entries[i].second;
    if (!parent) continue;
    auto it = index_.find(*parent);
    if (it == index_.end())
      throw IntegrityError(*parent, label_ + " class '" + names_[i] + "' references unknown parent '" + *parent + "'");
    parent_[i] = static_cast<std::ptrdiff_t>(it->second);
  }
  if (std::none_of(parent_.begin(), parent_.end(), [](auto p) { return p < 0; }))
    throw IntegrityError(label_, "no taxonomy root in " + label_ + " classes");

  depth_.assign(names_.size(), -1);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    // Walk up until a node of known depth or a root; a walk longer than the
    // node count means a cycle.
    std::vector<std::size_t> chain;
    std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(i);
    while (cur >= 0 && depth_[cur] < 0) {
      chain.push_back(static_cast<std::size_t>(cur));
      if (chain.size() > names_.size())
        throw IntegrityError(names_[i], "cycle in " + label_ + " taxonomy through '" + names_[i] + "'");
      cur = parent_[cur];
    }
    int d = cur < 0 ? -1 : depth_[cur];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth_[*it] = ++d;
  }
}

std::size_t Taxonomy::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownNameError(std::string(name));
  return it->second;
}

bool Taxonomy::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

std::vector<std::string> Taxonomy::roots() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (parent_[i] < 0) out.push_back(names_[i]);
  return out;
}

std::optional<std::string> Taxonomy::parent(std::string_view name) const {
  auto p = parent_[index_of(name)];
  if (p < 0) return std::nullopt;
  return names_[p];
}

int Taxonomy::depth(std::string_view name) const { return depth_[index_of(name)]; }

bool Taxonomy::is_subclass(std::string_view a, std::string_view b) const {
  std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(index_of(a));
  auto target = static_cast<std::ptrdiff_t>(index_of(b));
  for (; cur >= 0; cur = parent_[cur])
    if (cur == target) return true;
  return false;
}

std::optional<std::string> Taxonomy::lca(std::string_view a, std::string_view b) const {
  auto x = static_cast<std::ptrdiff_t>(index_of(a));
  auto y = static_cast<std::ptrdiff_t>(index_of(b));
  while (depth_[x] > depth_[y]) x = parent_[x];
  while (depth_[y] > depth_[x]) y = parent_[y];
  while (x != y) {
    x = parent_[x];
    y = parent_[y];
    if (x < 0 || y < 0) return std::nullopt;
  }
  return names_[x];
}

int Taxonomy::path_len(std::string_view from, std::string_view ancestor) const {
  auto cur = static_cast<std::ptrdiff_t>(index_of(from));
  auto target = static_cast<std::ptrdiff_t>(index_of(ancestor));
  int n = 0;
  for (; cur >= 0; cur = parent_[cur], ++n)
    if (cur == target) return n;
  throw std::invalid_argument("'" + std::string(ancestor) + "' is not an ancestor of '" + std::string(from) + "'");
}

std::optional<int> Taxonomy::distance(std::string_view a, std::string_view b) const {
  auto common = lca(a, b);
  if (!common) return std::nullopt;
  return path_len(a, *common) + path_len(b, *common);
}

// Registry ------------------------------------------------------------------

Registry::Registry(const Registry& other)
    : formats_(other.formats_),
      resource_classes_(other.resource_classes_),
      service_classes_(other.service_classes_),
      services_(other.services_) {
  build_indexes();
}

Registry& Registry::operator=(const Registry& other) {
  if (this != &other) {
    Registry copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Registry Registry::load(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("registry: ") + e.what());
  }
  return from_json(doc);
}

Registry Registry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open registry file '" + path + "'");
  return load(in);
}

Registry Registry::from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("registry: top level must be an object");
  Registry r;
  for (const auto& f : require(doc, "formats", json::value_t::array, "registry")) {
    if (!f.is_string() || f.get<std::string>().empty()) throw ParseError("formats: entries must be non-empty strings");
    r.formats_.push_back(f.get<std::string>());
  }
  for (const auto& c : require(doc, "resource_classes", json::value_t::array, "registry")) {
    const std::string where = "resource_classes";
    r.resource_classes_.push_back({require_name(c, "name", where), optional_parent(c, where)});
  }
  for (const auto& c : require(doc, "service_classes", json::value_t::array, "registry")) {
    const std::string where = "service_classes";
    ServiceClass sc;
    sc.name = require_name(c, "name", where);
    sc.parent = optional_parent(c, where + "/" + sc.name);
    sc.inputs = parse_ports(require(c, "inputs", json::value_t::array, where + "/" + sc.name), where + "/" + sc.name);
    sc.outputs = parse_ports(require(c, "outputs", json::value_t::array, where + "/" + sc.name), where + "/" + sc.name);
    sc.description = require(c, "description", json::value_t::string, where + "/" + sc.name).get<std::string>();
    r.service_classes_.push_back(std::move(sc));
  }
  for (const auto& s : require(doc, "services", json::value_t::array, "registry")) {
    const std::string where = "services";
    ConcreteService cs;
    cs.name = require_name(s, "name", where);
    const std::string at = where + "/" + cs.name;
    cs.service_class = require_name(s, "class", at);
    cs.input_formats = parse_format_map(require(s, "input_formats", json::value_t::object, at), at);
    cs.output_formats = parse_format_map(require(s, "output_formats", json::value_t::object, at), at);
    cs.qos = qos_from_json(require(s, "qos", json::value_t::object, at));
    cs.description = require(s, "description", json::value_t::string, at).get<std::string>();
    r.services_.push_back(std::move(cs));
  }
  r.build_indexes();
  return r;
}

json Registry::to_json() const {
  json doc;
  doc["formats"] = formats_;
  doc["resource_classes"] = json::array();
  for (const auto& c : resource_classes_) {
    doc["resource_classes"].push_back({{"name", c.name}, {"parent", c.parent ? json(*c.parent) : json(nullptr)}});
  }
  doc["service_classes"] = json::array();
  for (const auto& c : service_classes_) {
    doc["service_classes"].push_back({{"name", c.name},
                                      {"parent", c.parent ? json(*c.parent) : json(nullptr)},
                                      {"inputs", ports_to_json(c.inputs)},
                                      {"outputs", ports_to_json(c.outputs)},
                                      {"description", c.description}});
  }
  doc["services"] = json::array();
  for (const auto& s : services_) {
    doc["services"].push_back({{"name", s.name},
                               {"class", s.service_class},
                               {"input_formats", s.input_formats},
                               {"output_formats", s.output_formats},
                               {"qos", qos_to_json(s.qos)},
                               {"description", s.description}});
  }
  return doc;
}

void Registry::build_indexes() {
  format_index_.clear();
  class_index_.clear();
  service_index_.clear();
  by_class_.clear();
  children_.clear();

  for (std::size_t i = 0; i < formats_.size(); ++i)
    if (!format_index_.emplace(formats_[i], i).second)
      throw IntegrityError(formats_[i], "duplicate format '" + formats_[i] + "'");

  std::vector<std::pair<std::string, std::optional<std::string>>> entries;
  for (const auto& c : resource_classes_) entries.emplace_back(c.name, c.parent);
  resource_tax_ = Taxonomy("resource", entries);

  entries.clear();
  for (const auto& c : service_classes_) entries.emplace_back(c.name, c.parent);
  service_tax_ = Taxonomy("service", entries);

  for (std::size_t i = 0; i < service_classes_.size(); ++i) {
    const auto& c = service_classes_[i];
    class_index_.emplace(c.name, i);
    if (c.parent) children_[*c.parent].push_back(c.name);
    std::set<std::string> seen;
    for (const auto* ports : {&c.inputs, &c.outputs}) {
      for (const auto& p : *ports) {
        if (!seen.insert(p.name).second)
          throw IntegrityError(p.name, "service class '" + c.name + "' declares port '" + p.name + "' twice");
        if (!resource_tax_.contains(p.resource_class))
          throw IntegrityError(p.resource_class, "service class '" + c.name + "' references unknown resource class '" +
                                                     p.resource_class + "'");
      }
    }
  }
  for (auto& [_, kids] : children_) std::sort(kids.begin(), kids.end());

  auto check_formats = [&](const ConcreteService& s, const std::vector<Port>& ports,
                           const std::map<std::string, std::string>& formats, const char* side) {
    if (formats.size() != ports.size())
      throw IntegrityError(s.name, "service '" + s.name + "' " + side + " formats do not cover exactly the class ports");
    for (const auto& p : ports) {
      auto it = formats.find(p.name);
      if (it == formats.end())
        throw IntegrityError(p.name, "service '" + s.name + "' has no " + side + " format for port '" + p.name + "'");
      if (!has_format(it->second))
        throw IntegrityError(it->second, "service '" + s.name + "' references unknown format '" + it->second + "'");
    }
  };

  for (std::size_t i = 0; i < services_.size(); ++i) {
    const auto& s = services_[i];
    if (!service_index_.emplace(s.name, i).second)
      throw IntegrityError(s.name, "duplicate service '" + s.name + "'");
    if (class_index_.count(s.name))
      throw IntegrityError(s.name, "service '" + s.name + "' shares its name with a service class");
    auto cit = class_index_.find(s.service_class);
    if (cit == class_index_.end())
      throw IntegrityError(s.service_class, "service '" + s.name + "' references unknown class '" + s.service_class + "'");
    const auto& cls = service_classes_[cit->second];
    check_formats(s, cls.inputs, s.input_formats, "input");
    check_formats(s, cls.outputs, s.output_formats, "output");
    const auto& q = s.qos;
    bool finite = std::isfinite(q.rt) && std::isfinite(q.tp) && std::isfinite(q.av) && std::isfinite(q.re);
    if (!finite || q.rt < 0 || q.tp < 0 || q.re < 0 || q.av < 0 || q.av > 1)
      throw IntegrityError(s.name, "service '" + s.name + "' has QoS values outside their ranges");
    by_class_[s.service_class].push_back(&s);
  }
  for (auto& [_, list] : by_class_)
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->name < b->name; });
}

bool Registry::has_format(std::string_view name) const { return format_index_.find(name) != format_index_.end(); }

const ServiceClass* Registry::find_service_class(std::string_view name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &service_classes_[it->second];
}

const ConcreteService* Registry::find_service(std::string_view name) const {
  auto it = service_index_.find(name);
  return it == service_index_.end() ? nullptr : &services_[it->second];
}

const ServiceClass& Registry::service_class(std::string_view name) const {
  if (const auto* c = find_service_class(name)) return *c;
  throw UnknownNameError(std::string(name));
}

const ConcreteService& Registry::service(std::string_view name) const {
  if (const auto* s = find_service(name)) return *s;
  throw UnknownNameError(std::string(name));
}

const std::vector<const ConcreteService*>& Registry::services_of(std::string_view service_class) const {
  static const std::vector<const ConcreteService*> none;
  auto it = by_class_.find(service_class);
  return it == by_class_.end() ? none : it->second;
}

std::vector<std::string> Registry::children_of(std::string_view service_class) const {
  auto it = children_.find(service_class);
  return it == children_.end() ? std::vector<std::string>{} : it->second;
}

bool Registry::is_converter_class(const ServiceClass& c) const {
  return c.inputs.size() == 1 && c.outputs.size() == 1 &&
         c.inputs[0].resource_class == c.outputs[0].resource_class;
}

bool Registry::operator==(const Registry& other) const {
  return formats_ == other.formats_ && resource_classes_ == other.resource_classes_ &&
         service_classes_ == other.service_classes_ && services_ == other.services_;
}

json qos_to_json(const QoSVector& q) { return {{"rt", q.rt}, {"tp", q.tp}, {"av", q.av}, {"re", q.re}}; }

QoSVector qos_from_json(const json& j) {
  QoSVector q;
  q.rt = require(j, "rt", json::value_t::number_float, "qos").get<double>();
  q.tp = require(j, "tp", json::value_t::number_float, "qos").get<double>();
  q.av = require(j, "av", json::value_t::number_float, "qos").get<double>();
  q.re = require(j, "re", json::value_t::number_float, "qos").get<double>();
  return q;
}

}  // namespace wfc
