#include <algorithm>

#include "driftline/errors.hpp"
#include "driftline/types.hpp"

namespace driftline {

const std::array<ServiceGroup, kServiceGroupCount>& all_service_groups() {
  static const std::array<ServiceGroup, kServiceGroupCount> groups = {
      ServiceGroup::Compute,        ServiceGroup::Networking, ServiceGroup::IdentitySecurity,
      ServiceGroup::Storage,        ServiceGroup::DataServices,
      ServiceGroup::BillingAccounts, ServiceGroup::Others,
  };
  return groups;
}

std::string to_string(ServiceGroup g) {
  switch (g) {
    case ServiceGroup::Compute: return "Compute";
    case ServiceGroup::Networking: return "Networking";
    case ServiceGroup::IdentitySecurity: return "IdentitySecurity";
    case ServiceGroup::Storage: return "Storage";
    case ServiceGroup::DataServices: return "DataServices";
    case ServiceGroup::BillingAccounts: return "BillingAccounts";
    case ServiceGroup::Others: return "Others";
  }
  return "Others";
}

std::string group_abbrev(ServiceGroup g) {
  switch (g) {
    case ServiceGroup::Compute: return "CMP";
    case ServiceGroup::Networking: return "NET";
    case ServiceGroup::IdentitySecurity: return "IDS";
    case ServiceGroup::Storage: return "STO";
    case ServiceGroup::DataServices: return "DAT";
    case ServiceGroup::BillingAccounts: return "BIL";
    case ServiceGroup::Others: return "OTH";
  }
  return "OTH";
}

std::optional<ServiceGroup> service_group_from_string(const std::string& name) {
  for (ServiceGroup g : all_service_groups())
    if (to_string(g) == name) return g;
  return std::nullopt;
}

std::string to_string(ConcernStatus s) {
  switch (s) {
    case ConcernStatus::Raw: return "Raw";
    case ConcernStatus::Deduplicated: return "Deduplicated";
    case ConcernStatus::Classified: return "Classified";
    case ConcernStatus::Assigned: return "Assigned";
    case ConcernStatus::Pooled: return "Pooled";
  }
  return "Raw";
}

std::string to_string(ClusterRole r) {
  switch (r) {
    case ClusterRole::Core: return "Core";
    case ClusterRole::Emerging: return "Emerging";
    case ClusterRole::Peripheral: return "Peripheral";
    case ClusterRole::Deprecated: return "Deprecated";
  }
  return "Emerging";
}

std::optional<ClusterRole> role_from_string(const std::string& name) {
  if (name == "Core") return ClusterRole::Core;
  if (name == "Emerging") return ClusterRole::Emerging;
  if (name == "Peripheral") return ClusterRole::Peripheral;
  if (name == "Deprecated") return ClusterRole::Deprecated;
  return std::nullopt;
}

std::string to_string(ClusterStatus s) {
  return s == ClusterStatus::Active ? "Active" : "Archived";
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Split: return "Split";
    case EventKind::Merge: return "Merge";
    case EventKind::Prune: return "Prune";
    case EventKind::NewCluster: return "NewCluster";
    case EventKind::RoleTransition: return "RoleTransition";
    case EventKind::Narrative: return "Narrative";
    case EventKind::Assignment: return "Assignment";
    case EventKind::Iteration: return "Iteration";
  }
  return "Assignment";
}

std::optional<EventKind> event_kind_from_string(const std::string& name) {
  if (name == "Split") return EventKind::Split;
  if (name == "Merge") return EventKind::Merge;
  if (name == "Prune") return EventKind::Prune;
  if (name == "NewCluster") return EventKind::NewCluster;
  if (name == "RoleTransition") return EventKind::RoleTransition;
  if (name == "Narrative") return EventKind::Narrative;
  if (name == "Assignment") return EventKind::Assignment;
  if (name == "Iteration") return EventKind::Iteration;
  return std::nullopt;
}

const std::string* LifecycleEvent::find(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

std::string LifecycleEvent::get(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr)
    throw EventFormatError("event " + std::to_string(event_id) + " missing field " + key);
  return *v;
}

void LifecycleEvent::set(std::string key, std::string value) {
  fields.emplace_back(std::move(key), std::move(value));
}

}  // namespace driftline
