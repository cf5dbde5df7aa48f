#include "carepipe/types.hpp"

#include <stdexcept>

namespace carepipe {

std::string to_string(ClarificationRequest::Field f) {
    switch (f) {
        case ClarificationRequest::Field::resident: return "resident";
        case ClarificationRequest::Field::category: return "category";
        case ClarificationRequest::Field::time: return "time";
    }
    throw std::logic_error("unknown clarification field");
}

std::string to_string(EventStatus s) {
    switch (s) {
        case EventStatus::pending: return "pending";
        case EventStatus::fired: return "fired";
        case EventStatus::confirmed: return "confirmed";
        case EventStatus::cancelled: return "cancelled";
    }
    return "unknown";
}

std::optional<EventStatus> event_status_from_string(std::string_view s) {
    if (s == "pending") return EventStatus::pending;
    if (s == "fired") return EventStatus::fired;
    if (s == "confirmed") return EventStatus::confirmed;
    if (s == "cancelled") return EventStatus::cancelled;
    return std::nullopt;
}

std::string to_string(AuditAction a) {
    switch (a) {
        case AuditAction::insert: return "insert";
        case AuditAction::schedule: return "schedule";
        case AuditAction::fire: return "fire";
        case AuditAction::confirm: return "confirm";
        case AuditAction::cancel: return "cancel";
        case AuditAction::reject: return "reject";
    }
    return "unknown";
}

std::optional<AuditAction> audit_action_from_string(std::string_view s) {
    if (s == "insert") return AuditAction::insert;
    if (s == "schedule") return AuditAction::schedule;
    if (s == "fire") return AuditAction::fire;
    if (s == "confirm") return AuditAction::confirm;
    if (s == "cancel") return AuditAction::cancel;
    if (s == "reject") return AuditAction::reject;
    return std::nullopt;
}

std::string to_string(Disposition d) {
    switch (d) {
        case Disposition::completed: return "completed";
        case Disposition::clarification_requested: return "clarification_requested";
        case Disposition::rejected: return "rejected";
    }
    return "unknown";
}

std::optional<Disposition> disposition_from_string(std::string_view s) {
    if (s == "completed") return Disposition::completed;
    if (s == "clarification_requested") return Disposition::clarification_requested;
    if (s == "rejected") return Disposition::rejected;
    return std::nullopt;
}

ResidentRegistry::ResidentRegistry(std::vector<Resident> residents)
    : residents_(std::move(residents)) {
    for (std::size_t i = 0; i < residents_.size(); ++i) by_id_[residents_[i].id] = i;
}

const Resident* ResidentRegistry::find(const std::string& id) const {
    const auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &residents_[it->second];
}

CategoryTaxonomy::CategoryTaxonomy(std::vector<CareCategory> categories)
    : categories_(std::move(categories)) {
    for (std::size_t i = 0; i < categories_.size(); ++i) by_id_[categories_[i].id] = i;
}

const CareCategory* CategoryTaxonomy::find(const std::string& id) const {
    const auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &categories_[it->second];
}

std::vector<CareCategory> default_categories() {
    // Lexicon entries are matched word-bounded after normalization and must
    // stay pairwise disjoint across categories.
    return {
        {"medication", "Medication",
         {"medication", "medications", "medicine", "meds", "tablet", "tablets", "pill", "pills",
          "dose", "doses", "inhaler", "prescription", "paracetamol", "insulin", "blood pressure",
          "antibiotics"}},
        {"mobility", "Mobility",
         {"mobility", "walk", "walking", "walked", "walker", "wheelchair", "stairs", "transfer",
          "hoist", "balance", "zimmer", "frame", "stroll"}},
        {"hygiene", "Personal hygiene",
         {"hygiene", "shower", "showered", "bath", "bathed", "wash", "washed", "washing", "teeth",
          "shave", "shaved", "shaving", "toileting", "commode", "nails"}},
        {"activities", "Activities",
         {"activity", "activities", "bingo", "crafts", "painting", "garden", "gardening", "music",
          "singing", "quiz", "puzzle", "dominoes"}},
        {"equipment", "Equipment",
         {"equipment", "hearing aid", "hearing aids", "glasses", "spectacles", "dentures",
          "battery", "batteries", "charger", "sensor", "mattress", "handrail", "callbell"}},
        {"goals", "Goals",
         {"goal", "goals", "care plan", "target", "targets", "progress", "review", "milestone"}},
        {"nutrition", "Nutrition",
         {"breakfast", "lunch", "dinner", "supper", "meal", "meals", "eating", "ate", "food",
          "snack", "appetite", "diet", "portion"}},
        {"hydration", "Hydration",
         {"hydration", "water", "drink", "drinks", "drinking", "drank", "fluids", "juice", "tea",
          "thirsty", "cup", "squash"}},
        {"sleep", "Sleep",
         {"sleep", "sleeping", "slept", "nap", "napped", "bed", "bedtime", "rest", "rested",
          "tired", "insomnia", "overnight"}},
        {"social", "Social engagement",
         {"visit", "visitor", "visitors", "visited", "family", "daughter", "son", "chat",
          "chatted", "conversation", "lonely", "phoned", "called"}},
        {"skin", "Skin care",
         {"skin", "cream", "dressing", "wound", "bruise", "pressure sore", "rash", "ointment",
          "moisturiser", "heel", "redness"}},
    };
}

}  // namespace carepipe
