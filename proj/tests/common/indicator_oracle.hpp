#pragma once

// Brute-force recomputation of the indicator report, one bucket at a time,
// straight from the record list. Shares no code with the library.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shopper/analytics.hpp"

namespace oracle {

using namespace shopper;

struct Counts {
  long visitors = 0;
  long interacting = 0;
  long interactions = 0;
  long positive = 0;
  long negative = 0;
  long neutral = 0;
  std::int64_t interaction_ms = 0;
  std::int64_t visit_ms = 0;
  std::map<std::string, long> per_zone;
  std::map<std::string, long> per_product;
  std::map<std::string, long> per_category;
  std::optional<long> transactions;
};

inline bool dwell_in(const VisitRecord& v, const std::string& zone, std::int64_t min_ms) {
  for (const auto& z : v.zone_intervals) {
    if (z.zone_id == zone && z.exit_ms - z.enter_ms >= min_ms) return true;
  }
  return false;
}

inline bool keep_visit(const VisitRecord& v, const IndicatorFilters& f) {
  if (f.camera_id.has_value() && *f.camera_id != v.camera_id) return false;
  if (f.entrance_camera.has_value() && *f.entrance_camera != v.camera_id) return false;
  if (f.zone_id.has_value() && !dwell_in(v, *f.zone_id, f.zone_min_dwell_ms)) return false;
  return true;
}

inline bool keep_event(const InteractionEvent& e, const IndicatorFilters& f) {
  if (f.camera_id.has_value() && *f.camera_id != e.camera_id) return false;
  if (f.zone_id.has_value() && *f.zone_id != e.zone_id) return false;
  return true;
}

/// Zone columns the report is expected to carry.
inline std::set<std::string> zone_keys(const std::vector<StoredRecord>& records, std::int64_t from,
                                       std::int64_t to, const IndicatorFilters& f,
                                       const ProductCatalog& catalog) {
  if (f.zone_id.has_value()) return {*f.zone_id};
  std::set<std::string> keys;
  for (const auto& [k, info] : catalog) keys.insert(k.first);
  for (const auto& r : records) {
    const auto* v = std::get_if<VisitRecord>(&r.record);
    if (v == nullptr || !keep_visit(*v, f) || v->entry_ms < from || v->entry_ms >= to) continue;
    for (const auto& z : v->zone_intervals) keys.insert(z.zone_id);
  }
  return keys;
}

inline Counts count(const std::vector<StoredRecord>& records, std::int64_t from, std::int64_t to,
                    const IndicatorFilters& f, const ProductCatalog& catalog,
                    const std::set<std::string>& zones, const PurchaseFeed* feed) {
  Counts c;
  for (const auto& z : zones) c.per_zone[z] = 0;
  for (const auto& r : records) {
    if (const auto* v = std::get_if<VisitRecord>(&r.record)) {
      if (!keep_visit(*v, f) || v->entry_ms < from || v->entry_ms >= to) continue;
      ++c.visitors;
      c.visit_ms += v->exit_ms - v->entry_ms;
      for (const auto& z : zones) c.per_zone[z] += dwell_in(*v, z, f.zone_min_dwell_ms) ? 1 : 0;
      bool any = false;
      for (const auto& other : records) {
        const auto* e = std::get_if<InteractionEvent>(&other.record);
        if (e == nullptr || !keep_event(*e, f)) continue;
        if (e->camera_id == v->camera_id && e->track_id == v->track_id &&
            e->start_ms >= v->entry_ms && e->start_ms <= v->exit_ms) {
          any = true;
        }
      }
      c.interacting += any ? 1 : 0;
    } else {
      const auto& e = std::get<InteractionEvent>(r.record);
      if (!keep_event(e, f) || e.start_ms < from || e.start_ms >= to) continue;
      ++c.interactions;
      if (e.type == InteractionType::Positive) ++c.positive;
      if (e.type == InteractionType::Negative) ++c.negative;
      if (e.type == InteractionType::Neutral) ++c.neutral;
      c.interaction_ms += e.end_ms - e.start_ms;
      for (const auto& [key, info] : catalog) {
        if (key.first == e.zone_id && key.second == e.cell) {
          ++c.per_product[info.product];
          ++c.per_category[info.category];
        }
      }
    }
  }
  if (feed != nullptr) {
    long tx = 0;
    for (const auto& p : *feed) {
      if (p.timestamp_ms >= from && p.timestamp_ms < to) tx += p.transactions;
    }
    c.transactions = tx;
  }
  return c;
}

inline std::optional<double> div(double num, long den) {
  if (den == 0) return std::nullopt;
  return num / static_cast<double>(den);
}

/// Mismatch description, empty when the bucket agrees with the counts.
inline std::string compare(const BucketIndicators& b, const Counts& c) {
  auto close = [](const std::optional<double>& a, const std::optional<double>& e) {
    if (a.has_value() != e.has_value()) return false;
    return !a.has_value() || std::abs(*a - *e) <= 1e-9 * std::max(1.0, std::abs(*e));
  };
  if (b.total_visitors != c.visitors) return "total_visitors";
  if (b.visitors_interacting != c.interacting) return "visitors_interacting";
  if (b.interactions != c.interactions) return "interactions";
  if (b.positive != c.positive || b.negative != c.negative || b.neutral != c.neutral) return "type counts";
  if (b.total_interaction_ms != c.interaction_ms) return "total_interaction_ms";
  if (b.visitors_per_zone != c.per_zone) return "visitors_per_zone";
  if (b.per_product != c.per_product) return "per_product";
  if (b.per_category != c.per_category) return "per_category";
  if (b.transactions != c.transactions) return "transactions";
  if (!close(b.pct_interacting, div(100.0 * static_cast<double>(c.interacting), c.visitors))) return "pct_interacting";
  if (!close(b.interactions_per_visitor, div(static_cast<double>(c.interactions), c.visitors))) {
    return "interactions_per_visitor";
  }
  if (!close(b.avg_visit_ms, div(static_cast<double>(c.visit_ms), c.visitors))) return "avg_visit_ms";
  if (!close(b.avg_interaction_ms, div(static_cast<double>(c.interaction_ms), c.interactions))) {
    return "avg_interaction_ms";
  }
  if (c.transactions.has_value() &&
      !close(b.sales_conversion, div(static_cast<double>(*c.transactions), c.visitors))) {
    return "sales_conversion";
  }
  return {};
}

/// Checks every bucket and the total. Returns the first mismatch or empty.
inline std::string check_report(const IndicatorReport& report, const std::vector<StoredRecord>& records,
                                const IndicatorFilters& f, const ProductCatalog& catalog,
                                const PurchaseFeed* feed) {
  const auto& w = report.window;
  const auto zones = zone_keys(records, w.start_ms, w.end_ms, f, catalog);
  const std::int64_t n = (w.end_ms - w.start_ms + report.bucket_ms - 1) / report.bucket_ms;
  if (static_cast<std::int64_t>(report.buckets.size()) != n) return "bucket count";
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t s = w.start_ms + k * report.bucket_ms;
    const std::int64_t e = std::min(s + report.bucket_ms, w.end_ms);
    const auto& b = report.buckets[static_cast<std::size_t>(k)];
    if (b.start_ms != s || b.end_ms != e) return "bucket bounds " + std::to_string(k);
    const auto why = compare(b, count(records, s, e, f, catalog, zones, feed));
    if (!why.empty()) return "bucket " + std::to_string(k) + ": " + why;
  }
  const auto why = compare(report.total, count(records, w.start_ms, w.end_ms, f, catalog, zones, feed));
  return why.empty() ? why : "total: " + why;
}

/// Random log over a few cameras, tracks and zones.
inline std::vector<StoredRecord> random_log(std::uint32_t seed, int visits, std::int64_t span_ms) {
  std::mt19937 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  const std::vector<std::string> cams = {"cam_a", "cam_b", "cam_c"};
  const std::vector<std::string> zones = {"shelf", "endcap"};
  std::vector<StoredRecord> out;
  std::uint64_t seq = 0;
  std::map<std::string, int> next_track;
  for (int i = 0; i < visits; ++i) {
    VisitRecord v;
    v.camera_id = cams[static_cast<std::size_t>(pick(3))];
    v.track_id = ++next_track[v.camera_id];
    v.entry_ms = pick(static_cast<int>(span_ms));
    v.exit_ms = v.entry_ms + pick(20000);
    const int nz = pick(3);
    for (int k = 0; k < nz; ++k) {
      const std::int64_t a = v.entry_ms + pick(static_cast<int>(v.exit_ms - v.entry_ms + 1));
      const std::int64_t b = std::min<std::int64_t>(v.exit_ms, a + pick(1500));
      v.zone_intervals.push_back({zones[static_cast<std::size_t>(pick(2))], a, b});
    }
    const int ni = pick(4);
    for (int k = 0; k < ni; ++k) {
      InteractionEvent e;
      e.camera_id = v.camera_id;
      e.zone_id = zones[static_cast<std::size_t>(pick(2))];
      // A few events fall outside their visit or belong to no visit at all.
      e.track_id = pick(10) == 0 ? 9999 : v.track_id;
      e.start_ms = v.entry_ms + pick(static_cast<int>(v.exit_ms - v.entry_ms + 1)) - (pick(8) == 0 ? 30000 : 0);
      e.end_ms = e.start_ms + pick(3000);
      e.type = static_cast<InteractionType>(pick(3));
      e.cell = {pick(8), pick(2)};
      e.contact_world = {static_cast<double>(pick(1000)), static_cast<double>(pick(1000)), 1250.0};
      out.push_back({++seq, e});
    }
    out.push_back({++seq, v});
  }
  return out;
}

inline ProductCatalog sample_catalog() {
  ProductCatalog c;
  for (int col = 0; col < 8; ++col) {
    c[{"shelf", {col, 0}}] = {"p" + std::to_string(col), col < 4 ? "snacks" : "drinks"};
  }
  c[{"endcap", {0, 0}}] = {"promo", "seasonal"};
  return c;
}

}  // namespace oracle
