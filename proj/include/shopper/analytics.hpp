#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shopper/interaction.hpp"
#include "shopper/tracking.hpp"

namespace shopper {

struct VisitRecord {
  std::string camera_id;
  int track_id = 0;
  std::int64_t entry_ms = 0;
  std::int64_t exit_ms = 0;
  std::vector<ZoneInterval> zone_intervals;

  std::int64_t duration_ms() const { return exit_ms - entry_ms; }
  friend bool operator==(const VisitRecord&, const VisitRecord&) = default;
};

VisitRecord make_visit_record(const std::string& camera_id, const VisitSummary& visit);

using EventRecord = std::variant<VisitRecord, InteractionEvent>;

struct StoredRecord {
  std::uint64_t seq = 0;
  EventRecord record;

  friend bool operator==(const StoredRecord&, const StoredRecord&) = default;
};

inline constexpr int kEventLogVersion = 1;

nlohmann::ordered_json record_to_json(std::uint64_t seq, const EventRecord& record);
/// Throws FormatError naming the offending field.
StoredRecord record_from_json(const nlohmann::json& j);

/// Reads a JSON Lines event log. Throws IoError when the file cannot be
/// opened and FormatError on malformed lines or non-increasing seq.
std::vector<StoredRecord> read_event_log(const std::filesystem::path& path);

/// Append-only record log. Appends are serialized; with a backing file every
/// append is written and flushed before it returns.
class EventStore {
 public:
  /// In-memory store.
  EventStore() = default;
  /// Opens (or creates) a JSON Lines log and continues its numbering.
  explicit EventStore(const std::filesystem::path& path);

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  std::uint64_t append(const EventRecord& record);
  /// Consistent copy of every record appended so far.
  std::vector<StoredRecord> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<StoredRecord> records_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

/// Half-open [start_ms, end_ms).
struct TimeWindow {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

struct IndicatorFilters {
  std::optional<std::string> camera_id;
  std::optional<std::string> zone_id;
  // When set, only visits seen by this camera count as visitors.
  std::optional<std::string> entrance_camera;
  std::int64_t zone_min_dwell_ms = 500;
};

using ProductCatalog = std::map<std::pair<std::string, CellIndex>, ProductInfo>;

ProductCatalog make_catalog(const std::vector<ShelfZone>& zones);

struct PurchaseEntry {
  std::int64_t timestamp_ms = 0;
  long transactions = 0;
};
using PurchaseFeed = std::vector<PurchaseEntry>;

/// Reads "timestamp_ms,transactions" lines; a header line is allowed.
PurchaseFeed read_purchase_feed(const std::filesystem::path& path);

struct BucketIndicators {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  long total_visitors = 0;
  std::map<std::string, long> visitors_per_zone;
  long visitors_interacting = 0;
  std::optional<double> pct_interacting;
  std::optional<double> interactions_per_visitor;
  std::optional<double> avg_visit_ms;
  long interactions = 0;
  long positive = 0;
  long negative = 0;
  long neutral = 0;
  std::int64_t total_interaction_ms = 0;
  std::optional<double> avg_interaction_ms;
  std::map<std::string, long> per_product;
  std::map<std::string, long> per_category;
  std::optional<long> transactions;
  std::optional<double> sales_conversion;

  friend bool operator==(const BucketIndicators&, const BucketIndicators&) = default;
};

struct IndicatorReport {
  TimeWindow window;
  std::int64_t bucket_ms = 0;
  IndicatorFilters filters;
  std::vector<BucketIndicators> buckets;
  BucketIndicators total;
};

/// Visits are attributed to the bucket holding entry_ms, interactions to the
/// bucket holding start_ms. Throws ArgumentError for an empty window or a
/// non-positive bucket size.
IndicatorReport compute_indicators(const std::vector<StoredRecord>& records,
                                   const TimeWindow& window, std::int64_t bucket_ms,
                                   const IndicatorFilters& filters = {},
                                   const ProductCatalog& catalog = {},
                                   const PurchaseFeed* purchases = nullptr);

struct Unavailable {
  std::string reason;
};

/// transactions / total visitors over the window.
std::variant<double, Unavailable> sales_conversion(const std::vector<StoredRecord>& records,
                                                   const TimeWindow& window,
                                                   const std::optional<PurchaseFeed>& feed,
                                                   const IndicatorFilters& filters = {});

enum class ReportFormat { Text, Json, Csv };

ReportFormat parse_report_format(const std::string& name);
nlohmann::json report_to_json(const IndicatorReport& report);
std::string format_report(const IndicatorReport& report, ReportFormat format);

}  // namespace shopper
