#include "shopper/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "shopper/errors.hpp"

namespace shopper {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(ctx + ": field '" + key + "' has the wrong type");
  }
}

bool in_window(std::int64_t t, std::int64_t start, std::int64_t end) {
  return t >= start && t < end;
}

std::optional<double> ratio(double num, long den) {
  if (den == 0) return std::nullopt;
  return num / static_cast<double>(den);
}

}  // namespace

VisitRecord make_visit_record(const std::string& camera_id, const VisitSummary& visit) {
  return {camera_id, visit.track_id, visit.entry_ms, visit.exit_ms, visit.zone_intervals};
}

nlohmann::ordered_json record_to_json(std::uint64_t seq, const EventRecord& record) {
  if (const auto* e = std::get_if<InteractionEvent>(&record)) {
    return nlohmann::ordered_json{{"seq", seq},
                {"kind", "interaction"},
                {"camera_id", e->camera_id},
                {"zone_id", e->zone_id},
                {"track_id", e->track_id},
                {"type", std::string(to_string(e->type))},
                {"start_ms", e->start_ms},
                {"end_ms", e->end_ms},
                {"contact", {{"x", e->contact_world.x}, {"y", e->contact_world.y}, {"z", e->contact_world.z}}},
                {"cell", {e->cell.col, e->cell.row}}};
  }
  const auto& v = std::get<VisitRecord>(record);
  auto zones = nlohmann::ordered_json::array();
  for (const auto& z : v.zone_intervals) {
    zones.push_back({{"zone_id", z.zone_id}, {"enter_ms", z.enter_ms}, {"exit_ms", z.exit_ms}});
  }
  return nlohmann::ordered_json{{"seq", seq},          {"kind", "visit"},         {"camera_id", v.camera_id},
              {"track_id", v.track_id}, {"entry_ms", v.entry_ms}, {"exit_ms", v.exit_ms},
              {"zones", zones}};
}

StoredRecord record_from_json(const json& j) {
  const std::string ctx = "event record";
  StoredRecord out;
  out.seq = field<std::uint64_t>(j, "seq", ctx);
  const auto kind = field<std::string>(j, "kind", ctx);
  if (kind == "interaction") {
    InteractionEvent e;
    e.camera_id = field<std::string>(j, "camera_id", ctx);
    e.zone_id = field<std::string>(j, "zone_id", ctx);
    e.track_id = field<int>(j, "track_id", ctx);
    const auto type = parse_interaction_type(field<std::string>(j, "type", ctx));
    if (!type) throw FormatError(ctx + ": field 'type' is not positive/negative/neutral");
    e.type = *type;
    e.start_ms = field<std::int64_t>(j, "start_ms", ctx);
    e.end_ms = field<std::int64_t>(j, "end_ms", ctx);
    const auto contact = field<json>(j, "contact", ctx);
    e.contact_world = {field<double>(contact, "x", ctx + ".contact"),
                       field<double>(contact, "y", ctx + ".contact"),
                       field<double>(contact, "z", ctx + ".contact")};
    const auto cell = field<std::vector<int>>(j, "cell", ctx);
    if (cell.size() != 2) throw FormatError(ctx + ": field 'cell' must be [col, row]");
    e.cell = {cell[0], cell[1]};
    if (e.end_ms < e.start_ms) throw FormatError(ctx + ": end_ms precedes start_ms");
    out.record = e;
  } else if (kind == "visit") {
    VisitRecord v;
    v.camera_id = field<std::string>(j, "camera_id", ctx);
    v.track_id = field<int>(j, "track_id", ctx);
    v.entry_ms = field<std::int64_t>(j, "entry_ms", ctx);
    v.exit_ms = field<std::int64_t>(j, "exit_ms", ctx);
    for (const auto& z : field<json>(j, "zones", ctx)) {
      v.zone_intervals.push_back({field<std::string>(z, "zone_id", ctx + ".zones"),
                                  field<std::int64_t>(z, "enter_ms", ctx + ".zones"),
                                  field<std::int64_t>(z, "exit_ms", ctx + ".zones")});
    }
    if (v.exit_ms < v.entry_ms) throw FormatError(ctx + ": exit_ms precedes entry_ms");
    out.record = v;
  } else {
    throw FormatError(ctx + ": unknown kind '" + kind + "'");
  }
  return out;
}

std::vector<StoredRecord> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event log " + path.string());
  std::vector<StoredRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (j.is_object() && j.value("kind", "") == "schema") {
      if (j.value("version", 0) != kEventLogVersion) {
        throw FormatError(where + ": unsupported event log version");
      }
      continue;
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (records.size() > 1 && records.back().seq <= records[records.size() - 2].seq) {
      throw FormatError(where + ": seq does not increase");
    }
  }
  return records;
}

EventStore::EventStore(const std::filesystem::path& path) : path_(path) {
  const bool existing = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (existing) records_ = read_event_log(path);
  out_.open(path, std::ios::app);
  if (!out_) throw IoError("cannot open event log for writing: " + path.string());
  if (!existing) {
    out_ << json{{"kind", "schema"}, {"version", kEventLogVersion}}.dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed: " + path.string());
  }
}

std::uint64_t EventStore::append(const EventRecord& record) {
  std::lock_guard lock(mutex_);
  const std::uint64_t seq = records_.empty() ? 1 : records_.back().seq + 1;
  if (path_) {
    out_ << record_to_json(seq, record).dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_->string());
  }
  records_.push_back({seq, record});
  return seq;
}

std::vector<StoredRecord> EventStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t EventStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

ProductCatalog make_catalog(const std::vector<ShelfZone>& zones) {
  ProductCatalog catalog;
  for (const auto& zone : zones) {
    for (const auto& [cell, info] : zone.cells) catalog[{zone.zone_id, cell}] = info;
  }
  return catalog;
}

PurchaseFeed read_purchase_feed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open purchase feed " + path.string());
  PurchaseFeed feed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    long long t = 0;
    long n = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), " %lld , %ld %c", &t, &n, &tail) != 2 || n < 0) {
      if (line_no == 1 && line.find_first_of("0123456789") != 0) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected timestamp_ms,transactions");
    }
    feed.push_back({t, n});
  }
  return feed;
}

namespace {

struct Population {
  std::vector<const VisitRecord*> visits;
  std::vector<const InteractionEvent*> interactions;
};

bool dwelled(const VisitRecord& v, const std::string& zone_id, std::int64_t min_dwell) {
  return std::any_of(v.zone_intervals.begin(), v.zone_intervals.end(), [&](const ZoneInterval& z) {
    return z.zone_id == zone_id && z.exit_ms - z.enter_ms >= min_dwell;
  });
}

bool visit_passes(const VisitRecord& v, const IndicatorFilters& f) {
  if (f.camera_id && v.camera_id != *f.camera_id) return false;
  if (f.entrance_camera && v.camera_id != *f.entrance_camera) return false;
  if (f.zone_id && !dwelled(v, *f.zone_id, f.zone_min_dwell_ms)) return false;
  return true;
}

bool interaction_passes(const InteractionEvent& e, const IndicatorFilters& f) {
  if (f.camera_id && e.camera_id != *f.camera_id) return false;
  if (f.zone_id && e.zone_id != *f.zone_id) return false;
  return true;
}

bool belongs_to(const InteractionEvent& e, const VisitRecord& v) {
  return e.camera_id == v.camera_id && e.track_id == v.track_id && e.start_ms >= v.entry_ms &&
         e.start_ms <= v.exit_ms;
}

BucketIndicators summarize(std::int64_t start, std::int64_t end, const Population& pop,
                           const std::vector<const InteractionEvent*>& all_interactions,
                           const IndicatorFilters& filters, const ProductCatalog& catalog,
                           const PurchaseFeed* purchases) {
  BucketIndicators b;
  b.start_ms = start;
  b.end_ms = end;
  std::set<std::string> zones;
  for (const auto& [key, info] : catalog) zones.insert(key.first);
  if (filters.zone_id) zones = {*filters.zone_id};
  for (const auto& z : zones) b.visitors_per_zone[z] = 0;

  std::int64_t visit_ms = 0;
  for (const VisitRecord* v : pop.visits) {
    ++b.total_visitors;
    visit_ms += v->duration_ms();
    for (const auto& z : v->zone_intervals) {
      if (filters.zone_id && z.zone_id != *filters.zone_id) continue;
      b.visitors_per_zone.try_emplace(z.zone_id, 0);
    }
    for (auto& [zone_id, count] : b.visitors_per_zone) {
      if (dwelled(*v, zone_id, filters.zone_min_dwell_ms)) ++count;
    }
    const bool interacted =
        std::any_of(all_interactions.begin(), all_interactions.end(),
                    [&](const InteractionEvent* e) { return belongs_to(*e, *v); });
    if (interacted) ++b.visitors_interacting;
  }
  for (const InteractionEvent* e : pop.interactions) {
    ++b.interactions;
    switch (e->type) {
      case InteractionType::Positive: ++b.positive; break;
      case InteractionType::Negative: ++b.negative; break;
      case InteractionType::Neutral: ++b.neutral; break;
    }
    b.total_interaction_ms += e->end_ms - e->start_ms;
    const auto it = catalog.find({e->zone_id, e->cell});
    if (it != catalog.end()) {
      ++b.per_product[it->second.product];
      ++b.per_category[it->second.category];
    }
  }
  const auto pct = ratio(100.0 * static_cast<double>(b.visitors_interacting), b.total_visitors);
  b.pct_interacting = pct;
  b.interactions_per_visitor = ratio(static_cast<double>(b.interactions), b.total_visitors);
  b.avg_visit_ms = ratio(static_cast<double>(visit_ms), b.total_visitors);
  b.avg_interaction_ms = ratio(static_cast<double>(b.total_interaction_ms), b.interactions);
  if (purchases != nullptr) {
    long tx = 0;
    for (const auto& p : *purchases) {
      if (in_window(p.timestamp_ms, start, end)) tx += p.transactions;
    }
    b.transactions = tx;
    b.sales_conversion = ratio(static_cast<double>(tx), b.total_visitors);
  }
  return b;
}

}  // namespace

IndicatorReport compute_indicators(const std::vector<StoredRecord>& records,
                                   const TimeWindow& window, std::int64_t bucket_ms,
                                   const IndicatorFilters& filters, const ProductCatalog& catalog,
                                   const PurchaseFeed* purchases) {
  if (window.end_ms <= window.start_ms) {
    throw ArgumentError("report window is empty: end must be after start");
  }
  if (bucket_ms <= 0) throw ArgumentError("bucket size must be positive");
  if (filters.zone_min_dwell_ms < 0) throw ArgumentError("zone_min_dwell_ms must be >= 0");

  IndicatorReport report;
  report.window = window;
  report.bucket_ms = bucket_ms;
  report.filters = filters;

  std::vector<const VisitRecord*> visits;
  std::vector<const InteractionEvent*> interactions;
  std::vector<const InteractionEvent*> all_interactions;
  for (const auto& r : records) {
    if (const auto* v = std::get_if<VisitRecord>(&r.record)) {
      if (visit_passes(*v, filters) && in_window(v->entry_ms, window.start_ms, window.end_ms)) {
        visits.push_back(v);
      }
    } else {
      const auto& e = std::get<InteractionEvent>(r.record);
      if (!interaction_passes(e, filters)) continue;
      all_interactions.push_back(&e);
      if (in_window(e.start_ms, window.start_ms, window.end_ms)) interactions.push_back(&e);
    }
  }

  const std::int64_t span = window.end_ms - window.start_ms;
  const std::int64_t count = (span + bucket_ms - 1) / bucket_ms;
  std::vector<Population> pops(static_cast<std::size_t>(count));
  for (const VisitRecord* v : visits) {
    pops[static_cast<std::size_t>((v->entry_ms - window.start_ms) / bucket_ms)].visits.push_back(v);
  }
  for (const InteractionEvent* e : interactions) {
    pops[static_cast<std::size_t>((e->start_ms - window.start_ms) / bucket_ms)]
        .interactions.push_back(e);
  }
  for (std::int64_t k = 0; k < count; ++k) {
    const std::int64_t s = window.start_ms + k * bucket_ms;
    const std::int64_t e = std::min(s + bucket_ms, window.end_ms);
    report.buckets.push_back(summarize(s, e, pops[static_cast<std::size_t>(k)], all_interactions,
                                       filters, catalog, purchases));
  }
  report.total = summarize(window.start_ms, window.end_ms, {visits, interactions},
                           all_interactions, filters, catalog, purchases);
  // Zones seen in any bucket appear in every bucket.
  for (auto& b : report.buckets) {
    for (const auto& [zone_id, n] : report.total.visitors_per_zone) b.visitors_per_zone.try_emplace(zone_id, 0);
  }
  return report;
}

std::variant<double, Unavailable> sales_conversion(const std::vector<StoredRecord>& records,
                                                   const TimeWindow& window,
                                                   const std::optional<PurchaseFeed>& feed,
                                                   const IndicatorFilters& filters) {
  if (!feed) return Unavailable{"no purchase feed: transactions are not observable from depth"};
  const auto report = compute_indicators(records, window, window.end_ms - window.start_ms,
                                         filters, {}, &*feed);
  if (!report.total.sales_conversion) return Unavailable{"no visitors in window"};
  return *report.total.sales_conversion;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw ArgumentError("unknown report format '" + name + "' (expected text, json or csv)");
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json bucket_to_json(const BucketIndicators& b) {
  json j{{"start_ms", b.start_ms},
         {"end_ms", b.end_ms},
         {"total_visitors", b.total_visitors},
         {"visitors_per_zone", b.visitors_per_zone},
         {"visitors_interacting", b.visitors_interacting},
         {"pct_interacting", opt(b.pct_interacting)},
         {"interactions_per_visitor", opt(b.interactions_per_visitor)},
         {"avg_visit_ms", opt(b.avg_visit_ms)},
         {"interactions", b.interactions},
         {"positive", b.positive},
         {"negative", b.negative},
         {"neutral", b.neutral},
         {"total_interaction_ms", b.total_interaction_ms},
         {"avg_interaction_ms", opt(b.avg_interaction_ms)},
         {"per_product", b.per_product},
         {"per_category", b.per_category},
         {"transactions", b.transactions ? json(*b.transactions) : json(nullptr)},
         {"sales_conversion", opt(b.sales_conversion)}};
  return j;
}

std::string num(const std::optional<double>& v, int precision) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json report_to_json(const IndicatorReport& report) {
  json filters{{"camera_id", report.filters.camera_id ? json(*report.filters.camera_id) : json(nullptr)},
               {"zone_id", report.filters.zone_id ? json(*report.filters.zone_id) : json(nullptr)},
               {"entrance_camera",
                report.filters.entrance_camera ? json(*report.filters.entrance_camera) : json(nullptr)},
               {"zone_min_dwell_ms", report.filters.zone_min_dwell_ms}};
  json buckets = json::array();
  for (const auto& b : report.buckets) buckets.push_back(bucket_to_json(b));
  return json{{"schema", "shopper-indicator-report"},
              {"version", 1},
              {"window", {{"start_ms", report.window.start_ms}, {"end_ms", report.window.end_ms}}},
              {"bucket_ms", report.bucket_ms},
              {"filters", filters},
              {"buckets", buckets},
              {"total", bucket_to_json(report.total)}};
}

std::string format_report(const IndicatorReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

  std::set<std::string> zones;
  std::set<std::string> products;
  std::set<std::string> categories;
  for (const auto& [k, v] : report.total.visitors_per_zone) zones.insert(k);
  for (const auto& [k, v] : report.total.per_product) products.insert(k);
  for (const auto& [k, v] : report.total.per_category) categories.insert(k);

  std::vector<std::string> header = {"bucket_start_ms", "bucket_end_ms",  "visitors",
                                     "interacting",     "pct_interacting", "inter_per_visitor",
                                     "avg_visit_ms",    "interactions",   "positive",
                                     "negative",        "neutral",        "total_inter_ms",
                                     "avg_inter_ms"};
  const bool with_sales = report.total.transactions.has_value();
  if (with_sales) {
    header.push_back("transactions");
    header.push_back("sales_conversion");
  }
  for (const auto& z : zones) header.push_back("zone:" + z);
  for (const auto& p : products) header.push_back("product:" + p);
  for (const auto& c : categories) header.push_back("category:" + c);

  auto row = [&](const BucketIndicators& b, const std::string& label) {
    std::vector<std::string> r = {label.empty() ? std::to_string(b.start_ms) : label,
                                  std::to_string(b.end_ms),
                                  std::to_string(b.total_visitors),
                                  std::to_string(b.visitors_interacting),
                                  num(b.pct_interacting, 2),
                                  num(b.interactions_per_visitor, 3),
                                  num(b.avg_visit_ms, 1),
                                  std::to_string(b.interactions),
                                  std::to_string(b.positive),
                                  std::to_string(b.negative),
                                  std::to_string(b.neutral),
                                  std::to_string(b.total_interaction_ms),
                                  num(b.avg_interaction_ms, 1)};
    if (with_sales) {
      r.push_back(b.transactions ? std::to_string(*b.transactions) : "");
      r.push_back(num(b.sales_conversion, 4));
    }
    auto lookup = [](const std::map<std::string, long>& m, const std::string& k) {
      const auto it = m.find(k);
      return std::to_string(it == m.end() ? 0 : it->second);
    };
    for (const auto& z : zones) r.push_back(lookup(b.visitors_per_zone, z));
    for (const auto& p : products) r.push_back(lookup(b.per_product, p));
    for (const auto& c : categories) r.push_back(lookup(b.per_category, c));
    return r;
  };

  std::vector<std::vector<std::string>> rows;
  for (const auto& b : report.buckets) rows.push_back(row(b, ""));
  rows.push_back(row(report.total, "total"));

  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    auto emit = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "," : "") << csv_escape(cells[i]);
      }
      out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out.str();
  }

  std::vector<std::size_t> widths(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], std::max<std::size_t>(r[i].size(), 1));
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string cell = cells[i].empty() ? "-" : cells[i];
      out << (i ? "  " : "") << std::string(widths[i] - cell.size(), ' ') << cell;
    }
    out << '\n';
  };
  out << "window [" << report.window.start_ms << ", " << report.window.end_ms << ") ms, bucket "
      << report.bucket_ms << " ms\n";
  emit(header);
  for (const auto& r : rows) emit(r);
  return out.str();
}

}  // namespace shopper
