#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "heatcast/data.hpp"
#include "heatcast/date.hpp"
#include "heatcast/errors.hpp"

// CSV schemas (UTF-8, '.' decimal, header required):
//   stations.csv      station_id,lat,lon,elev_station,elev_model
//   forecasts.csv     station_id,init_date,lead_days,variable,member_index,value
//   observations.csv  station_id,valid_date,variable,value
//   scores.csv        method,metric,lead_days,station_id,valid_date,value
// Writers emit deterministic row order.

namespace heatcast {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& file,
                           std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(file + ":" + std::to_string(line_no) +
                    ": bad numeric field '" + s + "'");
  }
  return v;
}

inline long parse_int(const std::string& s, const std::string& file,
                      std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(file + ":" + std::to_string(line_no) +
                    ": bad integer field '" + s + "'");
  }
  return v;
}

class Reader {
 public:
  Reader(const std::string& path, const std::string& expected_header)
      : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw DataError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header) {
      throw DataError(path + ":1: expected header '" + expected_header +
                      "', got '" + header + "'");
    }
    line_no_ = 1;
  }

  bool next(std::vector<std::string>& fields, std::size_t expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line == "\r") continue;
      fields = split_line(line);
      if (fields.size() != expected) {
        throw DataError(path_ + ":" + std::to_string(line_no_) + ": expected " +
                        std::to_string(expected) + " fields, got " +
                        std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

}  // namespace csv_detail

// ---------------------------------------------------------------------------
// stations.csv

inline std::vector<StationRecord> read_stations(const std::string& path) {
  csv_detail::Reader r(path, "station_id,lat,lon,elev_station,elev_model");
  std::vector<StationRecord> out;
  std::vector<std::string> f;
  while (r.next(f, 5)) {
    StationRecord s;
    s.id = f[0];
    s.lat = csv_detail::parse_double(f[1], path, r.line());
    s.lon = csv_detail::parse_double(f[2], path, r.line());
    s.elev_station = csv_detail::parse_double(f[3], path, r.line());
    s.elev_model = csv_detail::parse_double(f[4], path, r.line());
    if (s.id.empty()) {
      throw DataError(path + ":" + std::to_string(r.line()) +
                      ": empty station id");
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const StationRecord& a, const StationRecord& b) {
              return a.id < b.id;
            });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) {
      throw DataError(path + ": duplicate station id '" + out[i].id + "'");
    }
  }
  return out;
}

inline void write_stations(const std::string& path,
                           std::vector<StationRecord> stations) {
  std::sort(stations.begin(), stations.end(),
            [](const StationRecord& a, const StationRecord& b) {
              return a.id < b.id;
            });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "station_id,lat,lon,elev_station,elev_model\n";
  for (const StationRecord& s : stations) {
    out << s.id << ',' << format_double(s.lat) << ',' << format_double(s.lon)
        << ',' << format_double(s.elev_station) << ','
        << format_double(s.elev_model) << '\n';
  }
}

// ---------------------------------------------------------------------------
// forecasts.csv (long format, one row per member)

inline std::vector<EnsembleForecast> read_forecasts(const std::string& path,
                                                    int min_members = 2) {
  csv_detail::Reader r(
      path, "station_id,init_date,lead_days,variable,member_index,value");
  // Keyed by (station, init serial, lead, variable) -> member_index -> value.
  std::map<std::tuple<std::string, std::int64_t, int, int>,
           std::map<long, double>>
      acc;
  std::vector<std::string> f;
  while (r.next(f, 6)) {
    const Date init = Date::parse(f[1]);
    const long lead = csv_detail::parse_int(f[2], path, r.line());
    if (lead < 1 || lead > 15) {
      throw DataError(path + ":" + std::to_string(r.line()) +
                      ": lead_days outside [1,15]");
    }
    const Variable var = variable_from_name(f[3]);
    const long idx = csv_detail::parse_int(f[4], path, r.line());
    const double value = csv_detail::parse_double(f[5], path, r.line());
    if (!std::isfinite(value)) {
      throw DataError(path + ":" + std::to_string(r.line()) +
                      ": non-finite member value");
    }
    auto& members = acc[{f[0], init.serial(), static_cast<int>(lead),
                         static_cast<int>(var)}];
    if (!members.emplace(idx, value).second) {
      throw DataError(path + ":" + std::to_string(r.line()) +
                      ": duplicate member_index " + std::to_string(idx));
    }
  }
  std::vector<EnsembleForecast> out;
  out.reserve(acc.size());
  for (const auto& [key, members] : acc) {
    EnsembleForecast fc;
    fc.station_id = std::get<0>(key);
    fc.init_date = Date(std::get<1>(key));
    fc.lead_days = std::get<2>(key);
    fc.variable = static_cast<Variable>(std::get<3>(key));
    fc.members.reserve(members.size());
    long expected = 1;
    for (const auto& [idx, value] : members) {
      if (idx != expected) {
        throw DataError(path + ": member indices of " + fc.station_id + "/" +
                        fc.init_date.iso() + " not contiguous from 1");
      }
      ++expected;
      fc.members.push_back(value);
    }
    if (static_cast<int>(fc.members.size()) < min_members) {
      throw DataError(path + ": ensemble " + fc.station_id + "/" +
                      fc.init_date.iso() + " has fewer than " +
                      std::to_string(min_members) + " members");
    }
    out.push_back(std::move(fc));
  }
  return out;  // map iteration already yields deterministic order
}

inline void write_forecasts(const std::string& path,
                            std::vector<EnsembleForecast> forecasts) {
  std::sort(forecasts.begin(), forecasts.end(),
            [](const EnsembleForecast& a, const EnsembleForecast& b) {
              return std::tuple(a.station_id, a.init_date.serial(), a.lead_days,
                                static_cast<int>(a.variable)) <
                     std::tuple(b.station_id, b.init_date.serial(), b.lead_days,
                                static_cast<int>(b.variable));
            });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "station_id,init_date,lead_days,variable,member_index,value\n";
  for (const EnsembleForecast& fc : forecasts) {
    const std::string init = fc.init_date.iso();
    const std::string var = variable_name(fc.variable);
    for (std::size_t k = 0; k < fc.members.size(); ++k) {
      out << fc.station_id << ',' << init << ',' << fc.lead_days << ',' << var
          << ',' << (k + 1) << ',' << format_double(fc.members[k]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// observations.csv

inline std::vector<Observation> read_observations(const std::string& path) {
  csv_detail::Reader r(path, "station_id,valid_date,variable,value");
  std::vector<Observation> out;
  std::vector<std::string> f;
  while (r.next(f, 4)) {
    Observation o;
    o.station_id = f[0];
    o.valid_date = Date::parse(f[1]);
    o.variable = variable_from_name(f[2]);
    o.value = csv_detail::parse_double(f[3], path, r.line());
    if (!std::isfinite(o.value)) {
      throw DataError(path + ":" + std::to_string(r.line()) +
                      ": non-finite observation");
    }
    out.push_back(std::move(o));
  }
  std::sort(out.begin(), out.end(), [](const Observation& a,
                                       const Observation& b) {
    return std::tuple(a.station_id, a.valid_date.serial(),
                      static_cast<int>(a.variable)) <
           std::tuple(b.station_id, b.valid_date.serial(),
                      static_cast<int>(b.variable));
  });
  return out;
}

inline void write_observations(const std::string& path,
                               std::vector<Observation> obs) {
  std::sort(obs.begin(), obs.end(), [](const Observation& a,
                                       const Observation& b) {
    return std::tuple(a.station_id, a.valid_date.serial(),
                      static_cast<int>(a.variable)) <
           std::tuple(b.station_id, b.valid_date.serial(),
                      static_cast<int>(b.variable));
  });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "station_id,valid_date,variable,value\n";
  for (const Observation& o : obs) {
    out << o.station_id << ',' << o.valid_date.iso() << ','
        << variable_name(o.variable) << ',' << format_double(o.value) << '\n';
  }
}

// ---------------------------------------------------------------------------
// scores.csv

struct ScoreRecord {
  std::string method;
  std::string metric;
  int lead_days = 1;
  std::string station_id;
  Date valid_date;
  double value = 0.0;
};

inline void write_scores(const std::string& path,
                         std::vector<ScoreRecord> scores) {
  std::sort(scores.begin(), scores.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) {
              return std::tuple(a.method, a.metric, a.lead_days, a.station_id,
                                a.valid_date.serial()) <
                     std::tuple(b.method, b.metric, b.lead_days, b.station_id,
                                b.valid_date.serial());
            });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "method,metric,lead_days,station_id,valid_date,value\n";
  for (const ScoreRecord& s : scores) {
    out << s.method << ',' << s.metric << ',' << s.lead_days << ','
        << s.station_id << ',' << s.valid_date.iso() << ','
        << format_double(s.value) << '\n';
  }
}

inline std::vector<ScoreRecord> read_scores(const std::string& path) {
  csv_detail::Reader r(path,
                       "method,metric,lead_days,station_id,valid_date,value");
  std::vector<ScoreRecord> out;
  std::vector<std::string> f;
  while (r.next(f, 6)) {
    ScoreRecord s;
    s.method = f[0];
    s.metric = f[1];
    s.lead_days =
        static_cast<int>(csv_detail::parse_int(f[2], path, r.line()));
    s.station_id = f[3];
    s.valid_date = Date::parse(f[4]);
    s.value = csv_detail::parse_double(f[5], path, r.line());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace heatcast
