#include "cascop/report.hpp"

#include <json.hpp>
#include <sstream>

#include "cascop/version.hpp"

namespace cascop {

namespace {

nlohmann::ordered_json per_k_json(const std::vector<PerK>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json o;
    o["k"] = row.k;
    o["n"] = row.n;
    o["median"] = row.median;
    o["mean"] = row.mean;
    o["q25"] = row.q25;
    o["q75"] = row.q75;
    o["target"] = row.target;
    o["pass"] = row.pass;
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace

std::string report_to_json(const RegimeReport& report) {
  nlohmann::ordered_json root;
  auto& config = root["config"];
  config["kind"] = report.kind;
  config["version"] = version_string;
  for (const auto& [key, value] : report.config) config[key] = value;

  root["per_k"] = per_k_json(report.per_k);

  auto& diag = root["diagnostics"];
  diag["pass"] = report.pass;
  for (const auto& [key, value] : report.scalars) diag[key] = value;
  for (const auto& [name, rows] : report.extra_series) diag[name] = per_k_json(rows);
  auto& raw = diag["raw"];
  for (const auto& [name, values] : report.raw) raw[name] = values;
  return root.dump(2) + "\n";
}

std::string report_to_csv(const RegimeReport& report, const std::string& invocation) {
  std::ostringstream out;
  out << "k,n,median,mean,q25,q75,target,pass\n";
  char buf[256];
  for (const auto& row : report.per_k) {
    std::snprintf(buf, sizeof(buf), "%d,%llu,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", row.k,
                  static_cast<unsigned long long>(row.n), row.median, row.mean, row.q25, row.q75,
                  row.target, row.pass ? 1 : 0);
    out << buf;
  }
  out << "# cascop " << version_string << " | " << invocation << "\n";
  return out.str();
}

}  // namespace cascop
