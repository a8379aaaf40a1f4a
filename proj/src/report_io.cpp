#include <charconv>
#include <fstream>
#include <sstream>

#include "lld/lld_verify.hpp"

namespace lld {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // from_chars rejects "inf"/"nan" spellings produced by some writers
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    throw DomainError("malformed number in report: '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string report_csv(const LLDReport& rep, const Provenance& prov) {
  std::ostringstream os;
  os << "# lld " << prov.version << " config=" << prov.config_hash << '\n';
  os << 'n';
  for (int j = 1; j <= rep.dim; ++j) os << ",x_" << j;
  os << ",regime,p_hat,ci_lo,ci_hi,fourier_bound,envelope,ratio_mc,ratio_oracle,status\n";
  for (const auto& r : rep.rows) {
    os << r.n;
    for (double v : r.x) os << ',' << format_double(v);
    os << ',' << to_string(r.regime) << ',' << format_double(r.p_hat) << ',' << format_double(r.ci_lo) << ','
       << format_double(r.ci_hi) << ',' << format_double(r.fourier_bound) << ',' << format_double(r.envelope)
       << ',' << format_double(r.ratio_mc) << ',' << format_double(r.ratio_oracle) << ',' << to_string(r.status)
       << '\n';
  }
  return os.str();
}

void emit_report(const LLDReport& rep, const std::string& path, const Provenance& prov) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write report to " + path);
    out << report_csv(rep, prov);
  }
  std::ofstream sum(path + ".summary.txt", std::ios::binary);
  if (!sum) throw DomainError("cannot write summary next to " + path);
  sum << "# lld " << prov.version << " config=" << prov.config_hash << '\n' << summarize(rep);
}

LLDReport parse_report_csv(const std::string& text) {
  LLDReport rep;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (!header) {
      if (cells.empty() || cells[0] != "n") throw DomainError("report CSV lacks its header row");
      rep.dim = static_cast<int>(cells.size()) - 10;
      if (rep.dim < 1) throw DomainError("report CSV header has no coordinate columns");
      header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != rep.dim + 10) throw DomainError("report row has the wrong arity");
    LLDRow r;
    r.n = std::stol(cells[0]);
    for (int j = 0; j < rep.dim; ++j) r.x.push_back(parse_double(cells[1 + j]));
    std::size_t c = 1 + rep.dim;
    const auto regime = parse_regime(cells[c++]);
    if (!regime) throw DomainError("unknown regime in report");
    r.regime = *regime;
    r.p_hat = parse_double(cells[c++]);
    r.ci_lo = parse_double(cells[c++]);
    r.ci_hi = parse_double(cells[c++]);
    r.fourier_bound = parse_double(cells[c++]);
    r.envelope = parse_double(cells[c++]);
    r.ratio_mc = parse_double(cells[c++]);
    r.ratio_oracle = parse_double(cells[c++]);
    const auto st = parse_status(cells[c]);
    if (!st) throw DomainError("unknown status in report");
    r.status = *st;
    rep.rows.push_back(std::move(r));
  }
  if (!header) throw DomainError("report CSV lacks its header row");
  return rep;
}

LLDReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read report " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report_csv(ss.str());
}

}  // namespace lld
