#include "sslcox/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

namespace sslcox {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, int row, const std::string& col) {
  double v{};
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw input_error("row " + std::to_string(row) + ", column '" + col +
                      "': cannot parse '" + field + "' as a number");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
  }
  return fields;
}

DatasetFile read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw input_error("'" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);

  int time_col = -1, status_col = -1;
  std::vector<int> pred_cols;
  std::vector<std::string> pred_names;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c] == "time")
      time_col = c;
    else if (header[c] == "status")
      status_col = c;
    else {
      pred_cols.push_back(c);
      pred_names.push_back(header[c]);
    }
  }
  if (time_col < 0) throw input_error("'" + path + "': missing required column 'time'");
  if (status_col < 0) throw input_error("'" + path + "': missing required column 'status'");

  std::vector<double> times;
  std::vector<int> statuses;
  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw input_error("row " + std::to_string(row) + ": expected " +
                        std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    times.push_back(parse_double(fields[time_col], row, "time"));
    const double s = parse_double(fields[status_col], row, "status");
    if (s != 0.0 && s != 1.0)
      throw input_error("row " + std::to_string(row) + ", column 'status': must be 0 or 1");
    statuses.push_back(static_cast<int>(s));
    for (std::size_t k = 0; k < pred_cols.size(); ++k)
      values.push_back(parse_double(fields[pred_cols[k]], row, pred_names[k]));
  }
  const int n = static_cast<int>(times.size());
  if (n == 0) throw input_error("'" + path + "' has no data rows");

  DatasetFile out;
  out.predictor_names = pred_names;
  Eigen::VectorXd t(n);
  Eigen::VectorXi st(n);
  Eigen::MatrixXd x(n, pred_cols.size());
  for (int i = 0; i < n; ++i) {
    t(i) = times[i];
    st(i) = statuses[i];
    for (std::size_t k = 0; k < pred_cols.size(); ++k)
      x(i, k) = values[i * pred_cols.size() + k];
  }
  out.data = SurvivalData(std::move(t), std::move(st), std::move(x));
  return out;
}

void write_dataset_csv(const std::string& path, const SurvivalData& data,
                       const std::vector<std::string>& predictor_names) {
  if (static_cast<int>(predictor_names.size()) != data.p())
    throw input_error("predictor name count does not match covariate columns");
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path + "'");
  out << "time,status";
  for (const auto& name : predictor_names) out << ',' << name;
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(data.time(i)) << ',' << data.status(i);
    for (int j = 0; j < data.p(); ++j) out << ',' << format_double(data.covariates(i, j));
    out << '\n';
  }
  if (!out) throw input_error("failed while writing '" + path + "'");
}

}  // namespace sslcox
