#include "cablesoup/dyadic_path.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cablesoup/errors.hpp"

namespace cablesoup {

DyadicPath DyadicPath::with_levels(double span, int levels) {
  DyadicPath p;
  p.span = span;
  p.levels = levels;
  p.values.assign((std::size_t{1} << levels) + 1, 0.0);
  return p;
}

void write_csv(const DyadicPath& path, std::ostream& out) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", path.span);
  out << "# interval=0," << buf << "\n";
  out << "# J=" << path.levels << "\n";
  out << "# kind=" << path.kind << "\n";
  out << "# seed=" << path.seed << "\n";
  out << "# stream=" << path.stream << "\n";
  out << "position,value\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    char pos[64], val[64];
    std::snprintf(pos, sizeof pos, "%.17g", path.position(i));
    std::snprintf(val, sizeof val, "%.17g", path.values[i]);
    out << pos << "," << val << "\n";
  }
}

void write_csv(const DyadicPath& path, const std::string& filename) {
  std::ofstream f(filename);
  if (!f) throw InputError("cannot open " + filename + " for writing");
  write_csv(path, f);
}

DyadicPath read_path_csv(std::istream& in) {
  DyadicPath p;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string val = line.substr(eq + 1);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      while (!key.empty() && key.back() == ' ') key.pop_back();
      if (key == "interval") {
        auto comma = val.find(',');
        if (comma == std::string::npos) throw InputError("bad interval header: " + line);
        p.span = std::stod(val.substr(comma + 1));
      } else if (key == "J") {
        p.levels = std::stoi(val);
      } else if (key == "kind") {
        p.kind = val;
      } else if (key == "seed") {
        p.seed = std::stoull(val);
      } else if (key == "stream") {
        p.stream = val;
      }
      continue;
    }
    if (!saw_header) {
      saw_header = true;  // "position,value" column line
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("bad data row: " + line);
    p.values.push_back(std::stod(line.substr(comma + 1)));
  }
  std::size_t expect = (std::size_t{1} << p.levels) + 1;
  if (p.values.size() != expect) {
    std::ostringstream msg;
    msg << "dyadic path row count " << p.values.size() << " does not match J=" << p.levels;
    throw InputError(msg.str());
  }
  return p;
}

DyadicPath read_path_csv(const std::string& filename) {
  std::ifstream f(filename);
  if (!f) throw InputError("cannot open " + filename);
  return read_path_csv(f);
}

}  // namespace cablesoup
