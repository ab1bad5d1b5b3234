#include "curvscan/jsonio.hpp"

#include <cmath>
#include <cstdio>

namespace curvscan {

namespace {

void write_indent(std::string& out, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void write_value(const ojson& j, std::string& out, int depth) {
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        write_indent(out, depth + 1);
        out += ojson(it.key()).dump();
        out += ": ";
        write_value(it.value(), out, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      write_indent(out, depth);
      out += '}';
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        write_indent(out, depth + 1);
        write_value(j[i], out, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      write_indent(out, depth);
      out += ']';
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // bare integers must stay valid JSON numbers; %.17g already emits
      // a plain integer form for integral doubles, which is fine
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_stable(const ojson& j) {
  std::string out;
  write_value(j, out, 0);
  out += '\n';
  return out;
}

}  // namespace curvscan
