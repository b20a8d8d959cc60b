#ifndef GPC_REPORT_HPP
#define GPC_REPORT_HPP

#include <cstdint>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpc/errors.hpp"

namespace gpc {

// Order-preserving JSON value for report emission. Numbers are printed with
// 17 significant digits so report diffs are meaningful at full double
// precision.
class Json {
 public:
  using Arr = std::vector<Json>;
  using Obj = std::vector<std::pair<std::string, Json>>;

  Json() : v_(nullptr) {}
  Json(std::nullptr_t) : v_(nullptr) {}
  Json(bool b) : v_(b) {}
  Json(double d) : v_(d) {}
  Json(int i) : v_(static_cast<std::int64_t>(i)) {}
  Json(long long i) : v_(static_cast<std::int64_t>(i)) {}
  Json(std::uint64_t u) : v_(static_cast<std::int64_t>(u)) {}
  Json(std::int64_t i) : v_(i) {}
  Json(const char* s) : v_(std::string(s)) {}
  Json(std::string s) : v_(std::move(s)) {}
  Json(Arr a) : v_(std::move(a)) {}
  Json(Obj o) : v_(std::move(o)) {}

  static Json object() { return Json(Obj{}); }
  static Json array() { return Json(Arr{}); }

  static Json array_of(const Eigen::VectorXd& v) {
    Arr a;
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return Json(std::move(a));
  }
  static Json array_of(const std::vector<double>& v) {
    Arr a;
    for (double x : v) a.push_back(x);
    return Json(std::move(a));
  }
  static Json matrix_of(const Eigen::MatrixXd& m) {
    Arr rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      rows.push_back(array_of(Eigen::VectorXd(m.row(i))));
    return Json(std::move(rows));
  }

  Json& operator[](const std::string& key) {
    auto* o = std::get_if<Obj>(&v_);
    if (!o) {
      v_ = Obj{};
      o = std::get_if<Obj>(&v_);
    }
    for (auto& [k, val] : *o)
      if (k == key) return val;
    o->emplace_back(key, Json());
    return o->back().second;
  }

  void push_back(Json j) {
    auto* a = std::get_if<Arr>(&v_);
    if (!a) {
      v_ = Arr{};
      a = std::get_if<Arr>(&v_);
    }
    a->push_back(std::move(j));
  }

  std::string dump(int indent = 2) const {
    std::ostringstream os;
    write(os, indent, 0);
    os << "\n";
    return os.str();
  }

 private:
  static std::string fmt_double(double d) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
  }
  static void write_string(std::ostringstream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
      switch (c) {
        case '"': os << "\\\""; break;
        case '\\': os << "\\\\"; break;
        case '\n': os << "\\n"; break;
        case '\t': os << "\\t"; break;
        case '\r': os << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char b[8];
            std::snprintf(b, sizeof(b), "\\u%04x", c);
            os << b;
          } else {
            os << c;
          }
      }
    }
    os << '"';
  }
  void write(std::ostringstream& os, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    const std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    if (std::holds_alternative<std::nullptr_t>(v_)) {
      os << "null";
    } else if (auto* b = std::get_if<bool>(&v_)) {
      os << (*b ? "true" : "false");
    } else if (auto* d = std::get_if<double>(&v_)) {
      os << fmt_double(*d);
    } else if (auto* i = std::get_if<std::int64_t>(&v_)) {
      os << *i;
    } else if (auto* s = std::get_if<std::string>(&v_)) {
      write_string(os, *s);
    } else if (auto* a = std::get_if<Arr>(&v_)) {
      if (a->empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < a->size(); ++k) {
        os << pad1;
        (*a)[k].write(os, indent, depth + 1);
        if (k + 1 < a->size()) os << ",";
        os << "\n";
      }
      os << pad << "]";
    } else if (auto* o = std::get_if<Obj>(&v_)) {
      if (o->empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      for (std::size_t k = 0; k < o->size(); ++k) {
        os << pad1;
        write_string(os, (*o)[k].first);
        os << ": ";
        (*o)[k].second.write(os, indent, depth + 1);
        if (k + 1 < o->size()) os << ",";
        os << "\n";
      }
      os << pad << "}";
    }
  }

  std::variant<std::nullptr_t, bool, double, std::int64_t, std::string, Arr, Obj>
      v_;
};

}  // namespace gpc

#endif
