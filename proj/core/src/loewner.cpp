/*
 * Copyright 2026 The hsle-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 */
#include "hsle/loewner.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hsle/specfun.hpp"

namespace hsle {

double slit_step(double v, double w_mid, double dt) {
  const double d = v - w_mid;
  const double r = std::sqrt(d * d + 4.0 * dt);
  return (d >= 0.0) ? w_mid + r : w_mid - r;
}

double flow_step(double v, bool right_side, double w0, double w1, double dt) {
  const double mid = 0.5 * (w0 + w1);
  const double root = 2.0 * std::sqrt(dt);
  if (right_side) {
    double d = v - mid;
    if (d < 0.0) d = 0.0;  // inside the swallowed batch: ride the tip
    double nv = mid + std::sqrt(d * d + 4.0 * dt);
    const double floor = w1 + root;
    return nv < floor ? floor : nv;
  }
  double d = v - mid;
  if (d > 0.0) d = 0.0;
  double nv = mid - std::sqrt(d * d + 4.0 * dt);
  const double ceil = w1 - root;
  return nv > ceil ? ceil : nv;
}

FlowResult flow_point(const DrivingRecord& rec, double z) {
  FlowResult out;
  const std::size_t n = rec.steps();
  out.values.resize(n + 1);
  out.values[0] = z;
  const bool right = z >= 0.0;
  double v = z;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    v = flow_step(v, right, rec.w[k], rec.w[k + 1], dt);
    out.values[k + 1] = v;
    if (!out.swallow_index &&
        std::abs(v - rec.w[k + 1]) < swallow_eps(rec.kappa, dt))
      out.swallow_index = k + 1;
  }
  return out;
}

double flow_value_at(const DrivingRecord& rec, double z, std::size_t k_end) {
  const bool right = z >= 0.0;
  double v = z;
  for (std::size_t k = 0; k < k_end; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    v = flow_step(v, right, rec.w[k], rec.w[k + 1], dt);
  }
  return v;
}

namespace {

// sqrt branch with nonnegative imaginary part (maps into closed H).
inline std::complex<double> sqrt_upper(std::complex<double> q) {
  const double x = q.real(), y = q.imag();
  const double r = std::hypot(x, y);
  double u, v;
  if (r == 0.0) return {0.0, 0.0};
  if (x >= 0.0) {
    u = std::sqrt(0.5 * (r + x));
    v = (u == 0.0) ? 0.0 : y / (2.0 * u);
  } else {
    v = std::copysign(std::sqrt(0.5 * (r - x)), y);
    u = (v == 0.0) ? 0.0 : y / (2.0 * v);
  }
  if (v < 0.0) {
    u = -u;
    v = -v;
  }
  return {u, v};
}

constexpr double kTipHeight = 1e-8;

}  // namespace

std::complex<double> complex_flow_step(std::complex<double> p, double w0,
                                       double w1, double dt) {
  const double mid = 0.5 * (w0 + w1);
  const std::complex<double> d(p.real() - mid, p.imag());
  return sqrt_upper(std::complex<double>(
             d.real() * d.real() - d.imag() * d.imag() + 4.0 * dt,
             2.0 * d.real() * d.imag())) +
         mid;
}

std::complex<double> trace_point(const DrivingRecord& rec, std::size_t k) {
  if (k == 0) return {0.0, 0.0};
  if (k > rec.steps()) throw std::out_of_range("trace_point: knot out of range");
  std::complex<double> p(rec.w[k], kTipHeight);
  for (std::size_t j = k; j-- > 0;) {
    const double dt = rec.times[j + 1] - rec.times[j];
    const double mid = 0.5 * (rec.w[j] + rec.w[j + 1]);
    const std::complex<double> d(p.real() - mid, p.imag());
    p = sqrt_upper(std::complex<double>(
            d.real() * d.real() - d.imag() * d.imag() - 4.0 * dt,
            2.0 * d.real() * d.imag()));
    p += mid;
  }
  if (p.imag() < -1e-9)
    throw numerical_error("trace_point: left the closed half-plane");
  if (p.imag() < 0.0) p = {p.real(), 0.0};
  return p;
}

std::vector<std::complex<double>> trace_points(
    const DrivingRecord& rec, std::vector<std::size_t> knots) {
  const std::size_t m = knots.size();
  std::vector<std::complex<double>> out(m);
  if (m == 0) return out;
  // order of activation: largest knot first
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return knots[a] > knots[b]; });
  struct Chain {
    double re, im;
    std::size_t slot;
  };
  std::vector<Chain> active;
  active.reserve(m);
  std::size_t next = 0;
  const std::size_t kmax = knots[order[0]];
  if (kmax > rec.steps())
    throw std::out_of_range("trace_points: knot out of range");
  for (std::size_t j = kmax; j-- > 0;) {
    while (next < m && knots[order[next]] == j + 1) {
      const std::size_t slot = order[next++];
      active.push_back({rec.w[j + 1], kTipHeight, slot});
    }
    const double dt4 = 4.0 * (rec.times[j + 1] - rec.times[j]);
    const double mid = 0.5 * (rec.w[j] + rec.w[j + 1]);
    for (auto& ch : active) {
      const double dr = ch.re - mid;
      const double qr = dr * dr - ch.im * ch.im - dt4;
      const double qi = 2.0 * dr * ch.im;
      // sqrt with nonnegative imaginary part, unrolled
      const double r = std::sqrt(qr * qr + qi * qi);
      double u, v;
      if (qr >= 0.0) {
        u = std::sqrt(0.5 * (r + qr));
        v = (u == 0.0) ? 0.0 : qi / (2.0 * u);
      } else {
        v = std::copysign(std::sqrt(0.5 * (r - qr)), qi);
        u = (v == 0.0) ? 0.0 : qi / (2.0 * v);
      }
      if (v < 0.0) {
        u = -u;
        v = -v;
      }
      ch.re = mid + u;
      ch.im = v;
    }
  }
  for (const auto& ch : active) {
    if (ch.im < -1e-9)
      throw numerical_error("trace_points: left the closed half-plane");
    out[ch.slot] = {ch.re, std::max(ch.im, 0.0)};
  }
  // knots equal to zero activate nowhere: origin
  for (std::size_t i = 0; i < m; ++i)
    if (knots[i] == 0) out[i] = {0.0, 0.0};
  return out;
}

Trace extract_trace(const DrivingRecord& rec, std::size_t every) {
  if (every == 0) throw std::domain_error("extract_trace: every >= 1");
  Trace tr;
  const std::size_t n = rec.steps();
  for (std::size_t k = 0; k <= n; k += every) {
    tr.points.push_back(trace_point(rec, k));
    tr.capacities.push_back(rec.times[k]);
  }
  if (!tr.capacities.empty() && tr.capacities.back() != rec.times[n]) {
    tr.points.push_back(trace_point(rec, n));
    tr.capacities.push_back(rec.times[n]);
  }
  return tr;
}

double capacity_semigroup_check(const DrivingRecord& rec, std::size_t split,
                                double z) {
  const std::size_t n = rec.steps();
  if (split == 0 || split >= n)
    throw std::domain_error("capacity_semigroup_check: bad split");
  const bool right = z >= 0.0;
  double v_full = z, v_two = z;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    v_full = flow_step(v_full, right, rec.w[k], rec.w[k + 1], dt);
  }
  for (std::size_t k = 0; k < split; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    v_two = flow_step(v_two, right, rec.w[k], rec.w[k + 1], dt);
  }
  for (std::size_t k = split; k < n; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    v_two = flow_step(v_two, right, rec.w[k], rec.w[k + 1], dt);
  }
  return std::abs(v_full - v_two);
}

namespace {

void put_double(std::ostream& os, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  os.write(buf, res.ptr - buf);
}

double get_double(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && s[pos] == ',') ++pos;
  std::size_t end = s.find(',', pos);
  if (end == std::string::npos) end = s.size();
  double out = 0.0;
  const auto res = std::from_chars(s.data() + pos, s.data() + end, out);
  if (res.ec != std::errc())
    throw std::runtime_error("record csv: bad number '" +
                             s.substr(pos, end - pos) + "'");
  pos = end + 1;
  return out;
}

}  // namespace

void write_record_csv(const DrivingRecord& rec, std::ostream& os) {
  os << "# kappa=";
  put_double(os, rec.kappa);
  os << " swallow_rel=";
  put_double(os, rec.swallow_rel);
  os << " tol_floor=";
  put_double(os, rec.tol_floor);
  os << "\n";
  os << "t,w";
  for (const auto& m : rec.marked) os << "," << m.label;
  os << "\n";
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    put_double(os, rec.times[k]);
    os << ",";
    put_double(os, rec.w[k]);
    for (const auto& m : rec.marked) {
      os << ",";
      put_double(os, m.v.empty() ? 0.0 : m.v[k]);
    }
    os << "\n";
  }
}

DrivingRecord read_record_csv(std::istream& is) {
  DrivingRecord rec;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("record csv: empty");
  if (line.rfind("# kappa=", 0) == 0) {
    std::size_t pos = 8;
    rec.kappa = std::stod(line.substr(pos), &pos);
    const auto grab = [&](const std::string& key, double& out) {
      const auto at = line.find(key);
      if (at != std::string::npos) out = std::stod(line.substr(at + key.size()));
    };
    grab("swallow_rel=", rec.swallow_rel);
    grab("tol_floor=", rec.tol_floor);
    if (!std::getline(is, line)) throw std::runtime_error("record csv: no header");
  }
  std::stringstream hdr(line);
  std::string col;
  std::vector<std::string> cols;
  while (std::getline(hdr, col, ',')) cols.push_back(col);
  if (cols.size() < 2 || cols[0] != "t" || cols[1] != "w")
    throw std::runtime_error("record csv: header must start with t,w");
  rec.marked.resize(cols.size() - 2);
  for (std::size_t i = 2; i < cols.size(); ++i) rec.marked[i - 2].label = cols[i];
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    rec.times.push_back(get_double(line, pos));
    rec.w.push_back(get_double(line, pos));
    for (auto& m : rec.marked) m.v.push_back(get_double(line, pos));
  }
  for (auto& m : rec.marked)
    if (!m.v.empty()) m.z0 = m.v.front();
  return rec;
}

}  // namespace hsle
