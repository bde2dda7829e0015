#include "heatctl/geometry.hpp"

#include "heatctl/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace heatctl {
namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok)
    throw ValidationError(field, what);
}

// value = mantissa * 10^exponent, at most 18 significant digits.
struct Decimal {
  __int128 mantissa = 0;
  int exponent = 0;
};

__int128 pow10(int n) {
  __int128 r = 1;
  while (n-- > 0)
    r *= 10;
  return r;
}

// Bring both to the smaller exponent.
std::pair<__int128, __int128> align(const Decimal& a, const Decimal& b, int& exponent) {
  exponent = std::min(a.exponent, b.exponent);
  const int da = a.exponent - exponent;
  const int db = b.exponent - exponent;
  require(da <= 19 && db <= 19, "set", "decimal magnitudes too far apart");
  return {a.mantissa * pow10(da), b.mantissa * pow10(db)};
}

int compare(const Decimal& a, const Decimal& b) {
  int e;
  auto [x, y] = align(a, b, e);
  return x < y ? -1 : (x > y ? 1 : 0);
}

Decimal add(const Decimal& a, const Decimal& b, int sign) {
  int e;
  auto [x, y] = align(a, b, e);
  return {x + sign * y, e};
}

Decimal scaled(const Decimal& a, __int128 k) { return {a.mantissa * k, a.exponent}; }

__int128 floor_div(const Decimal& a, const Decimal& b) {
  int e;
  auto [x, y] = align(a, b, e);
  __int128 q = x / y;
  if ((x % y != 0) && ((x < 0) != (y < 0)))
    --q;
  return q;
}

double to_double(const Decimal& d) {
  __int128 m = d.mantissa;
  const bool negative = m < 0;
  if (negative)
    m = -m;
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  } while (m != 0);
  std::string text = (negative ? "-" : "") + digits + "e" + std::to_string(d.exponent);
  return std::strtod(text.c_str(), nullptr);
}

class Cursor {
public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip() {
    while (pos_ < text_.size() &&
           (std::isspace(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == ';' ||
            text_[pos_] == ','))
      ++pos_;
  }
  bool done() {
    skip();
    return pos_ >= text_.size();
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    require(accept(c), "set", std::string("expected '") + c + "' at offset " + std::to_string(pos_));
  }
  bool keyword(std::string_view word) {
    skip();
    if (text_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  Decimal number() {
    skip();
    Decimal d;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
      negative = text_[pos_++] == '-';
    int digits = 0;
    bool any = false;
    bool fraction = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        any = true;
        if (d.mantissa != 0 || c != '0')
          ++digits;
        require(digits <= 18, "set", "too many significant digits");
        d.mantissa = d.mantissa * 10 + (c - '0');
        if (fraction)
          --d.exponent;
      } else if (c == '.' && !fraction) {
        fraction = true;
      } else {
        break;
      }
      ++pos_;
    }
    require(any, "set", "expected a number at offset " + std::to_string(pos_));
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      const std::size_t start = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      const std::string exp(text_.substr(start, pos_ - start));
      require(!exp.empty() && exp != "+" && exp != "-", "set", "malformed exponent");
      const int e = std::stoi(exp);
      require(std::abs(e) <= 30, "set", "exponent out of range");
      d.exponent += e;
    }
    if (negative)
      d.mantissa = -d.mantissa;
    return d;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

struct DecimalPiece {
  Decimal lo, hi;
};

} // namespace

IntervalSet::IntervalSet(double period, std::vector<Interval> pieces) : period_(period) {
  require(std::isfinite(period) && period > 0.0, "period", "must be positive");
  std::vector<Interval> split;
  for (const Interval& p : pieces) {
    require(std::isfinite(p.lo) && std::isfinite(p.hi) && p.lo < p.hi, "set",
            "each interval needs lo < hi");
    const double len = p.hi - p.lo;
    require(len <= period, "set", "interval longer than the period");
    double lo = p.lo - std::floor(p.lo / period) * period;
    if (lo >= period)
      lo = 0.0;
    const double hi = lo + len;
    if (hi > period) {
      split.push_back({lo, period});
      split.push_back({0.0, hi - period});
    } else {
      split.push_back({lo, hi});
    }
  }
  std::sort(split.begin(), split.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const Interval& p : split) {
    if (!intervals_.empty()) {
      Interval& last = intervals_.back();
      require(p.lo >= last.hi, "set", "intervals overlap");
      if (p.lo == last.hi) {
        last.hi = p.hi;
        continue;
      }
    }
    intervals_.push_back(p);
  }
  require(!intervals_.empty(), "set", "control set must have positive measure");
  prefix_.reserve(intervals_.size() + 1);
  prefix_.push_back(0.0);
  for (const Interval& p : intervals_)
    prefix_.push_back(prefix_.back() + p.length());
  measure_ = prefix_.back();
}

IntervalSet IntervalSet::parse(std::string_view text) {
  Cursor cur(text);
  require(cur.keyword("period"), "set", "text must start with 'period'");
  const Decimal period = cur.number();
  require(period.mantissa > 0, "period", "must be positive");

  std::vector<DecimalPiece> pieces;
  while (!cur.done()) {
    cur.expect('[');
    const Decimal lo = cur.number();
    const Decimal hi = cur.number();
    cur.expect(')');
    require(compare(lo, hi) < 0, "set", "each interval needs lo < hi");
    require(compare(add(hi, lo, -1), period) <= 0, "set", "interval longer than the period");
    const __int128 k = floor_div(lo, period);
    const Decimal shift = scaled(period, k);
    const Decimal a = add(lo, shift, -1);
    const Decimal b = add(hi, shift, -1);
    if (compare(b, period) > 0) {
      pieces.push_back({a, period});
      pieces.push_back({Decimal{}, add(b, period, -1)});
    } else {
      pieces.push_back({a, b});
    }
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const DecimalPiece& x, const DecimalPiece& y) { return compare(x.lo, y.lo) < 0; });
  std::vector<Interval> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0)
      require(compare(pieces[i].lo, pieces[i - 1].hi) >= 0, "set", "intervals overlap");
    out.push_back({to_double(pieces[i].lo), to_double(pieces[i].hi)});
  }
  return IntervalSet(to_double(period), std::move(out));
}

bool IntervalSet::covers_torus() const {
  return intervals_.size() == 1 && intervals_[0].lo == 0.0 && intervals_[0].hi == period_;
}

double IntervalSet::cumulative(double x) const {
  double base = 0.0;
  if (x >= period_) {
    base = measure_;
    x -= period_;
  }
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == intervals_.begin())
    return base;
  const std::size_t i = static_cast<std::size_t>(it - intervals_.begin()) - 1;
  return base + prefix_[i] + std::min(x, intervals_[i].hi) - intervals_[i].lo;
}

std::string IntervalSet::to_string() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "period %.17g;", period_);
  std::string out = buf;
  for (const Interval& p : intervals_) {
    std::snprintf(buf, sizeof buf, " [%.17g, %.17g)", p.lo, p.hi);
    out += buf;
  }
  return out;
}

double max_thickness(const IntervalSet& s, double a) {
  const double L = s.period();
  require(std::isfinite(a) && a > 0.0 && a <= L, "a", "window length must lie in (0, L]");
  if (a == L)
    return s.measure() / L;
  auto window = [&](double x) { return s.cumulative(x + a) - s.cumulative(x); };
  double best = window(0.0);
  for (const Interval& p : s.intervals()) {
    for (double e : {p.lo, p.hi}) {
      for (double x : {e, e - a}) {
        x -= std::floor(x / L) * L;
        if (x >= L)
          x = 0.0;
        best = std::min(best, window(x));
      }
    }
  }
  return std::clamp(best / a, 0.0, 1.0);
}

double equidistribution_radius(const IntervalSet& s, double g) {
  const double L = s.period();
  require(std::isfinite(g) && g > 0.0 && g <= L, "g", "must lie in (0, L]");
  const double cells_real = L / g;
  const double cells_round = std::round(cells_real);
  require(std::abs(cells_real - cells_round) <= 1e-12 * cells_real, "g", "must divide the period");

  const auto cells = static_cast<std::size_t>(cells_round);
  std::vector<double> longest(cells, 0.0);
  for (const Interval& p : s.intervals()) {
    auto first = static_cast<std::size_t>(std::floor(p.lo / g));
    for (std::size_t j = std::min(first, cells - 1); j < cells; ++j) {
      const double lo = std::max(p.lo, j * g);
      const double hi = std::min(p.hi, (j + 1) * g);
      if (lo >= p.hi)
        break;
      if (hi > lo)
        longest[j] = std::max(longest[j], hi - lo);
    }
  }
  return *std::min_element(longest.begin(), longest.end()) / 2.0;
}

bool is_equidistributed(const IntervalSet& s, double g, double delta) {
  const double radius = equidistribution_radius(s, g);
  require(std::isfinite(delta) && delta > 0.0 && delta <= g / 2.0, "delta", "must lie in (0, g/2]");
  return radius >= delta - 0.5e-12 * g;
}

double miller_radius(const IntervalSet& s) {
  const auto iv = s.intervals();
  double gap = iv.front().lo + s.period() - iv.back().hi;
  for (std::size_t i = 1; i < iv.size(); ++i)
    gap = std::max(gap, iv[i].lo - iv[i - 1].hi);
  return gap / 2.0;
}

IntervalSet homogenize(const IntervalSet& s, int n) {
  require(n >= 0 && n <= 24, "n", "must lie in [0, 24]");
  const double scale = std::ldexp(1.0, -n);
  const std::size_t copies = std::size_t{1} << n;
  const double cell = s.period() * scale;
  std::vector<Interval> pieces;
  pieces.reserve(copies * s.intervals().size());
  for (std::size_t j = 0; j < copies; ++j)
    for (const Interval& p : s.intervals())
      pieces.push_back({p.lo * scale + j * cell, p.hi * scale + j * cell});
  return IntervalSet(s.period(), std::move(pieces));
}

IntervalSet dehomogenize(const IntervalSet& s, int n) {
  require(n >= 0 && n <= 60, "n", "must lie in [0, 60]");
  const double scale = std::ldexp(1.0, n);
  std::vector<Interval> pieces;
  for (const Interval& p : s.intervals())
    pieces.push_back({p.lo * scale, p.hi * scale});
  return IntervalSet(s.period() * scale, std::move(pieces));
}

IntervalSet half_cells(double period, double g) {
  require(std::isfinite(g) && g > 0.0 && g <= period, "g", "must lie in (0, L]");
  const double cells_real = period / g;
  const double cells = std::round(cells_real);
  require(std::abs(cells_real - cells) <= 1e-12 * cells_real, "g", "must divide the period");
  std::vector<Interval> pieces;
  for (int j = 0; j < static_cast<int>(cells); ++j)
    pieces.push_back({j * g + g / 2.0, (j + 1) * g});
  pieces.back().hi = period;
  return IntervalSet(period, std::move(pieces));
}

} // namespace heatctl
