// Small numeric utilities shared across the library: compensated summation,
// an exact rational type for knife-edge threshold tests, and decimal design
// inputs that keep their exact value.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqprop {

// Neumaier variant of Kahan summation.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

using int128 = __int128;

// Rational with 64-bit numerator/denominator, normalized, den > 0.
// Comparisons go through 128-bit products so they never overflow; add/sub
// report failure instead of wrapping when 64 bits are not enough.
struct Rat {
    long long num = 0;
    long long den = 1;

    static Rat make(long long n, long long d);
    static std::optional<Rat> add(const Rat& a, const Rat& b);
    static std::optional<Rat> sub(const Rat& a, const Rat& b);

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    int cmp(const Rat& o) const;
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const { return cmp(o) < 0; }
    bool operator<=(const Rat& o) const { return cmp(o) <= 0; }
    bool operator>(const Rat& o) const { return cmp(o) > 0; }
    bool operator>=(const Rat& o) const { return cmp(o) >= 0; }
};

// A decimal number parsed from text and retained verbatim, e.g. "0.05" or
// "1e-10". The exact rational form is kept whenever it fits in 64 bits, so
// that downstream threshold comparisons can be done without rounding.
class Dec {
public:
    Dec() = default;
    static Dec parse(const std::string& text);
    static Dec from_double(double v);  // no exact form unless v is integral

    const std::string& text() const { return text_; }
    double value() const { return value_; }
    const std::optional<Rat>& rat() const { return rat_; }
    bool has_exact() const { return rat_.has_value(); }

    bool operator==(const Dec& o) const { return text_ == o.text_; }

private:
    std::string text_ = "0";
    double value_ = 0.0;
    std::optional<Rat> rat_ = Rat{0, 1};
};

// A point on the probability axis, optionally carrying an exact rational.
struct Prob {
    double value = 0.0;
    std::optional<Rat> exact;

    Prob() = default;
    Prob(double v) : value(v) {}  // NOLINT: implicit by design
    explicit Prob(const Rat& r) : value(r.to_double()), exact(r) {}
    static Prob fraction(long long num, long long den) { return Prob(Rat::make(num, den)); }
};

// Floor division for 128-bit integers (rounds toward negative infinity).
inline int128 floor_div(int128 a, int128 b) {
    int128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace seqprop
