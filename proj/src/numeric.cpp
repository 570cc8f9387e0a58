#include "seqprop/numeric.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace seqprop {

namespace {

long long gcd_ll(long long a, long long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

bool fits_i64(int128 v) {
    return v >= int128(std::numeric_limits<long long>::min()) &&
           v <= int128(std::numeric_limits<long long>::max());
}

const int128 kDigitCap = int128(1) << 100;

}  // namespace

Rat Rat::make(long long n, long long d) {
    if (d == 0) throw std::domain_error("Rat: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    long long g = gcd_ll(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    return Rat{n, d};
}

std::optional<Rat> Rat::add(const Rat& a, const Rat& b) {
    int128 num = int128(a.num) * b.den + int128(b.num) * a.den;
    int128 den = int128(a.den) * b.den;
    // Normalize in 128 bits first so representable results are not rejected.
    int128 g = num < 0 ? -num : num;
    int128 h = den;
    while (h != 0) {
        int128 t = g % h;
        g = h;
        h = t;
    }
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (!fits_i64(num) || !fits_i64(den)) return std::nullopt;
    return Rat{static_cast<long long>(num), static_cast<long long>(den)};
}

std::optional<Rat> Rat::sub(const Rat& a, const Rat& b) {
    return add(a, Rat{-b.num, b.den});
}

int Rat::cmp(const Rat& o) const {
    int128 lhs = int128(num) * o.den;
    int128 rhs = int128(o.num) * den;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

Dec Dec::parse(const std::string& text) {
    const char* s = text.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !std::isfinite(v)) {
        throw std::invalid_argument("Dec: cannot parse '" + text + "' as a decimal number");
    }

    // Recover the exact scaled-integer form: digits * 10^exp10.
    size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') {
        neg = text[i] == '-';
        ++i;
    }
    int128 digits = 0;
    int exp10 = 0;
    bool overflow = false;
    bool seen_digit = false;
    bool in_frac = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (in_frac) throw std::invalid_argument("Dec: malformed decimal '" + text + "'");
            in_frac = true;
            continue;
        }
        if (c == 'e' || c == 'E') {
            exp10 += std::atoi(text.c_str() + i + 1);  // strtod already validated the tail
            break;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw std::invalid_argument("Dec: malformed decimal '" + text + "'");
        }
        seen_digit = true;
        if (digits >= kDigitCap) {
            overflow = true;
        } else {
            digits = digits * 10 + (c - '0');
        }
        if (in_frac) --exp10;
    }
    if (!seen_digit) throw std::invalid_argument("Dec: malformed decimal '" + text + "'");
    if (neg) digits = -digits;

    Dec d;
    d.text_ = text;
    d.value_ = v;
    d.rat_.reset();
    if (!overflow) {
        int128 num = digits;
        int128 den = 1;
        int e = exp10;
        while (e > 0 && num < kDigitCap && num > -kDigitCap) {
            num *= 10;
            --e;
        }
        while (e < 0 && den < kDigitCap) {
            den *= 10;
            ++e;
        }
        if (e == 0 && fits_i64(num) && fits_i64(den)) {
            d.rat_ = Rat::make(static_cast<long long>(num), static_cast<long long>(den));
        }
    }
    return d;
}

Dec Dec::from_double(double v) {
    Dec d;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    d.text_ = buf;
    d.value_ = v;
    d.rat_.reset();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9e18) {
        d.rat_ = Rat::make(static_cast<long long>(v), 1);
    }
    return d;
}

}  // namespace seqprop
