#pragma once

#include <cassert>
#include <stdexcept>

namespace qhet {

/// A probability in [0,1]. Tail computations may land a hair outside the
/// interval through roundoff; `clamped` tolerates up to 1e-12 of overshoot
/// and asserts (debug builds) on anything larger.
class Probability {
public:
    explicit Probability(double v) : value_(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error("Probability: value outside [0,1]");
    }

    static Probability clamped(double v) {
        assert(v >= -1e-12 && v <= 1.0 + 1e-12);
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        return Probability(v);
    }

    double value() const { return value_; }

    friend bool operator==(Probability a, Probability b) { return a.value_ == b.value_; }

private:
    double value_;
};

}  // namespace qhet
