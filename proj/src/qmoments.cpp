#include "qhet/qmoments.hpp"

#include <cmath>
#include <stdexcept>

namespace qhet {

namespace {

void check_inputs(std::span<const StudyNullInputs> inputs) {
    if (inputs.size() < 2)
        throw std::invalid_argument("qmoments: at least 2 studies required");
    for (const auto& in : inputs) {
        if (!(in.weight > 0.0))
            throw std::domain_error("qmoments: weights must be positive");
        in.moments.validate();
    }
}

long double weight_total(std::span<const StudyNullInputs> inputs) {
    long double w = 0.0L;
    for (const auto& in : inputs) w += in.weight;
    return w;
}

// sum_{i != j} x_i y_j and sum over distinct triples, via complete sums.
struct PairAcc {
    long double sx = 0, sy = 0, sxy = 0;
    void add(double x, double y) {
        sx += x;
        sy += y;
        sxy += static_cast<long double>(x) * y;
    }
    long double distinct() const { return sx * sy - sxy; }
};

struct TripleAcc {
    long double sx = 0, sy = 0, sz = 0, sxy = 0, sxz = 0, syz = 0, sxyz = 0;
    void add(double x, double y, double z) {
        const long double lx = x, ly = y, lz = z;
        sx += lx;
        sy += ly;
        sz += lz;
        sxy += lx * ly;
        sxz += lx * lz;
        syz += ly * lz;
        sxyz += lx * ly * lz;
    }
    long double distinct() const {
        return sx * sy * sz - sxy * sz - sxz * sy - syz * sx + 2.0L * sxyz;
    }
};

}  // namespace

void MomentProfile::validate() const {
    if (!(m2 > 0.0) || !(m4 > 0.0) || !(m6 > 0.0))
        throw std::domain_error("MomentProfile: even moments must be positive");
    if (m4 < m2 * m2 * (1.0 - 1e-9))
        throw std::domain_error("MomentProfile: m4 >= m2^2 violated");
}

AggregateWeights AggregateWeights::from(std::span<const StudyNullInputs> inputs) {
    check_inputs(inputs);
    AggregateWeights agg;
    agg.total = static_cast<double>(weight_total(inputs));
    agg.u.reserve(inputs.size());
    for (const auto& in : inputs) agg.u.push_back(1.0 - in.weight / agg.total);
    return agg;
}

double ExpectedQTerms::total() const {
    return quadratic + third_moment + fourth_moment + cross_u_df + cross_w_df +
           cross_mixed + square_df + square_d2f;
}

ExpectedQTerms expected_q_terms(std::span<const StudyNullInputs> inputs) {
    check_inputs(inputs);
    const long double W = weight_total(inputs);
    const long double W3 = W * W * W;

    long double quadratic = 0, third = 0, fourth = 0;
    long double sum_u_df = 0;     // sum U f' m2
    long double sum_w_df = 0;     // sum w f' m2
    long double sum_w_m2 = 0;     // sum w m2
    long double sum_df2_d2f = 0;  // sum (f'^2 - f''/(2W)) m2
    long double square_df = 0, square_d2f = 0;

    for (const auto& in : inputs) {
        const long double w = in.weight, d = in.dweight, s = in.d2weight;
        const long double u = 1.0L - w / W;
        const long double m2 = in.moments.m2;
        quadratic += w * u * m2;
        third += u * u * d * in.moments.m3;
        fourth += (-u * u / W * d * d + 0.5L * u * u * s) * in.moments.m4;
        sum_u_df += u * d * m2;
        sum_w_df += w * d * m2;
        sum_w_m2 += w * m2;
        sum_df2_d2f += (d * d - s / (2.0L * W)) * m2;
        square_df += (1.0L - 2.0L * w / W + 3.0L * w * w / (W * W)) * d * d * m2 * m2;
        square_d2f += w * w * s * m2 * m2;
    }

    ExpectedQTerms t;
    t.quadratic = static_cast<double>(quadratic);
    t.third_moment = static_cast<double>(third);
    t.fourth_moment = static_cast<double>(fourth);
    t.cross_u_df = static_cast<double>(-sum_u_df * sum_u_df / W);
    t.cross_w_df = static_cast<double>(-sum_w_df * sum_w_df / W3);
    t.cross_mixed = static_cast<double>(-sum_w_m2 * sum_df2_d2f / W3);
    t.square_df = static_cast<double>(square_df / W);
    t.square_d2f = static_cast<double>(-square_d2f / (2.0L * W3));
    return t;
}

double expected_q(std::span<const StudyNullInputs> inputs) {
    return expected_q_terms(inputs).total();
}

double ExpectedQ2Terms::total() const {
    return quartic_pure + quartic_cross + quintic_pure + quintic_cross + sextic_pure +
           sextic_cross + sextic_triple;
}

ExpectedQ2Terms expected_q2_terms(std::span<const StudyNullInputs> inputs) {
    check_inputs(inputs);
    const long double W = weight_total(inputs);
    const long double W2 = W * W, W3 = W2 * W, W4 = W2 * W2;

    long double quartic_pure = 0, quintic_pure = 0, sextic_pure = 0;

    // quartic cross: sum_{i!=j} w_i w_j (U_i U_j + 2 w_i w_j / W^2) m2_i m2_j
    PairAcc pp, rr;  // P = w U m2, R = w^2 m2

    // quintic cross pieces of d5/di^3 dj^2
    PairAcc x1y1, x2y2, x3y3, x4y4;

    // sextic cross pieces of d6/di^4 dj^2
    PairAcc a1b1, a2b2, a3b2, c1b1, c1b2, c2b1, c2b2, d1d2, d3d4, d5d4, e1e2, e3e2, f1f2;

    // triple-sum pieces of d6/di^2 dj^2 dk^2
    TripleAcc xrp, xrr, yrp, yrr, uup, uur, vvp, vvr, eer;

    for (const auto& in : inputs) {
        const double w = in.weight, d = in.dweight, s = in.d2weight;
        const double u = static_cast<double>(1.0L - w / W);
        const double m2 = in.moments.m2, m3 = in.moments.m3, m4 = in.moments.m4;

        quartic_pure += static_cast<long double>(w) * w * u * u * in.moments.m4;
        quintic_pure += 2.0L * w * u * u * u * d * in.moments.m5;
        sextic_pure +=
            static_cast<long double>(u) * u * u * ((u - 2.0 * w / W) * d * d + w * s) * in.moments.m6;

        const double p = w * m2;       // w m2
        const double r = w * w * m2;   // w^2 m2
        const double P = w * u * m2;   // w U m2
        pp.add(P, P);
        rr.add(r, r);

        x1y1.add(u * u * d * m3, P);
        x2y2.add(u * w * d * m3, r);
        x3y3.add(w * w * u * m3, u * d * m2);
        x4y4.add(w * w * w * m3, w * d * m2);

        const double b1 = p, b2 = r;
        a1b1.add(u * u * d * d * m4, b1);
        a2b2.add(u * d * d * m4, b2);
        a3b2.add(u * w * d * d * m4, b2);
        c1b1.add(u * s * m4, b1);
        c1b2.add(u * s * m4, b2);
        c2b1.add(u * w * s * m4, b1);
        c2b2.add(u * w * s * m4, b2);
        d1d2.add(u * u * w * d * m4, d * m2);
        d3d4.add(u * w * d * m4, w * d * m2);
        d5d4.add(u * w * w * d * m4, w * d * m2);
        e1e2.add(w * w * w * m4, d * d * m2);
        e3e2.add(w * w * w * w * m4, d * d * m2);
        f1f2.add(u * w * w * w * m4, s * m2);

        const double x = d * d * m2, y = s * m2, uu = u * d * m2, v = w * d * m2, e = d * m2;
        xrp.add(x, r, p);
        xrr.add(x, r, r);
        yrp.add(y, r, p);
        yrr.add(y, r, r);
        uup.add(uu, uu, p);
        uur.add(uu, uu, r);
        vvp.add(v, v, p);
        vvr.add(v, v, r);
        eer.add(e, e, r);
    }

    ExpectedQ2Terms t;
    t.quartic_pure = static_cast<double>(quartic_pure);
    t.quartic_cross = static_cast<double>(pp.distinct() + (2.0L / W2) * rr.distinct());
    t.quintic_pure = static_cast<double>(quintic_pure);
    t.quintic_cross = static_cast<double>(
        2.0L * (x1y1.distinct() + (5.0L / W2) * x2y2.distinct()) -
        (4.0L / W) * (x3y3.distinct() + (1.0L / W2) * x4y4.distinct()));
    t.sextic_pure = static_cast<double>(sextic_pure);
    t.sextic_cross = static_cast<double>(
        (1.0L / W4) *
        (-2.0L * W * (W2 * a1b1.distinct() - 4.0L * W * a2b2.distinct() + 9.0L * a3b2.distinct()) +
         W2 * (W2 * c1b1.distinct() - W * c1b2.distinct() - W * c2b1.distinct() +
               6.0L * c2b2.distinct()) -
         8.0L * W * (W2 * d1d2.distinct() - W * d3d4.distinct() + 3.0L * d5d4.distinct()) +
         (-2.0L * W * e1e2.distinct() + 3.0L * e3e2.distinct()) + W2 * f1f2.distinct()));
    // the 1/48 prefactor and the 3-fold index symmetry combine to 1/16
    t.sextic_triple = static_cast<double>(
        (1.0L / 16.0L) *
        (-(16.0L / W4) * (2.0L * W * xrp.distinct() - 9.0L * xrr.distinct()) +
         (8.0L / W3) * (2.0L * W * yrp.distinct() - 6.0L * yrr.distinct()) -
         (32.0L / W2) * (W * uup.distinct() - 6.0L * uur.distinct() + (1.0L / W) * vvp.distinct() -
                         (12.0L / W2) * vvr.distinct() + 3.0L * eer.distinct())));
    return t;
}

double expected_q2(std::span<const StudyNullInputs> inputs) {
    return expected_q2_terms(inputs).total();
}

double q2_partial_derivative(Q2Derivative kind, std::span<const std::size_t> indices,
                             std::span<const StudyNullInputs> inputs) {
    check_inputs(inputs);
    const std::size_t need = (kind == Q2Derivative::d4_iiii || kind == Q2Derivative::d5_iiiii ||
                              kind == Q2Derivative::d6_iiiiii)
                                 ? 1
                             : (kind == Q2Derivative::d6_iijjkk) ? 3
                                                                 : 2;
    if (indices.size() != need)
        throw std::invalid_argument("q2_partial_derivative: wrong number of indices");
    for (std::size_t a = 0; a < indices.size(); ++a) {
        if (indices[a] >= inputs.size())
            throw std::out_of_range("q2_partial_derivative: index out of range");
        for (std::size_t b = a + 1; b < indices.size(); ++b)
            if (indices[a] == indices[b])
                throw std::invalid_argument("q2_partial_derivative: indices must be distinct");
    }

    const double W = static_cast<double>(weight_total(inputs));
    const auto w = [&](std::size_t i) { return inputs[i].weight; };
    const auto df = [&](std::size_t i) { return inputs[i].dweight; };
    const auto d2f = [&](std::size_t i) { return inputs[i].d2weight; };
    const auto U = [&](std::size_t i) { return 1.0 - inputs[i].weight / W; };

    switch (kind) {
        case Q2Derivative::d4_iiii: {
            const std::size_t i = indices[0];
            return 24.0 * w(i) * w(i) * U(i) * U(i);
        }
        case Q2Derivative::d4_iijj: {
            const std::size_t i = indices[0], j = indices[1];
            return 8.0 * w(i) * w(j) * (U(i) * U(j) + 2.0 * w(i) * w(j) / (W * W));
        }
        case Q2Derivative::d5_iiiii: {
            const std::size_t i = indices[0];
            return 240.0 * w(i) * U(i) * U(i) * U(i) * df(i);
        }
        case Q2Derivative::d5_iiijj: {
            const std::size_t i = indices[0], j = indices[1];
            return 24.0 * U(i) * w(j) * (U(i) * U(j) + 5.0 * w(i) * w(j) / (W * W)) * df(i) -
                   48.0 * (w(i) * w(i) / W) * (U(i) * U(j) + w(i) * w(j) / (W * W)) * df(j);
        }
        case Q2Derivative::d6_iiiiii: {
            const std::size_t i = indices[0];
            return 720.0 * U(i) * U(i) * U(i) *
                   ((U(i) - 2.0 * w(i) / W) * df(i) * df(i) + w(i) * d2f(i));
        }
        case Q2Derivative::d6_iiiijj: {
            const std::size_t i = indices[0], j = indices[1];
            const double wi = w(i), wj = w(j), Ui = U(i);
            return (48.0 / (W * W * W * W)) *
                   (-2.0 * W * Ui * wj * (W * W * Ui - 4.0 * W * wj + 9.0 * wi * wj) * df(i) * df(i) +
                    W * W * Ui * wj * (W * W - W * wj - W * wi + 6.0 * wi * wj) * d2f(i) -
                    8.0 * W * Ui * wi * (W * W * Ui - W * wj + 3.0 * wi * wj) * df(i) * df(j) +
                    wi * wi * wi * (-2.0 * W + 3.0 * wi) * df(j) * df(j) +
                    W * W * Ui * wi * wi * wi * d2f(j));
        }
        case Q2Derivative::d6_iijjkk: {
            const std::size_t i = indices[0], j = indices[1], k = indices[2];
            const double wi = w(i), wj = w(j), wk = w(k);
            const double W2 = W * W, W3 = W2 * W, W4 = W2 * W2;
            double t = 0.0;
            t += -(16.0 * wj * wk / W4) * (W * wj + W * wk - 9.0 * wj * wk) * df(i) * df(i);
            t += -(16.0 * wi * wk / W4) * (W * wi + W * wk - 9.0 * wi * wk) * df(j) * df(j);
            t += -(16.0 * wi * wj / W4) * (W * wi + W * wj - 9.0 * wi * wj) * df(k) * df(k);
            t += (8.0 * wj * wk / W3) * (W * wj + W * wk - 6.0 * wj * wk) * d2f(i);
            t += (8.0 * wi * wk / W3) * (W * wi + W * wk - 6.0 * wi * wk) * d2f(j);
            t += (8.0 * wi * wj / W3) * (W * wi + W * wj - 6.0 * wi * wj) * d2f(k);
            t += -(32.0 * wk / W2) *
                 (U(i) * U(j) * (W - 6.0 * wk) + wi * wj / W2 * (W - 12.0 * wk) + 3.0 * wk) *
                 df(i) * df(j);
            t += -(32.0 * wj / W2) *
                 (U(i) * U(k) * (W - 6.0 * wj) + wi * wk / W2 * (W - 12.0 * wj) + 3.0 * wj) *
                 df(i) * df(k);
            t += -(32.0 * wi / W2) *
                 (U(j) * U(k) * (W - 6.0 * wi) + wj * wk / W2 * (W - 12.0 * wi) + 3.0 * wi) *
                 df(j) * df(k);
            return t;
        }
    }
    throw std::logic_error("q2_partial_derivative: unknown kind");
}

}  // namespace qhet
