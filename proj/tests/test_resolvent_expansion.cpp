#include <doctest.h>

#include "threshold/resolvent_expansion.hpp"

using namespace thr;

namespace {

RadialGrid well_grid() { return RadialGrid::panels({0.0, 1.0}, 30.0, 0.25, 1.3, 16); }

double gp(double r) { return r * std::exp(-r * r); }

VecC profile(const RadialGrid& g) {
    VecC v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = gp(g.r()[i]);
    return v;
}

VecC orthogonal_profile(const RadialGrid& g) {
    VecC helper(g.size());
    for (int i = 0; i < g.size(); ++i) helper[i] = g.r()[i] * gp(g.r()[i]);
    return orthogonalize_to_r(g, profile(g), helper);
}

EffectiveOperator critical_well() {
    const EffectiveOperator base = local_operator(well_grid(), [](double r) { return r < 1.0 ? -1.0 : 0.0; });
    return scaled(base, critical_coupling(base));
}

VecC bump(const RadialGrid& g) {
    VecC f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = g.r()[i] * std::exp(-0.5 * g.r()[i] * g.r()[i]);
    return f;
}

}  // namespace

TEST_CASE("W(z) matches its three-term expansion to O(|z|^{3/2})") {
    const EffectiveOperator op = critical_well();
    double rem[2];
    for (int k = 0; k < 2; ++k) {
        const cdouble z = (k == 0 ? 1e-4 : 1e-5) * std::exp(cdouble(0.0, 0.75 * kPi));
        const WOperator w = w_operator(op, z);
        rem[k] = (w.W - (w.W0 + std::sqrt(z) * w.W1 + z * w.W2)).norm();
    }
    CHECK(std::log10(rem[0] / rem[1]) == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("inner Grushin problem for a resonance") {
    const EffectiveOperator op = critical_well();
    const ThresholdReport rep = classify(op);
    const InnerGrushin ig = inner_grushin(op, rep);
    CHECK(ig.kappa == 1);
    CHECK(ig.S.cols() == 1);
    CHECK(ig.orthonormality < 1e-10);
    CHECK(ig.idempotency < 1e-10);
    CHECK(ig.gram_min_eigenvalue > 0.0);
    const LeadingMatrices lm = leading_e_minus_plus(op, ig);
    CHECK(lm.B0.rows() == 1);
    CHECK(lm.B0_min_eigenvalue > 0.0);
    CHECK_FALSE(lm.positivity_violation);
}

TEST_CASE("threshold eigenvalue: E2 on the eigen block is the Gram matrix") {
    const RadialGrid g = well_grid();
    const EffectiveOperator op = separable_operator(g, orthogonal_profile(g));
    const ThresholdReport rep = classify(op);
    REQUIRE(rep.kase == ThresholdCase::Exceptional2);
    const InnerGrushin ig = inner_grushin(op, rep);
    const LeadingMatrices lm = leading_e_minus_plus(op, ig);
    const VecR w = op.weights();
    const MatC gram = ig.S.adjoint() * w.asDiagonal() * ig.S;
    CHECK((lm.E2_eigen - gram).norm() <= 1e-6 * gram.norm());
    CHECK(lm.E2_min_eigenvalue > 0.0);
}

TEST_CASE("mixed case: E1 vanishes off the resonant corner") {
    const RadialGrid g = well_grid();
    MatC P(g.size(), 2);
    P << profile(g), orthogonal_profile(g);
    P.col(0) *= 0.7;
    const EffectiveOperator op = separable_operator(g, P);
    const ThresholdReport rep = classify(op);
    CHECK(rep.kase == ThresholdCase::Exceptional3);
    CHECK(rep.mu == 2);
    CHECK(rep.kappa == 1);
    const LeadingMatrices lm = leading_e_minus_plus(op, inner_grushin(op, rep));
    CHECK(lm.off_corner < 1e-8);
}

TEST_CASE("regular threshold: leading term and power 0") {
    const EffectiveOperator base = local_operator(well_grid(), [](double r) { return r < 1.0 ? -1.0 : 0.0; });
    const EffectiveOperator op = scaled(base, 0.5 * critical_coupling(base));
    const ThresholdReport rep = classify(op);
    const LeadingTerm lt = leading_resolvent(op, rep);
    CHECK(lt.kase == ThresholdCase::Regular);
    CHECK(lt.power == 0.0);
    const VecC f = bump(op.grid);
    // The remainder is O(|z|^{1/2}).
    const double e8 = leading_error(op, lt, cdouble(-1e-8, 0.0), f);
    const double e10 = leading_error(op, lt, cdouble(-1e-10, 0.0), f);
    CHECK(e8 < 5e-3);
    CHECK(e8 / e10 == doctest::Approx(10.0).epsilon(0.2));
    const PowerFit pf = fit_power(op, f);
    CHECK(pf.power == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("resonance: power -1/2 and both inversion routes agree") {
    const EffectiveOperator op = critical_well();
    const ThresholdReport rep = classify(op);
    const LeadingTerm lt = leading_resolvent(op, rep);
    CHECK(lt.power == -0.5);
    const VecC f = bump(op.grid);
    const cdouble z = 1e-8 * std::exp(cdouble(0.0, 0.75 * kPi));
    const VecC a = eh_inverse_apply(op, z, f, 1), b = eh_inverse_apply(op, z, f, 2);
    CHECK((a - b).norm() <= 1e-6 * a.norm());
    CHECK(leading_error(op, lt, z, f) < 0.05);
    CHECK(fit_power(op, f).power == doctest::Approx(-0.5).epsilon(0.04));
}

TEST_CASE("Gevrey probe") {
    const GevreyReport gr = gevrey_probe(RadialGrid::default_grid(), 1.0, 1.0, 6, 0.5);
    CHECK(gr.gamma_theory == doctest::Approx(2.0));
    CHECK(gr.a_N.size() == 6);
    for (double v : gr.a_N) CHECK(v > 0.0);
    CHECK_FALSE(gr.conditioning_failure);
}
