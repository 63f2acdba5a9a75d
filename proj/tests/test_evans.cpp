// Winding-engine tests: contour builders and validation, adaptive argument
// tracking on synthetic holomorphic samples, error paths (contour zeros,
// refinement exhaustion, branch-point proximity, non-finite values), chart
// residency bookkeeping, the interior pole estimate, and end-to-end winding
// runs on both model evaluators.
#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "wavespec/evans.hpp"
#include "wavespec/fkpp.hpp"
#include "wavespec/keller_segel.hpp"

using namespace wavespec;
using evans::Arc;
using evans::Contour;
using evans::Line;

namespace {

// Minimal sample for synthetic evaluators; mirrors the model samples' fields.
struct FakeSample {
    Complex E;
    int chart_u = 0;
    int chart_s = 1;
    bool canonical = true;
    bool pole = false;
    int switches = 0;
    double branch_distance = std::numeric_limits<double>::infinity();
};

template <class F>
auto holomorphic(F f) {
    return [f](Complex lambda) {
        FakeSample s;
        s.E = f(lambda);
        return s;
    };
}

bool has_warning(const std::vector<std::string>& warnings, const std::string& needle) {
    for (const std::string& w : warnings)
        if (w.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("contours: builders produce the documented segment layouts") {
    const Contour c = evans::circle(Complex(0.0, 0.0), 1e-2);
    REQUIRE(c.segments.size() == 1);
    const Arc& ca = std::get<Arc>(c.segments[0]);
    CHECK(ca.radius == doctest::Approx(1e-2));
    CHECK(ca.th0 == doctest::Approx(0.0));
    CHECK(ca.th1 == doctest::Approx(2.0 * kPi));
    c.validate();

    // Outer arc, imaginary-axis descent, clockwise inner arc, descent again.
    const Contour ann = evans::right_half_annulus(4.0, 1e7);
    REQUIRE(ann.segments.size() == 4);
    const Arc& outer = std::get<Arc>(ann.segments[0]);
    CHECK(outer.radius == doctest::Approx(1e7));
    CHECK(outer.th0 == doctest::Approx(-kPi / 2));
    CHECK(outer.th1 == doctest::Approx(kPi / 2));
    const Line& down = std::get<Line>(ann.segments[1]);
    CHECK(down.a.imag() == doctest::Approx(1e7));
    CHECK(down.b.imag() == doctest::Approx(4.0));
    CHECK(down.a.real() == 0.0);
    const Arc& inner = std::get<Arc>(ann.segments[2]);
    CHECK(inner.radius == doctest::Approx(4.0));
    CHECK(inner.th0 > inner.th1);  // traversed clockwise
    const Line& out = std::get<Line>(ann.segments[3]);
    CHECK(out.b.imag() == doctest::Approx(-1e7));
    ann.validate();

    const Contour half = evans::shifted_half_disc(4.0, 0.3);
    REQUIRE(half.segments.size() == 2);
    const Arc& ha = std::get<Arc>(half.segments[0]);
    CHECK(ha.center.real() == doctest::Approx(0.3));
    CHECK(ha.radius == doctest::Approx(4.0));
    const Line& hl = std::get<Line>(half.segments[1]);
    CHECK(hl.a.real() == doctest::Approx(0.3));
    CHECK(hl.a.imag() == doctest::Approx(4.0));
    CHECK(hl.b.imag() == doctest::Approx(-4.0));
    half.validate();

    // Without an indent the diameter is one line; with one it splits into
    // two lines around a clockwise half-circle that keeps the origin outside.
    CHECK(evans::right_half_disc(5.0).segments.size() == 2);
    const Contour dent = evans::right_half_disc(5.0, 0.5);
    REQUIRE(dent.segments.size() == 4);
    const Arc& da = std::get<Arc>(dent.segments[2]);
    CHECK(da.radius == doctest::Approx(0.5));
    CHECK(da.th0 == doctest::Approx(kPi / 2));
    CHECK(da.th1 == doctest::Approx(-kPi / 2));
    dent.validate();

    const Complex ra(-1.0, -1.0), rb(2.0, 3.0);
    const Contour rect = evans::rectangle(ra, rb);
    REQUIRE(rect.segments.size() == 4);
    const Line& bottom = std::get<Line>(rect.segments[0]);
    CHECK(bottom.a == Complex(-1.0, -1.0));
    CHECK(bottom.b == Complex(2.0, -1.0));
    rect.validate();
    // Corner order does not matter.
    evans::rectangle(rb, ra).validate();

    // Parametrization runs a to b on lines and th0 to th1 on arcs.
    const Line probe{Complex(1.0, 0.0), Complex(3.0, 2.0)};
    const Complex mid = evans::segment_point(probe, 0.5);
    CHECK(mid.real() == doctest::Approx(2.0));
    CHECK(mid.imag() == doctest::Approx(1.0));
    const Arc arc{Complex(0.0, 0.0), 2.0, 0.0, kPi};
    const Complex top = evans::segment_point(arc, 0.5);
    CHECK(std::abs(top.real()) < 1e-12);
    CHECK(top.imag() == doctest::Approx(2.0));
}

TEST_CASE("contours: validation rejects degenerate or non-closing paths") {
    const Complex origin(0.0, 0.0);
    CHECK_THROWS_AS(evans::circle(origin, -1.0), ContourError);
    CHECK_THROWS_AS(evans::circle(origin, 0.0), ContourError);
    CHECK_THROWS_AS(evans::right_half_annulus(5.0, 4.0), ContourError);
    CHECK_THROWS_AS(evans::right_half_annulus(0.0, 1.0), ContourError);
    CHECK_THROWS_AS(evans::shifted_half_disc(0.0, 0.3), ContourError);
    CHECK_THROWS_AS(evans::right_half_disc(5.0, 5.0), ContourError);
    CHECK_THROWS_AS(evans::right_half_disc(5.0, -0.1), ContourError);
    const Complex p(1.0, 1.0);
    const Complex q(1.0, 5.0);
    CHECK_THROWS_AS(evans::rectangle(p, q), ContourError);  // zero width
    CHECK_THROWS_AS(evans::rectangle(p, p), ContourError);

    Contour gap;
    gap.segments.push_back(Line{Complex(0.0, 0.0), Complex(1.0, 0.0)});
    gap.segments.push_back(Line{Complex(2.0, 0.0), Complex(0.0, 0.0)});
    CHECK_THROWS_AS(gap.validate(), ContourError);
    CHECK_THROWS_AS(Contour{}.validate(), ContourError);

    // An open single segment fails closure against itself.
    Contour open_line;
    open_line.segments.push_back(Line{Complex(0.0, 0.0), Complex(1.0, 0.0)});
    CHECK_THROWS_AS(open_line.validate(), ContourError);
}

TEST_CASE("contours: reversal flips orientation and stays closed") {
    const Contour dent = evans::right_half_disc(5.0, 0.5);
    const Contour rev = dent.reversed();
    REQUIRE(rev.segments.size() == dent.segments.size());
    rev.validate();
    // First reversed segment is the last original one, traversed backwards.
    const Arc& first = std::get<Arc>(rev.segments.back());
    const Arc& orig = std::get<Arc>(dent.segments.front());
    CHECK(first.th0 == doctest::Approx(orig.th1));
    CHECK(first.th1 == doctest::Approx(orig.th0));
    const Line& l = std::get<Line>(rev.segments[0]);
    const Line& lo = std::get<Line>(dent.segments.back());
    CHECK(l.a == lo.b);
    CHECK(l.b == lo.a);
}

TEST_CASE("winding: counts zeros of holomorphic samples with multiplicity") {
    const Complex z1(0.5, 0.5);
    const Contour unit = evans::circle(Complex(0.0, 0.0), 1.0);

    const auto single = evans::winding(holomorphic([&](Complex l) { return l - z1; }), unit);
    CHECK(single.winding == 1);
    CHECK(std::abs(single.total_arg - 2.0 * kPi) < 0.05 * 2.0 * kPi);
    CHECK(single.pole_events.empty());

    // Samples arrive in contour order with tame argument steps.
    for (std::size_t i = 0; i + 1 < single.samples.size(); ++i) {
        const auto& a = single.samples[i];
        const auto& b = single.samples[i + 1];
        CHECK((a.seg < b.seg || (a.seg == b.seg && a.t < b.t)));
        CHECK(std::abs(b.arg_cum - a.arg_cum) <= kPi / 3 + 1e-9);
    }

    const auto dbl =
        evans::winding(holomorphic([&](Complex l) { return (l - z1) * (l - z1); }), unit);
    CHECK(dbl.winding == 2);

    const Complex z2(-0.3, 0.2);
    const Complex zout(2.0, 0.0);
    auto two_in = holomorphic([&](Complex l) { return (l - z1) * (l - z2); });
    auto one_in = holomorphic([&](Complex l) { return (l - z1) * (l - zout); });
    auto none_in = holomorphic([&](Complex l) { return (l - zout) * (l - zout) + 1.0; });
    CHECK(evans::winding(two_in, unit).winding == 2);
    CHECK(evans::winding(one_in, unit).winding == 1);
    CHECK(evans::winding(none_in, unit).winding == 0);

    // Orientation reversal negates the count.
    const auto back = evans::winding(two_in, unit.reversed());
    CHECK(back.winding == -2);
    CHECK(std::abs(back.total_arg + 4.0 * kPi) < 0.05 * 2.0 * kPi);
}

TEST_CASE("winding: splitting a contour adds the pieces' counts") {
    const Complex z1(2.0, 0.0);
    const Complex z2(0.5, 5.0);
    auto f = holomorphic([&](Complex l) { return (l - z1) * (l - z2); });
    const int whole = evans::winding(f, evans::right_half_annulus(1.0, 10.0)).winding;
    const int lower = evans::winding(f, evans::right_half_annulus(1.0, 4.0)).winding;
    const int upper = evans::winding(f, evans::right_half_annulus(4.0, 10.0)).winding;
    CHECK(lower == 1);
    CHECK(upper == 1);
    CHECK(whole == lower + upper);
}

TEST_CASE("winding: tighter refinement thresholds do not change the count") {
    const Complex z1(2.0, 0.0);
    const Complex z2(0.5, 5.0);
    auto f = holomorphic([&](Complex l) { return (l - z1) * (l - z2); });
    const Contour ann = evans::right_half_annulus(1.0, 10.0);

    evans::WindingOptions coarse;
    evans::WindingOptions fine;
    fine.theta_max = kPi / 6;
    evans::WindingOptions sparse;
    sparse.samples_per_segment = 16;

    const auto a = evans::winding(f, ann, coarse);
    const auto b = evans::winding(f, ann, fine);
    const auto c = evans::winding(f, ann, sparse);
    CHECK(a.winding == 2);
    CHECK(b.winding == 2);
    CHECK(c.winding == 2);
    CHECK(b.samples.size() >= a.samples.size());

    for (std::size_t i = 0; i + 1 < b.samples.size(); ++i)
        CHECK(std::abs(b.samples[i + 1].arg_cum - b.samples[i].arg_cum) <= kPi / 6 + 1e-9);
}

TEST_CASE("winding: radial line segments get geometric initial spacing") {
    auto flat = holomorphic([](Complex) { return Complex(1.0, 0.0); });
    const auto rep = evans::winding(flat, evans::right_half_annulus(1.0, 1e3));
    CHECK(rep.winding == 0);
    CHECK(rep.refinements == 0);
    CHECK(rep.samples.size() == 4 * 64);

    // Moduli along the imaginary-axis descent form a geometric progression.
    std::vector<double> mags;
    for (const auto& s : rep.samples)
        if (s.seg == 1) mags.push_back(std::abs(s.lambda));
    REQUIRE(mags.size() == 64);
    const double expected = std::pow(1.0 / 1e3, 1.0 / 64.0);
    for (std::size_t i = 0; i + 1 < mags.size(); ++i)
        CHECK(mags[i + 1] / mags[i] == doctest::Approx(expected).epsilon(1e-9));

    // The arcs stay uniform in angle.
    std::vector<double> ts;
    for (const auto& s : rep.samples)
        if (s.seg == 0) ts.push_back(s.t);
    REQUIRE(ts.size() == 64);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts[i] == doctest::Approx(i / 64.0));
}

TEST_CASE("winding: a zero on the contour is refused") {
    // The sample at the half-way angle lands on the zero up to rounding,
    // collapsing |E| far below the median.
    auto f = holomorphic([](Complex l) { return l; });
    CHECK_THROWS_AS(evans::winding(f, evans::circle(Complex(1.0, 0.0), 1.0)),
                    ZeroOnContourError);
}

TEST_CASE("winding: refinement exhausts near an off-contour singularity") {
    // Real positive samples whose modulus varies too fast for any bisection
    // budget near the closest approach: resolution would need spacing of
    // order the 1e-9 standoff, far beyond max_depth halvings.
    const Complex spike(1.0 + 1e-9, 0.0);
    auto f = [&](Complex l) {
        FakeSample s;
        s.E = Complex(1.0 / std::abs(l - spike), 0.0);
        return s;
    };
    CHECK_THROWS_AS(evans::winding(f, evans::circle(Complex(0.0, 0.0), 1.0)),
                    RefinementError);
}

TEST_CASE("winding: samples near flagged branch points are rejected") {
    auto near = [](Complex) {
        FakeSample s;
        s.E = Complex(1.0, 0.0);
        s.branch_distance = 5e-4;
        return s;
    };
    CHECK_THROWS_AS(evans::winding(near, evans::circle(Complex(0.0, 0.0), 1.0)),
                    BranchPointError);

    // Outside the rejection radius the run completes.
    auto far = [](Complex) {
        FakeSample s;
        s.E = Complex(1.0, 0.0);
        s.branch_distance = 2e-3;
        return s;
    };
    CHECK(evans::winding(far, evans::circle(Complex(0.0, 0.0), 1.0)).winding == 0);
}

TEST_CASE("winding: non-finite samples surface as model errors") {
    auto blow = [](Complex) {
        FakeSample s;
        s.E = Complex(std::numeric_limits<double>::infinity(), 0.0);
        return s;
    };
    CHECK_THROWS_AS(evans::winding(blow, evans::circle(Complex(0.0, 0.0), 1.0)), ModelError);
}

TEST_CASE("winding: chart residency transitions become pole events") {
    // Zero-free samples whose tracked line hops charts across the real axis:
    // exactly two transitions on a circle, each reported with a warning.
    auto hop = [](Complex l) {
        FakeSample s;
        s.E = std::exp(l / 3.0);
        s.chart_u = l.imag() > 0.0 ? 1 : 0;
        return s;
    };
    const auto rep = evans::winding(hop, evans::circle(Complex(0.0, 0.0), 2.0));
    CHECK(rep.winding == 0);
    REQUIRE(rep.pole_events.size() == 2);
    CHECK(std::abs(rep.pole_events[0] - Complex(2.0, 0.0)) < 0.3);
    CHECK(std::abs(rep.pole_events[1] + Complex(2.0, 0.0)) < 0.3);
    CHECK(has_warning(rep.warnings, "chart residency"));
}

TEST_CASE("eigenvalue_report: an interior residency island raises the pole estimate") {
    // One zero and one pole inside: net winding zero, but the island of
    // altered residency around the pole restores the zero count.
    const Complex zero(0.5, 0.0);
    const Complex pole(-0.5, 0.0);
    auto f = [&](Complex l) {
        FakeSample s;
        s.E = (l - zero) / (l - pole);
        s.chart_u = std::abs(l - pole) > 0.35 ? 0 : 1;
        s.pole = std::abs(l - pole) <= 0.1;
        return s;
    };
    const auto rep = evans::eigenvalue_report(f, evans::circle(Complex(0.0, 0.0), 2.0));
    CHECK(rep.winding == 0);
    CHECK(rep.pole_estimate == 1);
    CHECK(rep.zero_count == 1);
    CHECK(rep.poles_present);
    CHECK(has_warning(rep.detail.warnings, "pole estimate"));

    // Pole-free samples leave the estimate at zero.
    auto clean = holomorphic([&](Complex l) { return l - zero; });
    const auto rep2 = evans::eigenvalue_report(clean, evans::circle(Complex(0.0, 0.0), 2.0));
    CHECK(rep2.winding == 1);
    CHECK(rep2.pole_estimate == 0);
    CHECK(rep2.zero_count == 1);
    CHECK(!rep2.poles_present);
}

TEST_CASE("eigenvalue_report: a uniform off-canonical background is not a pole") {
    // Launch normalization can park both tracked objects in reciprocal
    // charts across the whole region; with no residency *change* there is
    // nothing to count.
    auto f = [](Complex l) {
        FakeSample s;
        s.E = l - Complex(0.5, 0.0);
        s.chart_u = 2;
        s.chart_s = 2;
        s.canonical = false;
        return s;
    };
    const auto rep = evans::eigenvalue_report(f, evans::circle(Complex(0.0, 0.0), 2.0));
    CHECK(rep.winding == 1);
    CHECK(rep.pole_estimate == 0);
    CHECK(rep.zero_count == 1);
    CHECK(!rep.poles_present);
    CHECK(rep.detail.pole_events.empty());
}

TEST_CASE("winding on model evaluators: small circle about the origin") {
    // The chemotaxis evaluator winds twice around zero on the small origin
    // circle: a double root sits at the origin itself.
    ks::EvansOptions opts;
    opts.allow_restricted = true;
    const ks::Evans ev(ks::Params{}, opts);
    const auto rep = evans::winding([&](Complex l) { return ev(l); },
                                    evans::circle(Complex(0.0, 0.0), 0.01));
    CHECK(rep.winding == 2);
    CHECK(std::abs(rep.total_arg - 4.0 * kPi) < 0.3);
    for (std::size_t i = 0; i + 1 < rep.samples.size(); ++i)
        CHECK(std::abs(rep.samples[i + 1].arg_cum - rep.samples[i].arg_cum) <= kPi / 3 + 1e-9);
}

TEST_CASE("winding on model evaluators: wide right-half-plane sweeps are zero-free") {
    ks::EvansOptions opts;
    opts.allow_restricted = true;
    const ks::Evans ev(ks::Params{}, opts);

    const auto ann = evans::winding([&](Complex l) { return ev(l); },
                                    evans::right_half_annulus(4.0, 1e7));
    CHECK(ann.winding == 0);

    const auto half = evans::winding([&](Complex l) { return ev(l); },
                                     evans::shifted_half_disc(4.0, 0.3));
    CHECK(half.winding == 0);
}

TEST_CASE("eigenvalue_report on the front evaluator: large half disc is clean") {
    fkpp::Params p;
    p.c = 2.4;
    const fkpp::Evans ev(fkpp::shoot_wave(p));
    const auto rep = evans::eigenvalue_report([&](Complex l) { return ev(l); },
                                              evans::right_half_disc(1e4, 0.5));
    CHECK(rep.winding == 0);
    CHECK(rep.pole_estimate == 0);
    CHECK(rep.zero_count == 0);
    CHECK(!rep.poles_present);
}
