#include <catch2/catch_amalgamated.hpp>

#include "spectral_forge/fourier_mukai.hpp"
#include "spectral_forge/modifications.hpp"

using namespace spectral_forge;

namespace {

QPoly qpoly(std::initializer_list<long> c) {
    std::vector<Rational> v;
    for (long x : c) v.emplace_back(x);
    return QPoly(v);
}

FamilySpec split_case(const SurfaceSpec& s) {
    return split_family(s, LineBundleOnX::constant(s, Complex{0.6, 0.3}), LineBundleOnX::constant(s, Complex{1.4, -0.2}));
}

// w^2 = x^3 - x.
FamilySpec genus_one_case(const SurfaceSpec& s) {
    Complex eta{1.05, 0.25};
    return pushforward_family(s, make_cover(qpoly({0, -1, 0, 1})),
                              BisectionMap::invariant(eta, CPoly{3.0, 0.0, 0.5}, CPoly{1.0, 0.25}), eta, 2);
}

FamilySpec extension_case(const SurfaceSpec& s) {
    Complex eta{0.8, 0.4};
    FamilySpec push = pushforward_family(s, make_cover(qpoly({1, 1})), BisectionMap::invariant(eta, CPoly{2.5, 1.0}, CPoly{1.0}), eta, 1);
    auto samples = default_samples(push, 24);
    return build_regular_family(cover_from_family(push, samples), push.determinant, s, samples);
}

}  // namespace

TEST_CASE("universal factor is the constant alpha") {
    TateCurve t(2.0);
    TatePoint a = canonical_rep(Complex{1.3, 0.4}, t);
    for (Complex z : {Complex{1.0, 0.0}, Complex{0.2, -3.0}}) CHECK(universal_factor(a, z) == a.value());
    CHECK_THROWS_AS(universal_factor(a, 0.0), Error);
}

TEST_CASE("descent twist closes the Z-action only with N") {
    SurfaceSpec s(TateCurve(Complex{1.5, 0.5}), 3);
    for (const FamilySpec& e : {split_case(s), genus_one_case(s)}) {
        const BasePoint b0 = BasePoint::real(Rational(1, 2));
        DescentTwist tw = descent_divisor(e, b0);
        CHECK(tw.d == 3);
        CHECK(tw.coefficient(2) == 6);
        CHECK(tw.coefficient(-1) == -3);
        CHECK(z_action_residual(e, tw, default_stalks()) < 1e-9);
        DescentTwist off = tw;
        off.enabled = false;
        CHECK(z_action_residual(e, off, default_stalks()) == Catch::Approx(3.0).margin(1e-9));
    }
}

TEST_CASE("descent divisor preconditions") {
    SurfaceSpec s(TateCurve(2.0), 1, {{BasePoint::real(5), 3}});
    FamilySpec e = split_case(s);
    CHECK_THROWS_AS(descent_divisor(e, BasePoint::real(5)), Error);
    FamilySpec j = push_jump(e, BasePoint::real(1), 1);
    CHECK_THROWS_AS(descent_divisor(j, BasePoint::real(1)), Error);
    CHECK_NOTHROW(descent_divisor(j, BasePoint::real(2)));
}

TEST_CASE("transform of jump-free families") {
    SurfaceSpec s(TateCurve(2.0), 2);
    FamilySpec e = genus_one_case(s);
    auto samples = default_samples(e, 50);
    TransformedSheaf t = fm_transform(e, samples);
    CHECK(t.phi0_vanishes);
    CHECK(t.support.verticals.empty());
    CHECK(t.line_data.kind == LineData::Kind::pushforward);
    CHECK(t.determinant_correction_flagged);

    FamilySpec j = push_jump(e, BasePoint::real(Rational(1, 2)), 2);
    TransformedSheaf tj = fm_transform(j, default_samples(j, 16));
    REQUIRE(tj.support.verticals.size() == 1);
    CHECK(tj.support.verticals[0].multiplicity == 2);
    CHECK_THROWS_AS(fm_inverse(tj), Error);
}

TEST_CASE("inverse after transform reproduces the family") {
    for (Complex tau : {Complex{2.0, 0.0}, Complex{1.5, 0.5}}) {
        SurfaceSpec s(TateCurve(tau), 1, {{BasePoint::real(7), 2}});
        for (const FamilySpec& e : {split_case(s), genus_one_case(s), extension_case(s)}) {
            auto samples = default_samples(e, 50);
            RoundtripReport r = roundtrip_check(e, samples);
            CHECK(r.status == RoundtripStatus::pass);
            CHECK(r.fibre_mismatches == 0);
            CHECK(r.max_spectral_distance <= 1e-9);
            CHECK(r.determinant_ok);
            CHECK(r.chern_ok);
            CHECK(r.samples >= 50);
        }
    }
}

TEST_CASE("roundtrip reports violated hypotheses") {
    SurfaceSpec s(TateCurve(2.0), 1);
    FamilySpec j = push_jump(split_case(s), BasePoint::real(1), 1);
    RoundtripReport r = roundtrip_check(j, default_samples(j, 10));
    CHECK(r.status == RoundtripStatus::hypothesis_violated);
    CHECK(std::string(to_string(r.status)) == "HYPOTHESIS_VIOLATED");
}

TEST_CASE("transform after inverse reproduces torsion sheaves") {
    SurfaceSpec s(TateCurve(Complex{1.5, 0.5}), 2, {{BasePoint::real(4), 3}});
    CoverPtr cover = make_cover(qpoly({0, -1, 0, 1}));
    DivisorClass tw = DivisorClass::point(cover, {0, 0});
    for (const FamilySpec& e : {split_case(s), genus_one_case(s), extension_case(s),
                                pushforward_family(s, cover, BisectionMap::invariant(0.9, CPoly{2.0, 1.0}, CPoly{0.5}), 0.9, 1, tw,
                                                   {{1, 2}})}) {
        auto samples = default_samples(e, 20);
        TransformedSheaf t = fm_transform(e, samples);
        TransformedSheaf again = fm_transform(fm_inverse(t), samples);
        CHECK(same_transform(t, again, samples));
    }
}
