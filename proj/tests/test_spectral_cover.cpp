#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "spectral_forge/modifications.hpp"
#include "spectral_forge/spectral_cover.hpp"

using namespace spectral_forge;

namespace {

QPoly qpoly(std::initializer_list<long> c) {
    std::vector<Rational> v;
    for (long x : c) v.emplace_back(x);
    return QPoly(v);
}

// w^2 = b, eta (2 + b/2 + w) / (2 + b/2 - w).
struct PushforwardCase {
    SurfaceSpec s{TateCurve(2.0), 1};
    CoverPtr cover = make_cover(qpoly({0, 1}));
    Complex eta{1.1, 0.3};
    BisectionMap F = BisectionMap::invariant(eta, CPoly{2.0, 0.5}, CPoly{1.0});
    FamilySpec e = pushforward_family(s, cover, F, eta, 1);
};

bool h1_positive_oracle(Complex fibre_factor, const TatePoint& s, Complex tau) {
    // h^1(L_f (x) L_s) = h^0 of the same degree-0 bundle.
    return oracle::laurent_h0(0, fibre_factor * s.value(), tau) > 0;
}

}  // namespace

TEST_CASE("discriminant and the n invariant") {
    CHECK(discriminant({0, 3}) == Rational(3, 2));
    CHECK(discriminant({2, 0}) == 0);
    CHECK(discriminant({0, 4}) == 2);
    CHECK(n_invariant({0, 5}) == 5);
    try {
        n_invariant({0, -1});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_family);
    }
}

TEST_CASE("split family cover matches an independent h1 scan") {
    SurfaceSpec s(TateCurve(Complex{1.5, 0.5}), 2);
    auto a = LineBundleOnX::constant(s, Complex{0.7, 0.2});
    auto b = LineBundleOnX::constant(s, Complex{1.2, -0.4});
    FamilySpec e = split_family(s, a, b);
    auto samples = default_samples(e, 20);
    SpectralCover c = cover_from_family(e, samples);
    CHECK(c.verticals.empty());
    CHECK(c.t_degree() == 0);
    for (const auto& x : samples) {
        auto p = c.at(x);
        CHECK(h1_positive_oracle(a.factor, p.first, s.curve.tau()) != h1_positive_oracle(b.factor, p.first, s.curve.tau()));
        CHECK(h1_positive_oracle(b.factor, p.second, s.curve.tau()));
    }
    CHECK(check_invariance(c, e.determinant, samples));
}

TEST_CASE("pushforward family cover") {
    PushforwardCase k;
    auto samples = default_samples(k.e, 20);
    REQUIRE(std::find(samples.begin(), samples.end(), BasePoint::real(0)) != samples.end());
    SpectralCover c = cover_from_family(k.e, samples);
    CHECK(c.t_degree() == 1);
    for (const auto& x : samples) {
        if (x == BasePoint::real(0)) continue;
        Complex b = x.value(), w = std::sqrt(b);
        auto p = c.at(x);
        Complex f0 = k.eta * (2.0 + 0.5 * b + w) / (2.0 + 0.5 * b - w);
        Complex f1 = k.eta * (2.0 + 0.5 * b - w) / (2.0 + 0.5 * b + w);
        CHECK(h1_positive_oracle(f0, p.first, 2.0));
        CHECK(h1_positive_oracle(f1, p.second, 2.0));
    }
    // The branch point carries the Atiyah class.
    auto at0 = fiber_class_at(k.e, BasePoint::real(0));
    CHECK(std::holds_alternative<AtiyahClass>(at0));
    CHECK(check_invariance(c, k.e.determinant, samples));
}

TEST_CASE("cover of a modified family carries the verticals") {
    SurfaceSpec s(TateCurve(2.0), 1);
    FamilySpec e = split_family(s, LineBundleOnX::constant(s, 0.6), LineBundleOnX::constant(s, Complex{0.9, 0.9}));
    const BasePoint at = BasePoint::real(Rational(1, 2));
    e = push_jump(e, at, 1);
    e = push_jump(e, at, 2);
    auto c = cover_from_family(e, default_samples(e, 16));
    REQUIRE(c.verticals.size() == 1);
    CHECK(c.verticals[0].multiplicity == 3);
    CHECK(n_invariant(e.chern) == 3);
    FamilySpec bad = e;
    bad.chern.c2 = 4;
    try {
        cover_from_family(bad, default_samples(e, 16));
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::inconsistent_family);
    }
}

TEST_CASE("invariance detects a perturbed bisection") {
    PushforwardCase k;
    auto samples = default_samples(k.e, 24);
    SpectralCover c = cover_from_family(k.e, samples);
    CHECK(invariance_defect(c, k.e.determinant, samples) < 1e-12);
    SpectralCover bent = c;
    auto& h = std::get<HyperBisection>(bent.bisection);
    h.A = h.A.scaled(1.0 + 1e-3);
    CHECK_FALSE(check_invariance(bent, k.e.determinant, samples));
    CHECK(invariance_defect(bent, k.e.determinant, samples) > 1e-4);
}

TEST_CASE("graph in the ruled surface") {
    PushforwardCase k;
    auto samples = default_samples(k.e, 12);
    SpectralCover c = cover_from_family(k.e, samples);
    RuledGraph g = graph_in_ruled_surface(c, k.e.determinant, k.s, samples);
    CHECK(g.meets_fixed_locus(BasePoint::real(0)));
    CHECK_FALSE(g.meets_fixed_locus(samples.front()));
    // The section is a single point of F_delta: both orderings agree.
    auto sec = g.section(samples.front());
    auto p = c.at(samples.front());
    CHECK(sec == ordered_pair(p.first, p.second));

    SpectralCover bent = c;
    std::get<HyperBisection>(bent.bisection).A = std::get<HyperBisection>(c.bisection).A.scaled(1.01);
    try {
        graph_in_ruled_surface(bent, k.e.determinant, k.s, samples);
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::invariance_failure);
    }
}

TEST_CASE("regular constructor reproduces the cover") {
    for (Complex tau : {Complex{2.0, 0.0}, Complex{1.5, 0.5}}) {
        SurfaceSpec s(TateCurve(tau), 1);
        CoverPtr cover = make_cover(qpoly({0, 1}));
        Complex eta{0.9, -0.2};
        FamilySpec push = pushforward_family(s, cover, BisectionMap::invariant(eta, CPoly{3.0, 1.0}, CPoly{1.0}), eta, 1);
        auto samples = default_samples(push, 50);
        SpectralCover S = cover_from_family(push, samples);
        FamilySpec e = build_regular_family(S, push.determinant, s, samples);
        REQUIRE(std::holds_alternative<ExtensionPresentation>(e.presentation));
        SpectralCover back = cover_from_family(e, samples, 1e-8);
        for (const auto& x : samples) CHECK(pair_distance(back.at(x), S.at(x)) < 1e-9);
        CHECK(std::holds_alternative<AtiyahClass>(fiber_class_at(e, BasePoint::real(0))));
        CHECK(e.determinant.same_as(push.determinant, s));

        // Each fibre contains the line bundle its spectral point predicts.
        const auto& x = std::get<ExtensionPresentation>(e.presentation);
        for (std::size_t i = 0; i < samples.size(); i += 5) {
            if (samples[i] == BasePoint::real(0)) continue;
            ExtensionData d = extension_data(x, samples[i].value());
            auto p = fiber_class_at(e, samples[i]);
            auto pair = std::get<SpectralPair>(spectral_points(p));
            for (const TatePoint& sp : {pair.first, pair.second})
                CHECK(oracle::cech_obstruction(tau, x.lambda_factor, d.p, d.q, 1.0 / (sp.value() * x.eta)) < 1e-7);
        }
    }
}

TEST_CASE("regular constructor with two sections and error cases") {
    SurfaceSpec s(TateCurve(2.0), 1);
    auto delta = LineBundleOnX::constant(s, Complex{0.5, 0.5});
    TatePoint a = canonical_rep(Complex{1.3, 0.1}, s.curve);
    TatePoint b = delta_point(delta, s) * a.inverse();
    SpectralCover S{s.curve, {}, SectionPair{a, b}};
    auto samples = circle_samples(8, {});
    FamilySpec e = build_regular_family(S, delta, s, samples);
    auto back = cover_from_family(e, samples);
    for (const auto& x : samples) CHECK(pair_distance(back.at(x), S.at(x)) < 1e-9);

    SpectralCover broken{s.curve, {}, SectionPair{a, a}};
    try {
        build_regular_family(broken, delta, s, samples);
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::invariance_failure);
    }
    SpectralCover vert{s.curve, {{BasePoint::real(1), 1}}, SectionPair{a, b}};
    try {
        build_regular_family(vert, delta, s, samples);
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::unsupported);
    }
}
