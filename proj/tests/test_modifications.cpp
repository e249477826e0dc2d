#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "spectral_forge/modifications.hpp"
#include "spectral_forge/spectral_cover.hpp"

using namespace spectral_forge;

namespace {

SurfaceSpec surface() { return SurfaceSpec(TateCurve(Complex{1.5, 0.5}), 1, {{BasePoint::real(3), 2}}); }

FamilySpec regular(const SurfaceSpec& s) {
    return split_family(s, LineBundleOnX::constant(s, Complex{0.8, 0.1}), LineBundleOnX::constant(s, Complex{1.1, 0.6}));
}

const BasePoint x0 = BasePoint::real(Rational(1, 3));

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::internal;
}

}  // namespace

TEST_CASE("elementary modification updates the invariants") {
    SurfaceSpec s = surface();
    FamilySpec e = regular(s);
    FamilySpec m = push_jump(e, x0, 1);
    CHECK(m.chern.c2 == e.chern.c2 + 1);
    CHECK(m.determinant.base_degree == e.determinant.base_degree - 1);
    auto v = journal_verticals(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].at == x0);
    CHECK(v[0].multiplicity == 1);
    auto c = fiber_class_at(m, x0);
    REQUIRE(std::holds_alternative<UnstableClass>(c));
    CHECK(std::get<UnstableClass>(c).height == 1);
    // Away from x0 nothing changes.
    CHECK(same_class(fiber_class_at(m, BasePoint::real(2)), fiber_class_at(e, BasePoint::real(2))));

    // At the multiple fibre the twist lands in the fibre part.
    FamilySpec mm = push_jump(e, BasePoint::real(3), 1);
    CHECK(mm.determinant.base_degree == e.determinant.base_degree - 1);
    CHECK(mm.determinant.fibre_parts[0] == 1);
}

TEST_CASE("no degree-one surjection from lambda0 plus lambda0") {
    SurfaceSpec s = surface();
    FamilySpec e = split_family(s, LineBundleOnX::constant(s, 0.7), LineBundleOnX::constant(s, 0.7));
    CHECK_FALSE(can_add_jump(e, x0, 1));
    CHECK(can_add_jump(e, x0, 2));
    CHECK(kind_of([&] { push_jump(e, x0, 1); }) == ErrorKind::no_surjection);
    CHECK(kind_of([&] { elem_mod(e, {x0, 1, canonical_rep(1.0, s.curve), 1.0, StepKind::elementary}); }) ==
          ErrorKind::no_surjection);
    CHECK(kind_of([&] { attach_generic_jumps(e, {{x0, 1}}); }) == ErrorKind::no_surjection);
}

TEST_CASE("allowable modifications and jumping sequences") {
    SurfaceSpec s = surface();
    FamilySpec e = regular(s);

    FamilySpec one = push_jump(e, x0, 1);
    auto r1 = jumping_sequence(one, x0);
    CHECK(r1.sequence == std::vector<int>{1});
    CHECK(r1.multiplicity == 1);
    CHECK(r1.length == 1);
    CHECK(is_jump_free(allowable_mod(one, x0)));

    FamilySpec two_one = push_jump(one, x0, 2);
    CHECK(jumping_sequence(two_one, x0).sequence == std::vector<int>{2, 1});
    FamilySpec popped = allowable_mod(two_one, x0);
    CHECK(jumping_sequence(popped, x0).sequence == std::vector<int>{1});
    CHECK(popped.chern.c2 == one.chern.c2);

    FamilySpec big = assign_jumping_sequence(e, x0, {3, 2, 2});
    auto r = jumping_sequence(big, x0);
    CHECK(r.sequence == std::vector<int>{3, 2, 2});
    CHECK(r.multiplicity == 7);
    CHECK(r.height == 3);
    CHECK(r.length == 3);
    CHECK(big.chern.c2 == 7);

    CHECK(kind_of([&] { allowable_mod(e, x0); }) == ErrorKind::domain);
    CHECK(kind_of([&] { jumping_sequence(e, x0); }) == ErrorKind::domain);
}

TEST_CASE("adding jumps on an existing jump") {
    SurfaceSpec s = surface();
    FamilySpec e = push_jump(regular(s), x0, 2);
    CHECK_FALSE(can_add_jump(e, x0, 1));
    CHECK(can_add_jump(e, x0, 2));
    CHECK(can_add_jump(e, x0, 5));
    CHECK(kind_of([&] { push_jump(e, x0, 1); }) == ErrorKind::no_surjection);
    // At r = h only the destabilising quotient is a target.
    TatePoint wrong = canonical_rep(Complex{0.3, 0.9}, s.curve);
    CHECK(kind_of([&] { elem_mod(e, {x0, 2, wrong, 1.0, StepKind::elementary}); }) == ErrorKind::no_surjection);
    CHECK_FALSE(can_add_jump(e, x0, 0));
}

TEST_CASE("generic jumps") {
    SurfaceSpec s = surface();
    FamilySpec e0 = regular(s);
    const BasePoint x1 = BasePoint::real(-2);
    FamilySpec e = attach_generic_jumps(e0, {{x0, 2}, {x1, 1}});
    auto jumps = all_jumps(e);
    REQUIRE(jumps.size() == 2);
    for (const auto& j : jumps)
        for (int h : j.sequence) CHECK(h == 1);
    CHECK(jumping_sequence(e, x0).sequence == std::vector<int>{1, 1});
    CHECK(jumping_sequence(e, x0).multiplicity == 2);
    auto cover = cover_from_family(e, default_samples(e, 12));
    CHECK(cover.vertical_total() == 3);
    FamilySpec same = attach_generic_jumps(e0, {});
    CHECK(same.modifications.empty());
    CHECK(same.chern == e0.chern);
}

TEST_CASE("assigned sequences") {
    SurfaceSpec s = surface();
    FamilySpec e0 = regular(s);
    CHECK(jumping_sequence(assign_jumping_sequence(e0, x0, {2, 1}), x0).sequence == std::vector<int>{2, 1});
    FamilySpec three = assign_jumping_sequence(e0, x0, {3});
    CHECK(three.modifications.size() == 1);
    CHECK(jumping_sequence(three, x0).sequence == std::vector<int>{3});
    CHECK(kind_of([&] { assign_jumping_sequence(e0, x0, {1, 2}); }) == ErrorKind::domain);
    CHECK(kind_of([&] { assign_jumping_sequence(e0, x0, {}); }) == ErrorKind::domain);
    // Jumps on the multiple fibre record the cover multiplicity.
    auto r = jumping_sequence(assign_jumping_sequence(e0, BasePoint::real(3), {2, 2}), BasePoint::real(3));
    CHECK(r.cover_multiplicity == 2);
    CHECK(r.multiplicity == 4);
}

TEST_CASE("random journals respect the jump calculus") {
    SurfaceSpec s = surface();
    const std::vector<BasePoint> sites{x0, BasePoint::real(-1), BasePoint::real(3)};
    std::mt19937_64 rng(20261016);
    for (int trial = 0; trial < 100; ++trial) {
        FamilySpec e = regular(s);
        long degree_sum = 0;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) {
            const BasePoint& at = sites[rng() % sites.size()];
            auto st = fibre_state(e, at);
            const bool has_jump = st && !st->stack.empty();
            if (has_jump && rng() % 4 == 0) {
                int h = st->stack.back().height;
                e = allowable_mod(e, at);
                degree_sum -= h;
            } else {
                int floor = has_jump ? st->stack.back().height : 1;
                int r = floor + static_cast<int>(rng() % 3);
                FamilySpec before = e;
                e = push_jump(e, at, r);
                degree_sum += r;
                // The allowable modification undoes the push exactly.
                FamilySpec undone = allowable_mod(e, at);
                auto vb = journal_verticals(before), vu = journal_verticals(undone);
                REQUIRE(vb.size() == vu.size());
                for (std::size_t i = 0; i < vb.size(); ++i) {
                    CHECK(vb[i].at == vu[i].at);
                    CHECK(vb[i].multiplicity == vu[i].multiplicity);
                }
                for (const auto& v : vb) CHECK(jumping_sequence(before, v.at).sequence == jumping_sequence(undone, v.at).sequence);
                CHECK(undone.chern.c2 == before.chern.c2);
            }
        }
        for (const auto& j : all_jumps(e)) {
            CHECK(j.multiplicity == std::accumulate(j.sequence.begin(), j.sequence.end(), 0));
            CHECK(j.height <= j.multiplicity);
            CHECK(std::is_sorted(j.sequence.rbegin(), j.sequence.rend()));
            CHECK(j.length == static_cast<int>(j.sequence.size()));
        }
        const FamilySpec e0 = regular(s);
        CHECK(e.chern.c2 - e0.chern.c2 == degree_sum);
        LineBundleOnX expected = e0.determinant;
        for (const auto& m : e.modifications) expected = twist_by_minus_fibre(expected, m.at, s);
        CHECK(e.determinant.same_as(expected, s));
        long fibre_twists = (e0.determinant.base_degree - e.determinant.base_degree) * 2 +
                            (e0.determinant.fibre_parts[0] - e.determinant.fibre_parts[0]);
        long expected_twists = 0;
        for (const auto& m : e.modifications) expected_twists += m.at == BasePoint::real(3) ? 1 : 2;
        // Fibre twists counted in units of the reduced multiple fibre (F = 2 T).
        CHECK(fibre_twists == expected_twists);
    }
}
