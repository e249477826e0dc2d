#pragma once

// Elementary modifications, allowable modifications and jumping sequences.

#include <numeric>
#include <vector>

#include "spectral_forge/family.hpp"

namespace spectral_forge {

struct JumpRecord {
    BasePoint at;
    int height = 0;
    int multiplicity = 0;
    int length = 0;
    std::vector<int> sequence;
    int cover_multiplicity = 1;  // m_0 when the jump sits on a multiple fibre
};

// det -> det (x) O(-T_0); T_0 is the reduced fibre over `at`.
inline LineBundleOnX twist_by_minus_fibre(const LineBundleOnX& det, const BasePoint& at, const SurfaceSpec& s) {
    LineBundleOnX d = det;
    if (auto i = s.multiple_fibre_index(at)) d.fibre_parts[*i] -= 1;
    else d.base_degree -= 1;
    return d.normalized(s);
}

inline FamilySpec append_step(const FamilySpec& e, const ModificationStep& step) {
    FamilySpec out = e;
    out.modifications.push_back(step);
    replay_journal(out);  // validates the step against the fibre state
    out.determinant = twist_by_minus_fibre(e.determinant, step.at, e.surface);
    out.chern.c1_fibre_multiple = out.determinant.base_degree;
    out.chern.c2 += step.degree;
    return out;
}

inline FamilySpec elem_mod(const FamilySpec& e, const ModificationStep& step) {
    if (step.kind != StepKind::elementary) fail(ErrorKind::domain, "elem_mod takes an elementary step");
    return append_step(e, step);
}

inline std::optional<FibreState> fibre_state(const FamilySpec& e, const BasePoint& at) {
    auto states = replay_journal(e);
    auto it = states.find(at);
    if (it == states.end()) return std::nullopt;
    return it->second;
}

// The canonical modification along E|_T -> lambda at a jump of height h:
// deg N = -h, so c_2 drops by h.
inline FamilySpec allowable_mod(const FamilySpec& e, const BasePoint& at) {
    auto st = fibre_state(e, at);
    if (!st || st->stack.empty()) fail(ErrorKind::domain, "no jump at " + at.str());
    const JumpLevel& top = st->stack.back();
    ModificationStep step{at, -top.height, canonical_rep(top.low.factor, family_curve(e)), 1.0, StepKind::allowable};
    return append_step(e, step);
}

inline JumpRecord jumping_sequence(const FamilySpec& e, const BasePoint& at) {
    auto st = fibre_state(e, at);
    if (!st || st->stack.empty()) fail(ErrorKind::domain, "no jump at " + at.str());
    JumpRecord rec;
    rec.at = at;
    if (auto i = e.surface.multiple_fibre_index(at)) rec.cover_multiplicity = e.surface.multiple_fibres[*i].multiplicity;
    const int guard = st->declared_degree;
    FamilySpec cur = e;
    while (true) {
        Rank2FiberClass c = fiber_class_at(cur, at);
        auto* u = std::get_if<UnstableClass>(&c);
        if (!u) break;
        rec.sequence.push_back(u->height);
        if (static_cast<int>(rec.sequence.size()) > guard) fail(ErrorKind::internal, "jumping sequence does not terminate");
        cur = allowable_mod(cur, at);
    }
    rec.height = rec.sequence.front();
    rec.length = static_cast<int>(rec.sequence.size());
    rec.multiplicity = 0;
    for (const auto& v : journal_verticals(e))
        if (v.at == at) rec.multiplicity = v.multiplicity;
    return rec;
}

inline std::vector<JumpRecord> all_jumps(const FamilySpec& e) {
    std::vector<JumpRecord> out;
    for (const auto& v : journal_verticals(e)) out.push_back(jumping_sequence(e, v.at));
    return out;
}

// Whether some N of degree r admits a surjection E|_T -> N.
inline bool can_add_jump(const FamilySpec& e, const BasePoint& at, int r) {
    if (r < 1) return false;
    auto st = fibre_state(e, at);
    if (st && !st->stack.empty()) return r >= st->stack.back().height;
    Rank2FiberClass c = st ? st->semistable : presentation_class_at(e, at);
    if (r == 1 && std::holds_alternative<SplitClass>(c) && !is_regular(c)) return false;
    return true;
}

// A degree-r target N admitting a surjection, when one exists.
inline TatePoint surjective_target(const FamilySpec& e, const BasePoint& at, int r) {
    const TateCurve& curve = family_curve(e);
    auto st = fibre_state(e, at);
    if (st && !st->stack.empty() && r == st->stack.back().height) {
        TateLineBundle q = lb_tensor(lb_dual(st->stack.back().low), determinant_on_fibre(e));
        return canonical_rep(q.factor, curve);
    }
    return canonical_rep(1.0, curve);
}

inline FamilySpec push_jump(const FamilySpec& e, const BasePoint& at, int r) {
    if (!can_add_jump(e, at, r)) fail(ErrorKind::no_surjection, "no degree-" + std::to_string(r) + " surjection at " + at.str());
    return elem_mod(e, {at, r, surjective_target(e, at, r), 1.0, StepKind::elementary});
}

inline FamilySpec attach_generic_jumps(const FamilySpec& e0, const std::vector<std::pair<BasePoint, int>>& plan) {
    FamilySpec e = e0;
    for (const auto& [at, mult] : plan) {
        if (mult < 1) fail(ErrorKind::domain, "jump multiplicity must be positive");
        for (int k = 0; k < mult; ++k) e = push_jump(e, at, 1);
    }
    return e;
}

inline FamilySpec assign_jumping_sequence(const FamilySpec& e0, const BasePoint& at, const std::vector<int>& seq) {
    if (seq.empty()) fail(ErrorKind::domain, "empty jumping sequence");
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] < 1) fail(ErrorKind::domain, "jumping sequence entries must be positive");
        if (i > 0 && seq[i] > seq[i - 1]) fail(ErrorKind::domain, "jumping sequence must be non-increasing");
    }
    FamilySpec e = e0;
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) e = push_jump(e, at, *it);
    return e;
}

}  // namespace spectral_forge
