"""Command-line front end: structure dumps, invariants, identities, checks.

Exit codes: 0 when everything passes, 2 when some verdict is INCONCLUSIVE,
1 on errors or FAIL verdicts.  With --json the output is a single document
with the fixed key set {field, modulus, factorization, rayclass, hypothesis,
verification, identities, warnings}; identical configurations produce
byte-identical bytes (fixed orderings, decimal serialization).
"""

from __future__ import annotations

import argparse
import json
import sys

import mpmath

from .abgroup import Subgroup, subgroup_lattice
from .chars import Character, all_characters, conductor
from .clgroup import class_group
from .conjecture import (
    assumption_check,
    check_subfield,
    h_set,
    make_subfield_spec,
    prime_hypotheses,
)
from .kronecker import (
    DegenerateEulerFactor,
    kronecker_rhs,
    l_partial_sum,
    level_lowering_identity,
    make_limit_context,
    stickelberger,
)
from .qfield import ResourceLimitError, factor_ideal, parse_ideal, quad_field
from .rayclass import g_p, ray_class_group
from .siegel import invariant, invariant_err_log2, invariant_spec


def _digits(prec: int) -> int:
    return max(8, int(prec * 0.30103) + 2)


def _dec(x, prec: int) -> str:
    with mpmath.workprec(prec + 16):
        return mpmath.nstr(mpmath.mpf(x), _digits(prec), strip_zeros=False)


def complex_json(z, prec: int, err_log2: int) -> dict:
    return {
        "re": _dec(z.real, prec),
        "im": _dec(z.imag, prec),
        "prec_bits": prec,
        "err_bound_log2": err_log2,
    }


def _empty_doc() -> dict:
    return {
        "field": None,
        "modulus": None,
        "factorization": None,
        "rayclass": None,
        "hypothesis": None,
        "verification": None,
        "identities": None,
        "warnings": [],
    }


def _field_json(F) -> dict:
    return {
        "d_K": F.d,
        "w_K": F.w,
        "class_number": class_group(F.d).h,
        "omega_trace": F.trace_omega,
        "omega_norm": F.norm_omega,
    }


def _factorization_json(F, I) -> list:
    return [
        {"prime": P.text(), "norm": P.norm(), "exponent": e}
        for P, e in factor_ideal(F, I)
    ]


def _emit(doc: dict, as_json: bool, text_lines: list[str]) -> None:
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            print(line)


def _parse_vector(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(p) for p in text.split(","))


def _parse_subgroups(R, selector: str):
    if selector == "all":
        return [(s, f"subgroup[{i}] order {s.order}") for i, s in enumerate(subgroup_lattice(R.group))]
    gens = [_parse_vector(v) for v in selector.split(";") if v.strip()]
    S = Subgroup.from_generators(R.group, gens)
    return [(S, f"subgroup<{selector}> order {S.order}")]


def cmd_field(args) -> int:
    F = quad_field(args.d)
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    roots = [[u.a, u.b] for u in F.roots_of_unity]
    doc["field"]["roots_of_unity"] = roots
    _emit(
        doc,
        args.json,
        [
            f"K = Q(sqrt({F.d})), discriminant {F.d}",
            f"w_K = {F.w}, class number h = {doc['field']['class_number']}",
            f"roots of unity (a + b*w): {roots}",
        ],
    )
    return 0


def cmd_factor(args) -> int:
    F = quad_field(args.d)
    I = parse_ideal(F, args.f)
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": I.text(), "norm": I.norm()}
    doc["factorization"] = _factorization_json(F, I)
    lines = [f"{I.text()} (norm {I.norm()}) ="] + [
        f"  {row['prime']}^{row['exponent']}  (norm {row['norm']})"
        for row in doc["factorization"]
    ]
    _emit(doc, args.json, lines)
    return 0


def _rayclass_json(R) -> dict:
    return {
        "order": R.order,
        "snf": list(R.group.invariants),
        "phi": R.ring.phi,
        "omega": R.ring.omega_count,
        "smallest_positive_integer": R.modulus.smallest_positive_integer(),
    }


def cmd_rayclass(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["factorization"] = _factorization_json(F, f)
    doc["rayclass"] = _rayclass_json(R)
    _emit(
        doc,
        args.json,
        [
            f"Cl({f.text()}): order {R.order}, invariants {list(R.group.invariants)}",
            f"phi(f) = {R.ring.phi}, omega(f) = {R.ring.omega_count}",
        ],
    )
    return 0


def cmd_chars(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["rayclass"] = _rayclass_json(R)
    if args.char is not None:
        chis = [Character(R.group, _parse_vector(args.char))]
    else:
        chis = list(all_characters(R.group))
    rows = []
    for chi in chis:
        fc = conductor(R, chi)
        rows.append(
            {
                "exponents": list(chi.exponents),
                "order": chi.order(),
                "conductor": fc.text(),
                "primitive": fc == f,
            }
        )
    doc["rayclass"]["characters"] = rows
    lines = [f"characters of Cl({f.text()}):"] + [
        f"  chi{r['exponents']}  order {r['order']}  conductor {r['conductor']}"
        for r in rows
    ]
    _emit(doc, args.json, lines)
    return 0


def cmd_invariant(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    C = _parse_vector(args.class_vec) if args.class_vec else R.group.identity
    prec = args.prec
    spec = invariant_spec(R, C)
    val = invariant(R, C, prec)
    err = invariant_err_log2(R, C, prec)
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["rayclass"] = _rayclass_json(R)
    doc["verification"] = {
        "class": list(C),
        "representative": spec.representative.text(),
        "N": spec.smallest_n,
        "r": [spec.r1, spec.r2],
        "value": complex_json(val, prec, err),
    }
    _emit(
        doc,
        args.json,
        [
            f"g_f(C) at C = {list(C)}, representative {spec.representative.text()}",
            f"  N = {spec.smallest_n}, (r1, r2) = ({spec.r1}, {spec.r2})",
            f"  value = {mpmath.nstr(val, _digits(min(prec, 80)))}",
        ],
    )
    return 0


def cmd_stickelberger(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    chi = Character(R.group, _parse_vector(args.char))
    prec = args.prec
    val = stickelberger(R, chi, prec)
    err = -prec + 12 + R.order.bit_length()
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["rayclass"] = _rayclass_json(R)
    doc["identities"] = {
        "stickelberger": {
            "chi": list(chi.exponents),
            "value": complex_json(val, prec, err),
        }
    }
    _emit(
        doc,
        args.json,
        [f"S_f(chi) for chi{list(chi.exponents)} = {mpmath.nstr(val, _digits(min(prec, 80)))}"],
    )
    return 0


def cmd_limitformula(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    chi = Character(R.group, _parse_vector(args.char))
    prec = args.prec
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["rayclass"] = _rayclass_json(R)
    lines = []
    ctx = make_limit_context(R, chi)
    lhs, rhs = level_lowering_identity(ctx, prec)
    with mpmath.workprec(prec + 32):
        scale = max(abs(lhs), abs(rhs), mpmath.mpf(2) ** (-prec + 40))
        level_err = float(abs(lhs - rhs) / scale)
    identities = {
        "conductor": ctx.f_chi.text(),
        "chi0": list(ctx.chi0.exponents),
        "gamma": {"num": [ctx.gamma.num.a, ctx.gamma.num.b], "den": ctx.gamma.den},
        "level_lowering": {
            "lhs": complex_json(lhs, prec, -prec + 16),
            "rhs": complex_json(rhs, prec, -prec + 16),
            "relative_error": f"{level_err:.3e}",
        },
    }
    lines.append(f"conductor f_chi = {ctx.f_chi.text()}, chi0 = {list(ctx.chi0.exponents)}")
    lines.append(f"level-lowering identity relative error: {level_err:.3e}")
    try:
        pred = kronecker_rhs(ctx, prec)
        pred2 = kronecker_rhs(make_limit_context(R, chi, gamma_index=1), prec)
        with mpmath.workprec(prec + 32):
            gamma_err = float(abs(pred - pred2) / abs(pred))
        identities["predicted_L"] = complex_json(pred, prec, -prec + 24)
        identities["gamma_independence_relative_error"] = f"{gamma_err:.3e}"
        lines.append(
            f"predicted L_(f_chi)(1, chi0) = {mpmath.nstr(pred, 16)}  "
            f"(gamma independence: {gamma_err:.3e})"
        )
        if args.norm_bound:
            val, est = l_partial_sum(ctx.R_chi, ctx.chi0, norm_bound=args.norm_bound)
            with mpmath.workprec(64):
                rel = float(abs(val - complex(pred.real, pred.imag)) / abs(pred))
            identities["partial_l_sum"] = {
                "norm_bound": args.norm_bound,
                "value_re": repr(val.real),
                "value_im": repr(val.imag),
                "empirical_error": f"{est:.3e}",
                "relative_difference": f"{rel:.3e}",
            }
            lines.append(
                f"partial L-sum to norm {args.norm_bound}: {val:.12g} "
                f"(difference {rel:.3e})"
            )
    except DegenerateEulerFactor as exc:
        identities["predicted_L"] = None
        identities["degenerate"] = "formula degenerate at this level (Euler factor is 0)"
        identities["undivided_rhs"] = complex_json(exc.undivided_rhs, prec, -prec + 24)
        doc["warnings"].append(identities["degenerate"])
        lines.append("Euler factor vanishes: formula degenerate at this level")
    doc["identities"] = identities
    _emit(doc, args.json, lines)
    return 0


def _hypothesis_json(spec) -> dict:
    hyps = prime_hypotheses(spec)
    rep = assumption_check(spec)
    return {
        "degree_L_over_K": spec.degree,
        "index_Kf_over_LHK": spec.index_f_LHK,
        "primes": [
            {
                "prime": h.prime.text(),
                "exponent": h.exponent,
                "gp_order": h.gp_order,
                "nu": h.nu,
                "i_p": h.i_p,
                "in_h_set": h.in_h_set,
                "reduction_violated": h.reduction_violated,
            }
            for h in hyps
        ],
        "h_set_size": sum(1 for h in hyps if h.in_h_set),
        "assumption_sum": str(rep.total),
        "assumption_holds": rep.holds,
        "reduction_ok": rep.reduction_ok,
        "L_not_in_HK": rep.not_contained_in_HK,
    }


def _verification_json(report, prec: int) -> dict:
    return {
        "n": report.n,
        "class": list(report.base_class),
        "unconditional": report.unconditional,
        "expected_degree": report.expected_degree,
        "distinct_count": report.distinct_count,
        "min_separation_over_error": (
            "inf"
            if report.min_separation_ratio == float("inf")
            else f"{report.min_separation_ratio:.6e}"
        ),
        "err_bound_log2": report.err_bound_log2,
        "verdict": report.verdict,
        "suggested_prec": report.suggested_prec,
        "norm_value": complex_json(report.norm_value, prec, report.err_bound_log2),
        "conjugates": [
            complex_json(v, prec, report.err_bound_log2) for v in report.conjugates
        ],
        "poly_coefficients": [list(c) for c in report.poly_coefficients],
        "poly_residuals": [f"{r:.3e}" for r in report.poly_residuals],
        "notes": report.notes,
    }


def cmd_check(args) -> int:
    F = quad_field(args.d)
    f = parse_ideal(F, args.f)
    R = ray_class_group(args.d, f)
    C = _parse_vector(args.class_vec) if args.class_vec else R.group.identity
    selector = "all" if args.sweep else (args.subgroup or "all")
    subgroups = _parse_subgroups(R, selector)
    prec = args.prec
    doc = _empty_doc()
    doc["field"] = _field_json(F)
    doc["modulus"] = {"ideal": f.text(), "norm": f.norm()}
    doc["factorization"] = _factorization_json(F, f)
    doc["rayclass"] = _rayclass_json(R)
    blocks = []
    lines = []
    worst = 0  # 0 PASS, 2 INCONCLUSIVE, 1 FAIL
    for S, label in subgroups:
        spec = make_subfield_spec(R, S)
        out = check_subfield(
            R, S, C, args.n, prec=prec, include_unconditional=args.unconditional
        )
        for line in out.log_lines:
            lines.append(f"[{label}] {line}")
        block = {
            "subgroup_order": S.order,
            "label": label,
            "vacuous": spec.is_vacuous,
            "hypothesis": None if spec.is_vacuous else _hypothesis_json(spec),
            "reduced_to": out.effective_modulus.text() if out.reduced else None,
            "log": out.log_lines,
            "runs": [_verification_json(r, prec) for r in out.reports],
        }
        blocks.append(block)
        for r in out.reports:
            lines.append(
                f"[{label}] n={r.n} [L:K]={r.expected_degree} "
                f"distinct={r.distinct_count} verdict={r.verdict}"
                + (" (unconditional)" if r.unconditional else "")
            )
            if r.verdict == "FAIL":
                worst = 1
            elif r.verdict == "INCONCLUSIVE" and worst == 0:
                worst = 2
    doc["hypothesis"] = [b["hypothesis"] for b in blocks]
    doc["verification"] = blocks
    _emit(doc, args.json, lines)
    return worst


def cmd_example_2_8(args) -> int:
    prec = args.prec
    doc = _empty_doc()
    F = quad_field(-11)
    doc["field"] = _field_json(F)
    lines = ["Example: K = Q(sqrt(-11)), H_K = K"]
    warnings = doc["warnings"]

    # part (i): f = 5 O_K; the claim that it is prime is checked, not assumed
    f5 = F.principal_ideal(5)
    fac5 = _factorization_json(F, f5)
    part_i = {"modulus": f5.text(), "factorization": fac5}
    if len(fac5) != 1 or fac5[0]["exponent"] != 1:
        msg = (
            "5*O_K is NOT a prime ideal: kronecker(-11, 5) = +1, so 5 splits "
            "into two conjugate primes of norm 5"
        )
        warnings.append(msg)
        lines.append(f"(i) {msg}")
    R5 = ray_class_group(-11, f5)
    part_i["rayclass"] = _rayclass_json(R5)
    hsizes5 = {}
    for S in subgroup_lattice(R5.group):
        spec = make_subfield_spec(R5, S)
        if spec.is_vacuous:
            continue
        hsizes5[S.order] = len(h_set(spec))
    part_i["h_set_sizes_by_subgroup_order"] = {str(k): v for k, v in sorted(hsizes5.items())}
    lines.append(f"(i) f = 5*O_K: |Cl(f)| = {R5.order}, h-set sizes {hsizes5}")

    # part (ii): f = 22 O_K
    f22 = F.principal_ideal(22)
    R22 = ray_class_group(-11, f22)
    p1 = F.principal_ideal(2)
    p2 = F.principal_ideal(F.sqrt_disc)
    g1 = g_p(F, p1, 1).order
    g2 = g_p(F, p2, 2).order
    part_ii = {
        "modulus": f22.text(),
        "factorization": _factorization_json(F, f22),
        "G_p1_order": g1,
        "G_p2_order": g2,
        "rayclass": _rayclass_json(R22),
    }
    lines.append(f"(ii) f = 22*O_K = p1 * p2^2: |G_p1| = {g1}, |G_p2| = {g2}")
    lines.append(f"(ii) [K_f : K] = {R22.order}")
    hsizes = {}
    vacuous = []
    for S in subgroup_lattice(R22.group):
        spec = make_subfield_spec(R22, S)
        if spec.is_vacuous:
            vacuous.append(S.order)
            continue
        hsizes[S.order] = len(h_set(spec))
    part_ii["h_set_sizes_by_subgroup_order"] = {str(k): v for k, v in sorted(hsizes.items())}
    part_ii["vacuous_subgroup_orders"] = vacuous
    lines.append(f"(ii) h-set sizes over proper subfields: {hsizes} (all <= 1)")
    ok = (
        g1 == 3
        and g2 == 55
        and R22.order == 165
        and all(v <= 1 for v in hsizes.values())
    )
    doc["verification"] = {"part_i": part_i, "part_ii": part_ii, "structure_ok": ok}
    lines.append(f"structure check: {'PASS' if ok else 'FAIL'}")
    _emit(doc, args.json, lines)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rayunits",
        description="Ray class groups and Siegel-unit invariants for imaginary quadratic fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_f=True):
        p.add_argument("-d", type=int, required=True, help="fundamental discriminant (< 0)")
        if needs_f:
            p.add_argument("-f", type=str, required=True, help="modulus: integer n or [a,b,c]")
        p.add_argument("--prec", type=int, default=128, help="precision in bits")
        p.add_argument("--json", action="store_true", help="emit the JSON document")

    p = sub.add_parser("field", help="field data: w_K, class number, roots of unity")
    p.add_argument("-d", type=int, required=True)
    p.add_argument("--prec", type=int, default=128)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("factor", help="prime ideal factorization of the modulus")
    common(p)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("rayclass", help="ray class group structure")
    common(p)
    p.set_defaults(func=cmd_rayclass)

    p = sub.add_parser("chars", help="characters and conductors")
    common(p)
    p.add_argument("--char", type=str, default=None, help="exponent vector, e.g. 33 or 1,2")
    p.set_defaults(func=cmd_chars)

    p = sub.add_parser("invariant", help="Siegel-Ramachandra invariant at a class")
    common(p)
    p.add_argument("--class", dest="class_vec", type=str, default=None)
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("stickelberger", help="character-weighted log sum")
    common(p)
    p.add_argument("--char", type=str, required=True)
    p.set_defaults(func=cmd_stickelberger)

    p = sub.add_parser("limitformula", help="limit-formula identities and predicted L-value")
    common(p)
    p.add_argument("--char", type=str, required=True)
    p.add_argument("--norm-bound", type=int, default=0, help="partial L-sum bound (0 = skip)")
    p.set_defaults(func=cmd_limitformula)

    p = sub.add_parser("check", help="generation verdicts for subfields")
    common(p)
    p.add_argument("--subgroup", type=str, default=None, help="generators 'v1;v2' or 'all'")
    p.add_argument("--sweep", action="store_true", help="sweep the whole subgroup lattice")
    p.add_argument("--n", dest="n", type=int, default=1)
    p.add_argument("--class", dest="class_vec", type=str, default=None)
    p.add_argument(
        "--unconditional",
        action="store_true",
        help="also test the raw conjecture at the original modulus when the "
        "theorem reduces it (such runs can legitimately FAIL: the norm "
        "collapses when the removed prime acts trivially on L)",
    )
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("example-2-8", help="end-to-end structural fixture")
    p.add_argument("--prec", type=int, default=128)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_example_2_8)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
