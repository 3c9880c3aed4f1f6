"""Command-line frontend.

Subcommands: gen, invariants, disc, blowdown, search, sweep.  Exit
status: 0 on success (including searches that find nothing), 1 on
domain errors (singular lattices, enumeration limits, malformed data),
2 on usage errors.

Rationals serialize as strings in lowest terms ("a/b", or just "a" when
integral); JSON output uses sorted keys so that generated files are
byte-stable under a parse/serialize round trip.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import birational, curve_config, discriminant, lattice, search
from .curve_config import CurveConfig, FamilyParams
from .errors import QhdError


def fmt_fraction(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _load_config(path: str) -> CurveConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise QhdError(f"cannot read graph file {path}: {exc}") from exc
    return curve_config.config_from_dict(data)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    params = FamilyParams(args.family, args.p, args.q, args.r)
    config = curve_config.make_family(params)
    _emit(dump_json(curve_config.config_to_dict(config)), args.output)
    return 0


def _cmd_invariants(args) -> int:
    config = _load_config(args.graph)
    L = lattice.intersection_matrix(config)
    det = lattice.det_direct(L)
    lines = [f"curves: {len(config.curves)}", f"det (direct): {det}"]
    payload: dict = {"curves": len(config.curves), "det_direct": det}
    try:
        formula = lattice.det_via_formula(config)
        lines.append(f"det (star formula, |.|): {formula}")
        payload["det_formula_abs"] = formula
    except QhdError as exc:
        lines.append(f"det (star formula): unavailable ({exc})")
        payload["det_formula_abs"] = None
    report = lattice.verify_bounds(config)
    lines.append(f"e: {fmt_fraction(report.e)}")
    lines.append(f"chi: {fmt_fraction(report.chi)}")
    lines.append(f"beta: {fmt_fraction(report.beta)}")
    if report.beta == 0:
        lines.append("log-canonical: yes (beta = 0)")
    payload.update(
        e=fmt_fraction(report.e),
        chi=fmt_fraction(report.chi),
        beta=fmt_fraction(report.beta),
        log_canonical=report.beta == 0,
        k={str(cid): fmt_fraction(ki) for cid, ki in zip(report.ordering, report.k)},
        bound_violations=list(report.violations),
    )
    lines.append(
        "k: "
        + " ".join(
            f"{cid}:{fmt_fraction(ki)}" for cid, ki in zip(report.ordering, report.k)
        )
    )
    if report.violations:
        lines.append("bound violations:")
        lines.extend(f"  - {v}" for v in report.violations)
    else:
        lines.append("bounds: all hold (chi >= 0, e < 0, -1 < beta <= 0, -1 <= k_i < 0)")
    if args.json:
        _emit(dump_json(payload), None)
    else:
        _emit("\n".join(lines) + "\n", None)
    return 0


def _cmd_disc(args) -> int:
    config = _load_config(args.graph)
    L = lattice.intersection_matrix(config)
    form = discriminant.discriminant_form(L)
    factors = form.group.invariant_factors
    payload: dict = {
        "invariant_factors": list(factors),
        "order": form.group.order,
        "gram": [[fmt_fraction(v) for v in row] for row in form.gram],
    }
    lines = [
        "invariant factors: " + (" ".join(map(str, factors)) if factors else "(trivial group)"),
        f"order: {form.group.order}",
    ]
    if factors:
        lines.append("pairing of generators (mod 1):")
        for row in form.gram:
            lines.append("  " + " ".join(fmt_fraction(v) for v in row))
    if args.self_isotropic:
        subs = discriminant.self_isotropic_subgroups(form)
        payload["self_isotropic"] = [
            {"order": H.order, "generators": [list(g) for g in H.generators]}
            for H in subs
        ]
        lines.append(f"self-isotropic subgroups: {len(subs)}")
        for H in subs:
            gens = ", ".join(str(tuple(g)) for g in H.generators) or "(trivial)"
            lines.append(f"  order {H.order}: {gens}")
    _emit(dump_json(payload) if args.json else "\n".join(lines) + "\n", None)
    return 0


def _load_placement(path: str) -> list[list[int]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return [[int(c) for c in entry["attach"]] for entry in data["extras"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise QhdError(f"cannot read placement file {path}: {exc}") from exc


def _cmd_blowdown(args) -> int:
    config = _load_config(args.graph)
    sets = _load_placement(args.placement)
    record, reason = search.verify_attachment_sets(config, sets)
    if record is None:
        payload = {"verified": False, "reason": reason}
        text = f"rejected: {reason}\n"
    else:
        payload = {"verified": True, "record": birational.record_to_dict(record)}
        text_lines = [f"verified: {len(record.steps)} contractions"]
        for i, step in enumerate(record.steps, 1):
            mults = " ".join(f"{cid}:{m}" for cid, m in step.multiplicities)
            text_lines.append(f"  step {i}: contract {step.contracted} ({mults})")
        text = "\n".join(text_lines) + "\n"
    _emit(dump_json(payload) if args.json else text, None)
    return 0


def _placement_payload(pl) -> dict:
    return {
        "attachments": [list(s) for s in pl.attachment_sets],
        "steps": len(pl.verified.steps) if pl.verified else None,
        "rejection": pl.rejection,
    }


def _cmd_search(args) -> int:
    config = _load_config(args.graph)
    m = args.extras if args.extras is not None else search.expected_extras(config)
    candidates = search.candidate_classes(config)
    if args.nef_filter:
        nef = search.central_cycle(config)
        candidates = [c for c in candidates if search.nef_filter(config, nef, c)]
    placements = search.enumerate_placements(config, m, candidates)
    verified, rejected = [], []
    for pl in placements:
        outcome = search.verify_placement(config, pl)
        (verified if outcome.verified else rejected).append(outcome)
    payload = {
        "extras": m,
        "candidates": len(candidates),
        "verified": [_placement_payload(pl) for pl in verified],
        "rejected": [_placement_payload(pl) for pl in rejected],
    }
    lines = [
        f"candidates: {len(candidates)}  placements tried: {len(placements)}",
        f"verified placements: {len(verified)}",
    ]
    for pl in verified:
        sets = " ".join(str(tuple(s)) for s in pl.attachment_sets)
        lines.append(f"  {sets}  [{len(pl.verified.steps)} contractions]")
    if not verified:
        lines.append("no placements found")
    _emit(dump_json(payload) if args.json else "\n".join(lines) + "\n", None)
    return 0


def _cmd_sweep(args) -> int:
    rows = search.sweep(
        args.family, args.max, args.max, args.max, use_nef_filter=args.nef_filter
    )
    payload = []
    header = f"{'family':<6} {'p':>2} {'q':>2} {'r':>2} {'count':>5} {'expected':>8} {'match':>5}"
    lines = [header, "-" * len(header)]
    mismatches = 0
    for row in rows:
        params = row.params
        payload.append(
            {
                "family": params.family,
                "p": params.p,
                "q": params.q,
                "r": params.r,
                "count": row.result.count,
                "expected": row.expected,
                "match": row.matches,
                "placements": [
                    _placement_payload(pl) for pl in row.result.placements
                ],
                "subgroups": [
                    {"order": H.order, "generators": [list(g) for g in H.generators]}
                    for H in row.result.subgroups
                ],
            }
        )
        mismatches += 0 if row.matches else 1
        lines.append(
            f"{params.family:<6} {params.p:>2} {params.q:>2} {params.r:>2} "
            f"{row.result.count:>5} {row.expected:>8} {str(row.matches).lower():>5}"
        )
        for pl in row.result.placements:
            sets = " ".join(str(tuple(s)) for s in pl.attachment_sets)
            lines.append(f"       extras: {sets}")
        for H in row.result.subgroups:
            gens = ", ".join(str(tuple(g)) for g in H.generators) or "(trivial)"
            lines.append(f"       subgroup of order {H.order}: {gens}")
    lines.append(
        f"summary: {len(rows)} triples, "
        f"{len(rows) - mismatches} matching the expected counts, {mismatches} flagged"
    )
    _emit(dump_json(payload) if args.json else "\n".join(lines) + "\n", None)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhd",
        description="Exact lattice invariants, discriminant groups and "
        "blow-down verification for star-shaped curve configurations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a family configuration as graph JSON")
    gen.add_argument("family", choices=curve_config.FAMILIES)
    gen.add_argument("p", type=int)
    gen.add_argument("q", type=int)
    gen.add_argument("r", type=int)
    gen.add_argument("-o", "--output", default=None)
    gen.set_defaults(func=_cmd_gen)

    inv = sub.add_parser("invariants", help="determinants, e, chi, beta, adjunction bounds")
    inv.add_argument("graph")
    inv.add_argument("--json", action="store_true")
    inv.set_defaults(func=_cmd_invariants)

    disc = sub.add_parser("disc", help="discriminant group and pairing")
    disc.add_argument("graph")
    disc.add_argument("--self-isotropic", action="store_true")
    disc.add_argument("--json", action="store_true")
    disc.set_defaults(func=_cmd_disc)

    blow = sub.add_parser("blowdown", help="verify one placement of extra -1 curves")
    blow.add_argument("graph")
    blow.add_argument("--placement", required=True)
    blow.add_argument("--json", action="store_true")
    blow.set_defaults(func=_cmd_blowdown)

    sea = sub.add_parser("search", help="enumerate and verify all placements")
    sea.add_argument("graph")
    sea.add_argument("--extras", type=int, default=None)
    sea.add_argument("--nef-filter", action="store_true")
    sea.add_argument("--json", action="store_true")
    sea.set_defaults(func=_cmd_search)

    swp = sub.add_parser("sweep", help="classification table over a parameter box")
    swp.add_argument("family", choices=curve_config.FAMILIES)
    swp.add_argument("--max", type=int, required=True)
    swp.add_argument("--nef-filter", action="store_true")
    swp.add_argument("--json", action="store_true")
    swp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QhdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
