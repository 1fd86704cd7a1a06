"""Command-line interface, structure-constant files, and reports.

Commands: build, check-jacobi, weights, der, bider, verify-theorem,
dump-sc, selftest.  Exit codes: 0 pass, 1 fail, 2 usage error,
3 resource cap / inconclusive.

Reports are single JSON documents, deterministic for a fixed seed and
config (wall-clock timing goes to stderr only, never into the report,
so runs with different worker counts stay byte-identical).  Field
elements are serialized as decimal strings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .contact import (
    ContactAlgebra,
    build_contact_algebra,
    centralizer,
    generation_closure,
    generators,
    graded_component,
    jacobi_check,
    simplicity_probes,
    weight_decomposition,
    weight_space_predicates,
)
from .derlab import (
    SolveOptions,
    biderivation_space,
    oracle_corpus,
    spans_equal,
    superderivation_space,
    verify_theorem,
)
from .errors import ParameterError, ResourceLimitError
from .superspace import Monomial, Space

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "CONTACTK_DIM_CAP"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


# ---------------------------------------------------------------------------
# structure-constant file format
# ---------------------------------------------------------------------------


def dump_scalg(alg: ContactAlgebra) -> str:
    """Line-oriented dump: header, basis lines, bracket lines (i <= j)."""
    space = alg.space
    lines = ["SCALG 1"]
    t = ",".join(str(h) for h in space.heights)
    lines.append(f"p={space.p} m={space.m} n={space.n} t={t} dim={alg.dim}")
    for idx, mono in enumerate(alg.basis):
        alpha = " ".join(str(a) for a in mono.alpha)
        lines.append(
            f"B {idx} {alpha} {mono.umask} {alg.parity[idx]} {alg.degree[idx]}"
        )
    for (i, j) in sorted(alg.table):
        for k, c in alg.table[(i, j)]:
            lines.append(f"C {i} {j} {k} {c}")
    return "\n".join(lines) + "\n"


def load_scalg(text: str) -> ContactAlgebra:
    """Rebuild an algebra from its dump; bitwise round-trip with dump_scalg."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "SCALG 1":
        raise ParameterError("not an SCALG 1 file")
    header = dict(kv.split("=", 1) for kv in lines[1].split())
    p = int(header["p"])
    m = int(header["m"])
    n = int(header["n"])
    heights = tuple(int(x) for x in header["t"].split(","))
    dim = int(header["dim"])
    space = Space(m, n, heights, p)
    basis = []
    table = {}
    for line in lines[2:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "B":
            idx = int(parts[1])
            alpha = tuple(int(x) for x in parts[2 : 2 + m])
            umask = int(parts[2 + m])
            if idx != len(basis):
                raise ParameterError("basis lines out of order")
            basis.append(Monomial(alpha, umask))
        elif parts[0] == "C":
            i, j, k, c = (int(x) for x in parts[1:5])
            table.setdefault((i, j), []).append((k, c))
        else:
            raise ParameterError(f"unknown record {parts[0]!r}")
    if len(basis) != dim:
        raise ParameterError(f"expected {dim} basis lines, got {len(basis)}")
    from .contact import torus_pair_list

    torus_pairs = torus_pair_list(space)
    index = {mono: i for i, mono in enumerate(basis)}
    torus_idx = []
    for i, ip in torus_pairs:
        hit = space.mono_mul(space.variable(i), space.variable(ip))
        torus_idx.append(index[hit[1]])
    return ContactAlgebra(
        space,
        basis,
        {ij: tuple(ent) for ij, ent in table.items()},
        torus_pairs,
        torus_idx,
    )


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


class Reporter:
    def __init__(self, config: dict):
        self.report = {
            "tool": "contactk",
            "version": __version__,
            "config": config,
            "checks": [],
            "verdict": "pass",
        }
        self._t0 = time.time()

    def add(self, name: str, verdict: str, strategy: str = "exact", **fields):
        rec = {"name": name, "strategy": strategy, "verdict": verdict}
        rec.update(fields)
        self.report["checks"].append(rec)
        if verdict == "fail":
            self.report["verdict"] = "fail"
        elif verdict == "inconclusive" and self.report["verdict"] == "pass":
            self.report["verdict"] = "inconclusive"
        sys.stderr.write(
            f"[contactk +{time.time() - self._t0:7.1f}s] {name}: {verdict}\n"
        )
        sys.stderr.flush()

    def finish(self, out_path: Optional[str]) -> int:
        text = json.dumps(self.report, indent=2) + "\n"
        if out_path:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        verdict = self.report["verdict"]
        if verdict == "pass":
            return EXIT_PASS
        if verdict == "inconclusive":
            return EXIT_RESOURCE
        return EXIT_FAIL


def _config_echo(args, command: str) -> dict:
    # worker count is an execution knob, not part of the artifact: reports
    # must be byte-identical for 1 and N workers
    return {
        "command": command,
        "m": args.m,
        "n": args.n,
        "t": list(args.t),
        "p": args.p,
        "seed": args.seed,
        "samples": args.samples,
        "mode": args.mode,
        "dim_cap": args.dim_cap,
    }


def _build_algebra(args) -> ContactAlgebra:
    return build_contact_algebra(args.m, args.n, args.t, args.p, dim_cap=args.dim_cap)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    rep = Reporter(_config_echo(args, "build"))
    alg = _build_algebra(args)
    rep.add(
        "build",
        "pass",
        dim=alg.dim,
        table_entries=sum(len(e) for e in alg.table.values()),
        torus=[alg.labels[i] for i in alg.torus_idx],
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dump_scalg(alg))
        rep.add("dump", "pass", path=args.out)
    return rep.finish(args.report)


def cmd_dump_sc(args) -> int:
    if not args.out:
        raise ParameterError("dump-sc requires --out")
    return cmd_build(args)


def cmd_check_jacobi(args) -> int:
    rep = Reporter(_config_echo(args, "check-jacobi"))
    alg = _build_algebra(args)
    res = jacobi_check(
        alg, strategy="sampled", samples=args.samples, seed=args.seed,
        workers=args.workers,
    )
    rep.add(
        "antisymmetry_exhaustive",
        "pass" if res["antisymmetry"]["failures"] == 0 else "fail",
        checked=res["antisymmetry"]["checked"],
        failures=res["antisymmetry"]["failures"],
        witness=res["antisymmetry"]["witness"],
    )
    rep.add(
        "jacobi_sampled",
        "pass" if res["jacobi"]["failures"] == 0 else "fail",
        strategy="sampled",
        checked=res["jacobi"]["checked"],
        failures=res["jacobi"]["failures"],
        witness=res["jacobi"]["witness"],
        seed=args.seed,
    )
    return rep.finish(args.report)


def cmd_weights(args) -> int:
    rep = Reporter(_config_echo(args, "weights"))
    alg = _build_algebra(args)
    blocks = weight_decomposition(alg)  # raises on eigen-equation failure
    rep.add(
        "eigen_equation",
        "pass",
        torus_generators=len(alg.torus_idx),
        basis=alg.dim,
    )
    sizes = {str(tuple(int(x) for x in w)): len(v) for w, v in sorted(blocks.items())}
    rep.add(
        "weight_partition",
        "pass" if sum(len(v) for v in blocks.values()) == alg.dim else "fail",
        nonempty_weights=len(blocks),
        block_sizes=sizes,
    )
    pred = weight_space_predicates(alg)
    rep.add(
        "membership_patterns",
        "pass" if pred["all_match"] else "fail",
        **{k: v for k, v in pred.items() if k != "all_match"},
    )
    return rep.finish(args.report)


def cmd_der(args) -> int:
    rep = Reporter(_config_echo(args, "der"))
    alg = _build_algebra(args)
    if alg.dim <= 60:
        dims = {}
        for g in (0, 1):
            dims[str(g)] = len(superderivation_space(alg, g))
        rep.add("superderivation_space", "pass", strategy="full", dims=dims)
    else:
        from .derblocks import anchor_indices, derivation_blocks

        anchors = anchor_indices(alg)
        dims = {}
        statuses = {}
        for g in (0, 1):
            vecs, reports = derivation_blocks(alg, g, args.seed, anchors)
            dims[str(g)] = len(vecs)
            statuses[str(g)] = {
                "blocks": len(reports),
                "at_floor": sum(1 for r in reports if r.status == "floor"),
                "above_floor": sum(1 for r in reports if r.status != "floor"),
                "inner_floor_total": sum(r.floor for r in reports),
            }
        exact = all(s["above_floor"] == 0 for s in statuses.values())
        rep.add(
            "superderivation_space",
            "pass" if exact else "inconclusive",
            strategy="blocked",
            dims=dims,
            blocks=statuses,
        )
    return rep.finish(args.report)


def cmd_bider(args) -> int:
    rep = Reporter(_config_echo(args, "bider"))
    alg = _build_algebra(args)
    for g in (0, 1) if args.z2 is None else (args.z2,):
        opts = SolveOptions(
            mode=args.mode, z2_degree=g, seed=args.seed, workers=args.workers,
            unknown_cap=args.unknown_cap,
        )
        res = biderivation_space(alg, opts)
        rep.add(
            f"biderivation_space_z2_{g}",
            "pass" if res.status == "exact" else "inconclusive",
            strategy=args.mode,
            dim=res.dimension,
            blocks=len(res.blocks),
            unsolved=[
                {"key": [list(map(int, b.key[0])), int(b.key[1])], "status": b.status}
                for b in res.blocks
                if b.status in ("unsolved", "above_floor", "anomaly")
            ],
        )
    return rep.finish(args.report)


def cmd_verify_theorem(args) -> int:
    rep = Reporter(_config_echo(args, "verify-theorem"))
    alg = _build_algebra(args)

    cen = centralizer(alg)
    rep.add("center_trivial", "pass" if cen.shape[0] == 0 else "fail",
            dim=int(cen.shape[0]))

    neg_one = graded_component(alg, -1)
    rows = np.zeros((len(neg_one), alg.dim), dtype=np.int64)
    for r, i in enumerate(neg_one):
        rows[r, i] = 1
    cen1 = centralizer(alg, s_rows=rows)
    unit_line = (
        cen1.shape[0] == 1
        and list(np.flatnonzero(cen1[0])) == [alg.index[alg.space.unit]]
    )
    rep.add(
        "degree_minus1_centralizer_is_unit_line",
        "pass" if unit_line else "fail",
        dim=int(cen1.shape[0]),
    )

    spans, rounds = generation_closure(alg, generators(alg))
    rep.add("generation_closure", "pass" if spans else "fail",
            generators=len(generators(alg)), rounds=rounds)

    probes = simplicity_probes(alg, count=20, seed=args.seed, workers=args.workers)
    rep.add(
        "simplicity_probes",
        "pass" if probes["failures"] == 0 else "fail",
        strategy="sampled",
        probes=len(probes["probes"]),
        failures=probes["failures"],
        seed=args.seed,
    )

    opts = SolveOptions(
        mode="blocked", seed=args.seed, workers=args.workers,
        unknown_cap=args.unknown_cap,
    )
    thm = verify_theorem(alg, opts)
    rep.add(
        "biderivations_are_inner",
        "pass" if thm["verdict"] == "verified" else (
            "inconclusive" if thm["verdict"] == "inconclusive" else "fail"
        ),
        strategy="blocked",
        dim_even=thm["dim_bder_even"],
        dim_odd=thm["dim_bder_odd"],
        scale=thm["lambda"],
        residual_zero=thm["residual_zero"],
        unsolved_blocks=thm["unsolved_blocks"],
        oversized_blocks=thm["oversized_blocks"],
        seed=args.seed,
    )
    if thm["waypoints"] is not None:
        rep.add(
            "proportionality_waypoints",
            "pass" if thm["waypoints"]["verdict"] == "pass" else "fail",
            **{k: v for k, v in thm["waypoints"].items() if k != "verdict"},
        )
    elif thm["verdict"] == "verified":
        rep.add("proportionality_waypoints", "fail", note="no solution table")
    return rep.finish(args.report)


def cmd_selftest(args) -> int:
    rep = Reporter(_config_echo(args, "selftest"))
    for alg in oracle_corpus(args.p):
        jac = jacobi_check(alg, strategy="exhaustive")
        rep.add(f"jacobi_{alg.name}", jac["verdict"], strategy="exhaustive")
        for g in (0, 1):
            full = biderivation_space(alg, SolveOptions(mode="full", z2_degree=g))
            blocked = biderivation_space(alg, SolveOptions(mode="blocked", z2_degree=g))
            same = (
                full.dimension == blocked.dimension
                and spans_equal(alg, g, full.tables, blocked.tables)
            )
            rep.add(
                f"oracle_equivalence_{alg.name}_z2_{g}",
                "pass" if same else "fail",
                full_dim=full.dimension,
                blocked_dim=blocked.dimension,
            )
    from .derlab import make_sl2

    sl2 = make_sl2(args.p)
    der_dim = len(superderivation_space(sl2, 0)) + len(superderivation_space(sl2, 1))
    bder_dim = biderivation_space(sl2, SolveOptions(mode="full", z2_degree=0)).dimension
    rep.add(
        "sl2_reference_dims",
        "pass" if (der_dim, bder_dim) == (3, 1) else "fail",
        der_dim=der_dim,
        bder_dim=bder_dim,
    )
    return rep.finish(args.report)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_t(text: str):
    return tuple(int(x) for x in text.split(","))


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="contactk",
        description="Exact verification engine for the contact superalgebra "
        "and its skew-symmetric super-biderivations over F_p.",
    )
    ap.add_argument("command", choices=[
        "build", "check-jacobi", "weights", "der", "bider",
        "verify-theorem", "dump-sc", "selftest",
    ])
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--t", type=_parse_t, default=(1, 1, 1),
                    help="comma-separated heights, one per even variable")
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--mode", choices=["full", "blocked"], default="blocked")
    ap.add_argument("--z2", type=int, choices=[0, 1], default=None)
    ap.add_argument("--unknown-cap", type=int, default=200_000)
    ap.add_argument("--out", type=str, default=None,
                    help="path for structure-constant dumps")
    ap.add_argument("--report", type=str, default=None,
                    help="path for the JSON report (default: stdout)")
    ap.add_argument(
        "--dim-cap", type=int,
        default=int(os.environ.get(DIM_CAP_ENV, DEFAULT_DIM_CAP)),
    )
    return ap


COMMANDS = {
    "build": cmd_build,
    "check-jacobi": cmd_check_jacobi,
    "weights": cmd_weights,
    "der": cmd_der,
    "bider": cmd_bider,
    "verify-theorem": cmd_verify_theorem,
    "dump-sc": cmd_dump_sc,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return EXIT_USAGE
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_RESOURCE


def main() -> None:
    sys.exit(run())
