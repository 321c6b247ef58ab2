"""Command-line front end.

    gaplimits [--config FILE] COMMAND [--flag value ...]

Every run is determined by (command, parameters, seed); identical inputs
give byte-identical output.  Errors print one ``error[CODE]: message``
line to stderr and exit nonzero (2 for usage errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .arith import build_store, chebyshev_psi, mertens_report
from .config import (
    DEFAULT_SEED,
    Param,
    RunConfig,
    boolean,
    build_config,
    integer,
    intvector,
    parse_config,
    rational,
    real,
    string,
    vector,
)
from .errors import ArgumentError, GapLimitsError, MalformedValueError, OutputError, UsageError
from .report import FORMATS, Report

# -- parameter schema --------------------------------------------------------

SCHEMA: dict[str, list[Param]] = {
    "primes": [
        Param("limit", integer, 10**6, "sieve limit"),
        Param("segment", integer, 65536, "segment length"),
        Param("workers", integer, 1, "sieving threads"),
        Param("x", integer, None, "Mertens point (default: limit)"),
        Param("select", integer, None, "also report p_n for this n"),
    ],
    "tuple": [
        Param("tuple", intvector, None, "offsets, e.g. 0,2,6"),
        Param("parts", integer, 1, "number of equal contiguous parts"),
        Param("n", integer, None, "translate and count primes at this n"),
    ],
    "construct": [
        Param("betas", vector, None, "nondecreasing positions, e.g. 0,1"),
        Param("k", integer, None, "tuple size (default: number of betas)"),
        Param("x", real, 1.0, "scale x >= 1"),
        Param("y", integer, None, "sieving bound y"),
        Param("y_scan", intvector, None, "try these y in order, report the first success"),
        Param("z", integer, None, "interval end (default: ceil(y(1 + (1 + beta_k) x)))"),
        Param("y1", integer, None, "greedy stage bound"),
        Param("y2", integer, None, "zero-class stage bound"),
        Param("delta", integer, None, "window width"),
        Param("ell", integer, None, "odd prime withheld from the greedy stage"),
        Param("excluded", intvector, (), "excluded primes Z"),
        Param("verify", boolean, True, "check the sieved interval at the CRT base point"),
    ],
    "mk-bound": [
        Param("k", integer, None, "dimension"),
        Param("eta", rational, Fraction(0), "eta in [0, 1)"),
        Param("degree", integer, 1, "basis degree (a + 2b <= degree)"),
        Param("spec", string, None, "declarative test-function / basis file"),
    ],
    "lemma46": [
        Param("k", integer, None, "dimension"),
        Param("rho", real, 1.0, "rho"),
        Param("delta", real, 1.0, "delta"),
        Param("method", string, "mc", "quadrature", ("mc", "grid")),
        Param("samples", integer, 20000, "Monte Carlo samples"),
        Param("points", integer, 1000, "pointwise check points"),
    ],
    "weights-sum": [
        Param("tuple", intvector, None, "offsets"),
        Param("parts", integer, None, "parts (default: k)"),
        Param("N", integer, 10**4, "n ranges over (N, 2N]"),
        Param("W", integer, 2, "squarefree modulus"),
        Param("b", integer, None, "residue (default: smallest coprime class)"),
        Param("m", integer, 1, "m"),
        Param("delta", real, 0.05, "support budget"),
        Param("exponent", integer, 1, "pieces (1 - t/c)^exponent"),
        Param("Z", integer, 1, "excluded modulus"),
        Param("variant", string, "S", "sum variant", ("S", "S_prime")),
    ],
    "gaps": [
        Param("limit", integer, 10**6, "sieve limit"),
        Param("edges", vector, (0, 0.5, 1, 1.5, 2, 3, 4, 6), "histogram edges"),
        Param("m", integer, 2, "chain window length"),
        Param("chain_rows", integer, 10, "chain points to list"),
        Param("betas", vector, None, "difference-hit targets"),
        Param("tol", real, 0.01, "difference-hit tolerance"),
        Param("hit_rows", integer, 10, "hits to list per pair"),
    ],
    "measure": [Param("kappa", integer, 9, "kappa >= 2")],
    "bv-scan": [
        Param("N", integer, 10**5, "psi(N; q, a) cutoff"),
        Param("theta", real, 0.5, "q <= N^theta"),
        Param("q0", integer, 1, "squarefree divisor of every q"),
        Param("Z", integer, 1, "skip q sharing a factor with Z"),
    ],
}


def _require(cfg: RunConfig, *names):
    missing = [n for n in names if cfg.params.get(n) is None]
    if missing:
        raise ArgumentError(f"{cfg.command}: missing required parameter(s) {', '.join('--' + m.replace('_', '-') for m in missing)}")


# -- handlers ----------------------------------------------------------------


def run_primes(cfg: RunConfig) -> Report:
    p = cfg.params
    store = build_store(p["limit"], p["segment"], workers=p["workers"])
    x = p["x"] or p["limit"]
    rep = Report(cfg.command, dict(p))
    summary = dict(
        pi=store.rank(store.limit),
        largest=int(store.primes[-1]),
        psi=chebyshev_psi(store, store.limit),
    )
    if p["select"] is not None:
        summary["select"] = store.select(p["select"])
    rep.scalars("summary", **summary)
    if x >= 2:
        m = mertens_report(store, x)
        rep.scalars(
            "mertens",
            x=x,
            sum_reciprocal=m.sum_reciprocal,
            product_form=m.product_form,
            predicted=m.predicted,
            relative_error=m.relative_error,
        )
    return rep


def run_tuple(cfg: RunConfig) -> Report:
    from .tuples import KTuple, is_admissible, partition_equal, prime_pattern, translate

    _require(cfg, "tuple")
    p = cfg.params
    t = partition_equal(KTuple(tuple(p["tuple"])), p["parts"])
    rep = Report(cfg.command, dict(p))
    rep.scalars("tuple", offsets=t.offsets, k=t.k, admissible=is_admissible(t), labels=t.labels)
    if p["n"] is not None:
        top = p["n"] + t.offsets[-1]
        store = build_store(max(top, 2))
        rep.scalars("translate", n=p["n"], values=translate(t, p["n"]), part_counts=prime_pattern(store, t, p["n"]))
    return rep


def _construction_params(p, y):
    from .cover import ConstructionParams

    betas = tuple(p["betas"])
    k = p["k"] if p["k"] is not None else len(betas)
    return ConstructionParams.build(
        k, betas, p["x"], y, z=p["z"], y1=p["y1"], y2=p["y2"], delta=p["delta"], excluded=p["excluded"], ell=p["ell"]
    )


def run_construct(cfg: RunConfig) -> Report:
    from .cover import construct_tuple, scan_y, verify_sieved_interval

    _require(cfg, "betas")
    p = cfg.params
    if p["y"] is None and not p["y_scan"]:
        raise ArgumentError("construct: give --y or --y-scan")
    ys = list(p["y_scan"]) if p["y_scan"] else [p["y"]]
    if not p["betas"]:
        raise ArgumentError("construct: --betas is empty")
    top = max(p["betas"])
    reach = max(p["z"] or math.ceil(y * (1 + (1 + top) * p["x"])) for y in ys)
    store = build_store(max(reach, 2))
    rep = Report(cfg.command, dict(p))
    if p["y_scan"]:
        result, failures = scan_y(store, ys, lambda y: _construction_params(p, y))
        rep.table("scan", ("y", "stage", "message"), failures)
        if result is None:
            from .errors import InfeasibleError

            last = failures[-1]
            raise InfeasibleError(f"no y in {ys} succeeded; last failure (y = {last[0]}): {last[2]}", stage=last[1])
    else:
        result = construct_tuple(store, _construction_params(p, ys[0]))
    P = result.params
    rep.scalars(
        "resolved",
        k=P.k,
        betas=P.betas,
        x=P.x,
        y=P.y,
        z=P.z,
        y1=P.y1,
        y2=P.y2,
        delta=P.delta,
        ell=P.ell,
        excluded=sorted(P.excluded),
    )
    st = result.stages
    rep.scalars(
        "stages",
        stage1_primes=st["stage1_primes"],
        res1=st["res1"],
        res2=st["res2"],
        mertens_bound=st["mertens_bound"],
        p3_available=st["p3_available"],
        counting_condition=st["counting_condition"],
        extension_rounds=st["extension_rounds"],
    )
    rep.table("greedy", ("p", "a_p", "before", "after"), st["greedy"])
    rep.table("windows", ("index", "lo", "hi", "candidates"), [tuple(w.values()) for w in st["windows"]])
    out = dict(
        tuple=result.tuple.offsets,
        progression_residue=result.progression_residue,
        P1=result.P1,
    )
    checks = dict(result.checks)
    if p["verify"]:
        n = result.cover.base_point()
        out["base_point"] = n
        checks["sieved_interval"] = verify_sieved_interval(store, result.tuple, result.cover, n)
    rep.scalars("result", **out)
    rep.scalars("checks", **checks)
    rep.table("cover", ("p", "a_p"), sorted(result.cover.entries.items()))
    return rep


def run_mk_bound(cfg: RunConfig) -> Report:
    from .variational.rayleigh import MkBound, mk_lower_bound
    from .variational.specfile import parse_function_spec

    p = cfg.params
    rep = Report(cfg.command, dict(p))
    if p["spec"]:
        try:
            text = Path(p["spec"]).read_text()
        except OSError as exc:
            raise ArgumentError(f"cannot read spec file {p['spec']}: {exc.strerror}") from exc
        spec = parse_function_spec(text)
        value = spec.evaluate()
        if not isinstance(value, MkBound):
            rep.scalars("functional", operation=spec.operation, k=spec.k, eta=spec.eta, value=value, value_float=float(value))
            return rep
        bound = value
    else:
        _require(cfg, "k")
        bound = mk_lower_bound(p["k"], p["eta"], p["degree"])
    rep.scalars(
        "bound",
        k=bound.k,
        eta=bound.eta,
        degree=bound.degree,
        gram_size=bound.gram_size,
        value=bound.value,
        value_float=float(bound.value),
        float_estimate=bound.float_estimate,
        upper_bracket=bound.upper_bracket,
    )
    rep.table(
        "coefficients",
        ("a", "b", "coefficient"),
        [(a, b, c) for (a, b), c in zip(bound.basis, bound.coefficients)],
    )
    return rep


def run_lemma46(cfg: RunConfig) -> Report:
    from .variational.product import lemma46_report

    _require(cfg, "k")
    p = cfg.params
    r = lemma46_report(p["k"], p["rho"], p["delta"], p["method"], p["samples"], cfg.seed, p["points"])
    f = r.functionals
    rep = Report(cfg.command, {**p, "seed": cfg.seed})
    rep.scalars("family", k=r.k, A=r.A, T=r.T, g0=1.0, scale=r.rho * r.delta)
    rep.table(
        "functionals",
        ("name", "log", "rel_stderr"),
        [("I", f.I.log, f.I.rel_stderr), ("J", f.J.log, f.J.rel_stderr), ("L", f.L.log, f.L.rel_stderr)],
    )
    rep.scalars(
        "ratios",
        j_over_i=f.j_over_i,
        j_over_i_stderr=f.j_over_i_stderr,
        j_bound=r.j_bound,
        j_within_3se=f.j_over_i <= r.j_bound + 3 * f.j_over_i_stderr,
        l_over_i=f.l_over_i,
        l_over_i_stderr=f.l_over_i_stderr,
        l_bound=r.l_bound,
        l_within_3se=f.l_over_i <= r.l_bound + 3 * f.l_over_i_stderr,
    )
    rep.scalars(
        "pointwise",
        points=len(r.pointwise.xs),
        max_excess=r.pointwise.max_excess,
        quad_error=r.pointwise.quad_error,
        holds=r.pointwise.max_excess <= 1e-9,
    )
    return rep


def run_weights_sum(cfg: RunConfig) -> Report:
    from .tuples import KTuple, partition_equal
    from .variational.weights import SieveWeightSpec, coprime_base, find_witness, weighted_sum_check

    _require(cfg, "tuple")
    p = cfg.params
    t = KTuple(tuple(p["tuple"]))
    t = partition_equal(t, p["parts"] or t.k)
    b = p["b"] if p["b"] is not None else coprime_base(t, p["W"])
    spec = SieveWeightSpec.standard(t.k, p["delta"], p["exponent"], p["Z"])
    store = build_store(2 * p["N"] + t.offsets[-1])
    direct, swapped, rel = weighted_sum_check(store, t, b, p["W"], p["N"], p["m"], spec, p["variant"])
    w = find_witness(store, t, b, p["W"], p["N"], p["m"], p["variant"])
    rep = Report(cfg.command, dict(p))
    rep.scalars(
        "sum",
        b=b,
        n_count=direct.n_count,
        support_size=direct.support_size,
        direct=direct.value,
        swapped=swapped.value,
        relative_difference=rel,
        positive=direct.value > 0,
    )
    rep.scalars("witness", n=w[0] if w else None, part_counts=w[1] if w else None)
    return rep


def run_gaps(cfg: RunConfig) -> Report:
    from .gapstats import chain_points, difference_hits, gap_stream, poisson_histogram

    p = cfg.params
    store = build_store(p["limit"])
    g = gap_stream(store)
    rep = Report(cfg.command, dict(p))
    rep.scalars(
        "summary",
        records=len(g),
        gap_sum=int(g.gap.sum()),
        telescoped=int(g.p[-1] + g.gap[-1] - 2),
        mean_normalized=float(np.mean(g.normalized)),
        max_gap=int(g.gap.max()),
        max_normalized=float(g.normalized.max()),
    )
    h = poisson_histogram(g, p["edges"])
    rep.scalars("histogram_summary", total=h.total, fraction_sum=float(math.fsum(h.empirical)), ks_discrepancy=h.ks_discrepancy)
    rep.table("histogram", ("lo", "hi", "count", "empirical", "predicted"), h.rows())
    pts = chain_points(g, p["m"])[: p["chain_rows"]]
    rep.table("chain", tuple(f"c{i}" for i in range(1, p["m"] + 1)), pts.tolist())
    if p["betas"]:
        hits = difference_hits(g, p["betas"], p["tol"])
        rows = [(i, j, len(ns), [int(v) for v in ns[: p["hit_rows"]]]) for (i, j), ns in hits.items()]
        rep.table("hits", ("i", "j", "count", "first_n"), rows)
    return rep


def run_measure(cfg: RunConfig) -> Report:
    from .gapstats import measure_bounds

    mb = measure_bounds(cfg.params["kappa"])
    rep = Report(cfg.command, dict(cfg.params))
    rep.scalars(
        "measure",
        kappa=mb.kappa,
        asymptotic_density=mb.asymptotic_density,
        effective_density=mb.effective_density,
        effective_float=float(mb.effective_density),
        effective_exceeds_1_22=mb.effective_density.numerator * 22 > mb.effective_density.denominator,
    )
    return rep


def run_bv_scan(cfg: RunConfig) -> Report:
    from .gapstats import bv_error_scan

    p = cfg.params
    store = build_store(max(p["N"], 2))
    scan = bv_error_scan(store, p["N"], p["theta"], p["q0"], p["Z"])
    rep = Report(cfg.command, dict(p))
    rep.scalars("summary", psi=scan.psi, rows=len(scan.rows), total=scan.total)
    rep.table(
        "errors",
        ("q", "max_error", "argmax_a", "partition_rel_error"),
        [(r.q, r.max_error, r.argmax, r.partition_rel_error) for r in scan.rows],
    )
    return rep


HANDLERS = {
    "primes": run_primes,
    "tuple": run_tuple,
    "construct": run_construct,
    "mk-bound": run_mk_bound,
    "lemma46": run_lemma46,
    "weights-sum": run_weights_sum,
    "gaps": run_gaps,
    "measure": run_measure,
    "bv-scan": run_bv_scan,
}


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid" in message and "value" in message:
            raise MalformedValueError(message)
        raise UsageError(message)


def _add_globals(ap: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    ap.add_argument("--seed", type=integer, default=d, help=f"random seed (default {DEFAULT_SEED})")
    ap.add_argument("--out", default=d, help="output path, '-' for stdout (default)")
    ap.add_argument("--format", choices=FORMATS, default=d, help="csv (default), tree (JSON) or text")
    ap.add_argument("--config", default=d, help="key = value config file; flags override it")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gaplimits", description="Prime-gap limit point experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(ap, suppress=True)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    for name, params in SCHEMA.items():
        sp = sub.add_parser(name, help=f"{name} report")
        for prm in params:
            kw = dict(type=prm.type, default=argparse.SUPPRESS, help=prm.help, dest=prm.name)
            if prm.choices:
                kw["choices"] = prm.choices
            sp.add_argument(prm.flag, **kw)
        _add_globals(sp, suppress=True)
    return ap


def resolve(argv: list[str]) -> RunConfig:
    ns = make_parser().parse_args(argv)
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    config_path = getattr(ns, "config", None)
    if config_path:
        base = parse_config(config_path, SCHEMA, ns.command)
        return build_config(base.command, given, SCHEMA, base=base, source="command line")
    if not ns.command:
        raise UsageError("no command given (choose one of: " + ", ".join(SCHEMA) + ")")
    return build_config(ns.command, given, SCHEMA, source="command line")


def execute(cfg: RunConfig) -> str:
    return HANDLERS[cfg.command](cfg).render(cfg.format)


def _write(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve(argv)
        _write(execute(cfg), cfg.output_path)
    except GapLimitsError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
