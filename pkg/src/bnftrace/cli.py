"""Command line interface.

Exit codes: 0 success, 2 input/schema error, 3 mathematical failure
(resonance, pole, rank deficiency, conditioning, ...).

Subcommands: forward, recover, roundtrip, classical-bnf, classify, oracle.
All file formats are defined in :mod:`bnftrace.jsonio`.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import hypcalc, jsonio
from .classical import birkhoff_normal_form, classify_eigenvalues
from .config import RunConfig
from .errors import MathError, SchemaError
from .fields import field_from_name
from .qbnf import TraceData, make_trace_data, trace_power
from .recover import recover_qbnf
from .series import MultiSeries, Orders


def _fmt_value(field, v):
    re, im = field.format(v)
    if field.exact:
        return f"{re} + {im} i"
    c = field.to_complex(v)
    return f"{re} + {im} i   (~ {c.real:.6g} + {c.imag:.6g} i)"


def _add_common(p):
    p.add_argument("--backend", choices=["rational", "float"], default=None)
    p.add_argument("--precision", type=int, default=64)
    p.add_argument("--orders", default=None,
                   help="IOTA,Z,H truncation orders")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--tol-pole", type=float, default=1e-9, dest="tol_pole")
    p.add_argument("--tol-resonance", type=float, default=1e-8,
                   dest="tol_resonance")
    p.add_argument("--tol-conditioning", type=float, default=1e8,
                   dest="tol_conditioning")
    p.add_argument("--tol-residual", type=float, default=1e-8,
                   dest="tol_residual")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--parallel", action="store_true")


def _config_from_args(args):
    orders = (4, 3, 3)
    if args.orders:
        parts = [int(x) for x in args.orders.split(",")]
        if len(parts) != 3:
            raise SchemaError("--orders expects IOTA,Z,H")
        orders = tuple(parts)
    return RunConfig(
        backend=args.backend or "float",
        float_precision=args.precision,
        orders=orders,
        k_max=args.kmax or 8,
        tol_pole=args.tol_pole,
        tol_resonance=args.tol_resonance,
        tol_conditioning=args.tol_conditioning,
        tol_residual=args.tol_residual,
        seed=args.seed,
        parallel=args.parallel,
    )


def _load_action(path, field, n_z):
    if path is None:
        # default action I(z) = z
        return MultiSeries(field, 0, Orders(0, n_z, 0),
                           {((), 1, 0): field.one}), {}
    obj = jsonio.load(path)
    action = jsonio.series_from_json(jsonio._need(obj, "action", dict), field)
    maslov = {int(k): int(v) for k, v in obj.get("maslov", {}).items()}
    return action, maslov


def _forward_tracedata(bnf, action, maslov, cfg):
    n_z, n_h = cfg.orders[1], cfg.orders[2]
    if not cfg.parallel:
        return make_trace_data(bnf, action, maslov, cfg.k_max, (n_z, n_h),
                               pole_tol=cfg.tol_pole,
                               resonance_order=cfg.resonance_order,
                               resonance_tol=cfg.tol_resonance)
    from .blocks import require_nonresonant

    require_nonresonant(bnf.blocks, cfg.resonance_order, cfg.tol_resonance)
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(
            lambda k: trace_power(bnf, k, (n_z, n_h), cfg.tol_pole),
            range(1, cfg.k_max + 1)))
    coeffs = {tp.k: tp.coeffs for tp in results}
    maslov = {k: maslov.get(k, 0) for k in range(1, cfg.k_max + 1)}
    return TraceData(bnf.field, cfg.k_max, action, maslov, results[0].phase,
                     coeffs)


def cmd_forward(args):
    cfg = _config_from_args(args)
    bnf = jsonio.qbnf_from_json(jsonio.load(args.bnf), cfg.float_precision)
    action, maslov = _load_action(args.action, bnf.field, cfg.orders[1])
    td = _forward_tracedata(bnf, action, maslov, cfg)
    out = args.out or "traces.json"
    jsonio.dump(out, jsonio.trace_data_to_json(td))
    print(f"wrote {out}: k_max={td.k_max}, orders z<={cfg.orders[1]} "
          f"h<={cfg.orders[2]}")
    return 0


def cmd_recover(args):
    cfg = _config_from_args(args)
    td = jsonio.trace_data_from_json(jsonio.load(args.traces),
                                     cfg.float_precision)
    rep = recover_qbnf(td, args.n, tol=cfg.tol_residual,
                       cond_gate=cfg.tol_conditioning,
                       pole_tol=cfg.tol_pole)
    out = args.out or "bnf_recovered.json"
    jsonio.dump(out, jsonio.qbnf_to_json(rep.recovered))
    if args.report:
        jsonio.dump(args.report, jsonio.recovery_report_to_json(rep))
    print(jsonio.render_report_text(rep))
    if rep.failed:
        raise MathError(
            f"recovery self-check residual {rep.max_residual:.3e} exceeds "
            f"tolerance {cfg.tol_residual:.1e}"
        )
    print(f"wrote {out}")
    return 0


def cmd_roundtrip(args):
    cfg = _config_from_args(args)
    bnf = jsonio.qbnf_from_json(jsonio.load(args.bnf), cfg.float_precision)
    action, maslov = _load_action(args.action, bnf.field, cfg.orders[1])
    td = _forward_tracedata(bnf, action, maslov, cfg)
    rep = recover_qbnf(td, bnf.n, tol=cfg.tol_residual,
                       cond_gate=cfg.tol_conditioning, pole_tol=cfg.tol_pole)
    if args.report:
        jsonio.dump(args.report, jsonio.recovery_report_to_json(rep))
    print(jsonio.render_report_text(rep))
    if rep.failed:
        raise MathError("forward self-check failed")
    if bnf.field.exact:
        same = (rep.recovered.F == bnf.F
                and all(a == b for a, b in
                        zip(rep.recovered.mu_jets, bnf.mu_jets))
                and list(rep.recovered.blocks.exp_half) == list(bnf.blocks.exp_half))
    else:
        same = rep.recovered.close_to(bnf, cfg.tol_residual)
    if not same:
        raise MathError("round trip mismatch: recovered data differs from input")
    print("round trip ok: recovered data equals the input" +
          (" exactly" if bnf.field.exact else
           f" within {cfg.tol_residual:.1e}"))
    return 0


def cmd_classical_bnf(args):
    cfg = _config_from_args(args)
    tmap = jsonio.taylor_map_from_json(jsonio.load(args.map),
                                       cfg.float_precision)
    res = birkhoff_normal_form(tmap, args.degree,
                               small_denominator_tol=cfg.tol_resonance)
    print(f"blocks: {res.blocks!r}")
    print(f"smallest homological denominator: {res.conditioning:.6e}")
    print(f"normal form defect at truncation: {res.residual:.3e}")
    print("p coefficients (complexified actions iota_j = a_j b_j):")
    for m in sorted(res.p_complex):
        c = tmap.field.to_complex(res.p_complex[m])
        print(f"  iota^{m}: {c.real:+.12g} {c.imag:+.12g}i")
    if args.report:
        f = tmap.field
        jsonio.dump(args.report, {
            "blocks": jsonio.blocks_to_json(res.blocks),
            "p": [{"m": list(m), "re": f.format(c)[0], "im": f.format(c)[1]}
                  for m, c in sorted(res.p_complex.items())],
            "conditioning": res.conditioning,
            "residual": res.residual,
        })
    return 0


def cmd_classify(args):
    obj = jsonio.load(args.matrix)
    M = np.array(jsonio._need(obj, "matrix", list), dtype=float)
    blocks = classify_eigenvalues(M)
    print(f"n = {blocks.n}: n_e={blocks.n_e} n_rh={blocks.n_rh} "
          f"n_ch={blocks.n_ch}")
    for tag, mu in zip(blocks.tags, blocks.mu()):
        print(f"  {tag:>20s}: mu = {mu.real:+.12g} {mu.imag:+.12g}i")
    return 0


def _parse_exp_half(field, text):
    out = []
    for part in text.split(";"):
        bits = part.split(",")
        re = bits[0].strip()
        im = bits[1].strip() if len(bits) > 1 else "0"
        out.append(field.parse(re, im))
    return out


def cmd_oracle(args):
    field = field_from_name(args.backend or "rational", args.precision)
    if args.mu is not None:
        field = field_from_name(args.backend or "float", args.precision)
        mus = [complex(s) for s in args.mu.split(";")]
        ehm = [field.exp(m * 0.5) for m in mus]
    elif args.exp_half is not None:
        ehm = _parse_exp_half(field, args.exp_half)
    else:
        raise SchemaError("need --mu or --exp-half")
    if args.oracle_cmd == "lattice-sum":
        alpha = tuple(int(x) for x in args.alpha.split(",")) if args.alpha \
            else (0,) * len(ehm)
        if len(alpha) != len(ehm):
            raise SchemaError("alpha arity must match the exponent count")
        v = hypcalc.lattice_sum_oracle({alpha: field.one}, exp_half=ehm,
                                       k=args.k, truncation=args.truncation,
                                       field=field)
        print(_fmt_value(field, v))
    else:  # csch-derivative
        alpha = tuple(int(x) for x in args.alpha.split(",")) if args.alpha \
            else (0,) * len(ehm)
        if len(alpha) != len(ehm):
            raise SchemaError("alpha arity must match the exponent count")
        expr = hypcalc.apply_derivatives(
            hypcalc.csch_product(field, len(ehm), args.k), alpha)
        v = hypcalc.eval_csch(expr, exp_half=ehm, pole_tol=args.tol_pole)
        print(_fmt_value(field, v))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bnftrace",
        description="Semiclassical trace expansions from quantum Birkhoff "
                    "normal forms, and their inverse recovery.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("forward", help="QuantumBNF file -> TraceData file")
    p.add_argument("--bnf", required=True)
    p.add_argument("--action", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("recover", help="TraceData file -> QuantumBNF file")
    p.add_argument("--traces", required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("roundtrip",
                       help="forward then recover; exit 0 iff equal")
    p.add_argument("--bnf", required=True)
    p.add_argument("--action", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("classical-bnf",
                       help="Birkhoff normal form of a TaylorMap file")
    p.add_argument("--map", required=True)
    p.add_argument("--degree", type=int, default=2,
                   help="iota degree of the reported normal form")
    _add_common(p)
    p.set_defaults(func=cmd_classical_bnf)

    p = sub.add_parser("classify", help="classify a symplectic matrix")
    p.add_argument("--matrix", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="desk-check oracles")
    p.add_argument("oracle_cmd", choices=["lattice-sum", "csch-derivative"])
    p.add_argument("--mu", default=None,
                   help="exponents as complex literals 'a+bj;...'")
    p.add_argument("--exp-half", default=None, dest="exp_half",
                   help="exp(mu/2) values 're,im;re,im' (rationals allowed)")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--truncation", type=int, default=60)
    p.add_argument("--alpha", default=None,
                   help="derivative/monomial multi-index 'a1,a2,...'")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except MathError as exc:
        print(f"math error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
