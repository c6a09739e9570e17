"""Batch driver: gowers-lab <command> [--key value ...].

Every run writes <command>.csv (with a version/parameter header line),
manifest.json and <command>.dat into --out; --plot adds <command>.png.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import report
from .arith import GlobalParams, build_factor_table, load_global_params, primes_below, primorial
from .characters import char_gowers_norm, make_real_character
from .decomp import decomposition_to_csv, negligible_mass, vaughan_lambda, vaughan_mu, verify_decomposition
from .errors import GowersLabError, InvalidArgument, ResourceError
from .gowers import norm_group_fast, norm_interval
from .linsys import (ConvexBody, ap_region, ap_system, archimedean_volume, count_prime_aps,
                     count_weighted, load_system, prime_ap3_census, singular_series)
from .models import (GYWeightParams, cramer, dual_moment, euler_product_check, gy_majorant,
                     make_siegel_config, mobius_signal, mu_siegel, pointwise_constants,
                     von_mangoldt_signal, w_trick)
from .parallel import default_workers
from .signals import ArithSignal

COMMANDS = ("norm", "char-norm", "model-compare", "siegel", "linsys", "ap-count",
            "decomp-verify", "gy-moments")

EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_CHECK_FAILED = 1


class ParamError(InvalidArgument):
    def __init__(self, key: str, msg: str):
        super().__init__(f"--{key}: {msg}")
        self.key = key


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _real(text: str) -> float:
    """Accepts 1e5, 100000, 1/20."""
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _size(text: str) -> int:
    v = _real(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(v)


# --- commands ----------------------------------------------------------------------

def _signal_for(name: str, N: int, w: float, table) -> ArithSignal:
    if name == "mu":
        return mobius_signal(N, table)
    if name == "lambda":
        return von_mangoldt_signal(N, table)
    if name == "lambda_prime":
        return von_mangoldt_signal(N, table, primes_only=True)
    if name == "cramer":
        return cramer(w, N)
    if name == "ones":
        return ArithSignal.interval(np.ones(N), label="ones")
    raise ParamError("f", f"unknown function {name!r}")


def cmd_norm(a, ctx):
    N, k = a.N, a.k
    if N < 1:
        raise ParamError("N", "must be >= 1")
    if k < 1:
        raise ParamError("k", "must be >= 1")
    table = build_factor_table(max(N, 2))
    f = _signal_for(a.f, N, a.w, table)
    vals = f.values - 1.0 if a.subtract_one else f.values
    if a.domain == "interval":
        res = norm_interval(ArithSignal.interval(vals), k, workers=ctx["workers"])
    else:
        if k < 2:
            raise ParamError("k", "cyclic norms need k >= 2")
        res = norm_group_fast(ArithSignal.cyclic(vals), k, workers=ctx["workers"])
    label = a.f + ("-1" if a.subtract_one else "")
    rows = [{"function": label, "N": N, "k": k, "value": res.value, "raised": res.raised}]
    n = np.arange(1, min(N, 2000) + 1)
    return ["function", "N", "k", "value", "raised"], rows, {label: (n, vals[: len(n)])}, \
        ("n", label, f"{label} on [{N}]", False, ".")


def cmd_char_norm(a, ctx):
    qs = _int_list(a.q) if a.q else [int(p) for p in primes_below(a.q_max + 1)][1:]
    if not qs:
        raise ParamError("q", "no conductors selected")
    rows = []
    for q in qs:
        chi = make_real_character(q)
        v = char_gowers_norm(chi, a.k)
        prime = q > 2 and all(q % p for p in range(2, math.isqrt(q) + 1))
        rows.append({"q": q, "k": a.k, "value": v, "raised": v ** (2**a.k),
                     "gauss_u2": (q - 1) / q**2 if prime and a.k == 2 else float("nan"),
                     "weil_bound": 2**a.k / math.sqrt(q)})
    x = np.array([r["q"] for r in rows])
    series = {"raised norm": (x, np.array([r["raised"] for r in rows])),
              "2^k q^-1/2": (x, np.array([r["weil_bound"] for r in rows]))}
    return ["q", "k", "value", "raised", "gauss_u2", "weil_bound"], rows, series, \
        ("q", "||chi||^(2^k)", f"U^{a.k} norms of real characters", True, "o-")


def cmd_model_compare(a, ctx):
    N, z, k = a.N, a.z, a.k
    ws = _int_list(a.w)
    if any(w < 2 or w > z for w in ws):
        raise ParamError("w", f"every w must satisfy 2 <= w <= z={z}")
    base = cramer(z, N)
    rows = []
    for w in ws:
        diff = ArithSignal.interval(cramer(w, N).values - base.values)
        gap = norm_interval(diff, k, workers=ctx["workers"]).value
        W = primorial(w)
        tricked = w_trick(base, W, 1)
        dev = norm_interval(ArithSignal.interval(tricked.values - 1.0), k,
                            workers=ctx["workers"]).value if len(tricked) else float("nan")
        rows.append({"w": w, "W": W, "cramer_gap": gap, "wtrick_deviation": dev})
    x = np.array(ws)
    series = {"cramer gap": (x, np.array([r["cramer_gap"] for r in rows])),
              "W-trick deviation": (x, np.array([r["wtrick_deviation"] for r in rows]))}
    return ["w", "W", "cramer_gap", "wtrick_deviation"], rows, series, \
        ("w", f"U^{k}[N] norm", f"Cramer models, z={z}, N={N}", False, "o-")


def cmd_siegel(a, ctx):
    Q = a.Q if a.Q is not None else ctx["global"].get("Q")
    if Q is None:
        raise ParamError("Q", "required (or supply Q in --config)")
    cfg = make_siegel_config(a.q, a.beta, Q, sign=a.sign)
    chk = euler_product_check(cfg, a.q_induced or a.q, a.s, a.X)
    pc = pointwise_constants(a.N, cfg)
    (ctx["out"] / "siegel_config.txt").write_text(cfg.to_key_values())
    ctx["outputs"].append("siegel_config.txt")
    rows = [{"quantity": "alpha", "value": cfg.alpha},
            {"quantity": "l_prime", "value": cfg.l_prime},
            {"quantity": "euler_series", "value": chk.series},
            {"quantity": "euler_closed_form", "value": chk.closed_form},
            {"quantity": "euler_gap", "value": chk.gap},
            {"quantity": "euler_tail_bound", "value": chk.tail_bound}]
    rows += [{"quantity": f"pointwise_{k}", "value": v} for k, v in pc.items()]
    n = np.arange(1, min(a.N, 2000) + 1)
    return ["quantity", "value"], rows, {"mu_siegel": (n, mu_siegel(cfg, len(n)).values)}, \
        ("n", "mu_Siegel(n)", f"q={a.q}, beta={a.beta}, Q={Q}", False, ".")


def cmd_linsys(a, ctx):
    try:
        system, body = load_system(a.system)
    except OSError as exc:
        raise ParamError("system", str(exc)) from None
    N = a.N
    if body is None:
        body = ConvexBody.box([0] * system.d, [N] * system.d)
    if not system.constant_bound_ok(N):
        raise ParamError("N", "form constants exceed L*N")
    count = count_weighted(system, body, a.weight, z=a.z, budget=a.budget, workers=ctx["workers"])
    vol, err = archimedean_volume(system, body, samples=a.samples, seed=ctx["seed"])
    P0 = a.P0 if a.weight != "cramer" else int(math.ceil(a.z))
    ss = singular_series(system, P0)
    row = {"system-id": a.id or Path(a.system).stem, "N": N, "count": count,
           "prediction": vol * ss.value, "tail-bound": ss.tail_bound}
    row["ratio"] = count / row["prediction"] if row["prediction"] else float("nan")
    factors = np.array(ss.factors, dtype=np.float64).reshape(-1, 2)
    return ["system-id", "N", "count", "prediction", "ratio", "tail-bound"], [row], \
        {"beta_p": (factors[:, 0], factors[:, 1])}, ("p", "beta_p", "local factors", False, ".")


def cmd_ap_count(a, ctx):
    N, k = a.N, a.k
    if k < 2:
        raise ParamError("k", "must be >= 2")
    if N < 3:
        raise ParamError("N", "must be >= 3")
    sys_ = ap_system(k)
    if k == 3:
        c = prime_ap3_census(N, a.P0, workers=ctx["workers"])
        row = {"N": N, "k": k, "count": c.count, "prediction": c.prediction, "ratio": c.ratio,
               "tail": c.tail_bound, "series": c.series, "crude_prediction": c.crude_prediction,
               "weighted_ratio": c.weighted_ratio}
    else:
        count = count_prime_aps(N, k, workers=ctx["workers"])
        ss = singular_series(sys_, a.P0)
        vol, _ = archimedean_volume(sys_, ap_region(N, k))
        pred = ss.value * vol / math.log(N) ** k
        row = {"N": N, "k": k, "count": count, "prediction": pred,
               "ratio": count / pred if pred else float("nan"), "tail": ss.tail_bound,
               "series": ss.value, "crude_prediction": pred, "weighted_ratio": float("nan")}
    Ns = [N // 2**j for j in range(4, -1, -1) if N // 2**j >= 10]
    ratios = []
    for m in Ns:
        ratios.append(prime_ap3_census(m, a.P0).ratio if k == 3 else float("nan"))
    cols = ["N", "k", "count", "prediction", "ratio", "tail", "series", "crude_prediction",
            "weighted_ratio"]
    return cols, [row], {"count/prediction": (np.array(Ns), np.array(ratios))}, \
        ("N", "ratio", f"prime {k}-APs against prediction", False, "o-")


def cmd_decomp_verify(a, ctx):
    if a.N < 1:
        raise ParamError("N", "must be >= 1")
    dec = vaughan_lambda(a.N) if a.target == "lambda" else vaughan_mu(a.N)
    err = verify_decomposition(dec)
    tol = 1e-9 * math.log(max(a.N, 2)) if a.target == "lambda" else 1e-9
    rows = [{"target": a.target, "N": a.N, "cut1": dec.cut1, "cut2": dec.cut2, "max_error": err,
             "tolerance": tol, "ok": err <= tol, "negligible_mass": negligible_mass(dec)}]
    if a.export:
        decomposition_to_csv(dec, ctx["out"] / "decomposition.csv")
        ctx["outputs"].append("decomposition.csv")
    ctx["status"] = 0 if err <= tol else EXIT_CHECK_FAILED
    n = np.arange(1, min(a.N, 300) + 1)
    series = {c.name: (n, c.values[: len(n)]) for c in dec.components}
    return ["target", "N", "cut1", "cut2", "max_error", "tolerance", "ok", "negligible_mass"], \
        rows, series, ("n", "component value", f"Vaughan components of {a.target}", False, ".")


def cmd_gy_moments(a, ctx):
    g = ctx["global"]
    W = a.W if a.W is not None else g.get("W", 30)
    b = a.b if a.b is not None else g.get("b", 1)
    R = a.N ** a.R_exponent
    params = GYWeightParams(W=int(W), b=int(b), R=R)
    nu = gy_majorant(params, a.N)
    nu_M = gy_majorant(params, a.M)
    cyc = ArithSignal.cyclic(nu_M.values)
    rows = [{"quantity": "mean_nu", "value": float(np.mean(nu.values))},
            {"quantity": "R", "value": R}, {"quantity": "c_chi2", "value": params.c_chi2}]
    rows += [{"quantity": f"moment_{j}", "value": dual_moment(cyc, a.k, j)} for j in (0, 1, 2)]
    n = np.arange(1, min(a.N, 1000) + 1)
    return ["quantity", "value"], rows, {"nu": (n, nu.values[: len(n)])}, \
        ("n", "nu(n)", f"GY majorant, W={W}, R=N^{a.R_exponent:g}", False, ".")


HANDLERS = {"norm": cmd_norm, "char-norm": cmd_char_norm, "model-compare": cmd_model_compare,
            "siegel": cmd_siegel, "linsys": cmd_linsys, "ap-count": cmd_ap_count,
            "decomp-verify": cmd_decomp_verify, "gy-moments": cmd_gy_moments}


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $GOWERS_LAB_THREADS or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for quasi-Monte Carlo")
    common.add_argument("--config", default=None, help="key=value file with N, Q, w, z, W, b")
    common.add_argument("--plot", action="store_true", help="also render <command>.png")

    p = argparse.ArgumentParser(prog="gowers-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norm", parents=[common], help="Gowers norm of an arithmetic function")
    s.add_argument("--f", default="mu", choices=["mu", "lambda", "lambda_prime", "cramer", "ones"])
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--w", type=_real, default=None, help="Cramer sieve cutoff")
    s.add_argument("--domain", default="interval", choices=["interval", "cyclic"])
    s.add_argument("--subtract-one", action="store_true")

    s = sub.add_parser("char-norm", parents=[common], help="U^k norms of real characters")
    s.add_argument("--q", default=None, help="comma-separated conductors")
    s.add_argument("--q-max", type=int, default=97, help="all odd primes up to this bound")
    s.add_argument("--k", type=int, default=2)

    s = sub.add_parser("model-compare", parents=[common], help="Cramer stability and W-trick trends")
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--z", type=_real, default=None)
    s.add_argument("--w", default="5,10,20,50")
    s.add_argument("--k", type=int, default=2)

    s = sub.add_parser("siegel", parents=[common], help="synthetic Siegel configuration checks")
    s.add_argument("--q", type=int, default=5)
    s.add_argument("--beta", type=float, default=0.99)
    s.add_argument("--Q", type=_real, default=None)
    s.add_argument("--sign", type=int, default=None, choices=[-1, 1])
    s.add_argument("--q-induced", type=int, default=None)
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--X", type=_size, default=10**6)
    s.add_argument("--N", type=_size, default=None)

    s = sub.add_parser("linsys", parents=[common], help="weighted count of a linear system")
    s.add_argument("--system", required=True, help="file with 'psi' and 'hs' lines")
    s.add_argument("--id", default=None)
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--weight", default="lambda", choices=["lambda", "lambda_prime", "cramer"])
    s.add_argument("--z", type=_real, default=None)
    s.add_argument("--P0", type=_size, default=10**4)
    s.add_argument("--samples", type=_size, default=1 << 14)
    s.add_argument("--budget", type=_size, default=10**8)

    s = sub.add_parser("ap-count", parents=[common], help="prime k-AP census")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--P0", type=_size, default=10**4)

    s = sub.add_parser("decomp-verify", parents=[common], help="Vaughan decomposition check")
    s.add_argument("--target", default="lambda", choices=["lambda", "mu"])
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--export", action="store_true", help="write decomposition.csv")

    s = sub.add_parser("gy-moments", parents=[common], help="GY majorant mean and dual moments")
    s.add_argument("--N", type=_size, default=None)
    s.add_argument("--W", type=int, default=None)
    s.add_argument("--b", type=int, default=None)
    s.add_argument("--R-exponent", type=_real, default=1 / 20)
    s.add_argument("--M", type=_size, default=2048)
    s.add_argument("--k", type=int, default=2)
    return p


_DEFAULT_N = 10**5
_EXEC_KEYS = {"out", "workers", "plot", "config", "command"}


def _resolve(args, gp: GlobalParams | None) -> dict:
    """Fill N, z, w from the config where the command left them unset."""
    g = gp.as_dict() if gp is not None else {}
    if hasattr(args, "N") and args.N is None:
        args.N = int(g["N"]) if "N" in g else _DEFAULT_N
    if hasattr(args, "z") and args.z is None:
        args.z = g.get("z", 100.0 if args.command == "model-compare" else 20.0)
    if args.command == "norm" and args.w is None:
        args.w = g.get("w", 2.0)
    return g


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        gp = load_global_params(args.config) if args.config else None
    except (OSError, GowersLabError, ValueError) as exc:
        print(f"error: --config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    g = _resolve(args, gp)
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        print("error: --workers: must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    ctx = {"out": out, "workers": workers, "seed": args.seed, "global": g,
           "outputs": [], "status": 0}
    params = {k.replace("_", "-"): v for k, v in vars(args).items()
              if k not in _EXEC_KEYS and v is not None}
    params.update({f"global.{k}": v for k, v in g.items()})
    try:
        cols, rows, series, (xl, yl, title, logy, style) = HANDLERS[args.command](args, ctx)
    except ResourceError as exc:
        print(f"error: {exc} (lower N/k or raise the budget)", file=sys.stderr)
        return EXIT_RESOURCE
    except (GowersLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    name = args.command
    report.write_table(out / f"{name}.csv", cols, rows, name, params)
    first = next(iter(series.values()))
    report.write_series(out / f"{name}.dat", first[0], first[1], name, params)
    outputs = ctx["outputs"] + [f"{name}.csv", f"{name}.dat"]
    if args.plot:
        report.plot_series(out / f"{name}.png", series, xl, yl, title, logy=logy, style=style)
        outputs.append(f"{name}.png")
    report.write_manifest(out / "manifest.json", name, params, outputs)
    return ctx["status"]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
